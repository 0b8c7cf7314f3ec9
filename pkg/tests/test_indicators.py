from __future__ import annotations

import math
import random
from datetime import date, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stockdesk import indicators as ind
from stockdesk.marketdata import CapitalFlowRecord, DailyBar

from oracles import (
    cross_oracle,
    ddx_oracle,
    ema_oracle,
    engulfing_oracle,
    macd_cross_oracle,
    simple_rsi_oracle,
    sma_oracle,
    wilder_rsi_oracle,
)

START = date(2024, 1, 1)


def random_walk(rng: random.Random, n: int) -> list[float]:
    price = rng.uniform(2, 100)
    out = []
    for _ in range(n):
        price = max(0.5, price * (1 + rng.gauss(0, 0.03)))
        out.append(round(price, 2))
    return out


def random_bars(rng: random.Random, n: int) -> list[DailyBar]:
    bars = []
    for i, close in enumerate(random_walk(rng, n)):
        open_ = round(max(0.5, close * (1 + rng.gauss(0, 0.02))), 2)
        high = max(open_, close) + round(rng.uniform(0, 0.3), 2)
        low = max(0.01, min(open_, close) - round(rng.uniform(0, 0.3), 2))
        bars.append(DailyBar(START + timedelta(days=i), open_, high, low, close, 1000.0, 1000.0 * close))
    return bars


def rel_close(a, b, rel=1e-9):
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert math.isclose(x, y, rel_tol=rel, abs_tol=1e-12), (x, y)


@pytest.fixture(scope="module")
def series():
    rng = random.Random(20241016)
    return [random_walk(rng, rng.randint(40, 90)) for _ in range(200)]


# -- oracle equivalence ----------------------------------------------------

def test_sma_matches_oracle(series):
    for xs in series:
        for w in (5, 10, 20):
            rel_close(ind.sma(xs, w), sma_oracle(xs, w))


def test_ema_matches_closed_form(series):
    for xs in series[:50]:
        rel_close(ind.ema(xs, 12), ema_oracle(xs, 12))


def test_wilder_rsi_matches_weighted_oracle(series):
    for xs in series:
        rel_close(ind.rsi(xs, 14), wilder_rsi_oracle(xs, 14))


def test_simple_rsi_matches_window_oracle(series):
    for xs in series[:50]:
        rel_close(ind.rsi(xs, 14, smoothing="simple"), simple_rsi_oracle(xs, 14))


def test_macd_cross_events_match_histogram_scan(series):
    for xs in series:
        m = ind.macd(xs)
        got = [(e.index, e.direction.value) for e in ind.crosses(m.dif, m.dea)]
        assert got == macd_cross_oracle(xs)


def test_engulfing_matches_pair_scan():
    rng = random.Random(7)
    for _ in range(200):
        bars = random_bars(rng, rng.randint(2, 60))
        got = [(e.index, e.date, e.key_level) for e in ind.detect_bullish_engulfing(bars)]
        assert got == engulfing_oracle(bars)


def test_ddx_cumulative_matches_oracle():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(5, 30)
        flows = [CapitalFlowRecord(START + timedelta(days=i), round(rng.uniform(-5, 5), 3), 1e9, 0.0, 5.0, 0.0)
                 for i in range(n)]
        rng.shuffle(flows)
        assert math.isclose(ind.ddx_cumulative(flows), ddx_oracle(flows), rel_tol=1e-9, abs_tol=1e-12)


# -- worked examples -------------------------------------------------------

def test_rsi_monotone_extremes():
    up = [10 + i for i in range(40)]
    assert ind.rsi(up) == [100.0] * (len(up) - 14)
    assert ind.rsi(up[::-1]) == [0.0] * (len(up) - 14)


def test_rsi_alternating_settles_on_two_point_cycle():
    # steady state of Wilder's recurrence: up-step RSI = 100/(1 + 13/14) = 1400/27
    xs = [100 + (i % 2) for i in range(400)]
    values = ind.rsi(xs, 14)
    up_value, down_value = 1400 / 27, 1300 / 27
    tail = values[-20:]
    assert all(min(abs(v - up_value), abs(v - down_value)) < 1e-9 for v in tail)
    assert {round(v, 2) for v in tail} == {51.85, 48.15}


def test_flat_window_reads_fifty():
    assert ind.rsi([5.0] * 20) == [50.0] * 6


def test_sma_window_errors():
    with pytest.raises(ind.IndicatorError):
        ind.sma([1, 2, 3], 4)
    with pytest.raises(ind.IndicatorError):
        ind.sma([1, 2, 3], 0)
    with pytest.raises(ind.IndicatorError):
        ind.sma([1, float("nan"), 3], 2)
    assert ind.sma([], 3) == []


def test_rsi_needs_period_plus_one():
    with pytest.raises(ind.IndicatorError):
        ind.rsi([1.0] * 14, 14)


def test_macd_needs_slow_window():
    with pytest.raises(ind.IndicatorError):
        ind.macd([1.0] * 25)
    with pytest.raises(ind.IndicatorError):
        ind.macd([1.0] * 40, fast=26, slow=12)


def test_cross_touch_then_separate():
    events = ind.crosses([1, 2, 3, 2, 1], [2, 2, 2, 2, 2])
    assert [(e.index, e.direction.value) for e in events] == [(2, "golden"), (4, "death")]


def test_rsi_crosses_respect_midline():
    rng = random.Random(3)
    for _ in range(50):
        xs = random_walk(rng, 80)
        fast, slow = ind.rsi(xs, 6), ind.rsi(xs, 12)
        for ev in ind.rsi_crosses(xs):
            f, s = fast[ev.index - 6], slow[ev.index - 12]
            if ev.direction is ind.CrossDirection.GOLDEN:
                assert f > 50 and s > 50 and f > s
            else:
                assert f < 50 and s < 50 and f < s


def test_engulfing_key_level_is_engulfing_low():
    d0, d1 = date(2024, 9, 12), date(2024, 9, 13)
    bars = [DailyBar(d0, 3.0, 3.05, 2.85, 2.9, 1, 1), DailyBar(d1, 2.8, 3.2, 2.68, 3.15, 1, 1)]
    (ev,) = ind.detect_bullish_engulfing(bars)
    assert (ev.date, ev.key_level, ev.kind) == (d1, 2.68, "bullish_engulfing")


def test_turnover_and_ddx_daily():
    assert ind.turnover_rate(152_947_000, 866_556_000) == pytest.approx(17.65, abs=5e-3)
    assert ind.ddx_daily(3000, 1000, 100_000) == pytest.approx(2.0)
    with pytest.raises(ind.IndicatorError):
        ind.turnover_rate(1, 0)


# -- properties ------------------------------------------------------------

prices = st.lists(st.floats(0.5, 500, allow_nan=False, allow_infinity=False), min_size=16, max_size=80)


@given(prices)
def test_rsi_bounded(xs):
    assert all(0.0 <= v <= 100.0 for v in ind.rsi(xs, 14))


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=14, max_size=14))
def test_simple_rsi_reflection(deltas):
    # one full window: negating every move mirrors the reading around 50
    up, down = [100.0], [100.0]
    for d in deltas:
        up.append(up[-1] + d)
        down.append(down[-1] - d)
    (a,), (b,) = ind.rsi(up, 14, "simple"), ind.rsi(down, 14, "simple")
    if any(deltas):
        assert a + b == pytest.approx(100.0, abs=1e-9)


@given(prices)
@settings(max_examples=60)
def test_histogram_sign_changes_are_crosses(xs):
    if len(xs) < 26:
        return
    m = ind.macd(xs)
    assert [(e.index, e.direction.value) for e in ind.crosses(m.dif, m.dea)] == \
        cross_oracle(m.histogram, [0.0] * len(m.histogram))


@given(prices, st.integers(1, 15))
def test_sma_bounded_by_window(xs, w):
    if w > len(xs):
        return
    for j, v in enumerate(ind.sma(xs, w)):
        window = xs[j:j + w]
        assert min(window) - 1e-9 <= v <= max(window) + 1e-9


@given(prices)
def test_ema_stays_within_range(xs):
    lo, hi = min(xs), max(xs)
    assert all(lo - 1e-9 <= v <= hi + 1e-9 for v in ind.ema(xs, 12))
