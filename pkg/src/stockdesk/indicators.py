"""Technical and capital-flow indicators.

Every function is pure and works on plain sequences of floats. Outputs are
Python lists so results compare exactly and serialise without conversion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

from .marketdata.models import CapitalFlowRecord, DailyBar


class IndicatorError(ValueError):
    pass


class CrossDirection(str, enum.Enum):
    GOLDEN = "golden"
    DEATH = "death"


@dataclass(frozen=True)
class CrossEvent:
    index: int
    direction: CrossDirection
    date: date | None = None


@dataclass(frozen=True)
class PatternEvent:
    date: date
    kind: str
    key_level: float
    index: int


def _values(series: Sequence[float], name: str = "series") -> list[float]:
    out = [float(v) for v in series]
    for v in out:
        if not math.isfinite(v):
            raise IndicatorError(f"{name} contains non-finite value {v!r}")
    return out


def sma(series: Sequence[float], window: int) -> list[float]:
    """Simple moving average; element ``j`` covers ``series[j : j + window]``."""
    values = _values(series)
    if window < 1:
        raise IndicatorError("window must be >= 1")
    if not values:
        return []
    if window > len(values):
        raise IndicatorError(f"window {window} exceeds series length {len(values)}")
    # fsum per window: incremental running sums drift on long inputs
    return [math.fsum(values[i - window + 1 : i + 1]) / window for i in range(window - 1, len(values))]


def ema(series: Sequence[float], window: int) -> list[float]:
    """Exponential moving average seeded with the first value, alpha = 2/(window+1)."""
    values = _values(series)
    if window < 1:
        raise IndicatorError("window must be >= 1")
    if not values:
        return []
    alpha = 2.0 / (window + 1)
    out = [values[0]]
    for v in values[1:]:
        prev = out[-1]
        out.append(prev + alpha * (v - prev))
    return out


def moving_average(series: Sequence[float], window: int, kind: str = "simple") -> list[float]:
    if kind == "simple":
        return sma(series, window)
    if kind == "exponential":
        return ema(series, window)
    raise IndicatorError(f"unknown moving-average kind {kind!r}")


def _rsi_value(avg_gain: float, avg_loss: float) -> float:
    if avg_loss == 0.0:
        return 100.0 if avg_gain > 0.0 else 50.0
    if avg_gain == 0.0:
        return 0.0
    return 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)


def rsi(closes: Sequence[float], period: int = 14, smoothing: str = "wilder") -> list[float]:
    """Relative strength index.

    Returns ``len(closes) - period`` values; element ``j`` is the RSI at
    ``closes[j + period]``. ``smoothing="wilder"`` seeds with the simple mean
    of the first ``period`` gains/losses and then applies Wilder's recursive
    average; ``"simple"`` uses a plain rolling mean over each window. A flat
    window (no gains and no losses) reads 50.
    """
    values = _values(closes, "closes")
    if period < 1:
        raise IndicatorError("period must be >= 1")
    if len(values) < period + 1:
        raise IndicatorError(f"RSI({period}) needs at least {period + 1} closes, got {len(values)}")
    deltas = [b - a for a, b in zip(values, values[1:])]
    gains = [d if d > 0 else 0.0 for d in deltas]
    losses = [-d if d < 0 else 0.0 for d in deltas]

    if smoothing == "simple":
        return [
            _rsi_value(math.fsum(gains[i - period + 1 : i + 1]) / period,
                       math.fsum(losses[i - period + 1 : i + 1]) / period)
            for i in range(period - 1, len(deltas))
        ]
    if smoothing != "wilder":
        raise IndicatorError(f"unknown RSI smoothing {smoothing!r}")

    avg_gain = math.fsum(gains[:period]) / period
    avg_loss = math.fsum(losses[:period]) / period
    out = [_rsi_value(avg_gain, avg_loss)]
    for g, l in zip(gains[period:], losses[period:]):
        avg_gain = (avg_gain * (period - 1) + g) / period
        avg_loss = (avg_loss * (period - 1) + l) / period
        out.append(_rsi_value(avg_gain, avg_loss))
    return out


@dataclass(frozen=True)
class MACD:
    dif: list[float]
    dea: list[float]
    histogram: list[float]


def macd(closes: Sequence[float], fast: int = 12, slow: int = 26, signal: int = 9) -> MACD:
    values = _values(closes, "closes")
    if not (1 <= fast < slow):
        raise IndicatorError(f"need 1 <= fast < slow, got fast={fast} slow={slow}")
    if signal < 1:
        raise IndicatorError("signal must be >= 1")
    if len(values) < slow:
        raise IndicatorError(f"MACD needs at least {slow} closes, got {len(values)}")
    dif = [f - s for f, s in zip(ema(values, fast), ema(values, slow))]
    dea = ema(dif, signal)
    return MACD(dif=dif, dea=dea, histogram=[d - e for d, e in zip(dif, dea)])


def crosses(fast: Sequence[float], slow: Sequence[float],
            dates: Sequence[date] | None = None) -> list[CrossEvent]:
    """Points where ``fast`` moves strictly above (golden) or below (death) ``slow``.

    A touch followed by separation is reported at the separating index.
    """
    a, b = _values(fast, "fast"), _values(slow, "slow")
    if len(a) != len(b):
        raise IndicatorError(f"length mismatch: {len(a)} vs {len(b)}")
    if dates is not None and len(dates) != len(a):
        raise IndicatorError("dates must align with the series")
    events = []
    for i in range(1, len(a)):
        if a[i - 1] <= b[i - 1] and a[i] > b[i]:
            direction = CrossDirection.GOLDEN
        elif a[i - 1] >= b[i - 1] and a[i] < b[i]:
            direction = CrossDirection.DEATH
        else:
            continue
        events.append(CrossEvent(i, direction, dates[i] if dates is not None else None))
    return events


def rsi_crosses(closes: Sequence[float], dates: Sequence[date] | None = None,
                fast: int = 6, slow: int = 12, midline: float = 50.0) -> list[CrossEvent]:
    """RSI(fast)/RSI(slow) crosses, kept only on the matching side of ``midline``.

    Golden crosses count when both lines sit above the midline at the cross;
    death crosses when both sit below. Indices refer to ``closes``.
    """
    if fast >= slow:
        raise IndicatorError("fast RSI period must be shorter than slow")
    r_fast = rsi(closes, fast)[slow - fast:]
    r_slow = rsi(closes, slow)
    events = []
    for ev in crosses(r_fast, r_slow):
        i = ev.index
        if ev.direction is CrossDirection.GOLDEN and not (r_fast[i] > midline and r_slow[i] > midline):
            continue
        if ev.direction is CrossDirection.DEATH and not (r_fast[i] < midline and r_slow[i] < midline):
            continue
        pos = i + slow
        events.append(CrossEvent(pos, ev.direction, dates[pos] if dates is not None else None))
    return events


def detect_bullish_engulfing(bars: Sequence[DailyBar]) -> list[PatternEvent]:
    if len(bars) < 2:
        raise IndicatorError("engulfing detection needs at least 2 bars")
    events = []
    for i in range(1, len(bars)):
        prev, cur = bars[i - 1], bars[i]
        if (prev.close < prev.open and cur.close > cur.open
                and cur.open < prev.close and cur.close > prev.open):
            events.append(PatternEvent(cur.date, "bullish_engulfing", cur.low, i))
    return events


def ddx_cumulative(flows: Sequence[CapitalFlowRecord], window: int = 5) -> float:
    """Sum of ``ddx_daily`` over the trailing ``window`` records (ordered by date)."""
    if window < 1:
        raise IndicatorError("window must be >= 1")
    if len(flows) < window:
        raise IndicatorError(f"need {window} flow records, got {len(flows)}")
    trailing = sorted(flows, key=lambda r: r.date)[-window:]
    return math.fsum(r.ddx_daily for r in trailing)


def ddx_daily(large_buy_volume: float, large_sell_volume: float, float_shares: float) -> float:
    """Reference large-order net flow used to generate DDX fixtures."""
    if float_shares <= 0:
        raise IndicatorError("float_shares must be > 0")
    return 100.0 * (large_buy_volume - large_sell_volume) / float_shares


def turnover_rate(volume: float, float_shares: float) -> float:
    if float_shares <= 0:
        raise IndicatorError("float_shares must be > 0")
    if volume < 0:
        raise IndicatorError("volume must be >= 0")
    return 100.0 * volume / float_shares


def window_amplitude_range(bars: Sequence[DailyBar], n: int = 10) -> tuple[float, float]:
    """Amplitude and range (percent) of the last ``n`` bars against the close before them."""
    if n < 1:
        raise IndicatorError("n must be >= 1")
    if len(bars) < n + 1:
        raise IndicatorError(f"need {n + 1} bars, got {len(bars)}")
    ref = bars[-n - 1].close
    window = bars[-n:]
    amplitude = 100.0 * (max(b.high for b in window) - min(b.low for b in window)) / ref
    change = 100.0 * (window[-1].close - ref) / ref
    return amplitude, change
