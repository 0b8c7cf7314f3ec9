from __future__ import annotations

import dataclasses
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stockdesk import fixtures
from stockdesk import tools as T
from stockdesk.marketdata import MarketSnapshot
from stockdesk.tools import Finding, Signal, ToolKind


@pytest.fixture(scope="module")
def tf_snapshot(reference_store):
    return reference_store.snapshot(fixtures.REFERENCE_TICKER, fixtures.REFERENCE_DATE)


@pytest.fixture(scope="module")
def tf_reports(tf_snapshot):
    return {k: T.run_tool(k, tf_snapshot) for k in ToolKind}


def test_technical_on_reference(tf_reports):
    rep = tf_reports[ToolKind.TECHNICAL]
    assert rep.get(T.L_ENGULF_KEY) == 2.68
    assert rep.signal is Signal.BULLISH
    assert "2.68" in rep.narrative


def test_capital_flow_on_reference(tf_reports):
    rep = tf_reports[ToolKind.CAPITAL_FLOW]
    assert rep.get(T.L_DDX) == pytest.approx(-14.865, abs=1e-9)
    assert "-14.865" in rep.narrative
    assert rep.signal is Signal.BEARISH
    assert rep.get(T.L_CONTROL) == "moderate"


def test_fundamental_on_reference(tf_reports):
    rep = tf_reports[ToolKind.FUNDAMENTAL]
    assert rep.signal is Signal.BEARISH
    assert rep.get(T.L_FEE_SHARE) == pytest.approx(131.22)
    assert "131.22%" in rep.narrative


def test_volume_price_on_reference(tf_reports):
    rep = tf_reports[ToolKind.VOLUME_PRICE]
    assert rep.get(T.L_CLOSE) == 4.48
    assert "17.65%" in rep.narrative
    assert "102nd in the market and 1st in the sector" in rep.narrative
    assert "1580.86" in rep.narrative


def test_news_on_reference(tf_reports):
    rep = tf_reports[ToolKind.NEWS]
    assert rep.get(T.L_NEWS_COUNT) == 3
    assert rep.get(T.L_CATALYST).startswith("Heavy market-wide trading")


def test_narratives_cite_only_findings(tf_reports):
    for rep in tf_reports.values():
        assert T.numeric_tokens(rep.narrative) <= T.finding_tokens([rep]), rep.kind
        numeric = sum(f.is_numeric for f in rep.findings)
        assert 1 <= rep.data_citations <= numeric


def test_json_field_order_and_round_trip(tf_reports):
    rep = tf_reports[ToolKind.TECHNICAL]
    obj = json.loads(rep.to_json())
    assert list(obj) == ["kind", "findings", "narrative", "signal", "data_citations"]
    assert T.ToolReport.from_dict(obj) == rep


def test_determinism_and_purity(reference_store, tf_snapshot, tf_reports):
    again = reference_store.snapshot(fixtures.REFERENCE_TICKER, fixtures.REFERENCE_DATE)
    for kind in ToolKind:
        assert T.run_tool(kind, again).to_json() == tf_reports[kind].to_json()
    # fields a tool does not read can change without touching its output
    stripped = dataclasses.replace(tf_snapshot, news=(), peers=())
    assert T.run_tool(ToolKind.CAPITAL_FLOW, stripped) == tf_reports[ToolKind.CAPITAL_FLOW]
    assert T.run_tool(ToolKind.FUNDAMENTAL, dataclasses.replace(tf_snapshot, flows=())) == \
        tf_reports[ToolKind.FUNDAMENTAL]


def test_missing_sections_raise_data_unavailable(tf_snapshot):
    cases = {ToolKind.CAPITAL_FLOW: dict(flows=()), ToolKind.FUNDAMENTAL: dict(fundamentals_history=()),
             ToolKind.NEWS: dict(news=())}
    for kind, change in cases.items():
        with pytest.raises(T.DataUnavailableError) as err:
            T.run_tool(kind, dataclasses.replace(tf_snapshot, **change))
        assert err.value.kind is kind


def test_annotations_pass_through(tf_snapshot):
    rep = T.run_tool(ToolKind.TECHNICAL, tf_snapshot, annotations=[("Platform score", "strong")])
    assert rep.get("Platform score") == "strong"
    assert rep.narrative.endswith("Platform score: strong.")


# -- signal rule table -----------------------------------------------------

def technical(**kw):
    base = {T.L_CLOSE: 10.0, T.L_RSI14: 60.0}
    base.update(kw)
    return [Finding(k, v) for k, v in base.items()]


def test_golden_cross_without_overbought_is_bullish():
    f = technical(**{T.L_RSI_CROSS: "golden", T.L_RSI_CROSS_AGE: 2})
    assert T.classify_signal("technical", f) is Signal.BULLISH


def test_overbought_blocks_bullish():
    f = technical(**{T.L_RSI_CROSS: "golden", T.L_RSI_CROSS_AGE: 2, T.L_RSI14: 80.54})
    assert T.classify_signal("technical", f) is Signal.NEUTRAL


def test_stale_cross_is_ignored():
    f = technical(**{T.L_MACD_CROSS: "golden", T.L_MACD_CROSS_AGE: 6})
    assert T.classify_signal("technical", f) is Signal.NEUTRAL


def test_death_cross_and_close_below_all_is_bearish():
    f = technical(**{T.L_MACD_CROSS: "death", T.L_MACD_CROSS_AGE: 1, T.L_MA_ALIGNMENT: "bearish",
                     T.L_MA_POSITION: "below all"})
    assert T.classify_signal("technical", f) is Signal.BEARISH


def test_engulfing_support_counts_only_above_key_level():
    held = technical(**{T.L_ENGULF_KEY: 2.68, T.L_ENGULF_HELD: "yes", T.L_CLOSE: 4.48})
    broken = technical(**{T.L_ENGULF_KEY: 2.68, T.L_ENGULF_HELD: "no", T.L_CLOSE: 2.5})
    assert T.classify_signal("technical", held) is Signal.BULLISH
    assert T.classify_signal("technical", broken) is Signal.NEUTRAL


def test_empty_findings_are_neutral():
    for kind in ToolKind:
        assert T.classify_signal(kind, []) is Signal.NEUTRAL


def test_fundamental_rules():
    weak = [Finding(T.L_REVENUE_YOY, -37.86), Finding(T.L_PROFIT_YOY, -146.21), Finding(T.L_CURRENT_DIR, "falling")]
    strong = [Finding(T.L_REVENUE_YOY, 3.0), Finding(T.L_PROFIT_YOY, 1.0), Finding(T.L_CURRENT_DIR, "rising")]
    mixed = [Finding(T.L_REVENUE_YOY, -3.0), Finding(T.L_PROFIT_YOY, 1.0), Finding(T.L_CURRENT_DIR, "rising")]
    assert T.classify_signal("fundamental", weak) is Signal.BEARISH
    assert T.classify_signal("fundamental", strong) is Signal.BULLISH
    assert T.classify_signal("fundamental", mixed) is Signal.NEUTRAL


@given(st.floats(-30, 30, allow_nan=False))
def test_capital_flow_thresholds(ddx):
    sig = T.classify_signal("capital_flow", [Finding(T.L_DDX, ddx)])
    expected = Signal.BEARISH if ddx < -5 else Signal.BULLISH if ddx > 5 else Signal.NEUTRAL
    assert sig is expected


@given(st.floats(-20, 20, allow_nan=False))
def test_extreme_moves_only(pct):
    for kind in ("volume_price", "news"):
        sig = T.classify_signal(kind, [Finding(T.L_PCT, pct)])
        expected = Signal.BULLISH if pct >= 9.5 else Signal.BEARISH if pct <= -9.5 else Signal.NEUTRAL
        assert sig is expected


def test_control_levels():
    assert [T.control_level(x) for x in (4.99, 5.0, 9.84, 15.0, 15.01)] == \
        ["low", "moderate", "moderate", "moderate", "high"]


# -- number rendering ------------------------------------------------------

@pytest.mark.parametrize("value,text", [
    (4.48, "4.48"), (-14.865, "-14.865"), (17.65, "17.65"), (2.68, "2.68"), (6.97, "6.97"),
    (75.187, "75.187"), (3, "3"), (0.0, "0.00"), (-0.0001, "0.00"), (152.947, "152.947"),
])
def test_format_number(value, text):
    assert T.format_number(value) == text


@settings(max_examples=200)
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_format_number_round_trips_to_three_places(x):
    assert float(T.format_number(x)) == pytest.approx(round(x, 3), abs=1e-9)


def test_ordinals():
    assert [T.ordinal(n) for n in (1, 2, 3, 4, 11, 12, 13, 21, 102, 111, 896)] == \
        ["1st", "2nd", "3rd", "4th", "11th", "12th", "13th", "21st", "102nd", "111th", "896th"]


def test_snapshot_type_is_value_object(tf_snapshot):
    assert isinstance(tf_snapshot, MarketSnapshot)
    with pytest.raises(dataclasses.FrozenInstanceError):
        tf_snapshot.bars = ()
