"""The five quantitative analysis tools.

Each tool reads one :class:`MarketSnapshot`, produces an ordered list of
findings, renders a narrative paragraph exclusively from those findings and
assigns a bullish/bearish/neutral signal with :func:`classify_signal`.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from . import indicators as ind
from .marketdata.models import MarketSnapshot

CURRENCY = "yuan"

Value = Union[int, float, str]


class ToolKind(str, enum.Enum):
    VOLUME_PRICE = "volume_price"
    TECHNICAL = "technical"
    CAPITAL_FLOW = "capital_flow"
    FUNDAMENTAL = "fundamental"
    NEWS = "news"


CANONICAL_ORDER = tuple(ToolKind)


class Signal(str, enum.Enum):
    BULLISH = "bullish"
    BEARISH = "bearish"
    NEUTRAL = "neutral"


class DataUnavailableError(LookupError):
    def __init__(self, kind: ToolKind, message: str):
        super().__init__(f"{kind.value}: {message}")
        self.kind = kind


@dataclass(frozen=True)
class SignalRules:
    """Thresholds behind :func:`classify_signal` and the derived flags."""

    cross_lookback: int = 5
    overbought_rsi: float = 80.0
    ddx_bearish: float = -5.0
    ddx_bullish: float = 5.0
    extreme_move_pct: float = 9.5
    unusual_move_pct: float = 5.0
    unusual_turnover_pct: float = 10.0
    control_moderate_pct: float = 5.0
    control_high_pct: float = 15.0
    fee_dependence_pct: float = 50.0


DEFAULT_RULES = SignalRules()


@dataclass(frozen=True)
class Finding:
    label: str
    value: Value
    unit: str = ""

    @property
    def is_numeric(self) -> bool:
        return isinstance(self.value, (int, float)) and not isinstance(self.value, bool)

    def to_dict(self) -> dict:
        return {"label": self.label, "value": self.value, "unit": self.unit}


@dataclass(frozen=True)
class ToolReport:
    kind: ToolKind
    findings: tuple[Finding, ...]
    narrative: str
    signal: Signal
    data_citations: int

    def get(self, label: str, default=None):
        for f in self.findings:
            if f.label == label:
                return f.value
        return default

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "findings": [f.to_dict() for f in self.findings],
            "narrative": self.narrative,
            "signal": self.signal.value,
            "data_citations": self.data_citations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, obj: dict) -> "ToolReport":
        return cls(
            kind=ToolKind(obj["kind"]),
            findings=tuple(Finding(f["label"], f["value"], f.get("unit", "")) for f in obj["findings"]),
            narrative=obj["narrative"],
            signal=Signal(obj["signal"]),
            data_citations=int(obj["data_citations"]),
        )


# -- number rendering ------------------------------------------------------

def format_number(value: int | float) -> str:
    """Render a finding value: integers as-is, floats with 2 or 3 decimals."""
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    text = f"{float(value):.3f}"
    if text.endswith("0"):
        text = text[:-1]
    if text in ("-0.00",):
        text = "0.00"
    return text


def ordinal(n: int) -> str:
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def scaled(amount: float, unit: str) -> tuple[float, str]:
    """Express a large quantity in billions/millions, rounded to 3 decimals."""
    magnitude = abs(amount)
    if magnitude >= 1e9:
        return round(amount / 1e9, 3), f"billion {unit}"
    if magnitude >= 1e6:
        return round(amount / 1e6, 3), f"million {unit}"
    return round(amount, 3), unit


def _pct(value: float) -> float:
    return round(value, 2)


_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")


def numeric_tokens(text: str) -> set[str]:
    """Unsigned numeric literals in ``text``."""
    return set(_NUMBER_RE.findall(text))


def finding_tokens(reports: Sequence[ToolReport]) -> set[str]:
    """Numeric literals that the findings of ``reports`` may legitimately produce."""
    tokens: set[str] = set()
    for report in reports:
        for f in report.findings:
            tokens |= numeric_tokens(f.label)
            tokens |= numeric_tokens(f.unit)
            if f.is_numeric:
                tokens |= numeric_tokens(format_number(f.value))
            else:
                tokens |= numeric_tokens(str(f.value))
    return tokens


class _Narrator:
    """Renders findings into text and remembers which numeric ones it cited."""

    def __init__(self, findings: Sequence[Finding]):
        self._by_label = {f.label: f for f in findings}
        self.cited: set[str] = set()

    def has(self, label: str) -> bool:
        return label in self._by_label

    def raw(self, label: str):
        return self._by_label[label].value

    def num(self, label: str, *, absolute: bool = False, with_unit: bool = True, as_ordinal: bool = False) -> str:
        f = self._by_label[label]
        self.cited.add(label)
        value = f.value
        if absolute and isinstance(value, (int, float)):
            value = abs(value)
        if as_ordinal:
            return ordinal(int(value))
        text = format_number(value)
        if not with_unit or not f.unit:
            return text
        return f"{text}{f.unit}" if f.unit == "%" else f"{text} {f.unit}"

    def text(self, label: str) -> str:
        return str(self._by_label[label].value)

    def move(self, label: str) -> str:
        """``up 1.20%`` / ``down 0.36%`` / ``flat at 0.00%``."""
        value = self.raw(label)
        amount = self.num(label, absolute=True)
        if value > 0:
            return f"up {amount}"
        if value < 0:
            return f"down {amount}"
        return f"flat at {amount}"


# -- tools -----------------------------------------------------------------

L_DATE = "Trading date"
L_CLOSE = "Latest close"
L_PCT = "Price change"
L_PCT_RANK_SECTOR = "Price change rank in sector"
L_PCT_RANK_MARKET = "Price change rank in market"
L_TURNOVER = "Turnover rate"
L_TURNOVER_RANK_MARKET = "Turnover rate rank in market"
L_TURNOVER_RANK_SECTOR = "Turnover rate rank in sector"
L_VOLUME = "Trading volume"
L_VALUE = "Trading value"
L_SECTOR = "Sector"
L_SECTOR_INDEX = "Sector index"
L_SECTOR_CHANGE = "Sector index change"
L_SECTOR_HIGH = "Sector index high"
L_SECTOR_LOW = "Sector index low"
L_SECTOR_VALUE = "Sector trading value"
L_MARKET_INDEX = "Market index"
L_MARKET_CHANGE = "Market index change"
L_UNUSUAL = "Unusual movement"

L_MA = {5: "MA5", 10: "MA10", 20: "MA20"}
L_MA_ALIGNMENT = "Moving-average alignment"
L_MA_POSITION = "Close versus moving averages"
L_RSI14 = "RSI(14)"
L_RSI6 = "RSI(6)"
L_RSI12 = "RSI(12)"
L_OVERBOUGHT = "Overbought"
L_RSI_CROSS = "Latest RSI cross"
L_RSI_CROSS_DATE = "RSI cross date"
L_RSI_CROSS_AGE = "Sessions since RSI cross"
L_MACD_DIF = "MACD DIF"
L_MACD_DEA = "MACD DEA"
L_MACD_CROSS = "Latest MACD cross"
L_MACD_CROSS_DATE = "MACD cross date"
L_MACD_CROSS_AGE = "Sessions since MACD cross"
L_MACD_ZERO = "MACD cross above zero axis"
L_ENGULF_DATE = "Bullish engulfing date"
L_ENGULF_KEY = "Engulfing key level"
L_ENGULF_HELD = "Engulfing support held"
L_AMPLITUDE = "10-day amplitude"
L_RANGE = "10-day range"

L_DDX = "5-day cumulative DDX"
L_MARGIN_BALANCE = "Margin balance"
L_MARGIN_INFLOW = "5-day margin net inflow"
L_MARGIN_TREND = "Margin financing trend"
L_HOLDING = "Institutional holding"
L_HOLDING_QOQ = "Institutional holding QoQ change"
L_CONTROL = "Control level"

L_PERIOD = "Report period"
L_REVENUE = "Revenue"
L_REVENUE_YOY = "Revenue YoY"
L_PROFIT = "Net profit"
L_PROFIT_YOY = "Net profit YoY"
L_NONREC = "Non-recurring net profit"
L_EPS = "EPS"
L_ROE = "ROE"
L_NET_MARGIN = "Net margin"
L_GROSS_MARGIN = "Gross margin"
L_CURRENT = "Current ratio"
L_CURRENT_DIR = "Current ratio direction"
L_QUICK = "Quick ratio"
L_QUICK_DIR = "Quick ratio direction"
L_DEBT = "Debt-to-asset ratio"
L_DEBT_DIR = "Debt-to-asset direction"
L_PE = "P/E"
L_PB = "P/B"
L_PE_RANK = "P/E rank in sector"
L_FEE_SHARE = "Fee and commission share of revenue"
L_REVENUE_MIX = "Revenue mix"

L_NEWS_COUNT = "Recent news items"
L_CATALYST = "Catalyst"


def _news_label(i: int) -> str:
    return f"News item {i}"


def _news_date_label(i: int) -> str:
    return f"News item {i} date"


def _volume_price(snap: MarketSnapshot, rules: SignalRules) -> tuple[list[Finding], Callable]:
    if not snap.bars:
        raise DataUnavailableError(ToolKind.VOLUME_PRICE, "no bars in snapshot")
    inst = snap.instrument
    last = snap.bars[-1]
    findings = [Finding(L_DATE, last.date.isoformat()), Finding(L_CLOSE, round(last.close, 3), CURRENCY)]
    pct = None
    if len(snap.bars) >= 2:
        prev = snap.bars[-2].close
        pct = 100.0 * (last.close - prev) / prev
        findings.append(Finding(L_PCT, _pct(pct), "%"))
        for scope, label in (("sector", L_PCT_RANK_SECTOR), ("market", L_PCT_RANK_MARKET)):
            pos = snap.rank("pct_change", scope)
            if pos is not None:
                findings.append(Finding(label, pos.rank))
    turnover = ind.turnover_rate(last.volume, inst.float_shares)
    findings.append(Finding(L_TURNOVER, _pct(turnover), "%"))
    for scope, label in (("market", L_TURNOVER_RANK_MARKET), ("sector", L_TURNOVER_RANK_SECTOR)):
        pos = snap.rank("turnover_rate", scope)
        if pos is not None:
            findings.append(Finding(label, pos.rank))
    findings.append(Finding(L_VOLUME, *scaled(last.volume, "shares")))
    findings.append(Finding(L_VALUE, *scaled(last.turnover_value, CURRENCY)))
    if snap.sector is not None:
        sec = snap.sector
        findings += [
            Finding(L_SECTOR, sec.sector_id),
            Finding(L_SECTOR_INDEX, round(sec.index_level, 2), "points"),
            Finding(L_SECTOR_CHANGE, _pct(sec.pct_change), "%"),
            Finding(L_SECTOR_HIGH, round(sec.day_high, 2), "points"),
            Finding(L_SECTOR_LOW, round(sec.day_low, 2), "points"),
            Finding(L_SECTOR_VALUE, *scaled(sec.total_trading_value, CURRENCY)),
        ]
    if snap.market_index is not None:
        mkt = snap.market_index
        findings += [
            Finding(L_MARKET_INDEX, round(mkt.index_level, 2), "points"),
            Finding(L_MARKET_CHANGE, _pct(mkt.pct_change), "%"),
        ]
    unusual = (pct is not None and abs(pct) >= rules.unusual_move_pct) or turnover >= rules.unusual_turnover_pct
    findings.append(Finding(L_UNUSUAL, "yes" if unusual else "no"))

    def render(n: _Narrator) -> str:
        parts = []
        s = f"{inst.name} closed at {n.num(L_CLOSE)} on {n.text(L_DATE)}"
        if n.has(L_PCT):
            s += f", {n.move(L_PCT)}"
            ranks = []
            if n.has(L_PCT_RANK_SECTOR):
                ranks.append(f"{n.num(L_PCT_RANK_SECTOR, as_ordinal=True)} in its sector")
            if n.has(L_PCT_RANK_MARKET):
                ranks.append(f"{n.num(L_PCT_RANK_MARKET, as_ordinal=True)} in the market")
            if ranks:
                s += ", ranking " + " and ".join(ranks) + " by price change"
        parts.append(s + ".")
        if n.has(L_SECTOR_INDEX):
            parts.append(
                f"The {n.text(L_SECTOR)} sector index stands at {n.num(L_SECTOR_INDEX)}, "
                f"{n.move(L_SECTOR_CHANGE)}, trading between {n.num(L_SECTOR_LOW)} and "
                f"{n.num(L_SECTOR_HIGH)} with a sector trading value of {n.num(L_SECTOR_VALUE)}."
            )
        if n.has(L_MARKET_INDEX):
            parts.append(f"The market index is at {n.num(L_MARKET_INDEX)}, {n.move(L_MARKET_CHANGE)}.")
        s = f"The turnover rate reached {n.num(L_TURNOVER)}"
        ranks = []
        if n.has(L_TURNOVER_RANK_MARKET):
            ranks.append(f"{n.num(L_TURNOVER_RANK_MARKET, as_ordinal=True)} in the market")
        if n.has(L_TURNOVER_RANK_SECTOR):
            ranks.append(f"{n.num(L_TURNOVER_RANK_SECTOR, as_ordinal=True)} in the sector")
        if ranks:
            s += " (ranking " + " and ".join(ranks) + ")"
        s += f", with trading volume of {n.num(L_VOLUME)} and trading value of {n.num(L_VALUE)}."
        parts.append(s)
        if n.raw(L_UNUSUAL) == "yes":
            parts.append("Trading activity is unusually elevated.")
        return " ".join(parts)

    return findings, render


def _cross_findings(events, dates_len: int, label: str, date_label: str, age_label: str) -> list[Finding]:
    if not events:
        return []
    ev = events[-1]
    return [
        Finding(label, ev.direction.value),
        Finding(date_label, ev.date.isoformat()),
        Finding(age_label, dates_len - 1 - ev.index),
    ]


def _technical(snap: MarketSnapshot, rules: SignalRules) -> tuple[list[Finding], Callable]:
    bars = snap.bars
    if len(bars) < 2:
        raise DataUnavailableError(ToolKind.TECHNICAL, "technical analysis needs at least 2 bars")
    closes = [b.close for b in bars]
    dates = [b.date for b in bars]
    last_close = closes[-1]
    findings = [Finding(L_DATE, dates[-1].isoformat()), Finding(L_CLOSE, round(last_close, 3), CURRENCY)]

    mas = {}
    for w, label in L_MA.items():
        if len(closes) >= w:
            mas[w] = ind.sma(closes, w)[-1]
            findings.append(Finding(label, round(mas[w], 3), CURRENCY))
    if len(mas) == 3:
        if mas[5] > mas[10] > mas[20]:
            alignment = "bullish"
        elif mas[5] < mas[10] < mas[20]:
            alignment = "bearish"
        else:
            alignment = "mixed"
        findings.append(Finding(L_MA_ALIGNMENT, alignment))
        if all(last_close > m for m in mas.values()):
            position = "above all"
        elif all(last_close < m for m in mas.values()):
            position = "below all"
        else:
            position = "between"
        findings.append(Finding(L_MA_POSITION, position))

    if len(closes) >= 15:
        r14 = ind.rsi(closes, 14)[-1]
        findings.append(Finding(L_RSI14, round(r14, 2)))
        findings.append(Finding(L_OVERBOUGHT, "yes" if r14 > rules.overbought_rsi else "no"))
    if len(closes) >= 13:
        findings.append(Finding(L_RSI6, round(ind.rsi(closes, 6)[-1], 2)))
        findings.append(Finding(L_RSI12, round(ind.rsi(closes, 12)[-1], 2)))
        findings += _cross_findings(ind.rsi_crosses(closes, dates), len(closes),
                                    L_RSI_CROSS, L_RSI_CROSS_DATE, L_RSI_CROSS_AGE)
    if len(closes) >= 26:
        m = ind.macd(closes)
        findings.append(Finding(L_MACD_DIF, round(m.dif[-1], 3)))
        findings.append(Finding(L_MACD_DEA, round(m.dea[-1], 3)))
        events = ind.crosses(m.dif, m.dea, dates)
        cross = _cross_findings(events, len(closes), L_MACD_CROSS, L_MACD_CROSS_DATE, L_MACD_CROSS_AGE)
        if cross:
            findings += cross
            findings.append(Finding(L_MACD_ZERO, "yes" if m.dif[events[-1].index] > 0 else "no"))

    engulfs = ind.detect_bullish_engulfing(bars)
    if engulfs:
        ev = engulfs[-1]
        held = all(c >= ev.key_level for c in closes[ev.index:])
        findings += [
            Finding(L_ENGULF_DATE, ev.date.isoformat()),
            Finding(L_ENGULF_KEY, round(ev.key_level, 3), CURRENCY),
            Finding(L_ENGULF_HELD, "yes" if held else "no"),
        ]
    if len(bars) >= 11:
        amp, rng = ind.window_amplitude_range(bars, 10)
        findings += [Finding(L_AMPLITUDE, _pct(amp), "%"), Finding(L_RANGE, _pct(rng), "%")]

    def render(n: _Narrator) -> str:
        parts = [f"As of {n.text(L_DATE)} the stock closed at {n.num(L_CLOSE)}."]
        if n.has(L_MA[20]):
            s = (f"The 5-day, 10-day and 20-day moving averages are {n.num(L_MA[5], with_unit=False)}, "
                 f"{n.num(L_MA[10], with_unit=False)} and {n.num(L_MA[20])}")
            s += f" in {n.text(L_MA_ALIGNMENT)} alignment, with the close {n.text(L_MA_POSITION)} of them."
            parts.append(s)
        elif n.has(L_MA[5]):
            s = f"The 5-day moving average is {n.num(L_MA[5])}"
            if n.has(L_MA[10]):
                s += f" and the 10-day moving average is {n.num(L_MA[10])}"
            parts.append(s + ".")
        if n.has(L_RSI14):
            s = f"RSI(14) reads {n.num(L_RSI14)}"
            if n.raw(L_OVERBOUGHT) == "yes":
                s += ", in overbought territory"
            parts.append(s + ".")
        if n.has(L_RSI6):
            parts.append(f"The short-term RSI(6) is {n.num(L_RSI6)} against RSI(12) at {n.num(L_RSI12)}.")
        if n.has(L_RSI_CROSS):
            side = "above" if n.raw(L_RSI_CROSS) == "golden" else "below"
            parts.append(
                f"The RSI formed a {n.text(L_RSI_CROSS)} cross {side} the midline on {n.text(L_RSI_CROSS_DATE)}, "
                f"{n.num(L_RSI_CROSS_AGE)} sessions ago."
            )
        if n.has(L_MACD_DIF):
            parts.append(f"MACD DIF stands at {n.num(L_MACD_DIF)} with DEA at {n.num(L_MACD_DEA)}.")
        if n.has(L_MACD_CROSS):
            side = "above" if n.raw(L_MACD_ZERO) == "yes" else "below"
            parts.append(
                f"The latest MACD {n.text(L_MACD_CROSS)} cross occurred {side} the zero axis on "
                f"{n.text(L_MACD_CROSS_DATE)}, {n.num(L_MACD_CROSS_AGE)} sessions ago."
            )
        if n.has(L_ENGULF_DATE):
            s = (f"A bullish engulfing pattern emerged on {n.text(L_ENGULF_DATE)} with a key level of "
                 f"{n.num(L_ENGULF_KEY)}")
            if n.raw(L_ENGULF_HELD) == "yes":
                s += ", and the price has stayed above that level since"
            else:
                s += ", and the price has since closed below that level"
            parts.append(s + ".")
        if n.has(L_AMPLITUDE):
            parts.append(f"The 10-day amplitude is {n.num(L_AMPLITUDE)} and the 10-day range is {n.num(L_RANGE)}.")
        return " ".join(parts)

    return findings, render


def control_level(holding_pct: float, rules: SignalRules = DEFAULT_RULES) -> str:
    if holding_pct < rules.control_moderate_pct:
        return "low"
    if holding_pct <= rules.control_high_pct:
        return "moderate"
    return "high"


def _capital_flow(snap: MarketSnapshot, rules: SignalRules) -> tuple[list[Finding], Callable]:
    flows = snap.flows
    if len(flows) < 5:
        raise DataUnavailableError(ToolKind.CAPITAL_FLOW, f"need 5 capital-flow records, got {len(flows)}")
    ddx = ind.ddx_cumulative(flows, 5)
    latest = flows[-1]
    inflow = sum(r.margin_net_inflow for r in flows[-5:])
    findings = [
        Finding(L_DDX, round(ddx, 3)),
        Finding(L_MARGIN_BALANCE, *scaled(latest.margin_balance, CURRENCY)),
        Finding(L_MARGIN_INFLOW, *scaled(inflow, CURRENCY)),
        Finding(L_MARGIN_TREND, "inflow" if inflow > 0 else "outflow" if inflow < 0 else "flat"),
        Finding(L_HOLDING, _pct(latest.institutional_holding_pct), "%"),
        Finding(L_HOLDING_QOQ, _pct(latest.holding_qoq_change), "%"),
        Finding(L_CONTROL, control_level(latest.institutional_holding_pct, rules)),
    ]

    def render(n: _Narrator) -> str:
        ddx_value = n.raw(L_DDX)
        if ddx_value < rules.ddx_bearish:
            reading = "pointing to significant selling pressure from major players"
        elif ddx_value > rules.ddx_bullish:
            reading = "pointing to strong buying from major players"
        else:
            reading = "showing no decisive large-order direction"
        parts = [f"The {L_DDX} is {n.num(L_DDX)}, {reading}."]
        trend = n.raw(L_MARGIN_TREND)
        verb = {"inflow": "a net inflow", "outflow": "a net outflow"}.get(trend, "no net change")
        parts.append(
            f"The margin balance stands at {n.num(L_MARGIN_BALANCE)}, with {verb} of "
            f"{n.num(L_MARGIN_INFLOW, absolute=True)} over 5 sessions."
        )
        qoq = n.raw(L_HOLDING_QOQ)
        change = "increased" if qoq > 0 else "decreased" if qoq < 0 else "was unchanged"
        qoq_text = f" by {n.num(L_HOLDING_QOQ, absolute=True)}" if qoq != 0 else f" at {n.num(L_HOLDING_QOQ)}"
        parts.append(
            f"Institutional holding is {n.num(L_HOLDING)} and {change}{qoq_text} quarter over quarter, "
            f"indicating {n.text(L_CONTROL)} control by market leaders."
        )
        return " ".join(parts)

    return findings, render


def _direction(cur: float, prev: float | None) -> str:
    if prev is None:
        return "n/a"
    if cur > prev:
        return "rising"
    if cur < prev:
        return "falling"
    return "flat"


def _fundamental(snap: MarketSnapshot, rules: SignalRules) -> tuple[list[Finding], Callable]:
    rec = snap.fundamentals
    if rec is None:
        raise DataUnavailableError(ToolKind.FUNDAMENTAL, "no fundamentals in snapshot")
    prev = snap.fundamentals_history[-2] if len(snap.fundamentals_history) >= 2 else None
    findings = [
        Finding(L_PERIOD, rec.period_end.isoformat()),
        Finding(L_REVENUE, *scaled(rec.revenue, CURRENCY)),
        Finding(L_REVENUE_YOY, _pct(rec.revenue_yoy), "%"),
        Finding(L_PROFIT, *scaled(rec.net_profit, CURRENCY)),
        Finding(L_PROFIT_YOY, _pct(rec.net_profit_yoy), "%"),
        Finding(L_NONREC, *scaled(rec.non_recurring_net_profit, CURRENCY)),
        Finding(L_EPS, round(rec.eps, 3), CURRENCY),
        Finding(L_ROE, _pct(rec.roe), "%"),
        Finding(L_NET_MARGIN, _pct(rec.net_margin), "%"),
        Finding(L_GROSS_MARGIN, _pct(rec.gross_margin), "%"),
        Finding(L_CURRENT, round(rec.current_ratio, 2)),
        Finding(L_CURRENT_DIR, _direction(rec.current_ratio, prev.current_ratio if prev else None)),
        Finding(L_QUICK, round(rec.quick_ratio, 2)),
        Finding(L_QUICK_DIR, _direction(rec.quick_ratio, prev.quick_ratio if prev else None)),
        Finding(L_DEBT, _pct(rec.debt_to_asset), "%"),
        Finding(L_DEBT_DIR, _direction(rec.debt_to_asset, prev.debt_to_asset if prev else None)),
        Finding(L_PE, round(rec.pe, 2)),
        Finding(L_PB, round(rec.pb, 2)),
    ]
    peer_pes = sorted((p.pe, p.ticker) for p in snap.peers if p.pe is not None and p.pe > 0)
    if rec.pe > 0 and len(peer_pes) >= 2:
        rank = 1 + sum(1 for pe, _ in peer_pes if pe < rec.pe)
        findings.append(Finding(L_PE_RANK, rank))
    findings.append(Finding(L_FEE_SHARE, _pct(rec.fee_commission_ratio), "%"))
    findings.append(Finding(L_REVENUE_MIX, "fee-dependent" if rec.fee_commission_ratio > rules.fee_dependence_pct
                            else "diversified"))

    def render(n: _Narrator) -> str:
        parts = [
            f"The report for the period ending {n.text(L_PERIOD)} shows revenue of {n.num(L_REVENUE)}, "
            f"{n.move(L_REVENUE_YOY)} year over year, and net profit of {n.num(L_PROFIT)}, "
            f"{n.move(L_PROFIT_YOY)} year over year, with non-recurring net profit at {n.num(L_NONREC)}.",
            f"EPS is {n.num(L_EPS)}, ROE {n.num(L_ROE)}, net margin {n.num(L_NET_MARGIN)} and gross margin "
            f"{n.num(L_GROSS_MARGIN)}.",
            f"The current ratio is {n.num(L_CURRENT)} ({n.text(L_CURRENT_DIR)}), the quick ratio "
            f"{n.num(L_QUICK)} ({n.text(L_QUICK_DIR)}) and the debt-to-asset ratio {n.num(L_DEBT)} "
            f"({n.text(L_DEBT_DIR)}).",
        ]
        s = f"Valuation stands at a P/E of {n.num(L_PE)} and a P/B of {n.num(L_PB)}"
        if n.has(L_PE_RANK):
            s += f", the {n.num(L_PE_RANK, as_ordinal=True)} lowest P/E in its sector"
        parts.append(s + ".")
        s = f"Fee and commission income accounts for {n.num(L_FEE_SHARE)} of total revenue"
        if n.raw(L_REVENUE_MIX) == "fee-dependent":
            s += ", a heavy reliance on a single income source"
        parts.append(s + ".")
        return " ".join(parts)

    return findings, render


def extract_catalyst(snap: MarketSnapshot) -> str | None:
    """Headline of the latest item tagged ``catalyst``, else of the latest item."""
    if not snap.news:
        return None
    tagged = [item for item in snap.news if "catalyst" in item.tags]
    item = (tagged or list(snap.news))[-1]
    return item.headline.strip().rstrip(".!?;:")


def _news(snap: MarketSnapshot, rules: SignalRules) -> tuple[list[Finding], Callable]:
    if not snap.news:
        raise DataUnavailableError(ToolKind.NEWS, "no news items in snapshot")
    latest = list(snap.news)[-3:][::-1]
    findings = [Finding(L_NEWS_COUNT, len(latest))]
    for i, item in enumerate(latest, start=1):
        findings.append(Finding(_news_date_label(i), item.timestamp.date().isoformat()))
        findings.append(Finding(_news_label(i), item.headline.strip().rstrip(".")))
    findings.append(Finding(L_CATALYST, extract_catalyst(snap)))
    if len(snap.bars) >= 2:
        prev = snap.bars[-2].close
        findings.append(Finding(L_PCT, _pct(100.0 * (snap.bars[-1].close - prev) / prev), "%"))

    def render(n: _Narrator) -> str:
        count = n.raw(L_NEWS_COUNT)
        noun = "item is" if count == 1 else "items are"
        parts = [f"The latest {n.num(L_NEWS_COUNT)} news {noun} summarised below."]
        for i in range(1, count + 1):
            parts.append(f"On {n.text(_news_date_label(i))}: {n.text(_news_label(i))}.")
        parts.append(f"The main movement catalyst is: {n.text(L_CATALYST)}.")
        if n.has(L_PCT):
            parts.append(f"The stock moved {n.move(L_PCT)} in the latest session.")
        return " ".join(parts)

    return findings, render


_TOOLS = {
    ToolKind.VOLUME_PRICE: _volume_price,
    ToolKind.TECHNICAL: _technical,
    ToolKind.CAPITAL_FLOW: _capital_flow,
    ToolKind.FUNDAMENTAL: _fundamental,
    ToolKind.NEWS: _news,
}


def _lookup(findings: Sequence[Finding]) -> dict[str, Value]:
    return {f.label: f.value for f in findings}


def classify_signal(kind: ToolKind | str, findings: Sequence[Finding],
                    rules: SignalRules = DEFAULT_RULES) -> Signal:
    """Map findings to a signal with the fixed rule table in :class:`SignalRules`.

    Total: any combination of missing findings yields ``neutral`` rather than
    an error.
    """
    kind = ToolKind(kind)
    f = _lookup(findings)
    if not f:
        return Signal.NEUTRAL

    if kind is ToolKind.TECHNICAL:
        def recent(cross_label, age_label, direction):
            age = f.get(age_label)
            return f.get(cross_label) == direction and age is not None and age <= rules.cross_lookback

        golden = recent(L_RSI_CROSS, L_RSI_CROSS_AGE, "golden") or recent(L_MACD_CROSS, L_MACD_CROSS_AGE, "golden")
        death = recent(L_RSI_CROSS, L_RSI_CROSS_AGE, "death") or recent(L_MACD_CROSS, L_MACD_CROSS_AGE, "death")
        key = f.get(L_ENGULF_KEY)
        close = f.get(L_CLOSE)
        engulf_active = (f.get(L_ENGULF_HELD) == "yes" and key is not None and close is not None and close > key)
        rsi14 = f.get(L_RSI14)
        overbought = rsi14 is not None and rsi14 > rules.overbought_rsi
        below_all = f.get(L_MA_ALIGNMENT) == "bearish" and f.get(L_MA_POSITION) == "below all"
        bull = (golden or engulf_active) and not overbought
        bear = death or below_all
        if bull and not bear:
            return Signal.BULLISH
        if bear and not bull:
            return Signal.BEARISH
        return Signal.NEUTRAL

    if kind is ToolKind.FUNDAMENTAL:
        rev, profit, cur = f.get(L_REVENUE_YOY), f.get(L_PROFIT_YOY), f.get(L_CURRENT_DIR)
        weak = [rev is not None and rev < 0, profit is not None and profit < 0, cur == "falling"]
        strong = [rev is not None and rev > 0, profit is not None and profit > 0, cur == "rising"]
        if sum(weak) >= 2:
            return Signal.BEARISH
        if all(strong):
            return Signal.BULLISH
        return Signal.NEUTRAL

    if kind is ToolKind.CAPITAL_FLOW:
        ddx = f.get(L_DDX)
        if ddx is None:
            return Signal.NEUTRAL
        if ddx < rules.ddx_bearish:
            return Signal.BEARISH
        if ddx > rules.ddx_bullish:
            return Signal.BULLISH
        return Signal.NEUTRAL

    pct = f.get(L_PCT)
    if pct is None:
        return Signal.NEUTRAL
    if pct >= rules.extreme_move_pct:
        return Signal.BULLISH
    if pct <= -rules.extreme_move_pct:
        return Signal.BEARISH
    return Signal.NEUTRAL


def run_tool(kind: ToolKind | str, snapshot: MarketSnapshot, rules: SignalRules = DEFAULT_RULES,
             annotations: Sequence[tuple[str, str]] = ()) -> ToolReport:
    """Run one analysis tool over ``snapshot``.

    ``annotations`` are pass-through ``(label, text)`` pairs for indicators
    supplied by external platforms; they are appended as text findings and
    rendered after the computed narrative, never interpreted.
    """
    kind = ToolKind(kind)
    findings, render = _TOOLS[kind](snapshot, rules)
    findings = list(findings) + [Finding(label, str(text)) for label, text in annotations]
    narrator = _Narrator(findings)
    narrative = render(narrator)
    if annotations:
        narrative += " " + " ".join(f"{label}: {text}." for label, text in annotations)
    return ToolReport(
        kind=kind,
        findings=tuple(findings),
        narrative=narrative,
        signal=classify_signal(kind, findings, rules),
        data_citations=len(narrator.cited),
    )
