"""Query resolution, analysis planning and background assembly."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Sequence

from ..marketdata import Instrument
from ..tools import CANONICAL_ORDER, ToolKind, ToolReport


class ResolutionError(LookupError):
    pass


class UnresolvedInstrumentError(ResolutionError):
    def __init__(self, query: str):
        super().__init__(f"no instrument in the universe matches query {query!r}")
        self.query = query


class AmbiguityError(ResolutionError):
    def __init__(self, query: str, candidates: Sequence[Instrument]):
        names = ", ".join(f"{i.name} ({i.ticker})" for i in candidates)
        super().__init__(f"query {query!r} names several instruments: {names}")
        self.query = query
        self.candidates = tuple(candidates)


class PlanError(ValueError):
    pass


_RATIONALES = {
    ToolKind.VOLUME_PRICE: "establish today's price, turnover and trading activity against sector and market",
    ToolKind.TECHNICAL: "read trend and momentum from moving averages, RSI, MACD and candlestick patterns",
    ToolKind.CAPITAL_FLOW: "gauge large-order, margin and institutional money behind the move",
    ToolKind.FUNDAMENTAL: "assess growth, profitability, solvency and valuation from the latest report",
    ToolKind.NEWS: "identify the news catalyst behind the latest movement",
}

# Words that scope a query to a single analysis when narrowing is enabled.
_SCOPE_WORDS = {
    ToolKind.VOLUME_PRICE: ("volume", "turnover"),
    ToolKind.TECHNICAL: ("technical", "technicals", "chart", "rsi", "macd"),
    ToolKind.CAPITAL_FLOW: ("capital flow", "fund flow", "ddx", "margin"),
    ToolKind.FUNDAMENTAL: ("fundamental", "fundamentals", "earnings", "financials", "valuation"),
    ToolKind.NEWS: ("news", "announcement", "announcements"),
}


@dataclass(frozen=True)
class AnalysisPlan:
    ticker: str
    as_of: datetime
    steps: tuple[tuple[ToolKind, str], ...]

    def __post_init__(self):
        if not self.steps:
            raise PlanError("a plan needs at least one step")
        kinds = [k for k, _ in self.steps]
        if len(set(kinds)) != len(kinds):
            raise PlanError("duplicate tool kinds in plan")

    @property
    def kinds(self) -> tuple[ToolKind, ...]:
        return tuple(k for k, _ in self.steps)

    def to_dict(self) -> dict:
        return {
            "ticker": self.ticker,
            "as_of": self.as_of.isoformat(),
            "steps": [{"kind": k.value, "rationale": r} for k, r in self.steps],
        }


@dataclass(frozen=True)
class BackgroundDoc:
    question: str
    sections: tuple[ToolReport, ...]
    as_of: datetime
    instrument_name: str = ""

    def section(self, kind: ToolKind | str) -> ToolReport | None:
        kind = ToolKind(kind)
        for s in self.sections:
            if s.kind is kind:
                return s
        return None

    @property
    def kinds(self) -> tuple[ToolKind, ...]:
        return tuple(s.kind for s in self.sections)

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "as_of": self.as_of.isoformat(),
            "instrument_name": self.instrument_name,
            "sections": [s.to_dict() for s in self.sections],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, obj: dict) -> "BackgroundDoc":
        return cls(
            question=obj["question"],
            sections=tuple(ToolReport.from_dict(s) for s in obj["sections"]),
            as_of=datetime.fromisoformat(obj["as_of"]),
            instrument_name=obj.get("instrument_name", ""),
        )

    def render(self) -> str:
        """Plain-text background block: one titled section per tool output."""
        blocks = []
        for s in self.sections:
            title = s.kind.value.replace("_", " ").title()
            lines = [f"[{title} Analysis] (signal: {s.signal.value})", s.narrative]
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks)


def _phrase_pattern(label: str) -> re.Pattern:
    body = r"\s+".join(re.escape(w) for w in label.split())
    return re.compile(rf"(?<!\w){body}(?!\w)", re.IGNORECASE)


def resolve_instrument(query: str, universe: Iterable[Instrument]) -> Instrument:
    """Find the instrument a query refers to.

    Every name, alias and ticker is matched case-insensitively on word
    boundaries. Matches lying inside a longer match are discarded; if the
    remaining matches point at more than one instrument the query is ambiguous.
    Several instruments sharing the same longest label resolve to the
    lexicographically smallest ticker.
    """
    universe = list(universe)
    if not universe:
        raise ValueError("instrument universe is empty")
    hits = []  # (start, end, instrument)
    folded = query.casefold()
    for inst in universe:
        for label in inst.labels:
            if not label.strip() or label.split()[0].casefold() not in folded:
                continue
            for m in _phrase_pattern(label).finditer(query):
                hits.append((m.start(), m.end(), inst))
    if not hits:
        raise UnresolvedInstrumentError(query)
    maximal = [h for h in hits
               if not any(o[0] <= h[0] and h[1] <= o[1] and (o[1] - o[0]) > (h[1] - h[0]) for o in hits)]
    spans: dict[tuple[int, int], list[Instrument]] = {}
    for start, end, inst in maximal:
        spans.setdefault((start, end), []).append(inst)
    chosen = {min(insts, key=lambda i: i.ticker).ticker: min(insts, key=lambda i: i.ticker)
              for insts in spans.values()}
    if len(chosen) > 1:
        raise AmbiguityError(query, sorted(chosen.values(), key=lambda i: i.ticker))
    return next(iter(chosen.values()))


def plan_analysis(query: str, instrument: Instrument, as_of: datetime, *, narrowing: bool = False) -> AnalysisPlan:
    """Decide which tools to run, in canonical order.

    With ``narrowing`` on, a query mentioning only some analysis areas is
    restricted to those areas; otherwise every tool runs.
    """
    kinds = list(CANONICAL_ORDER)
    if narrowing:
        low = query.lower()
        scoped = [k for k in CANONICAL_ORDER
                  if any(_phrase_pattern(w).search(low) for w in _SCOPE_WORDS[k])]
        if scoped:
            kinds = scoped
    return AnalysisPlan(instrument.ticker, as_of, tuple((k, _RATIONALES[k]) for k in kinds))


def assemble_background(plan: AnalysisPlan, reports: Sequence[ToolReport], question: str,
                        instrument_name: str = "") -> BackgroundDoc:
    """Order tool reports by the plan; every planned kind needs exactly one report."""
    by_kind: dict[ToolKind, ToolReport] = {}
    for r in reports:
        if r.kind in by_kind:
            raise PlanError(f"more than one report for {r.kind.value}")
        by_kind[r.kind] = r
    missing = [k.value for k in plan.kinds if k not in by_kind]
    if missing:
        raise PlanError(f"missing tool report for: {', '.join(missing)}")
    extra = [k.value for k in by_kind if k not in plan.kinds]
    if extra:
        raise PlanError(f"report not in plan: {', '.join(extra)}")
    return BackgroundDoc(question, tuple(by_kind[k] for k in plan.kinds), plan.as_of, instrument_name)
