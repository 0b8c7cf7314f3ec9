"""End-to-end analysis: query -> instrument -> plan -> tools -> report."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Sequence

import httpx

from ..marketdata import Instrument, MarketStore, as_instant
from ..report import Report
from ..tools import DEFAULT_RULES, DataUnavailableError, SignalRules, ToolKind, ToolReport, run_tool
from .backend import BackendConfig, synthesize_llm
from .planning import AnalysisPlan, BackgroundDoc, assemble_background, plan_analysis, resolve_instrument
from .prompt import FewShot
from .synthesis import synthesize_template

logger = logging.getLogger(__name__)

REQUIRED_KINDS = (ToolKind.TECHNICAL, ToolKind.FUNDAMENTAL)
SYNTHESIZERS = ("template", "llm")


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnalyzeRequest:
    query: str
    as_of: date | datetime | str | None = None

    @classmethod
    def from_dict(cls, obj: dict) -> "AnalyzeRequest":
        query = obj.get("query")
        if not isinstance(query, str) or not query.strip():
            raise ValueError("query must be a non-empty string")
        as_of = obj.get("as_of")
        if as_of is not None and not isinstance(as_of, str):
            raise ValueError("as_of must be an ISO date or datetime string")
        if as_of:
            as_instant(as_of)  # validate early
        return cls(query, as_of or None)


@dataclass(frozen=True)
class AnalyzeResponse:
    query: str
    as_of: str
    instrument: Instrument
    plan: AnalysisPlan
    background: BackgroundDoc
    report: Report
    timings: dict[str, float]
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "as_of": self.as_of,
            "instrument": {"ticker": self.instrument.ticker, "name": self.instrument.name},
            "plan": self.plan.to_dict(),
            "background": self.background.to_dict(),
            "report": self.report.to_dict(),
            "timings": dict(self.timings),
            "warnings": list(self.warnings),
        }


def _as_of_text(value) -> str:
    if isinstance(value, str):
        return value
    return value.isoformat()


def analyze(store: MarketStore, request: AnalyzeRequest, *, synthesizer: str = "template",
            backend: BackendConfig | None = None, fewshots: Sequence[FewShot] = (),
            narrowing: bool = False, rules: SignalRules = DEFAULT_RULES,
            client: httpx.Client | None = None) -> AnalyzeResponse:
    """Run the full pipeline for one query against ``store``.

    ``as_of`` defaults to the latest trading date in the store. Optional tools
    without data are dropped from the plan with a warning; technical and
    fundamental data are required.
    """
    if synthesizer not in SYNTHESIZERS:
        raise PipelineError(f"unknown synthesizer {synthesizer!r}")
    if synthesizer == "llm" and backend is None:
        raise PipelineError("the llm synthesizer needs a backend configuration")
    timings: dict[str, float] = {}
    warnings: list[str] = []

    def timed(name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            timings[name] = time.perf_counter() - t0

    as_of_value = request.as_of if request.as_of is not None else store.latest_date()
    if as_of_value is None:
        raise PipelineError("store holds no bars")
    as_of = as_instant(as_of_value)

    instrument = timed("resolve", resolve_instrument, request.query, store.instruments.values())
    plan = timed("plan", plan_analysis, request.query, instrument, as_of, narrowing=narrowing)
    snapshot = timed("snapshot", store.snapshot, instrument.ticker, as_of)

    reports: list[ToolReport] = []
    kept = []
    for kind, rationale in plan.steps:
        try:
            reports.append(timed(f"tool:{kind.value}", run_tool, kind, snapshot, rules))
            kept.append((kind, rationale))
        except DataUnavailableError as exc:
            if kind in REQUIRED_KINDS:
                raise PipelineError(f"required analysis unavailable: {exc}") from exc
            warnings.append(f"skipped {kind.value}: {exc}")
            logger.info("skipping %s for %s: %s", kind.value, instrument.ticker, exc)
    if len(kept) != len(plan.steps):
        if not kept:
            raise PipelineError("no analysis tool produced output")
        plan = AnalysisPlan(plan.ticker, plan.as_of, tuple(kept))

    background = timed("assemble", assemble_background, plan, reports, request.query, instrument.name)
    if synthesizer == "template":
        report = timed("synthesize", synthesize_template, background)
    else:
        report = timed("synthesize", synthesize_llm, background, backend, fewshots, client)
    for w in report.parse_warnings:
        warnings.append(f"parse: {w}")
    return AnalyzeResponse(request.query, _as_of_text(as_of_value), instrument, plan, background, report,
                           timings, tuple(warnings))
