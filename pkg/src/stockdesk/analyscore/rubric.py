"""The 100-point report rubric and automated scoring."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from ..report import Report
from . import linters

CONCLUSION_POINTS = (0, 5, 10, 20)
CONTENT_DIMENSION_POINTS = (0, 5, 10, 15, 18, 20, 25, 30)
CONSISTENCY_POINTS = (0, 15)
STRUCTURE_POINTS = (0, 5)
LANGUAGE_POINTS = (0, 5, 8, 10)
DATA_POINTS = (0, 5, 10, 15, 20)

MAX_CONCLUSION = 20
MAX_CONTENT = 45
MAX_EXPRESSION = 15
MAX_DATA = 20

HEURISTIC_LANGUAGE = 8

# Non-personalised analysis-dimension tiers, keyed by dimensions covered.
_CONTENT_DIMS_BY_COUNT = {5: 20, 4: 15, 3: 10, 2: 5}


class RubricError(ValueError):
    pass


def _check(name: str, value: int, allowed: tuple[int, ...]) -> None:
    if value not in allowed:
        raise RubricError(f"{name}={value!r} is not one of {allowed}")


@dataclass(frozen=True)
class RubricScore:
    conclusion: int
    content_dimensions: int
    logical_consistency: int
    structure: int
    language: int
    data: int

    def __post_init__(self):
        _check("conclusion", self.conclusion, CONCLUSION_POINTS)
        _check("content_dimensions", self.content_dimensions, CONTENT_DIMENSION_POINTS)
        _check("logical_consistency", self.logical_consistency, CONSISTENCY_POINTS)
        _check("structure", self.structure, STRUCTURE_POINTS)
        _check("language", self.language, LANGUAGE_POINTS)
        _check("data", self.data, DATA_POINTS)

    @property
    def content(self) -> int:
        return self.content_dimensions + self.logical_consistency

    @property
    def expression(self) -> int:
        return self.structure + self.language

    @property
    def total(self) -> int:
        return self.conclusion + self.content + self.expression + self.data

    def dimensions(self) -> dict[str, int]:
        return {
            "conclusion": self.conclusion,
            "content": self.content,
            "expression": self.expression,
            "data": self.data,
            "total": self.total,
        }

    def to_dict(self) -> dict:
        return {
            "conclusion": self.conclusion,
            "content_dimensions": self.content_dimensions,
            "logical_consistency": self.logical_consistency,
            "structure": self.structure,
            "language": self.language,
            "data": self.data,
            "content": self.content,
            "expression": self.expression,
            "total": self.total,
        }


class Provenance(str, enum.Enum):
    HUMAN = "human"
    LLM_JUDGE = "llm_judge"
    HEURISTIC_DEFAULT = "heuristic_default"


@dataclass(frozen=True)
class JudgeInput:
    conclusion_tier: int
    content_dims_tier: int
    consistency_flag: bool
    language_tier: int
    provenance: Provenance = Provenance.HUMAN

    def __post_init__(self):
        _check("conclusion_tier", self.conclusion_tier, CONCLUSION_POINTS)
        _check("content_dims_tier", self.content_dims_tier, CONTENT_DIMENSION_POINTS)
        _check("language_tier", self.language_tier, LANGUAGE_POINTS)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @classmethod
    def from_mapping(cls, row: Mapping) -> "JudgeInput":
        """Build from a judge-file row (rubric column names)."""
        try:
            consistency = int(row["logical_consistency"])
            _check("logical_consistency", consistency, CONSISTENCY_POINTS)
            return cls(
                conclusion_tier=int(row["conclusion"]),
                content_dims_tier=int(row["content_dimensions"]),
                consistency_flag=consistency == 15,
                language_tier=int(row["language"]),
                provenance=row.get("provenance") or Provenance.HUMAN,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, RubricError):
                raise
            raise RubricError(f"invalid judge row: {exc}") from None


class ScoreMode(str, enum.Enum):
    ASSISTED = "assisted"
    HEURISTIC = "heuristic"


def data_score(dimension_count: int) -> int:
    if dimension_count < 0:
        raise RubricError("dimension count must be >= 0")
    if dimension_count > 3:
        return 20
    return (0, 5, 10, 15)[dimension_count]


@dataclass(frozen=True)
class StructureCheck:
    movement_summary: bool
    dual_conclusions: bool
    detail_sections: bool
    final_summary: bool
    points: int = field(init=False)

    def __post_init__(self):
        ok = self.movement_summary and self.dual_conclusions and self.detail_sections and self.final_summary
        object.__setattr__(self, "points", 5 if ok else 0)

    @property
    def flags(self) -> tuple[bool, bool, bool, bool]:
        return (self.movement_summary, self.dual_conclusions, self.detail_sections, self.final_summary)


def check_structure(report: Report) -> StructureCheck:
    return StructureCheck(
        movement_summary=bool(report.movement_summary.strip()),
        dual_conclusions=bool(report.short_term_conclusion.strip() and report.medium_long_conclusion.strip()),
        detail_sections=any(p.strip() for _, p in report.detail_sections),
        final_summary=bool(report.final_summary.strip()),
    )


def detect_contradictions(report: Report, signals: Mapping[str, str] | None = None) -> list[str]:
    """Conclusion/signal contradictions.

    A conclusion contradicts itself when it carries both bullish and bearish
    keywords. When ``signals`` maps ``technical``/``fundamental`` to the
    background signal, a conclusion whose keyword polarity opposes that signal
    is also flagged.
    """
    problems = []
    pairs = (("short_term", report.short_term_conclusion, "technical"),
             ("medium_long", report.medium_long_conclusion, "fundamental"))
    for name, text, source in pairs:
        pol = linters.polarity(text)
        if pol == "mixed":
            problems.append(f"{name} conclusion mixes bullish and bearish keywords")
            continue
        if signals and source in signals:
            sig = str(getattr(signals[source], "value", signals[source]))
            if (sig == "bullish" and pol == "bearish") or (sig == "bearish" and pol == "bullish"):
                problems.append(f"{name} conclusion reads {pol} against a {sig} {source} signal")
    return problems


def heuristic_judge(report: Report, signals: Mapping[str, str] | None = None,
                    lexicon=None) -> JudgeInput:
    """Default tiers for the judgment-requiring rubric rows.

    Personalisation tiers are never awarded here.
    """
    present = sum(bool(t.strip()) for t in (report.short_term_conclusion, report.medium_long_conclusion))
    conclusion = {2: 10, 1: 5, 0: 0}[present]
    dims = linters.count_data_dimensions(report.full_text, lexicon)
    content_dims = _CONTENT_DIMS_BY_COUNT.get(min(dims, 5), 0)
    return JudgeInput(
        conclusion_tier=conclusion,
        content_dims_tier=content_dims,
        consistency_flag=not detect_contradictions(report, signals),
        language_tier=HEURISTIC_LANGUAGE,
        provenance=Provenance.HEURISTIC_DEFAULT,
    )


def score_report(report: Report, judge: JudgeInput | None = None,
                 mode: ScoreMode | str = ScoreMode.ASSISTED, *,
                 signals: Mapping[str, str] | None = None, lexicon=None) -> RubricScore:
    """Score a report: structure and data automatically, the rest from ``judge``.

    In heuristic mode the judged tiers come from :func:`heuristic_judge` and
    ``judge`` is ignored.
    """
    mode = ScoreMode(mode)
    if mode is ScoreMode.ASSISTED:
        if judge is None:
            raise RubricError("assisted mode requires judge input")
        if judge.provenance is Provenance.HEURISTIC_DEFAULT:
            raise RubricError("assisted mode requires human or llm_judge provenance")
    else:
        judge = heuristic_judge(report, signals, lexicon)
    return RubricScore(
        conclusion=judge.conclusion_tier,
        content_dimensions=judge.content_dims_tier,
        logical_consistency=15 if judge.consistency_flag else 0,
        structure=check_structure(report).points,
        language=judge.language_tier,
        data=data_score(linters.count_data_dimensions(report.full_text, lexicon)),
    )
