"""Score rows, per-model aggregation and score-file I/O."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .. import resources
from .rubric import RubricError, RubricScore

SCORE_DIMENSIONS = ("conclusion", "content", "expression", "data", "total")
SCORES_HEADER = ("model_id", "query_id", "conclusion", "content_dimensions",
                 "logical_consistency", "structure", "language", "data")
SUMMARY_HEADER = ("model_id", "n") + SCORE_DIMENSIONS


class Scored(Protocol):
    def dimensions(self) -> dict[str, float]: ...


@dataclass(frozen=True)
class DimensionScores:
    """Scores known only at dimension level (e.g. published expert scores)."""

    conclusion: float
    content: float
    expression: float
    data: float

    def __post_init__(self):
        for name, cap in (("conclusion", 20), ("content", 45), ("expression", 15), ("data", 20)):
            value = getattr(self, name)
            if not 0 <= value <= cap:
                raise RubricError(f"{name}={value} outside [0, {cap}]")

    @property
    def total(self) -> float:
        return self.conclusion + self.content + self.expression + self.data

    def dimensions(self) -> dict[str, float]:
        return {"conclusion": self.conclusion, "content": self.content,
                "expression": self.expression, "data": self.data, "total": self.total}


@dataclass(frozen=True)
class ScoreRow:
    model_id: str
    query_id: str
    score: Scored


@dataclass(frozen=True)
class ModelSummary:
    model_id: str
    n: int
    means: dict[str, float]

    def rounded(self, places: int = 2) -> dict[str, float]:
        return {k: round(v, places) for k, v in self.means.items()}

    def __getitem__(self, dim: str) -> float:
        return self.means[dim]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def aggregate_scores(rows: Iterable[ScoreRow]) -> dict[str, ModelSummary]:
    """Mean of each scoring dimension per model, in first-seen model order."""
    rows = list(rows)
    if not rows:
        raise ValueError("no score rows to aggregate")
    by_model: dict[str, list[dict[str, float]]] = {}
    seen = set()
    for row in rows:
        key = (row.model_id, row.query_id)
        if key in seen:
            raise ValueError(f"duplicate score row for model {row.model_id!r}, query {row.query_id!r}")
        seen.add(key)
        by_model.setdefault(row.model_id, []).append(row.score.dimensions())
    out = {}
    for model, dims in by_model.items():
        means = {d: _mean([x[d] for x in dims]) for d in SCORE_DIMENSIONS}
        out[model] = ModelSummary(model, len(dims), means)
    return out


def rank_models(summaries: dict[str, ModelSummary], dimension: str = "total") -> list[str]:
    """Model ids ordered best first; ties broken by model id."""
    return sorted(summaries, key=lambda m: (-summaries[m].means[dimension], m))


def fmt2(value: float) -> str:
    return f"{value:.2f}"


# score files ------------------------------------------------------------

def write_scores(path: str | Path, rows: Iterable[ScoreRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORES_HEADER)
        for row in rows:
            s = row.score
            w.writerow([row.model_id, row.query_id, s.conclusion, s.content_dimensions,
                        s.logical_consistency, s.structure, s.language, s.data])


def read_scores(path: str | Path) -> list[ScoreRow]:
    """Read a scores file; derived columns, if present, are ignored."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(SCORES_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for rec in reader:
            try:
                score = RubricScore(*(int(rec[c]) for c in SCORES_HEADER[2:]))
            except ValueError as exc:
                raise ValueError(f"{path}:{reader.line_num}: {exc}") from None
            rows.append(ScoreRow(rec["model_id"], rec["query_id"], score))
    return rows


def read_score_table(path: str | Path, model_id: str | None = None) -> list[ScoreRow]:
    """Read either a rubric scores file or a dimension-level score table.

    Dimension-level tables carry ``conclusion,content,expression,data`` plus
    ``query_id`` and optionally ``model_id``/``model``; ``model_id`` fills in
    when the file has no model column.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise ValueError(f"{path}: empty score file")
    if set(SCORES_HEADER) <= set(header):
        return read_scores(path)
    needed = {"query_id", "conclusion", "content", "expression", "data"}
    if not needed <= set(header):
        raise ValueError(f"{path}: not a recognised score table (columns {header})")
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            model = rec.get("model_id") or rec.get("model") or model_id
            if not model:
                raise ValueError(f"{path}:{reader.line_num}: no model id")
            try:
                dims = DimensionScores(*(float(rec[d]) for d in SCORE_DIMENSIONS[:4]))
            except ValueError as exc:
                raise ValueError(f"{path}:{reader.line_num}: {exc}") from None
            rows.append(ScoreRow(model, rec["query_id"], dims))
    return rows


def write_summary(path: str | Path, summaries: dict[str, ModelSummary]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for s in summaries.values():
            w.writerow([s.model_id, s.n] + [fmt2(s.means[d]) for d in SCORE_DIMENSIONS])


def format_summary_table(summaries: dict[str, ModelSummary]) -> str:
    width = max([len("Model")] + [len(m) for m in summaries])
    head = f"{'Model':<{width}}  " + "  ".join(f"{d.capitalize():>10}" for d in SCORE_DIMENSIONS)
    lines = [head]
    for s in summaries.values():
        lines.append(f"{s.model_id:<{width}}  " + "  ".join(f"{fmt2(s.means[d]):>10}" for d in SCORE_DIMENSIONS))
    return "\n".join(lines)


# bundled published scores ------------------------------------------------

@dataclass(frozen=True)
class PublishedModelRow:
    model: str
    scores: DimensionScores
    reported_total: float


def load_table2_fixture(path: str | Path | None = None) -> list[PublishedModelRow]:
    """Per-model mean sub-scores with their published totals."""
    text = Path(path).read_text(encoding="utf-8") if path else resources.read_text("data", "table2_fixture.csv")
    out = []
    for rec in csv.DictReader(text.splitlines()):
        dims = DimensionScores(*(float(rec[d]) for d in SCORE_DIMENSIONS[:4]))
        out.append(PublishedModelRow(rec["model"], dims, float(rec["reported_total"])))
    return out


@dataclass(frozen=True)
class PublishedQueryRow:
    query_id: str
    query: str
    qualified: bool
    scores: DimensionScores
    reported_score: int


def load_expert_query_scores(path: str | Path | None = None) -> list[PublishedQueryRow]:
    """Per-query expert scores for the reference system over the 100-query set."""
    text = Path(path).read_text(encoding="utf-8") if path else resources.read_text("data", "appendixH_finsphere.csv")
    out = []
    for rec in csv.DictReader(text.splitlines()):
        dims = DimensionScores(*(int(rec[d]) for d in SCORE_DIMENSIONS[:4]))
        out.append(PublishedQueryRow(rec["query_id"], rec["query"], rec["qual"] == "1", dims, int(rec["score"])))
    return out
