"""Kendall's tau-b and pairwise inter-group agreement tables."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .aggregate import SCORE_DIMENSIONS, ScoreRow


class UndefinedCorrelationError(ValueError):
    """Raised when one side has no untied pair, so tau-b has a zero denominator."""


@dataclass(frozen=True)
class RankVector:
    group_id: str
    query_id: str
    dimension: str
    ranks: Mapping[str, float]

    def __post_init__(self):
        if self.dimension not in SCORE_DIMENSIONS:
            raise ValueError(f"unknown dimension {self.dimension!r}")


def competition_ranks(scores: Mapping[str, float]) -> dict[str, int]:
    """Rank by descending score; ties share the smaller rank."""
    ordered = sorted(scores.values(), reverse=True)
    first = {}
    for pos, v in enumerate(ordered, start=1):
        first.setdefault(v, pos)
    return {k: first[v] for k, v in scores.items()}


def _aligned(a, b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, RankVector) and isinstance(b, RankVector):
        if set(a.ranks) != set(b.ranks):
            raise ValueError("rank vectors cover different item sets")
        keys = sorted(a.ranks)
        xa = [a.ranks[k] for k in keys]
        xb = [b.ranks[k] for k in keys]
    elif isinstance(a, Mapping) and isinstance(b, Mapping):
        if set(a) != set(b):
            raise ValueError("rankings cover different item sets")
        keys = sorted(a)
        xa = [a[k] for k in keys]
        xb = [b[k] for k in keys]
    else:
        xa, xb = list(a), list(b)
        if len(xa) != len(xb):
            raise ValueError("rankings differ in length")
    if len(xa) < 2:
        raise ValueError("need at least two ranked items")
    return np.asarray(xa, dtype=float), np.asarray(xb, dtype=float)


def kendall_tau(a, b) -> float:
    """Tie-corrected Kendall tau-b between two rankings of the same items.

    Accepts two :class:`RankVector`, two mappings item -> rank, or two
    equal-length sequences.
    """
    x, y = _aligned(a, b)
    sx = np.sign(x[:, None] - x[None, :])
    sy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(len(x), k=1)
    sx, sy = sx[iu], sy[iu]
    prod = sx * sy
    concordant = int(np.count_nonzero(prod > 0))
    discordant = int(np.count_nonzero(prod < 0))
    # pairs tied only in y count toward x's denominator term and vice versa
    untied_x = int(np.count_nonzero(sx))
    untied_y = int(np.count_nonzero(sy))
    if untied_x == 0 or untied_y == 0:
        raise UndefinedCorrelationError("all items tied on one side")
    return (concordant - discordant) / math.sqrt(untied_x * untied_y)


def pair_label(g1: str, g2: str) -> str:
    return f"{g1} & {g2}"


@dataclass
class AgreementTable:
    groups: tuple[str, ...]
    dimensions: tuple[str, ...]
    # dimension -> pair label -> mean tau as percent (unrounded); NaN when undefined everywhere
    cells: dict[str, dict[str, float]]
    queries_used: int
    excluded_queries: tuple[str, ...] = ()
    undefined_counts: dict[str, int] = field(default_factory=dict)

    @property
    def pairs(self) -> list[str]:
        return [pair_label(a, b) for a, b in itertools.combinations(self.groups, 2)]

    @property
    def columns(self) -> list[str]:
        return self.pairs + ["Average"]

    def average(self, dimension: str) -> float:
        vals = [v for v in self.cells[dimension].values() if not math.isnan(v)]
        return math.fsum(vals) / len(vals) if vals else math.nan

    def row(self, dimension: str) -> list[float]:
        return [self.cells[dimension][p] for p in self.pairs] + [self.average(dimension)]

    def rounded(self) -> dict[str, list[float]]:
        return {d: [round(v, 2) for v in self.row(d)] for d in self.dimensions}

    def to_csv_rows(self) -> list[list[str]]:
        out = [[""] + self.columns]
        for d in self.dimensions:
            out.append([d.capitalize()] + [_pct(v) for v in self.row(d)])
        return out

    def format(self) -> str:
        rows = self.to_csv_rows()
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
                         for r in rows)


def _pct(v: float) -> str:
    return "n/a" if math.isnan(v) else f"{v:.2f}"


def _index(rows: Sequence[ScoreRow]) -> dict[str, dict[str, dict[str, float]]]:
    """query -> model -> dimension scores"""
    out: dict[str, dict[str, dict[str, float]]] = {}
    for r in rows:
        out.setdefault(r.query_id, {})[r.model_id] = r.score.dimensions()
    return out


def group_agreement(groups: Mapping[str, Sequence[ScoreRow]],
                    dimensions: Sequence[str] = SCORE_DIMENSIONS) -> AgreementTable:
    """Mean pairwise tau-b between annotator groups, per scoring dimension.

    For each query the models are ranked within each group by the dimension
    score. A query absent from any group, or whose model set differs across
    groups, is excluded. A (query, pair) whose tau is undefined because every
    model tied is skipped and counted in ``undefined_counts``.
    """
    if len(groups) < 2:
        raise ValueError("agreement needs at least two groups")
    names = tuple(groups)
    indexed = {g: _index(rows) for g, rows in groups.items()}
    all_queries = sorted(set().union(*(set(ix) for ix in indexed.values())))
    used, excluded = [], []
    for q in all_queries:
        model_sets = [set(indexed[g].get(q, {})) for g in names]
        if any(not s for s in model_sets) or any(s != model_sets[0] for s in model_sets):
            excluded.append(q)
        else:
            used.append(q)

    cells: dict[str, dict[str, float]] = {}
    undefined: dict[str, int] = {}
    for dim in dimensions:
        cells[dim] = {}
        for g1, g2 in itertools.combinations(names, 2):
            taus = []
            for q in used:
                r1 = competition_ranks({m: s[dim] for m, s in indexed[g1][q].items()})
                r2 = competition_ranks({m: s[dim] for m, s in indexed[g2][q].items()})
                try:
                    taus.append(kendall_tau(r1, r2))
                except (UndefinedCorrelationError, ValueError):
                    undefined[dim] = undefined.get(dim, 0) + 1
            cells[dim][pair_label(g1, g2)] = 100.0 * math.fsum(taus) / len(taus) if taus else math.nan
    return AgreementTable(names, tuple(dimensions), cells, len(used), tuple(excluded), undefined)
