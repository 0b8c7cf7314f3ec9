"""In-memory market-data store with as-of snapshot queries."""

from __future__ import annotations

import bisect
import logging
import threading
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time
from pathlib import Path
from typing import Iterable

from .io import IngestError, RecordKind, read_records, write_records
from .models import (
    MARKET_INDEX_ID,
    CapitalFlowRecord,
    DailyBar,
    FundamentalsRecord,
    Instrument,
    MarketSnapshot,
    NewsItem,
    PeerMetrics,
    RankPosition,
    SectorSnapshot,
    available_at,
)

logger = logging.getLogger(__name__)

BAR_WINDOW = 60
FLOW_WINDOW = 60
FUNDAMENTALS_WINDOW = 8
NEWS_WINDOW = 20

RANK_METRICS = ("pct_change", "turnover_rate", "volume", "turnover_value")
RANK_SCOPES = ("market", "sector")


class StoreError(LookupError):
    pass


class UnknownTickerError(StoreError):
    def __init__(self, ticker: str):
        super().__init__(f"unknown ticker {ticker!r}")
        self.ticker = ticker


class EmptyHistoryError(StoreError):
    def __init__(self, ticker: str, as_of: datetime):
        super().__init__(f"no data for {ticker!r} at or before {as_of.isoformat()}")
        self.ticker = ticker
        self.as_of = as_of


def as_instant(value: datetime | date | str) -> datetime:
    """Normalise an as-of argument; bare dates mean end of that day."""
    if isinstance(value, str):
        value = value.strip()
        if len(value) == 10:
            value = date.fromisoformat(value)
        else:
            value = datetime.fromisoformat(value)
    if isinstance(value, datetime):
        return value.replace(tzinfo=None)
    return datetime.combine(value, time.max)


@dataclass(frozen=True)
class RankEntry:
    ticker: str
    value: float
    rank: int


@dataclass(frozen=True)
class Ranking:
    metric: str
    scope: str
    date: date | None
    entries: tuple[RankEntry, ...]
    excluded: tuple[str, ...] = ()

    def position(self, ticker: str) -> int | None:
        for entry in self.entries:
            if entry.ticker == ticker:
                return entry.rank
        return None

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class _State:
    instruments: dict = field(default_factory=dict)
    bars: dict = field(default_factory=dict)  # ticker -> tuple[DailyBar] sorted by date
    fundamentals: dict = field(default_factory=dict)  # ticker -> tuple sorted by availability
    flows: dict = field(default_factory=dict)
    news: dict = field(default_factory=dict)
    sectors: dict = field(default_factory=dict)  # sector_id -> tuple sorted by date


def competition_rank(values: dict[str, float]) -> list[RankEntry]:
    """Descending competition ranking ("1224"); ties listed by ticker."""
    ordered = sorted(values.items(), key=lambda kv: (-kv[1], kv[0]))
    out = []
    for i, (ticker, value) in enumerate(ordered):
        if i and value == ordered[i - 1][1]:
            rank = out[-1].rank
        else:
            rank = i + 1
        out.append(RankEntry(ticker, value, rank))
    return out


class MarketStore:
    """Time-indexed store of instruments and their daily records.

    Writers take an exclusive lock per ingestion batch and publish a new
    immutable state object; readers never block and always see a consistent
    state.
    """

    def __init__(self):
        self._state = _State()
        self._write_lock = threading.Lock()

    # -- ingestion -------------------------------------------------------

    def ingest(self, source_path: Path | str, kind: RecordKind | str) -> int:
        kind = RecordKind(kind)
        rows = list(read_records(source_path, kind))
        with self._write_lock:
            state = self._state
            if kind is not RecordKind.INSTRUMENTS and kind is not RecordKind.SECTORS:
                for line, key, _ in rows:
                    if key[0] not in state.instruments:
                        raise IngestError(source_path, line, "ticker", f"unknown ticker {key[0]!r}")
            self._state = _merge(state, kind, [(key, rec) for _, key, rec in rows])
        logger.info("ingested %d %s records from %s", len(rows), kind.value, source_path)
        return len(rows)

    def add(self, kind: RecordKind | str, records: Iterable[tuple[object, object]]) -> int:
        """Merge already-built ``(key, record)`` pairs; keys as yielded by the parsers."""
        kind = RecordKind(kind)
        records = list(records)
        with self._write_lock:
            state = self._state
            if kind not in (RecordKind.INSTRUMENTS, RecordKind.SECTORS):
                for key, _ in records:
                    if key[0] not in state.instruments:
                        raise UnknownTickerError(key[0])
            self._state = _merge(state, kind, records)
        return len(records)

    def load_dir(self, directory: Path | str) -> dict[str, int]:
        directory = Path(directory)
        counts = {}
        for kind in RecordKind:
            path = directory / kind.filename
            if path.exists():
                counts[kind.value] = self.ingest(path, kind)
        return counts

    @classmethod
    def from_dir(cls, directory: Path | str) -> "MarketStore":
        store = cls()
        store.load_dir(directory)
        return store

    def save_dir(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        s = self._state
        write_records(directory / RecordKind.INSTRUMENTS.filename, RecordKind.INSTRUMENTS,
                      [(t, inst) for t, inst in sorted(s.instruments.items())])
        for kind, table in ((RecordKind.BARS, s.bars), (RecordKind.FUNDAMENTALS, s.fundamentals),
                            (RecordKind.FLOWS, s.flows), (RecordKind.NEWS, s.news)):
            write_records(directory / kind.filename, kind,
                          [(t, rec) for t in sorted(table) for rec in table[t]])
        write_records(directory / RecordKind.SECTORS.filename, RecordKind.SECTORS,
                      [(sid, rec) for sid in sorted(s.sectors) for rec in s.sectors[sid]])

    # -- inspection ------------------------------------------------------

    @property
    def instruments(self) -> dict[str, Instrument]:
        return dict(self._state.instruments)

    def instrument(self, ticker: str) -> Instrument:
        try:
            return self._state.instruments[ticker]
        except KeyError:
            raise UnknownTickerError(ticker) from None

    def bars(self, ticker: str) -> tuple[DailyBar, ...]:
        self.instrument(ticker)
        return self._state.bars.get(ticker, ())

    def stats(self) -> dict[str, int]:
        s = self._state
        return {
            "instruments": len(s.instruments),
            "bars": sum(len(v) for v in s.bars.values()),
            "fundamentals": sum(len(v) for v in s.fundamentals.values()),
            "flows": sum(len(v) for v in s.flows.values()),
            "news": sum(len(v) for v in s.news.values()),
            "sectors": sum(len(v) for v in s.sectors.values()),
        }

    def latest_date(self) -> date | None:
        days = [bars[-1].date for bars in self._state.bars.values() if bars]
        return max(days) if days else None

    def _content(self):
        s = self._state
        return (s.instruments, s.bars, s.fundamentals, s.flows, s.news, s.sectors)

    def __eq__(self, other):
        if not isinstance(other, MarketStore):
            return NotImplemented
        return self._content() == other._content()

    # -- queries ---------------------------------------------------------

    def snapshot(self, ticker: str, as_of: datetime | date | str) -> MarketSnapshot:
        as_of = as_instant(as_of)
        s = self._state
        inst = self.instrument(ticker)
        bars = _visible(s.bars.get(ticker, ()), as_of)
        if not bars:
            raise EmptyHistoryError(ticker, as_of)
        fundamentals = _visible(s.fundamentals.get(ticker, ()), as_of)
        flows = _visible(s.flows.get(ticker, ()), as_of)
        news = _visible(s.news.get(ticker, ()), as_of)
        day = bars[-1].date
        ranks = []
        for metric in RANK_METRICS:
            for scope in RANK_SCOPES:
                ranking = self._rank(s, metric, scope, day, inst.sector_id, as_of)
                pos = ranking.position(ticker)
                if pos is not None:
                    ranks.append(RankPosition(metric, scope, pos, len(ranking)))
        return MarketSnapshot(
            instrument=inst,
            as_of=as_of,
            bars=bars[-BAR_WINDOW:],
            fundamentals_history=fundamentals[-FUNDAMENTALS_WINDOW:],
            flows=flows[-FLOW_WINDOW:],
            news=news[-NEWS_WINDOW:],
            sector=_latest_on_or_before(s.sectors.get(inst.sector_id, ()), day),
            market_index=_latest_on_or_before(s.sectors.get(MARKET_INDEX_ID, ()), day),
            peers=self._peers(s, inst.sector_id, day, as_of),
            ranks=tuple(ranks),
        )

    def rank_in_universe(self, metric: str, scope: str, as_of: datetime | date | str,
                         sector_id: str | None = None) -> Ranking:
        """Rank instruments by ``metric`` on the latest trading date visible at ``as_of``.

        ``scope="sector"`` requires ``sector_id``. Instruments without a bar on
        that date (or without a prior close, for ``pct_change``) are listed in
        ``excluded``.
        """
        if metric not in RANK_METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        if scope not in RANK_SCOPES:
            raise ValueError(f"unknown scope {scope!r}")
        if scope == "sector" and not sector_id:
            raise ValueError("sector scope requires sector_id")
        as_of = as_instant(as_of)
        s = self._state
        days = [b[-1].date for b in (_visible(v, as_of) for v in s.bars.values()) if b]
        if not days:
            raise EmptyHistoryError("*", as_of)
        return self._rank(s, metric, scope, max(days), sector_id, as_of)

    @staticmethod
    def _metrics_on(s: _State, ticker: str, day: date, as_of: datetime) -> dict[str, float]:
        bars = _visible(s.bars.get(ticker, ()), as_of)
        idx = _index_of_day(bars, day)
        if idx is None:
            return {}
        bar = bars[idx]
        out = {
            "volume": bar.volume,
            "turnover_value": bar.turnover_value,
            "turnover_rate": 100.0 * bar.volume / s.instruments[ticker].float_shares,
        }
        if idx > 0:
            prev = bars[idx - 1].close
            out["pct_change"] = 100.0 * (bar.close - prev) / prev
        return out

    def _rank(self, s: _State, metric: str, scope: str, day: date, sector_id: str | None,
              as_of: datetime) -> Ranking:
        values, excluded = {}, []
        for ticker, inst in s.instruments.items():
            if scope == "sector" and inst.sector_id != sector_id:
                continue
            metrics = self._metrics_on(s, ticker, day, as_of)
            if metric in metrics:
                values[ticker] = metrics[metric]
            else:
                excluded.append(ticker)
        return Ranking(metric, scope, day, tuple(competition_rank(values)), tuple(sorted(excluded)))

    def _peers(self, s: _State, sector_id: str, day: date, as_of: datetime) -> tuple[PeerMetrics, ...]:
        out = []
        for ticker in sorted(t for t, inst in s.instruments.items() if inst.sector_id == sector_id):
            metrics = self._metrics_on(s, ticker, day, as_of)
            fundamentals = _visible(s.fundamentals.get(ticker, ()), as_of)
            out.append(PeerMetrics(
                ticker=ticker,
                pct_change=metrics.get("pct_change"),
                turnover_rate=metrics.get("turnover_rate"),
                volume=metrics.get("volume"),
                turnover_value=metrics.get("turnover_value"),
                pe=fundamentals[-1].pe if fundamentals else None,
            ))
        return tuple(out)


def _visible(records: tuple, as_of: datetime) -> tuple:
    """Prefix of a timestamp-sorted tuple with every record at or before ``as_of``."""
    stamps = [r.timestamp for r in records]
    return records[: bisect.bisect_right(stamps, as_of)]


def _index_of_day(bars: tuple[DailyBar, ...], day: date) -> int | None:
    days = [b.date for b in bars]
    i = bisect.bisect_left(days, day)
    if i < len(days) and days[i] == day:
        return i
    return None


def _latest_on_or_before(records: tuple[SectorSnapshot, ...], day: date) -> SectorSnapshot | None:
    days = [r.date for r in records]
    i = bisect.bisect_right(days, day)
    return records[i - 1] if i else None


def _merge(state: _State, kind: RecordKind, records: list[tuple[object, object]]) -> _State:
    if kind is RecordKind.INSTRUMENTS:
        instruments = dict(state.instruments)
        for ticker, inst in records:
            instruments[ticker] = inst
        return replace(state, instruments=instruments)

    attr = {
        RecordKind.BARS: "bars",
        RecordKind.FUNDAMENTALS: "fundamentals",
        RecordKind.FLOWS: "flows",
        RecordKind.NEWS: "news",
        RecordKind.SECTORS: "sectors",
    }[kind]
    table = dict(getattr(state, attr))
    touched: dict[str, dict] = {}
    for key, rec in records:
        owner = key[0]
        if owner not in touched:
            touched[owner] = {_record_key(r): r for r in table.get(owner, ())}
        touched[owner][key[1:]] = rec
    for owner, recs in touched.items():
        table[owner] = tuple(sorted(recs.values(), key=_sort_key))
    return replace(state, **{attr: table})


def _record_key(rec) -> tuple:
    if isinstance(rec, FundamentalsRecord):
        return (rec.period_end,)
    if isinstance(rec, NewsItem):
        return (rec.timestamp, rec.headline)
    return (rec.date,)


def _sort_key(rec):
    if isinstance(rec, NewsItem):
        return (rec.timestamp, rec.headline)
    if isinstance(rec, FundamentalsRecord):
        return (rec.timestamp, rec.period_end)
    return (available_at(rec.date),)
