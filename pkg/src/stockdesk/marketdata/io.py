"""File formats understood by the store.

Each CSV kind has a fixed header; ``news`` is JSON Lines. Parsers yield
``(key, record)`` pairs and raise :class:`IngestError` carrying the 1-based
line number and the offending field.
"""

from __future__ import annotations

import csv
import enum
import json
from datetime import date, datetime
from pathlib import Path
from typing import Iterator

from .models import (
    CapitalFlowRecord,
    DailyBar,
    FundamentalsRecord,
    Instrument,
    NewsItem,
    SectorSnapshot,
    ValidationError,
)


class RecordKind(str, enum.Enum):
    INSTRUMENTS = "instruments"
    BARS = "bars"
    FUNDAMENTALS = "fundamentals"
    FLOWS = "flows"
    SECTORS = "sectors"
    NEWS = "news"

    @property
    def filename(self) -> str:
        return f"{self.value}.jsonl" if self is RecordKind.NEWS else f"{self.value}.csv"


HEADERS: dict[RecordKind, tuple[str, ...]] = {
    RecordKind.INSTRUMENTS: ("ticker", "name", "aliases", "sector_id", "float_shares"),
    RecordKind.BARS: (
        "ticker", "date", "open", "high", "low", "close", "volume", "turnover_value",
        "lo_buy_vol", "lo_sell_vol",
    ),
    RecordKind.FUNDAMENTALS: (
        "ticker", "period_end", "announce_date", "revenue", "revenue_yoy", "net_profit",
        "net_profit_yoy", "non_recurring_net_profit", "eps", "roe", "net_margin", "gross_margin",
        "pe", "pb", "current_ratio", "quick_ratio", "debt_to_asset", "fee_commission_ratio",
    ),
    RecordKind.FLOWS: (
        "ticker", "date", "ddx_daily", "margin_balance", "margin_net_inflow",
        "institutional_holding_pct", "holding_qoq_change",
    ),
    RecordKind.SECTORS: (
        "sector_id", "date", "index_level", "pct_change", "day_high", "day_low",
        "total_trading_value",
    ),
}

NEWS_FIELDS = ("ticker", "timestamp", "headline", "body", "tags")

# fundamentals.csv may omit announce_date entirely
_OPTIONAL_COLUMNS = {RecordKind.FUNDAMENTALS: {"announce_date"}}


class IngestError(ValueError):
    def __init__(self, path: Path | str, line: int, field: str | None, message: str):
        where = f"{path}:{line}"
        if field:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line
        self.field = field


def _float(row: dict, name: str) -> float:
    raw = (row.get(name) or "").strip()
    if raw == "":
        raise ValidationError(name, "missing value")
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(name, f"not a number: {raw!r}") from None


def _date(row: dict, name: str) -> date:
    raw = (row.get(name) or "").strip()
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise ValidationError(name, f"not an ISO-8601 date: {raw!r}") from None


def _text(row: dict, name: str) -> str:
    raw = (row.get(name) or "").strip()
    if not raw:
        raise ValidationError(name, "missing value")
    return raw


def _parse_instrument(row: dict):
    aliases = tuple(a.strip() for a in (row.get("aliases") or "").split("|") if a.strip())
    inst = Instrument(
        ticker=_text(row, "ticker"),
        name=_text(row, "name"),
        sector_id=_text(row, "sector_id"),
        float_shares=_float(row, "float_shares"),
        aliases=aliases,
    )
    return inst.ticker, inst


def _parse_bar(row: dict):
    bar = DailyBar(
        date=_date(row, "date"),
        open=_float(row, "open"),
        high=_float(row, "high"),
        low=_float(row, "low"),
        close=_float(row, "close"),
        volume=_float(row, "volume"),
        turnover_value=_float(row, "turnover_value"),
        large_order_buy_volume=_float(row, "lo_buy_vol"),
        large_order_sell_volume=_float(row, "lo_sell_vol"),
    )
    return (_text(row, "ticker"), bar.date), bar


def _parse_fundamentals(row: dict):
    announce = (row.get("announce_date") or "").strip()
    rec = FundamentalsRecord(
        period_end=_date(row, "period_end"),
        announce_date=_date(row, "announce_date") if announce else None,
        **{name: _float(row, name) for name in HEADERS[RecordKind.FUNDAMENTALS][3:]},
    )
    return (_text(row, "ticker"), rec.period_end), rec


def _parse_flow(row: dict):
    rec = CapitalFlowRecord(
        date=_date(row, "date"),
        **{name: _float(row, name) for name in HEADERS[RecordKind.FLOWS][2:]},
    )
    return (_text(row, "ticker"), rec.date), rec


def _parse_sector(row: dict):
    rec = SectorSnapshot(
        sector_id=_text(row, "sector_id"),
        date=_date(row, "date"),
        **{name: _float(row, name) for name in HEADERS[RecordKind.SECTORS][2:]},
    )
    return (rec.sector_id, rec.date), rec


_PARSERS = {
    RecordKind.INSTRUMENTS: _parse_instrument,
    RecordKind.BARS: _parse_bar,
    RecordKind.FUNDAMENTALS: _parse_fundamentals,
    RecordKind.FLOWS: _parse_flow,
    RecordKind.SECTORS: _parse_sector,
}


def read_records(path: Path | str, kind: RecordKind) -> Iterator[tuple[int, object, object]]:
    """Yield ``(line_number, key, record)`` from a data file of the given kind."""
    path = Path(path)
    if kind is RecordKind.NEWS:
        yield from _read_news(path)
        return
    expected = HEADERS[kind]
    optional = _OPTIONAL_COLUMNS.get(kind, set())
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in expected if c not in header and c not in optional]
        if missing:
            raise IngestError(path, 1, missing[0], f"header missing column(s) {missing}")
        parse = _PARSERS[kind]
        for row in reader:
            line = reader.line_num
            if not any((v or "").strip() for v in row.values() if isinstance(v, str)):
                continue
            try:
                key, record = parse(row)
            except ValidationError as exc:
                raise IngestError(path, line, exc.field, str(exc)) from None
            yield line, key, record


def _read_news(path: Path):
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(path, line_no, None, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise IngestError(path, line_no, None, "expected a JSON object")
            try:
                ts_raw = obj.get("timestamp")
                if not ts_raw:
                    raise ValidationError("timestamp", "missing value")
                try:
                    ts = datetime.fromisoformat(str(ts_raw))
                except ValueError:
                    raise ValidationError("timestamp", f"not ISO-8601: {ts_raw!r}") from None
                tags = obj.get("tags") or []
                if not isinstance(tags, list):
                    raise ValidationError("tags", "must be a list")
                item = NewsItem(
                    ticker=_text(obj, "ticker"),
                    timestamp=ts.replace(tzinfo=None),
                    headline=str(obj.get("headline") or ""),
                    body=str(obj.get("body") or ""),
                    tags=tuple(str(t) for t in tags),
                )
            except ValidationError as exc:
                raise IngestError(path, line_no, exc.field, str(exc)) from None
            yield line_no, (item.ticker, item.timestamp, item.headline), item


def _num(value: float) -> str:
    return repr(float(value))


def write_records(path: Path | str, kind: RecordKind, records) -> None:
    """Write ``(owner, record)`` pairs in the file format of ``kind``.

    ``owner`` is the ticker for per-instrument kinds and ignored otherwise.
    """
    path = Path(path)
    if kind is RecordKind.NEWS:
        with path.open("w", encoding="utf-8") as fh:
            for _, item in records:
                fh.write(json.dumps({
                    "ticker": item.ticker,
                    "timestamp": item.timestamp.isoformat(),
                    "headline": item.headline,
                    "body": item.body,
                    "tags": list(item.tags),
                }, ensure_ascii=False) + "\n")
        return
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADERS[kind])
        for owner, rec in records:
            writer.writerow(_row(kind, owner, rec))


def _row(kind: RecordKind, owner: str, rec) -> list:
    if kind is RecordKind.INSTRUMENTS:
        return [rec.ticker, rec.name, "|".join(rec.aliases), rec.sector_id, _num(rec.float_shares)]
    if kind is RecordKind.BARS:
        return [owner, rec.date.isoformat(), *(_num(getattr(rec, f)) for f in (
            "open", "high", "low", "close", "volume", "turnover_value",
            "large_order_buy_volume", "large_order_sell_volume"))]
    if kind is RecordKind.FUNDAMENTALS:
        return [owner, rec.period_end.isoformat(),
                rec.announce_date.isoformat() if rec.announce_date else "",
                *(_num(getattr(rec, f)) for f in HEADERS[kind][3:])]
    if kind is RecordKind.FLOWS:
        return [owner, rec.date.isoformat(), *(_num(getattr(rec, f)) for f in HEADERS[kind][2:])]
    if kind is RecordKind.SECTORS:
        return [rec.sector_id, rec.date.isoformat(), *(_num(getattr(rec, f)) for f in HEADERS[kind][2:])]
    raise ValueError(kind)
