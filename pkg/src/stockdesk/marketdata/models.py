"""Record types held by the market-data store.

All records are frozen dataclasses so that snapshots built from them can be
shared across threads without copying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, datetime, time

# Daily records become visible at the session close of their date.
SESSION_CLOSE = time(15, 0)

MARKET_INDEX_ID = "market"


def available_at(day: date) -> datetime:
    """Instant at which a daily record for ``day`` may be observed."""
    return datetime.combine(day, SESSION_CLOSE)


class ValidationError(ValueError):
    """A record violates one of its field invariants."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValidationError(name, f"must be finite, got {value!r}")


@dataclass(frozen=True)
class Instrument:
    ticker: str
    name: str
    sector_id: str
    float_shares: float
    aliases: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.ticker:
            raise ValidationError("ticker", "must be non-empty")
        if not self.name:
            raise ValidationError("name", "must be non-empty")
        _finite("float_shares", self.float_shares)
        if self.float_shares <= 0:
            raise ValidationError("float_shares", "must be > 0")

    @property
    def labels(self) -> tuple[str, ...]:
        """Every string the instrument may be referred to by."""
        return (self.name, *self.aliases, self.ticker)


@dataclass(frozen=True)
class DailyBar:
    date: date
    open: float
    high: float
    low: float
    close: float
    volume: float
    turnover_value: float
    large_order_buy_volume: float = 0.0
    large_order_sell_volume: float = 0.0

    def __post_init__(self):
        for name in ("open", "high", "low", "close"):
            value = getattr(self, name)
            _finite(name, value)
            if value <= 0:
                raise ValidationError(name, "price must be > 0")
        for name in ("volume", "turnover_value", "large_order_buy_volume", "large_order_sell_volume"):
            value = getattr(self, name)
            _finite(name, value)
            if value < 0:
                raise ValidationError(name, "must be >= 0")
        if self.low > self.high:
            raise ValidationError("high", f"high {self.high} < low {self.low}")
        if self.low > min(self.open, self.close):
            raise ValidationError("low", "low exceeds min(open, close)")
        if self.high < max(self.open, self.close):
            raise ValidationError("high", "high below max(open, close)")

    @property
    def timestamp(self) -> datetime:
        return available_at(self.date)


@dataclass(frozen=True)
class FundamentalsRecord:
    period_end: date
    revenue: float
    revenue_yoy: float
    net_profit: float
    net_profit_yoy: float
    non_recurring_net_profit: float
    eps: float
    roe: float
    net_margin: float
    gross_margin: float
    pe: float
    pb: float
    current_ratio: float
    quick_ratio: float
    debt_to_asset: float
    fee_commission_ratio: float
    # Reports are published after the period closes; None means period_end.
    announce_date: date | None = None

    def __post_init__(self):
        for name in (
            "revenue", "revenue_yoy", "net_profit", "net_profit_yoy", "non_recurring_net_profit",
            "eps", "roe", "net_margin", "gross_margin", "pe", "pb", "current_ratio",
            "quick_ratio", "debt_to_asset", "fee_commission_ratio",
        ):
            _finite(name, getattr(self, name))

    @property
    def timestamp(self) -> datetime:
        return available_at(self.announce_date or self.period_end)


@dataclass(frozen=True)
class CapitalFlowRecord:
    date: date
    ddx_daily: float
    margin_balance: float
    margin_net_inflow: float
    institutional_holding_pct: float
    holding_qoq_change: float

    def __post_init__(self):
        for name in ("ddx_daily", "margin_balance", "margin_net_inflow",
                     "institutional_holding_pct", "holding_qoq_change"):
            _finite(name, getattr(self, name))

    @property
    def timestamp(self) -> datetime:
        return available_at(self.date)


@dataclass(frozen=True)
class NewsItem:
    ticker: str
    timestamp: datetime
    headline: str
    body: str = ""
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.headline.strip():
            raise ValidationError("headline", "must be non-empty")


@dataclass(frozen=True)
class SectorSnapshot:
    sector_id: str
    date: date
    index_level: float
    pct_change: float
    day_high: float
    day_low: float
    total_trading_value: float

    def __post_init__(self):
        for name in ("index_level", "pct_change", "day_high", "day_low", "total_trading_value"):
            _finite(name, getattr(self, name))
        if self.day_low > self.day_high:
            raise ValidationError("day_low", "day_low exceeds day_high")
        if not (self.day_low <= self.index_level <= self.day_high):
            raise ValidationError("index_level", "index level outside the day's range")

    @property
    def timestamp(self) -> datetime:
        return available_at(self.date)


@dataclass(frozen=True)
class RankPosition:
    metric: str
    scope: str
    rank: int
    size: int


@dataclass(frozen=True)
class PeerMetrics:
    """Same-sector instrument figures at the snapshot's trading date."""

    ticker: str
    pct_change: float | None
    turnover_rate: float | None
    volume: float | None
    turnover_value: float | None
    pe: float | None = None


@dataclass(frozen=True)
class MarketSnapshot:
    instrument: Instrument
    as_of: datetime
    bars: tuple[DailyBar, ...]
    fundamentals_history: tuple[FundamentalsRecord, ...] = ()
    flows: tuple[CapitalFlowRecord, ...] = ()
    news: tuple[NewsItem, ...] = ()
    sector: SectorSnapshot | None = None
    market_index: SectorSnapshot | None = None
    peers: tuple[PeerMetrics, ...] = ()
    ranks: tuple[RankPosition, ...] = field(default=())

    @property
    def fundamentals(self) -> FundamentalsRecord | None:
        return self.fundamentals_history[-1] if self.fundamentals_history else None

    @property
    def latest_bar(self) -> DailyBar:
        return self.bars[-1]

    def rank(self, metric: str, scope: str) -> RankPosition | None:
        for pos in self.ranks:
            if pos.metric == metric and pos.scope == scope:
                return pos
        return None

    def records(self):
        """Yield ``(kind, timestamp)`` for every record contained in the snapshot."""
        for bar in self.bars:
            yield "bar", bar.timestamp
        for rec in self.fundamentals_history:
            yield "fundamentals", rec.timestamp
        for rec in self.flows:
            yield "flow", rec.timestamp
        for item in self.news:
            yield "news", item.timestamp
        for sec in (self.sector, self.market_index):
            if sec is not None:
                yield "sector", sec.timestamp
