from .io import HEADERS, IngestError, RecordKind
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
    ValidationError,
)
from .store import (
    BAR_WINDOW,
    EmptyHistoryError,
    MarketStore,
    Ranking,
    RankEntry,
    StoreError,
    UnknownTickerError,
    as_instant,
    competition_rank,
)

__all__ = [
    "BAR_WINDOW",
    "CapitalFlowRecord",
    "DailyBar",
    "EmptyHistoryError",
    "FundamentalsRecord",
    "HEADERS",
    "IngestError",
    "Instrument",
    "MARKET_INDEX_ID",
    "MarketSnapshot",
    "MarketStore",
    "NewsItem",
    "PeerMetrics",
    "RankEntry",
    "RankPosition",
    "Ranking",
    "RecordKind",
    "SectorSnapshot",
    "StoreError",
    "UnknownTickerError",
    "ValidationError",
    "as_instant",
    "competition_rank",
]
