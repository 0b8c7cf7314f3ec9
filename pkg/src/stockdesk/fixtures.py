"""Deterministic market-data stores for tests, demos and the acceptance suite.

``reference_store()`` holds one securities-sector instrument (TF Securities)
whose 2024-10-16 session carries a fixed set of published figures, inside a
universe sized so that its market and sector rankings come out at known
positions. ``synthetic_store(seed)`` builds small random stores for property
checks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta

from .marketdata import (
    MARKET_INDEX_ID,
    CapitalFlowRecord,
    DailyBar,
    FundamentalsRecord,
    Instrument,
    MarketStore,
    NewsItem,
    RecordKind,
    SectorSnapshot,
)

REFERENCE_TICKER = "601162"
REFERENCE_NAME = "TF Securities"
REFERENCE_SECTOR = "securities"
REFERENCE_DATE = date(2024, 10, 16)
REFERENCE_QUERY = "Please analyze TF Securities."

# float shares chosen so that the reference volume gives a 17.65% turnover rate
REFERENCE_FLOAT = 866_556_000.0
REFERENCE_VOLUME = 152_947_000.0
REFERENCE_VALUE = 6_970_000_000.0

# exchange holidays inside the reference window
_HOLIDAYS = {date(2024, 9, 16), date(2024, 9, 17)} | {date(2024, 10, d) for d in range(1, 8)}


def trading_days(start: date, end: date, holidays=frozenset()) -> list[date]:
    days, d = [], start
    while d <= end:
        if d.weekday() < 5 and d not in holidays:
            days.append(d)
        d += timedelta(days=1)
    return days


# (date, open, high, low, close) from the engulfing session to the reference date
_LATE_PATH = [
    (date(2024, 9, 12), 2.80, 2.81, 2.73, 2.74),
    (date(2024, 9, 13), 2.70, 2.85, 2.68, 2.83),
    (date(2024, 9, 18), 2.84, 2.88, 2.80, 2.86),
    (date(2024, 9, 19), 2.87, 2.92, 2.85, 2.90),
    (date(2024, 9, 20), 2.90, 2.93, 2.86, 2.88),
    (date(2024, 9, 23), 2.89, 2.95, 2.88, 2.93),
    (date(2024, 9, 24), 2.96, 3.12, 2.95, 3.10),
    (date(2024, 9, 25), 3.12, 3.25, 3.08, 3.21),
    (date(2024, 9, 26), 3.25, 3.53, 3.22, 3.53),
    (date(2024, 9, 27), 3.60, 3.88, 3.58, 3.88),
    (date(2024, 9, 30), 3.95, 4.27, 3.93, 4.27),
    (date(2024, 10, 8), 4.50, 4.70, 4.30, 4.62),
    (date(2024, 10, 9), 4.55, 4.60, 4.16, 4.20),
    (date(2024, 10, 10), 4.25, 4.45, 4.18, 4.38),
    (date(2024, 10, 11), 4.36, 4.40, 4.12, 4.16),
    (date(2024, 10, 14), 4.20, 4.38, 4.18, 4.33),
    (date(2024, 10, 15), 4.35, 4.50, 4.30, 4.44),
    (date(2024, 10, 16), 4.46, 4.58, 4.40, 4.48),
]

_DDX_LAST5 = (-3.2, -2.915, -4.1, -1.85, -2.8)


def _reference_bars() -> list[DailyBar]:
    early = trading_days(date(2024, 6, 3), date(2024, 9, 11), _HOLIDAYS)
    rng = random.Random(20241016)
    bars = []
    # steady decline towards the engulfing session, with small alternating noise
    start, stop = 3.30, 2.80
    for i, d in enumerate(early):
        level = start + (stop - start) * i / (len(early) - 1)
        close = round(level + (0.02 if i % 2 else -0.02), 2)
        open_ = round(close + (0.03 if i % 3 else -0.01), 2)
        high = round(max(open_, close) + 0.03, 2)
        low = round(min(open_, close) - 0.03, 2)
        vol = float(rng.randint(40, 90)) * 1e6
        bars.append(DailyBar(d, open_, high, low, close, vol, round(vol * close, 0)))
    for i, (d, o, h, lo, c) in enumerate(_LATE_PATH):
        if d == REFERENCE_DATE:
            vol, value = REFERENCE_VOLUME, REFERENCE_VALUE
        else:
            vol = float(60 + 6 * i) * 1e6
            value = round(vol * c, 0)
        bars.append(DailyBar(d, o, h, lo, c, vol, value))
    return bars


def _reference_flows(days: list[date]) -> list[CapitalFlowRecord]:
    out = []
    tail = days[-len(_DDX_LAST5):]
    for i, d in enumerate(days[-20:]):
        if d in tail:
            ddx = _DDX_LAST5[tail.index(d)]
        else:
            ddx = round(0.4 * ((i % 5) - 2), 3)
        out.append(CapitalFlowRecord(
            date=d,
            ddx_daily=ddx,
            margin_balance=2_600_000_000.0 + 25_000_000.0 * i,
            margin_net_inflow=25_000_000.0 + 1_000_000.0 * i,
            institutional_holding_pct=9.84,
            holding_qoq_change=0.65,
        ))
    return out


def _reference_fundamentals() -> list[FundamentalsRecord]:
    def rec(period_end, announce, revenue, rev_yoy, profit, profit_yoy, nonrec, eps, roe,
            cur, quick, debt, pe):
        return FundamentalsRecord(
            period_end=period_end, revenue=revenue, revenue_yoy=rev_yoy, net_profit=profit,
            net_profit_yoy=profit_yoy, non_recurring_net_profit=nonrec, eps=eps, roe=roe,
            net_margin=round(100.0 * profit / revenue, 2), gross_margin=21.35, pe=pe, pb=1.58,
            current_ratio=cur, quick_ratio=quick, debt_to_asset=debt, fee_commission_ratio=131.22,
            announce_date=announce,
        )

    return [
        rec(date(2023, 12, 31), date(2024, 4, 26), 3_420_000_000.0, 10.41, 204_000_000.0, 35.62,
            151_000_000.0, 0.02, 0.75, 1.61, 1.58, 71.20, 171.35),
        rec(date(2024, 3, 31), date(2024, 4, 30), 520_000_000.0, -41.32, -108_000_000.0, -183.06,
            -121_000_000.0, -0.01, -0.39, 1.55, 1.51, 70.85, 188.20),
        rec(date(2024, 6, 30), date(2024, 8, 30), 1_108_000_000.0, -37.86, -186_000_000.0, -146.21,
            -203_000_000.0, -0.02, -0.67, 1.42, 1.38, 69.47, 205.64),
    ]


def _reference_news() -> list[NewsItem]:
    def at(d: date, hh: int, mm: int = 0) -> datetime:
        return datetime.combine(d, time(hh, mm))

    return [
        NewsItem(REFERENCE_TICKER, at(date(2024, 8, 30), 18),
                 "Interim report shows lower revenue and a net loss for the first half",
                 "Brokerage and proprietary trading income declined from a year earlier.", ("earnings",)),
        NewsItem(REFERENCE_TICKER, at(date(2024, 10, 12), 10),
                 "New party secretary appointed by the controlling shareholder",
                 "The parent group announced the appointment at a cadre meeting.", ("governance",)),
        NewsItem(REFERENCE_TICKER, at(date(2024, 10, 15), 9, 30),
                 "Cadre meeting stresses annual operating goals under the new leadership",
                 "", ("governance",)),
        NewsItem(REFERENCE_TICKER, at(date(2024, 10, 16), 11, 30),
                 "Heavy market-wide trading lifts securities sector activity",
                 "Combined exchange turnover stayed above two trillion yuan for another session.",
                 ("catalyst", "sector")),
    ]


_SYLLABLES = ("an", "bao", "chang", "da", "fu", "guo", "hai", "heng", "hua", "jia", "jin", "kai",
              "lian", "long", "ming", "nan", "ping", "qi", "rui", "sheng", "tai", "tong", "wei",
              "xin", "yang", "yuan", "ze", "zhong")
_SUFFIXES = ("Technology", "Materials", "Holdings", "Pharmaceutical", "Electric", "Logistics",
             "Foods", "Machinery", "Energy", "Chemical")


def company_names(rng: random.Random, count: int, suffixes=_SUFFIXES) -> list[str]:
    names: list[str] = []
    seen = set()
    while len(names) < count:
        stem = (rng.choice(_SYLLABLES) + rng.choice(_SYLLABLES)).capitalize()
        name = f"{stem} {rng.choice(suffixes)}"
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


@dataclass(frozen=True)
class _Filler:
    ticker: str
    sector: str
    pct: float
    turnover: float
    volume: float


def _two_day_bars(prev_day: date, day: date, f: _Filler, rng: random.Random) -> tuple[float, list[DailyBar]]:
    prev_close = round(rng.uniform(4.0, 60.0), 2)
    close = prev_close * (1 + f.pct / 100.0)
    float_shares = round(100.0 * f.volume / f.turnover, 0)
    bars = [
        DailyBar(prev_day, prev_close, prev_close * 1.01, prev_close * 0.99, prev_close,
                 f.volume * 0.8, f.volume * 0.8 * prev_close),
        DailyBar(day, prev_close, max(prev_close, close) * 1.005, min(prev_close, close) * 0.995, close,
                 f.volume, f.volume * close),
    ]
    return float_shares, bars


def reference_store() -> MarketStore:
    """TF Securities with 19 sector peers and 1,288 other listed instruments.

    On the reference date TF Securities ranks 896th in the market and 8th in
    its sector by price change, 102nd in the market and 1st in its sector by
    turnover rate, and 1st everywhere by volume.
    """
    rng = random.Random(1580)
    store = MarketStore()
    tf = Instrument(REFERENCE_TICKER, REFERENCE_NAME, REFERENCE_SECTOR, REFERENCE_FLOAT,
                    ("Tianfeng Securities",))
    bars = _reference_bars()
    days = [b.date for b in bars]
    prev_day = days[-2]

    fillers: list[_Filler] = []
    # sector peers: 7 rose more, 12 rose less; all trade less actively
    for i in range(19):
        pct = rng.uniform(1.0, 4.5) if i < 7 else rng.uniform(-3.0, 0.8)
        fillers.append(_Filler(f"6{i + 1:05d}", REFERENCE_SECTOR, pct, rng.uniform(1.5, 9.0),
                               rng.uniform(10e6, 120e6)))
    # rest of the market: 888 rose more (101 of them with higher turnover), 400 rose less
    for i in range(1288):
        pct = rng.uniform(1.0, 9.9) if i < 888 else rng.uniform(-9.9, 0.8)
        turnover = rng.uniform(18.0, 40.0) if i < 101 else rng.uniform(0.3, 17.0)
        fillers.append(_Filler(f"{300001 + i:06d}", f"sector_{i % 12:02d}", pct, turnover,
                               rng.uniform(1e6, 140e6)))

    names = company_names(rng, len(fillers), _SUFFIXES + ("Securities",))
    instruments = [(tf.ticker, tf)]
    filler_bars = []
    for f, name in zip(fillers, names):
        float_shares, fb = _two_day_bars(prev_day, REFERENCE_DATE, f, rng)
        instruments.append((f.ticker, Instrument(f.ticker, name, f.sector, float_shares)))
        filler_bars += [((f.ticker, b.date), b) for b in fb]
    store.add(RecordKind.INSTRUMENTS, instruments)
    store.add(RecordKind.BARS, [((tf.ticker, b.date), b) for b in bars] + filler_bars)
    store.add(RecordKind.FLOWS, [((tf.ticker, r.date), r) for r in _reference_flows(days)])
    fundamentals = _reference_fundamentals()
    peer_fund = []
    for f in fillers[:19]:
        base = fundamentals[-1]
        peer_fund.append(((f.ticker, base.period_end), FundamentalsRecord(
            **{**base.__dict__, "pe": round(rng.uniform(12.0, 60.0), 2), "revenue_yoy": rng.uniform(-20, 20)})))
    store.add(RecordKind.FUNDAMENTALS, [((tf.ticker, r.period_end), r) for r in fundamentals] + peer_fund)
    store.add(RecordKind.NEWS, [((n.ticker, n.timestamp, n.headline), n) for n in _reference_news()])
    store.add(RecordKind.SECTORS, [
        ((REFERENCE_SECTOR, prev_day), SectorSnapshot(REFERENCE_SECTOR, prev_day, 1579.44, 1.12, 1601.20,
                                                      1560.05, 81_420_000_000.0)),
        ((REFERENCE_SECTOR, REFERENCE_DATE), SectorSnapshot(REFERENCE_SECTOR, REFERENCE_DATE, 1580.86, 0.09,
                                                            1623.79, 1553.31, 75_187_000_000.0)),
        ((MARKET_INDEX_ID, prev_day), SectorSnapshot(MARKET_INDEX_ID, prev_day, 3201.29, -2.53, 3286.62,
                                                     3197.38, 892_300_000_000.0)),
        ((MARKET_INDEX_ID, REFERENCE_DATE), SectorSnapshot(MARKET_INDEX_ID, REFERENCE_DATE, 3189.89, -0.36,
                                                           3215.46, 3170.12, 801_400_000_000.0)),
    ])
    return store


# -- synthetic stores ---------------------------------------------------------

_HEADLINE_TEMPLATES = (
    "{name} wins a new supply contract",
    "{name} reports quarterly revenue growth of {pct}%",
    "Sector rotation lifts {sector} names",
    "{name} announces share repurchase plan",
    "Analysts say investors should buy {name} on weakness",
    "{name} shareholder plans to sell a {pct}% stake",
    "Regulator approves {name} capacity expansion",
    "{name} board reviews the current situation of its overseas unit",
)


@dataclass(frozen=True)
class SyntheticCase:
    store: MarketStore
    ticker: str
    name: str
    query: str
    as_of: date


def synthetic_store(seed: int, n_bars: int = 70, n_peers: int = 4) -> SyntheticCase:
    """A small random store with complete data for one target instrument."""
    rng = random.Random(seed)
    days = trading_days(date(2024, 1, 2), date(2024, 12, 31))[:n_bars]
    sector = rng.choice(("chemicals", "machinery", "pharma", "software", "banks"))
    names = company_names(rng, n_peers + 1)
    tickers = [f"{rng.randint(0, 3)}{i:05d}" for i in range(1, n_peers + 2)]
    store = MarketStore()
    instruments = [(t, Instrument(t, n, sector, rng.uniform(2e8, 5e9))) for t, n in zip(tickers, names)]
    store.add(RecordKind.INSTRUMENTS, instruments)

    bars, flows, fundamentals = [], [], []
    for t, inst in instruments:
        price = rng.uniform(3.0, 80.0)
        vol_scale = inst.float_shares * rng.uniform(0.005, 0.08)
        for d in days:
            change = rng.gauss(0.0, 0.025)
            open_ = price * (1 + rng.gauss(0.0, 0.01))
            close = max(0.5, price * (1 + change))
            high = max(open_, close) * (1 + abs(rng.gauss(0.0, 0.01)))
            low = min(open_, close) * (1 - abs(rng.gauss(0.0, 0.01)))
            volume = vol_scale * rng.uniform(0.3, 3.0)
            bars.append(((t, d), DailyBar(d, round(open_, 2), round(high, 2), round(low, 2), round(close, 2),
                                          round(volume), round(volume * close))))
            price = close
        for d in days[-20:]:
            flows.append(((t, d), CapitalFlowRecord(
                d, round(rng.uniform(-4.0, 4.0), 3), rng.uniform(1e8, 5e9), rng.uniform(-5e7, 5e7),
                round(rng.uniform(0.5, 30.0), 2), round(rng.uniform(-3.0, 3.0), 2))))
        for k, period_end in enumerate((date(2023, 9, 30), date(2023, 12, 31))):
            revenue = rng.uniform(5e8, 5e10)
            profit = revenue * rng.uniform(-0.1, 0.25)
            fundamentals.append(((t, period_end), FundamentalsRecord(
                period_end=period_end, revenue=revenue, revenue_yoy=rng.uniform(-40, 40), net_profit=profit,
                net_profit_yoy=rng.uniform(-80, 80), non_recurring_net_profit=profit * 0.9,
                eps=rng.uniform(-0.5, 3.0), roe=rng.uniform(-5, 25), net_margin=100 * profit / revenue,
                gross_margin=rng.uniform(5, 60), pe=rng.uniform(5, 120), pb=rng.uniform(0.5, 10),
                current_ratio=rng.uniform(0.6, 3.0), quick_ratio=rng.uniform(0.4, 2.5),
                debt_to_asset=rng.uniform(10, 85), fee_commission_ratio=rng.uniform(0, 100),
                announce_date=period_end + timedelta(days=30))))
    store.add(RecordKind.BARS, bars)
    store.add(RecordKind.FLOWS, flows)
    store.add(RecordKind.FUNDAMENTALS, fundamentals)

    target, name = tickers[0], names[0]
    news = []
    for _ in range(rng.randint(1, 4)):
        d = rng.choice(days[-15:])
        headline = rng.choice(_HEADLINE_TEMPLATES).format(
            name=name, sector=sector, pct=round(rng.uniform(1, 30), 1))
        tags = ("catalyst",) if rng.random() < 0.4 else ()
        news.append(((target, datetime.combine(d, time(9, 0)), headline),
                     NewsItem(target, datetime.combine(d, time(9, 0)), headline, "", tags)))
    store.add(RecordKind.NEWS, news)

    sectors = []
    for sid in (sector, MARKET_INDEX_ID):
        level = rng.uniform(800, 4000)
        for d in days[-3:]:
            sectors.append(((sid, d), SectorSnapshot(sid, d, round(level, 2), round(rng.uniform(-3, 3), 2),
                                                     round(level * 1.01, 2), round(level * 0.99, 2),
                                                     rng.uniform(1e9, 1e12))))
    store.add(RecordKind.SECTORS, sectors)
    return SyntheticCase(store, target, name, f"Please analyze {name}.", days[-1])
