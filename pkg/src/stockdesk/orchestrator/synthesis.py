"""Deterministic template synthesis of a report from tool outputs."""

from __future__ import annotations

import re

from .. import tools as t
from ..analyscore.linters import find_phrases, forbidden_phrases
from ..report import Report, build_report, word_count
from ..tools import Signal, ToolKind, format_number
from .planning import BackgroundDoc

MAX_SUMMARY_WORDS = 20

_LEADS = {
    ToolKind.VOLUME_PRICE: "Volume and price analysis: ",
    ToolKind.TECHNICAL: "Technical analysis: ",
    ToolKind.CAPITAL_FLOW: "Capital flow analysis: ",
    ToolKind.FUNDAMENTAL: "Fundamental analysis: ",
    ToolKind.NEWS: "News analysis: ",
}

_SHORT_TERM = {
    Signal.BULLISH: "The technical picture is strengthening, warranting active attention and tracking for validation.",
    Signal.BEARISH: "The technical picture is weakening, calling for cautious observation and risk awareness.",
    Signal.NEUTRAL: "Technical signals are mixed, calling for tracking and observation until a direction is confirmed.",
}

_MEDIUM_LONG = {
    Signal.BULLISH: "The fundamentals are strengthening, warranting active attention and tracking for validation.",
    Signal.BEARISH: "The fundamentals are weakening, warranting caution and cautious observation with risk awareness.",
    Signal.NEUTRAL: "The fundamentals are mixed, calling for tracking and observation of the next reports.",
}

_SHORT_RESTATE = {
    Signal.BULLISH: "the short-term outlook is strengthening and merits active attention",
    Signal.BEARISH: "the short-term outlook is weakening and calls for cautious observation",
    Signal.NEUTRAL: "the short-term outlook is undecided and merits tracking",
}

_MEDIUM_RESTATE = {
    Signal.BULLISH: "the medium/long-term outlook is strengthening and merits active attention",
    Signal.BEARISH: "the medium/long-term outlook warrants caution",
    Signal.NEUTRAL: "the medium/long-term outlook is undecided and merits observation",
}

# Neutral substitutes for avoid-list wording that may arrive in source text.
_REPLACEMENTS = {
    "according to": "per",
    "information shows": "data indicate",
    "recent performance": "latest trading",
    "current situation": "present state",
    "comprehensive analysis": "full review",
    "buy": "purchase",
    "sell": "dispose of",
    "hold": "keep",
    "clear position": "exit the stake",
    "build position": "open a stake",
    "reduce position": "trim the stake",
    "increase position": "add to the stake",
}


class SynthesisError(ValueError):
    pass


def scrub(text: str) -> str:
    """Replace avoid-list phrases with neutral wording."""
    phrases = forbidden_phrases()
    for _ in range(3):
        hits = find_phrases(text, phrases)
        if not hits:
            break
        # rewrite right to left so earlier positions stay valid
        for v in sorted(hits, key=lambda v: v.position, reverse=True):
            pattern = re.compile(r"\s+".join(map(re.escape, v.phrase.split())), re.IGNORECASE)
            end = pattern.match(text, v.position).end()
            text = text[:v.position] + _REPLACEMENTS.get(v.phrase, "") + text[end:]
    return text


def truncate_words(text: str, limit: int = MAX_SUMMARY_WORDS) -> str:
    if word_count(text) <= limit:
        return text
    words = text.split()
    while words and word_count(" ".join(words)) > limit:
        words.pop()
    return " ".join(words).rstrip(",;:") + "."


def _subject(name: str) -> str:
    # the instrument name is not a finding; keep digits out of the summary
    return name if name and not any(c.isdigit() for c in name) else "The stock"


def movement_summary(bg: BackgroundDoc) -> str:
    vp = bg.section(ToolKind.VOLUME_PRICE)
    news = bg.section(ToolKind.NEWS)
    name = _subject(bg.instrument_name)
    unusual = vp is not None and vp.get(t.L_UNUSUAL) == "yes"
    head = f"{name} shows unusual movement" if unusual else f"{name} shows no unusual movement"
    catalyst = news.get(t.L_CATALYST) if news is not None else None
    if catalyst:
        text = f"{head}; main catalyst: {catalyst}."
    elif vp is not None and vp.get(t.L_TURNOVER) is not None:
        text = f"{head}, with turnover at {format_number(vp.get(t.L_TURNOVER))}%."
    else:
        text = f"{head}."
    return truncate_words(scrub(text))


def _pct_text(value: float) -> str:
    return f"{format_number(abs(value))}%"


def technical_reason(report: t.ToolReport) -> str:
    rules = t.DEFAULT_RULES
    f = report.get
    if report.signal is Signal.BULLISH:
        for cross, age in ((t.L_MACD_CROSS, t.L_MACD_CROSS_AGE), (t.L_RSI_CROSS, t.L_RSI_CROSS_AGE)):
            if f(cross) == "golden" and f(age) is not None and f(age) <= rules.cross_lookback:
                name = "MACD" if cross == t.L_MACD_CROSS else "RSI"
                return f"a {name} golden cross formed {format_number(f(age))} sessions ago"
        if f(t.L_ENGULF_KEY) is not None:
            return f"the bullish engulfing support at {format_number(f(t.L_ENGULF_KEY))} is intact"
        return "trend and momentum indicators lean upward"
    if report.signal is Signal.BEARISH:
        for cross, age in ((t.L_MACD_CROSS, t.L_MACD_CROSS_AGE), (t.L_RSI_CROSS, t.L_RSI_CROSS_AGE)):
            if f(cross) == "death" and f(age) is not None and f(age) <= rules.cross_lookback:
                name = "MACD" if cross == t.L_MACD_CROSS else "RSI"
                return f"a {name} death cross formed {format_number(f(age))} sessions ago"
        if f(t.L_MA_POSITION) == "below all":
            return "the close sits below all its moving averages"
        return "trend and momentum indicators lean downward"
    return "trend and momentum indicators point in different directions"


def fundamental_reason(report: t.ToolReport) -> str:
    rev, profit = report.get(t.L_REVENUE_YOY), report.get(t.L_PROFIT_YOY)
    if rev is None or profit is None:
        return "the latest report gives no clear direction"
    rev_move = "grew" if rev > 0 else "fell" if rev < 0 else "was flat"
    profit_move = "grew" if profit > 0 else "fell" if profit < 0 else "was flat"
    text = (f"revenue {rev_move} {_pct_text(rev)} and net profit {profit_move} {_pct_text(profit)} "
            f"year over year")
    direction = report.get(t.L_CURRENT_DIR)
    if direction in ("rising", "falling"):
        text += f" with a {direction} current ratio"
    return text


def final_summary(technical: t.ToolReport, fundamental: t.ToolReport) -> str:
    short = _SHORT_RESTATE[technical.signal]
    medium = _MEDIUM_RESTATE[fundamental.signal]
    return (f"In summary, {short} because {technical_reason(technical)}. "
            f"{medium[0].upper() + medium[1:]} because {fundamental_reason(fundamental)}.")


def synthesize_template(bg: BackgroundDoc) -> Report:
    """Build the four-step report from the background sections alone.

    Detail paragraphs reuse each tool's narrative, so every figure appears
    exactly as the tool rendered it.
    """
    technical = bg.section(ToolKind.TECHNICAL)
    fundamental = bg.section(ToolKind.FUNDAMENTAL)
    missing = [k for k, r in (("technical", technical), ("fundamental", fundamental)) if r is None]
    if missing:
        raise SynthesisError(f"template synthesis needs {' and '.join(missing)} analysis")
    sections = [(s.kind.value, _LEADS[s.kind] + scrub(s.narrative)) for s in bg.sections]
    return build_report(
        movement_summary(bg),
        _SHORT_TERM[technical.signal],
        _MEDIUM_LONG[fundamental.signal],
        sections,
        final_summary(technical, fundamental),
    )
