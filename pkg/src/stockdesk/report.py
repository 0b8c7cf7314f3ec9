"""The synthesized analysis report and its plain-text layout.

``full_text`` is laid out under four literal step headings so that text from
any source (template or external model) can be split back into parts.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field

STEP_MOVEMENT = "Step 1: Movement Summary"
STEP_CONCLUSIONS = "Step 2: Conclusions"
STEP_DETAILS = "Step 3: Detailed Analysis"
STEP_FINAL = "Step 4: Final Summary"
STEP_HEADINGS = (STEP_MOVEMENT, STEP_CONCLUSIONS, STEP_DETAILS, STEP_FINAL)

SHORT_PREFIX = "Short-term Conclusion:"
MEDIUM_PREFIX = "Medium/Long-term Conclusion:"

UNKNOWN_SECTION = "unknown"

# Lead phrases used to recognise which analysis a detail paragraph covers.
_SECTION_CUES = (
    ("volume_price", ("volume and price", "price and volume", "volume/price", "volume-price")),
    ("technical", ("technical",)),
    ("capital_flow", ("capital flow", "capital-flow", "fund flow")),
    ("fundamental", ("fundamental", "financial")),
    ("news", ("news",)),
)


def word_count(text: str) -> int:
    """Whitespace-delimited tokens, after stripping punctuation from each."""
    return sum(1 for tok in text.split() if tok.strip(string.punctuation + "—–"))


@dataclass(frozen=True)
class Report:
    movement_summary: str
    short_term_conclusion: str
    medium_long_conclusion: str
    detail_sections: tuple[tuple[str, str], ...]
    final_summary: str
    full_text: str
    parse_warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        out = {
            "movement_summary": self.movement_summary,
            "short_term_conclusion": self.short_term_conclusion,
            "medium_long_conclusion": self.medium_long_conclusion,
            "detail_sections": [{"kind": k, "paragraph": p} for k, p in self.detail_sections],
            "final_summary": self.final_summary,
            "full_text": self.full_text,
        }
        if self.parse_warnings:
            out["parse_warnings"] = list(self.parse_warnings)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def body_text(self) -> str:
        """The written parts without step headings or conclusion prefixes."""
        parts = [self.movement_summary, self.short_term_conclusion, self.medium_long_conclusion]
        parts += [p for _, p in self.detail_sections]
        parts.append(self.final_summary)
        return "\n".join(parts)

    @classmethod
    def from_dict(cls, obj: dict) -> "Report":
        sections = []
        for item in obj.get("detail_sections", []):
            if isinstance(item, dict):
                sections.append((str(item.get("kind", UNKNOWN_SECTION)), str(item.get("paragraph", ""))))
            else:
                kind, paragraph = item
                sections.append((str(kind), str(paragraph)))
        return cls(
            movement_summary=obj.get("movement_summary", ""),
            short_term_conclusion=obj.get("short_term_conclusion", ""),
            medium_long_conclusion=obj.get("medium_long_conclusion", ""),
            detail_sections=tuple(sections),
            final_summary=obj.get("final_summary", ""),
            full_text=obj.get("full_text", ""),
            parse_warnings=tuple(obj.get("parse_warnings", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def render_full_text(movement_summary: str, short_term: str, medium_long: str,
                     paragraphs: list[str] | tuple[str, ...], final_summary: str) -> str:
    blocks = [
        f"{STEP_MOVEMENT}\n{movement_summary}",
        f"{STEP_CONCLUSIONS}\n{SHORT_PREFIX} {short_term}\n{MEDIUM_PREFIX} {medium_long}",
        STEP_DETAILS + "\n" + "\n\n".join(paragraphs),
        f"{STEP_FINAL}\n{final_summary}",
    ]
    return "\n\n".join(blocks) + "\n"


def build_report(movement_summary: str, short_term: str, medium_long: str,
                 sections: list[tuple[str, str]], final_summary: str) -> Report:
    full = render_full_text(movement_summary, short_term, medium_long, [p for _, p in sections], final_summary)
    return Report(movement_summary, short_term, medium_long, tuple(sections), final_summary, full)


def infer_section_kind(paragraph: str) -> str | None:
    head = paragraph.lower()[:80]
    best = None
    for kind, cues in _SECTION_CUES:
        for cue in cues:
            pos = head.find(cue)
            if pos != -1 and (best is None or pos < best[0]):
                best = (pos, kind)
    return best[1] if best else None


_HEADING_RE = re.compile(
    r"^[#*\s]*(step\s*([1-4])\s*[:.\-]?\s*[^\n]*?)[*\s]*$", re.IGNORECASE | re.MULTILINE
)


def _split_steps(text: str) -> dict[int, str]:
    matches = list(_HEADING_RE.finditer(text))
    out: dict[int, str] = {}
    for i, m in enumerate(matches):
        step = int(m.group(2))
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        out.setdefault(step, text[m.end():end].strip())
    return out


def _strip_prefix(line: str, prefixes: tuple[str, ...]) -> str | None:
    cleaned = line.strip().lstrip("-*# ").replace("**", "")
    low = cleaned.lower()
    for p in prefixes:
        if low.startswith(p.lower()):
            return cleaned[len(p):].strip()
    return None


_SHORT_CUES = (SHORT_PREFIX, "Short-term conclusion:", "Short term conclusion:", "Short-term:")
_MEDIUM_CUES = (MEDIUM_PREFIX, "Medium/long-term conclusion:", "Medium to long-term conclusion:",
                "Medium-term conclusion:", "Medium/Long-term:", "Long-term conclusion:")


def parse_report_text(text: str, section_hint: list[str] | tuple[str, ...] = ()) -> Report:
    """Split generated text into report parts using the four step headings.

    Text without any recognisable heading is preserved in ``full_text`` with a
    parse warning and empty parts. Detail paragraphs whose analysis kind can't
    be recognised from their wording fall back to ``section_hint`` order.
    """
    warnings: list[str] = []
    steps = _split_steps(text)
    if not steps:
        return Report("", "", "", (), "", text, ("no step headings found; text kept unparsed",))
    for n, heading in enumerate(STEP_HEADINGS, start=1):
        if n not in steps:
            warnings.append(f"missing heading: {heading}")

    movement = " ".join(steps.get(1, "").split())

    short = medium = ""
    for line in steps.get(2, "").splitlines():
        value = _strip_prefix(line, _SHORT_CUES)
        if value is not None:
            short = value
            continue
        value = _strip_prefix(line, _MEDIUM_CUES)
        if value is not None:
            medium = value
    if steps.get(2) and not (short and medium):
        warnings.append("could not identify both conclusions in step 2")

    paragraphs = [" ".join(p.split()) for p in re.split(r"\n\s*\n", steps.get(3, "")) if p.strip()]
    sections = []
    for i, para in enumerate(paragraphs):
        kind = infer_section_kind(para)
        if kind is None:
            if i < len(section_hint):
                kind = section_hint[i]
                warnings.append(f"detail paragraph {i + 1}: kind taken from position ({kind})")
            else:
                kind = UNKNOWN_SECTION
                warnings.append(f"detail paragraph {i + 1}: kind not recognised")
        sections.append((kind, para))

    final = " ".join(steps.get(4, "").split())
    return Report(movement, short, medium, tuple(sections), final, text, tuple(warnings))
