"""Prompt document assembly for an external text-generation backend."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .. import resources
from .planning import BackgroundDoc

FEWSHOT_FILES = ("example_bullish.json", "example_bearish.json")


@dataclass(frozen=True)
class FewShot:
    """One worked example: background text and the reference analysis for it."""

    background: str
    question: str
    analysis: str

    @classmethod
    def from_dict(cls, obj: dict) -> "FewShot":
        return cls(obj["background"], obj["question"], obj["analysis"])


@dataclass(frozen=True)
class PromptBlock:
    name: str
    text: str


@dataclass(frozen=True)
class PromptDocument:
    blocks: tuple[PromptBlock, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(b.name for b in self.blocks)

    def block(self, name: str) -> PromptBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def render(self) -> str:
        return "\n\n".join(b.text for b in self.blocks)

    def messages(self) -> list[dict]:
        """Chat-completion message list: system instructions plus the document."""
        return [
            {"role": "system", "content": resources.read_text("prompts", "system.txt").strip()},
            {"role": "user", "content": self.render()},
        ]


def load_fewshots(names: Sequence[str] = FEWSHOT_FILES) -> list[FewShot]:
    return [FewShot.from_dict(json.loads(resources.read_text("fewshots", n))) for n in names]


def build_prompt(bg: BackgroundDoc, fewshots: Sequence[FewShot] = ()) -> PromptDocument:
    """Background, response standards, writing guidelines, examples, then the query.

    The examples block is omitted when ``fewshots`` is empty.
    """
    preamble = resources.read_text("prompts", "preamble.txt").strip()
    blocks = [
        PromptBlock("background", f"{preamble}\n\n[Background Information]\n{bg.render()}"),
        PromptBlock("response_standards",
                    "[Response Standards]\n" + resources.read_text("prompts", "response_standards.txt").strip()),
        PromptBlock("writing_guidelines",
                    "[Writing Guidelines]\n" + resources.read_text("prompts", "writing_guidelines.txt").strip()),
    ]
    if fewshots:
        parts = []
        for i, shot in enumerate(fewshots, start=1):
            parts.append(f"Example {i}\n[Background Information]\n{shot.background}\n"
                         f"[Question]\n{shot.question}\n[Analysis]\n{shot.analysis}")
        blocks.append(PromptBlock("fewshots", "[Examples]\n" + "\n\n".join(parts)))
    blocks.append(PromptBlock("query", f"[Question]\n{bg.question}"))
    return PromptDocument(tuple(blocks))
