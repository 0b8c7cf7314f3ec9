"""Chat-completion client used by the model-backed synthesizer."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Sequence

import httpx

from ..report import Report, parse_report_text
from .planning import BackgroundDoc
from .prompt import FewShot, build_prompt

logger = logging.getLogger(__name__)

_TOKEN_LIMIT_MARKERS = ("max_tokens", "maximum context", "context length", "context_length", "token limit",
                        "too many tokens")


DEFAULT_RESPONSE_POINTER = "/choices/0/message/content"


class BackendError(RuntimeError):
    """The backend could not produce a completion."""


class BackendUnavailableError(BackendError):
    """Transport or server failure that persisted through every retry."""


class BackendConfigError(BackendError):
    """The request was rejected because of its configuration (e.g. token limits)."""


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str
    model_id: str
    max_output_tokens: int = 8000
    temperature: float = 0.5
    timeout_s: float = 60.0
    max_retries: int = 2
    retry_backoff_s: float = 0.5
    api_key: str | None = None
    response_pointer: str = DEFAULT_RESPONSE_POINTER

    def __post_init__(self):
        if not self.endpoint:
            raise BackendConfigError("backend endpoint is required")
        if not self.model_id:
            raise BackendConfigError("backend model_id is required")
        if self.max_output_tokens < 1:
            raise BackendConfigError("max_output_tokens must be >= 1")
        if not 0.0 <= self.temperature <= 2.0:
            raise BackendConfigError("temperature must be within [0, 2]")
        if self.max_retries < 0:
            raise BackendConfigError("max_retries must be >= 0")
        if not self.response_pointer.startswith("/"):
            raise BackendConfigError("response_pointer must be a JSON pointer starting with '/'")


def request_payload(bg: BackgroundDoc, cfg: BackendConfig, fewshots: Sequence[FewShot] = ()) -> dict:
    return {
        "model": cfg.model_id,
        "messages": build_prompt(bg, fewshots).messages(),
        "max_tokens": cfg.max_output_tokens,
        "temperature": cfg.temperature,
    }


def resolve_pointer(doc, pointer: str):
    """Follow a JSON pointer (``/a/0/b``) through nested dicts and lists."""
    node = doc
    for raw in pointer.split("/")[1:]:
        token = raw.replace("~1", "/").replace("~0", "~")
        if isinstance(node, list):
            if not token.isdigit():
                raise KeyError(token)
            node = node[int(token)]
        elif isinstance(node, dict):
            node = node[token]
        else:
            raise KeyError(token)
    return node


def _completion_text(body, pointer: str = DEFAULT_RESPONSE_POINTER) -> str:
    try:
        content = resolve_pointer(body, pointer)
    except (KeyError, IndexError):
        raise BackendError(f"backend response has nothing at {pointer}") from None
    if not isinstance(content, str):
        raise BackendError("backend completion content is not text")
    return content


def _is_token_limit(resp: httpx.Response) -> bool:
    if resp.status_code == 413:
        return True
    text = resp.text.lower()
    return any(m in text for m in _TOKEN_LIMIT_MARKERS)


def complete(payload: dict, cfg: BackendConfig, client: httpx.Client | None = None) -> str:
    """POST ``payload`` and return the completion text, retrying transient failures."""
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    own = client is None
    client = client or httpx.Client(timeout=cfg.timeout_s)
    try:
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(cfg.retry_backoff_s * attempt)
            try:
                resp = client.post(cfg.endpoint, json=payload, headers=headers)
            except httpx.TransportError as exc:
                last_error = exc
                logger.warning("backend transport error (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = BackendError(f"backend returned HTTP {resp.status_code}")
                logger.warning("backend HTTP %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                if _is_token_limit(resp):
                    raise BackendConfigError(f"backend rejected the token limits: {resp.text[:200]}")
                raise BackendError(f"backend returned HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                body = resp.json()
            except ValueError:
                raise BackendError("backend response is not JSON") from None
            return _completion_text(body, cfg.response_pointer)
        raise BackendUnavailableError(f"backend failed after {cfg.max_retries + 1} attempts: {last_error}")
    finally:
        if own:
            client.close()


def synthesize_llm(bg: BackgroundDoc, cfg: BackendConfig, fewshots: Sequence[FewShot] = (),
                   client: httpx.Client | None = None) -> Report:
    """Have the backend write the report and split it into its parts.

    Text that lacks the step headings is kept whole in ``full_text`` with a
    parse warning.
    """
    text = complete(request_payload(bg, cfg, fewshots), cfg, client)
    return parse_report_text(text, [k.value for k in bg.kinds])
