"""HTTP JSON API over the analysis pipeline and the report scorer."""

from __future__ import annotations

import json
import logging
import threading

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from . import analyscore as ascore
from .config import RunConfig
from .marketdata import MarketStore, StoreError
from .orchestrator import (
    AnalyzeRequest,
    BackendError,
    PipelineError,
    ResolutionError,
    SynthesisError,
    analyze,
)
from .report import Report, parse_report_text

logger = logging.getLogger(__name__)


class ApiError(Exception):
    def __init__(self, status: int, message: str, kind: str = "invalid_request"):
        super().__init__(message)
        self.status = status
        self.message = message
        self.kind = kind


class StoreHolder:
    """The store requests read from; :meth:`swap` replaces it atomically."""

    def __init__(self, store: MarketStore):
        self._store = store
        self._lock = threading.Lock()

    @property
    def store(self) -> MarketStore:
        return self._store

    def swap(self, store: MarketStore) -> None:
        with self._lock:
            self._store = store


async def _json_body(request: Request) -> dict:
    ctype = request.headers.get("content-type", "")
    if ctype.split(";")[0].strip().lower() != "application/json":
        raise ApiError(415, "content-type must be application/json", "unsupported_media_type")
    raw = await request.body()
    try:
        body = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ApiError(400, f"malformed JSON body: {exc}") from None
    if not isinstance(body, dict):
        raise ApiError(422, "request body must be a JSON object")
    return body


def _score_payload(body: dict) -> dict:
    if isinstance(body.get("report"), dict):
        report = Report.from_dict(body["report"])
    elif isinstance(body.get("report_text"), str):
        report = parse_report_text(body["report_text"])
    else:
        raise ApiError(422, "provide 'report' (object) or 'report_text' (string)")
    judge_row = body.get("judge")
    mode = body.get("mode") or ("assisted" if judge_row else "heuristic")
    signals = body.get("signals")
    if signals is not None and not isinstance(signals, dict):
        raise ApiError(422, "'signals' must be an object")
    try:
        judge = ascore.JudgeInput.from_mapping(judge_row) if isinstance(judge_row, dict) else None
        if judge_row is not None and judge is None:
            raise ascore.RubricError("'judge' must be an object")
        score = ascore.score_report(report, judge, mode, signals=signals)
    except ValueError as exc:  # RubricError and bad mode values
        raise ApiError(422, str(exc)) from None
    out = score.to_dict()
    out["mode"] = str(ascore.ScoreMode(mode).value)
    return out


def create_app(cfg: RunConfig | None = None, store: MarketStore | None = None) -> FastAPI:
    """Build the application; the store defaults to the configured one."""
    cfg = cfg or RunConfig()
    if store is None:
        from .cli import open_store

        store = open_store(cfg)
    holder = StoreHolder(store)
    app = FastAPI(title="stockdesk", version="0.1.0")
    app.state.stores = holder
    app.state.config = cfg

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.kind, "detail": exc.message})

    @app.post("/v1/analyze")
    async def post_analyze(request: Request):
        body = await _json_body(request)
        try:
            req = AnalyzeRequest.from_dict(body)
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None
        try:
            resp = await run_in_threadpool(
                analyze, holder.store, req, synthesizer=cfg.synthesizer, backend=cfg.backend,
                narrowing=cfg.plan_narrowing)
        except ResolutionError as exc:
            raise ApiError(422, str(exc), "unresolved_instrument") from None
        except BackendError as exc:
            logger.warning("backend failure: %s", exc)
            raise ApiError(502, str(exc), "backend_error") from None
        except (PipelineError, SynthesisError, StoreError, ValueError) as exc:
            raise ApiError(422, str(exc), "analysis_failed") from None
        return resp.to_dict()

    @app.post("/v1/score")
    async def post_score(request: Request):
        body = await _json_body(request)
        return _score_payload(body)

    @app.get("/v1/health")
    async def health():
        store = holder.store
        latest = store.latest_date()
        return {"status": "ok", "latest_date": latest.isoformat() if latest else None, **store.stats()}

    return app
