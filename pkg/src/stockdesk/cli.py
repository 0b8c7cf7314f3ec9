"""Command-line interface: ingest, analyze, batch, score, agreement, serve."""

from __future__ import annotations

import csv
import logging
import sys
from pathlib import Path

import click

from . import analyscore as ascore
from . import fixtures
from .config import ConfigError, RunConfig, load_config
from .marketdata import IngestError, MarketStore, RecordKind, StoreError, ValidationError
from .orchestrator import (
    AnalyzeRequest,
    AnalyzeResponse,
    BackendError,
    PipelineError,
    ResolutionError,
    SynthesisError,
    analyze,
)
from .report import Report

logger = logging.getLogger("stockdesk")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNRESOLVED = 2
EXIT_BACKEND = 3

MANIFEST_HEADER = ("query_id", "query", "as_of", "status", "ticker", "error", "report_dir")


def _fail(message: str, code: int = EXIT_FAILURE):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _config(ctx: click.Context, **overrides) -> RunConfig:
    try:
        return load_config(ctx.obj.get("config_path"), **overrides)
    except ConfigError as exc:
        _fail(f"configuration: {exc}")


def open_store(cfg: RunConfig) -> MarketStore:
    """The configured store, or the bundled reference store when none is set."""
    if cfg.store_dir is None:
        logger.info("no store configured; using the bundled reference store")
        return fixtures.reference_store()
    if not cfg.store_dir.is_dir():
        raise StoreError(f"store directory {cfg.store_dir} does not exist")
    return MarketStore.from_dir(cfg.store_dir)


def _load_store(cfg: RunConfig) -> MarketStore:
    try:
        return open_store(cfg)
    except (StoreError, IngestError, ValidationError) as exc:
        _fail(f"store: {exc}")


def run_analysis(store: MarketStore, cfg: RunConfig, query: str, as_of: str | None) -> AnalyzeResponse:
    return analyze(store, AnalyzeRequest(query, as_of), synthesizer=cfg.synthesizer, backend=cfg.backend,
                   narrowing=cfg.plan_narrowing)


def write_report_files(report: Report, directory: Path) -> tuple[Path, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    json_path, text_path = directory / "report.json", directory / "report.txt"
    json_path.write_text(report.to_json() + "\n", encoding="utf-8")
    text_path.write_text(report.full_text, encoding="utf-8")
    return json_path, text_path


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), envvar="FINSPHERE_CONFIG",
              help="TOML configuration file.")
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, verbose: int):
    """Single-stock analysis reports from market data, and report scoring."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


@main.command()
@click.argument("source", type=click.Path(exists=True), required=False)
@click.option("--kind", type=click.Choice([k.value for k in RecordKind]),
              help="Record kind of SOURCE when it is a single file.")
@click.option("--store", "store_dir", type=click.Path(file_okay=False), help="Store directory to update.")
@click.option("--reference-fixture", is_flag=True, help="Load the bundled reference dataset.")
@click.pass_context
def ingest(ctx, source, kind, store_dir, reference_fixture):
    """Validate and merge SOURCE (a file or directory) into the store."""
    cfg = _config(ctx, store_dir=store_dir)
    if cfg.store_dir is None:
        _fail("no store directory configured (use --store or [store] dir)")
    if not source and not reference_fixture:
        _fail("nothing to ingest: give SOURCE or --reference-fixture")
    try:
        store = MarketStore.from_dir(cfg.store_dir) if cfg.store_dir.is_dir() else MarketStore()
        if reference_fixture:
            fixtures.reference_store().save_dir(cfg.store_dir)
            store = MarketStore.from_dir(cfg.store_dir)
        if source:
            path = Path(source)
            if path.is_dir():
                counts = store.load_dir(path)
            else:
                if kind is None:
                    matches = [k for k in RecordKind if k.filename == path.name]
                    if not matches:
                        _fail(f"cannot infer record kind of {path.name}; pass --kind")
                    kind = matches[0].value
                counts = {kind: store.ingest(path, kind)}
            for k, n in counts.items():
                click.echo(f"{k}: {n} records")
        store.save_dir(cfg.store_dir)
    except (IngestError, StoreError, ValidationError) as exc:
        _fail(str(exc))
    stats = store.stats()
    click.echo("store: " + ", ".join(f"{k}={v}" for k, v in stats.items()))


@main.command("analyze")
@click.argument("query")
@click.option("--as-of", help="Analysis instant (ISO date or datetime); defaults to the latest store date.")
@click.option("--mode", type=click.Choice(["template", "llm"]), help="Report synthesizer.")
@click.option("--output", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--store", "store_dir", type=click.Path(file_okay=False), help="Store directory.")
@click.pass_context
def analyze_cmd(ctx, query, as_of, mode, output, store_dir):
    """Analyze the stock named in QUERY and write report.json and report.txt."""
    cfg = _config(ctx, synthesizer=mode, output_dir=output, store_dir=store_dir)
    store = _load_store(cfg)
    try:
        resp = run_analysis(store, cfg, query, as_of)
    except ResolutionError as exc:
        _fail(str(exc), EXIT_UNRESOLVED)
    except BackendError as exc:
        _fail(f"backend: {exc}", EXIT_BACKEND)
    except (PipelineError, SynthesisError, StoreError, ValueError) as exc:
        _fail(str(exc))
    json_path, text_path = write_report_files(resp.report, cfg.output_dir)
    for w in resp.warnings:
        click.echo(f"warning: {w}", err=True)
    click.echo(f"{resp.instrument.name} ({resp.instrument.ticker}) as of {resp.as_of}")
    click.echo(f"wrote {json_path} and {text_path}")


def read_queries(path: Path) -> list[tuple[str, str, str | None]]:
    """``(query_id, query, as_of)`` triples from a CSV with a header or a plain list."""
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return []
    header = [h.strip() for h in next(csv.reader([lines[0]]))]
    if "query" in header:
        out = []
        for i, rec in enumerate(csv.DictReader(lines), start=1):
            qid = (rec.get("query_id") or "").strip() or f"q{i:03d}"
            out.append((qid, (rec.get("query") or "").strip(), (rec.get("as_of") or "").strip() or None))
        return out
    return [(f"q{i:03d}", ln.strip(), None) for i, ln in enumerate(lines, start=1)]


@main.command()
@click.argument("queries_file", type=click.Path(dir_okay=False))
@click.option("--as-of", help="Default analysis instant for queries without one.")
@click.option("--mode", type=click.Choice(["template", "llm"]), help="Report synthesizer.")
@click.option("--output", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--store", "store_dir", type=click.Path(file_okay=False), help="Store directory.")
@click.pass_context
def batch(ctx, queries_file, as_of, mode, output, store_dir):
    """Analyze every query in QUERIES_FILE; failures are recorded, not fatal."""
    cfg = _config(ctx, synthesizer=mode, output_dir=output, store_dir=store_dir)
    try:
        queries = read_queries(Path(queries_file))
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        _fail(f"cannot read {queries_file}: {exc}")
    if not queries:
        _fail(f"{queries_file} contains no queries")
    store = _load_store(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    rows, failures = [], 0
    for qid, query, q_as_of in queries:
        when = q_as_of or as_of
        row = {"query_id": qid, "query": query, "as_of": when or "", "status": "ok", "ticker": "",
               "error": "", "report_dir": ""}
        try:
            if not query:
                raise ValueError("empty query")
            resp = run_analysis(store, cfg, query, when)
            target = cfg.output_dir / qid
            write_report_files(resp.report, target)
            row.update(ticker=resp.instrument.ticker, as_of=resp.as_of, report_dir=str(target))
        except (ResolutionError, BackendError, PipelineError, SynthesisError, StoreError, ValueError) as exc:
            failures += 1
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
            logger.info("query %s failed: %s", qid, exc)
        rows.append(row)
    manifest = cfg.output_dir / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=MANIFEST_HEADER, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    click.echo(f"{len(rows)} queries, {len(rows) - failures} ok, {failures} failed; manifest at {manifest}")


def _report_files(directory: Path) -> list[Path]:
    return sorted(p for p in directory.rglob("*.json") if p.name != "manifest.json")


def _load_report(path: Path) -> Report:
    import json

    obj = json.loads(path.read_text(encoding="utf-8"))
    if "report" in obj and isinstance(obj["report"], dict):
        obj = obj["report"]
    if "full_text" not in obj:
        raise ValueError("not a report document")
    return Report.from_dict(obj)


def _query_id(path: Path) -> str:
    return path.parent.name if path.name == "report.json" else path.stem


def _read_judges(path: Path) -> dict[tuple[str, str], ascore.JudgeInput]:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            out[(rec.get("model_id") or "", rec["query_id"])] = ascore.JudgeInput.from_mapping(rec)
    return out


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--judge", "judge_file", type=click.Path(exists=True, dir_okay=False),
              help="CSV of judged tiers: query_id, conclusion, content_dimensions, logical_consistency, language.")
@click.option("--mode", type=click.Choice(["assisted", "heuristic"]),
              help="Scoring mode; defaults to assisted with --judge, heuristic otherwise.")
@click.option("--model-id", default="stockdesk", show_default=True, help="Model id recorded for the reports.")
@click.option("--output", type=click.Path(file_okay=False), help="Output directory.")
@click.pass_context
def score(ctx, source, judge_file, mode, model_id, output):
    """Score reports under SOURCE, or summarize a score table given as SOURCE."""
    cfg = _config(ctx, output_dir=output)
    source = Path(source)
    out_dir = cfg.output_dir
    if source.is_file():
        try:
            rows = ascore.read_score_table(source, model_id)
        except (ValueError, KeyError, ascore.RubricError) as exc:
            _fail(str(exc))
        if not rows:
            _fail(f"{source} holds no score rows")
    else:
        mode = mode or ("assisted" if judge_file else "heuristic")
        if mode == "assisted" and not judge_file:
            _fail("assisted scoring needs --judge")
        files = _report_files(source)
        if not files:
            _fail(f"no report files under {source}")
        try:
            judges = _read_judges(Path(judge_file)) if judge_file else {}
        except (KeyError, ascore.RubricError) as exc:
            _fail(f"judge file: {exc}")
        rows = []
        for path in files:
            qid = _query_id(path)
            try:
                report = _load_report(path)
            except ValueError as exc:
                _fail(f"{path}: {exc}")
            judge = judges.get((model_id, qid)) or judges.get(("", qid))
            if mode == "assisted" and judge is None:
                _fail(f"no judge row for query {qid}")
            try:
                rows.append(ascore.ScoreRow(model_id, qid, ascore.score_report(report, judge, mode)))
            except ascore.RubricError as exc:
                _fail(f"{path}: {exc}")
        out_dir.mkdir(parents=True, exist_ok=True)
        ascore.write_scores(out_dir / "scores.csv", rows)
        click.echo(f"wrote {out_dir / 'scores.csv'}")
    summary = ascore.aggregate_scores(rows)
    out_dir.mkdir(parents=True, exist_ok=True)
    ascore.write_summary(out_dir / "summary.csv", summary)
    click.echo(ascore.format_summary_table(summary))


@main.command()
@click.argument("group_files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--model-id", default="model", show_default=True,
              help="Model id for score tables without a model column.")
@click.option("--output", type=click.Path(dir_okay=False), help="Write the table as CSV here.")
@click.pass_context
def agreement(ctx, group_files, model_id, output):
    """Pairwise Kendall tau-b between annotator groups (one score file per group)."""
    if len(group_files) < 2:
        _fail("agreement needs at least two group score files")
    groups = {}
    for i, path in enumerate(group_files, start=1):
        try:
            groups[f"Group {i}"] = ascore.read_score_table(path, model_id)
        except (ValueError, KeyError, ascore.RubricError) as exc:
            _fail(str(exc))
    table = ascore.group_agreement(groups)
    if table.excluded_queries:
        click.echo(f"warning: {len(table.excluded_queries)} queries excluded (missing from a group)", err=True)
    for dim, n in table.undefined_counts.items():
        click.echo(f"warning: {n} undefined tau values skipped for {dim}", err=True)
    if output:
        with open(output, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(table.to_csv_rows())
    click.echo(table.format())


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--store", "store_dir", type=click.Path(file_okay=False), help="Store directory.")
@click.pass_context
def serve(ctx, host, port, store_dir):
    """Serve the analysis and scoring HTTP API."""
    import uvicorn

    from .service import create_app

    cfg = _config(ctx, store_dir=store_dir)
    store = _load_store(cfg)
    try:
        uvicorn.run(create_app(cfg, store), host=host, port=port, log_level="info")
    except OSError as exc:
        _fail(f"cannot bind {host}:{port}: {exc}")


if __name__ == "__main__":
    main()
