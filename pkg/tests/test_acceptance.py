"""Acceptance criteria 1-8, each at its stated tolerance and time budget.

Every check is recorded through ``conftest.record`` so the run ends with one
PASS/FAIL line per criterion.
"""

from __future__ import annotations

import csv
import json
import math
import random
import threading
import time
from datetime import timedelta
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from stockdesk import analyscore as A
from stockdesk import fixtures, resources
from stockdesk import indicators as ind
from stockdesk.analyscore import detect_forbidden_phrases, polarity
from stockdesk.marketdata import CapitalFlowRecord
from stockdesk.orchestrator import AnalyzeRequest, BackendConfig, analyze, synthesize_llm
from stockdesk.report import word_count

from conftest import record
from oracles import (
    ddx_oracle,
    engulfing_oracle,
    macd_cross_oracle,
    sma_oracle,
    tau_a_oracle,
    tau_b_oracle,
    wilder_rsi_oracle,
)
from test_indicators import START, random_bars, random_walk

CENT = 0.005  # equal at two decimals


def model_table_rows():
    with open(resources.path("data", "table2_fixture.csv"), newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def model_table_summaries():
    rows = [A.ScoreRow(r["model"], "all", A.DimensionScores(*(float(r[d]) for d in
                                                                 ("conclusion", "content", "expression", "data"))))
            for r in model_table_rows()]
    return A.aggregate_scores(rows)


# -- 1 ---------------------------------------------------------------------

@pytest.mark.parametrize("model", [r["model"] for r in model_table_rows()])
def test_c1_model_table_totals(model):
    start = time.perf_counter()
    summary = model_table_summaries()[model]
    reported = float(next(r for r in model_table_rows() if r["model"] == model)["reported_total"])
    got = summary.means["total"]
    elapsed = time.perf_counter() - start
    ok = record("C1", f"{got:.2f}" == f"{reported:.2f}" and elapsed < 1,
                f"{model} total {got:.2f} vs {reported:.2f}")
    assert ok, f"{model}: aggregated total {got:.2f} != reported {reported:.2f}"


# -- 2 ---------------------------------------------------------------------

PER_QUERY_MEANS = {"conclusion": 9.95, "content": 27.16, "expression": 14.87, "data": 18.90, "total": 70.88}


@pytest.fixture(scope="module")
def per_query_summary():
    start = time.perf_counter()
    rows = A.read_score_table(resources.path("data", "appendixH_finsphere.csv"), "FinSphere")
    summary = A.aggregate_scores(rows)["FinSphere"]
    return summary, len(rows), time.perf_counter() - start


@pytest.mark.parametrize("dim", list(PER_QUERY_MEANS))
def test_c2_per_query_means(per_query_summary, dim):
    summary, n, elapsed = per_query_summary
    got, want = summary.means[dim], PER_QUERY_MEANS[dim]
    ok = record("C2", n == 100 and abs(got - want) <= 0.01 + 1e-9 and elapsed < 1,
                f"{dim} mean {got:.2f} vs {want:.2f}")
    assert ok, f"{dim}: mean {got:.4f} vs expected {want} (n={n})"


# -- 3 ---------------------------------------------------------------------

def test_c3_model_ordering():
    order = A.rank_models(model_table_summaries())
    wanted = ["FinSphere", "FinMem", "GPT-4o", "Deepseek-v3"]
    ok = record("C3", [m for m in order if m in wanted] == wanted, " > ".join(order[:4]))
    assert ok, order


# -- 4 ---------------------------------------------------------------------

def test_c4_kendall_tau_oracles():
    rng = random.Random(4)
    start = time.perf_counter()
    exact = close = undefined = 0
    worst = 0.0
    for i in range(1000):
        n = rng.randint(2, 8)
        if i % 2 == 0:
            x, y = rng.sample(range(n), n), rng.sample(range(n), n)
            assert A.kendall_tau(x, y) == float(tau_a_oracle(x, y)), (x, y)
            exact += 1
            continue
        x, y = [rng.randint(1, 4) for _ in range(n)], [rng.randint(1, 4) for _ in range(n)]
        want = tau_b_oracle(x, y)
        if want is None:
            with pytest.raises(A.UndefinedCorrelationError):
                A.kendall_tau(x, y)
            undefined += 1
            continue
        err = abs(A.kendall_tau(x, y) - want)
        worst = max(worst, err)
        assert err <= 1e-12, (x, y, err)
        close += 1
    elapsed = time.perf_counter() - start
    ok = record("C4", elapsed < 5, f"{exact} exact, {close} tau-b (max err {worst:.1e}), {undefined} undefined, "
                                  f"{elapsed:.2f}s")
    assert ok


def test_c4_agreement_layout():
    rng = random.Random(44)
    groups = {}
    for g in range(1, 5):
        groups[f"Group {g}"] = [
            A.ScoreRow(m, f"q{q}", A.DimensionScores(rng.choice((0, 5, 10)), rng.randint(15, 45),
                                                     rng.randint(8, 15), rng.choice((10, 15, 20))))
            for q in range(100) for m in ("m1", "m2", "m3", "m4", "m5")]
    table = A.group_agreement(groups)
    header, *rows = table.to_csv_rows()
    ok = record("C4", len(table.pairs) == 6 and header[-1] == "Average" and len(header) == 8
                and len(rows) == 5 and all(len(r) == 8 for r in rows),
                f"layout {len(table.pairs)} pairs + Average over {len(rows)} dimensions")
    assert ok
    for dim in table.dimensions:
        vals = [table.cells[dim][p] for p in table.pairs]
        assert math.isclose(table.average(dim), sum(vals) / len(vals), rel_tol=1e-12)


# -- 5 ---------------------------------------------------------------------

def test_c5_indicator_oracles():
    rng = random.Random(5)
    start = time.perf_counter()

    def close(a, b):
        return len(a) == len(b) and all(math.isclose(x, y, rel_tol=1e-9, abs_tol=1e-12) for x, y in zip(a, b))

    failures = {"rsi": 0, "macd_cross": 0, "engulfing": 0, "ddx": 0, "ma": 0}
    for _ in range(200):
        xs = random_walk(rng, rng.randint(40, 90))
        failures["rsi"] += not close(ind.rsi(xs, 14), wilder_rsi_oracle(xs, 14))
        m = ind.macd(xs)
        failures["macd_cross"] += [(e.index, e.direction.value) for e in ind.crosses(m.dif, m.dea)] != \
            macd_cross_oracle(xs)
        failures["ma"] += not all(close(ind.sma(xs, w), sma_oracle(xs, w)) for w in (5, 10, 20))
        bars = random_bars(rng, rng.randint(2, 60))
        failures["engulfing"] += [(e.index, e.date, e.key_level) for e in ind.detect_bullish_engulfing(bars)] != \
            engulfing_oracle(bars)
        flows = [CapitalFlowRecord(START + timedelta(days=i), round(rng.uniform(-5, 5), 3), 1e9, 0.0, 5.0, 0.0)
                 for i in range(rng.randint(5, 30))]
        failures["ddx"] += not math.isclose(ind.ddx_cumulative(flows), ddx_oracle(flows), rel_tol=1e-9,
                                            abs_tol=1e-12)
    elapsed = time.perf_counter() - start
    bad = {k: v for k, v in failures.items() if v}
    ok = record("C5", not bad and elapsed < 10, f"200 series, mismatches {bad or 'none'}, {elapsed:.2f}s")
    assert ok


# -- 6 ---------------------------------------------------------------------

def test_c6_reference_report():
    start = time.perf_counter()
    store = fixtures.reference_store()
    resp = analyze(store, AnalyzeRequest(fixtures.REFERENCE_QUERY, fixtures.REFERENCE_DATE.isoformat()))
    elapsed = time.perf_counter() - start
    rep = resp.report
    details = " ".join(p for _, p in rep.detail_sections)
    missing = [f for f in ("4.48", "17.65%", "-14.865", "2.68") if f not in details]
    bullish = polarity(rep.short_term_conclusion) == "bullish"
    caution = "caution" in rep.medium_long_conclusion.lower()
    ok = record("C6", not missing and bullish and caution and elapsed < 2,
                f"missing figures {missing or 'none'}, short-term bullish={bullish}, caution={caution}, "
                f"{elapsed:.2f}s")
    assert ok


# -- 7 ---------------------------------------------------------------------

def test_c7_synthetic_compliance():
    start = time.perf_counter()
    problems = []
    for seed in range(100):
        case = fixtures.synthetic_store(seed)
        rep = analyze(case.store, AnalyzeRequest(case.query, case.as_of.isoformat())).report
        score = A.score_report(rep, mode="heuristic")
        dims = A.count_data_dimensions(rep.full_text)
        if word_count(rep.movement_summary) > 20:
            problems.append(f"seed {seed}: summary too long")
        if len(detect_forbidden_phrases(rep.full_text)):
            problems.append(f"seed {seed}: forbidden phrase")
        if score.structure != 5:
            problems.append(f"seed {seed}: structure {score.structure}")
        if dims < 4 or score.data != 20:
            problems.append(f"seed {seed}: {dims} data dimensions")
    elapsed = time.perf_counter() - start
    ok = record("C7", not problems and elapsed < 30,
                f"100 synthetic stores, {len(problems)} problems {problems[:3]}, {elapsed:.2f}s")
    assert ok, problems[:10]


def test_c7_assisted_example(tf_response):
    judge = A.JudgeInput(conclusion_tier=10, content_dims_tier=20, consistency_flag=True, language_tier=10)
    score = A.score_report(tf_response.report, judge, "assisted")
    got = (score.conclusion, score.content, score.expression, score.data, score.total)
    ok = record("C7", got == (10, 35, 15, 20, 80), f"assisted example {got}")
    assert ok


# -- 8 ---------------------------------------------------------------------

class _MockBackend(BaseHTTPRequestHandler):
    reply_text = ""
    seen: list = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).seen.append(body)
        out = json.dumps({"choices": [{"message": {"role": "assistant", "content": self.reply_text}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(out)))
        self.end_headers()
        self.wfile.write(out)

    def log_message(self, *args):
        pass


def test_c8_backend_contract(tf_response):
    handler = type("Handler", (_MockBackend,), {"reply_text": tf_response.report.full_text, "seen": []})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        cfg = BackendConfig(f"http://127.0.0.1:{server.server_port}/v1/chat/completions", "analyst")
        report = synthesize_llm(tf_response.background, cfg)
    finally:
        server.shutdown()
        server.server_close()
    (sent,) = handler.seen
    expected = tf_response.report
    parsed_ok = (report.parse_warnings == () and report.movement_summary == expected.movement_summary
                 and report.detail_sections == expected.detail_sections
                 and report.final_summary == expected.final_summary)
    ok = record("C8", sent["temperature"] == 0.5 and sent["max_tokens"] == 8000 and parsed_ok,
                f"temperature {sent['temperature']}, max_tokens {sent['max_tokens']}, parsed={parsed_ok}")
    assert ok
