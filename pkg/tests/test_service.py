from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from stockdesk import fixtures
from stockdesk.config import RunConfig
from stockdesk.marketdata import MarketStore
from stockdesk.service import StoreHolder, create_app

QUERY = fixtures.REFERENCE_QUERY
AS_OF = fixtures.REFERENCE_DATE.isoformat()


@pytest.fixture(scope="module")
def client(reference_store):
    return TestClient(create_app(RunConfig(), reference_store))


def test_analyze_ok(client, tf_response):
    resp = client.post("/v1/analyze", json={"query": QUERY, "as_of": AS_OF})
    assert resp.status_code == 200
    body = resp.json()
    assert body["report"]["full_text"] == tf_response.report.full_text
    assert body["as_of"] == "2024-10-16"


def test_analyze_errors(client):
    resp = client.post("/v1/analyze", json={"query": "Can you diagnose stock 6912?"})
    assert resp.status_code == 422 and resp.json()["error"] == "unresolved_instrument"
    assert client.post("/v1/analyze", content=b"query=x",
                       headers={"content-type": "text/plain"}).status_code == 415
    assert client.post("/v1/analyze", content=b"{oops",
                       headers={"content-type": "application/json"}).status_code == 400
    assert client.post("/v1/analyze", json=["x"]).status_code == 422
    assert client.post("/v1/analyze", json={"query": ""}).status_code == 422
    assert client.post("/v1/analyze", json={"query": QUERY, "as_of": "soon"}).status_code == 422


def test_health(client):
    body = client.get("/v1/health").json()
    assert body["status"] == "ok" and body["latest_date"] == "2024-10-16"


def test_score_endpoint(client, tf_response):
    report = tf_response.report.to_dict()
    heur = client.post("/v1/score", json={"report": report}).json()
    assert heur["mode"] == "heuristic" and heur["data"] == 20
    judge = {"conclusion": 10, "content_dimensions": 20, "logical_consistency": 15, "language": 10}
    assisted = client.post("/v1/score", json={"report": report, "judge": judge}).json()
    assert assisted["mode"] == "assisted" and assisted["total"] == 80
    by_text = client.post("/v1/score", json={"report_text": tf_response.report.full_text}).json()
    assert by_text["structure"] == 5
    assert client.post("/v1/score", json={}).status_code == 422
    assert client.post("/v1/score", json={"report": report, "mode": "assisted"}).status_code == 422


def test_concurrent_requests_do_not_interfere(client, tf_response):
    other = "Can you diagnose stock 6912?"

    def call(i):
        query = QUERY if i % 2 == 0 else other
        return i, client.post("/v1/analyze", json={"query": query, "as_of": AS_OF})

    with ThreadPoolExecutor(16) as pool:
        results = list(pool.map(call, range(32)))
    for i, resp in results:
        if i % 2 == 0:
            assert resp.status_code == 200
            assert resp.json()["report"]["full_text"] == tf_response.report.full_text
        else:
            assert resp.status_code == 422


def test_store_swap(reference_store):
    holder = StoreHolder(reference_store)
    empty = MarketStore()
    holder.swap(empty)
    assert holder.store is empty
    app = create_app(RunConfig(), reference_store)
    app.state.stores.swap(empty)
    resp = TestClient(app).post("/v1/analyze", json={"query": QUERY})
    assert resp.status_code == 422
