from __future__ import annotations

import json

import httpx
import pytest

from stockdesk.orchestrator import (
    BackendConfig,
    BackendConfigError,
    BackendError,
    BackendUnavailableError,
    request_payload,
    synthesize_llm,
)
from stockdesk.orchestrator.backend import complete, resolve_pointer

ENDPOINT = "http://backend.test/v1/chat/completions"


def config(**kw) -> BackendConfig:
    kw.setdefault("retry_backoff_s", 0.0)
    return BackendConfig(ENDPOINT, "analyst", **kw)


def completion(text: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def client_for(handler) -> httpx.Client:
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_defaults():
    cfg = BackendConfig(ENDPOINT, "analyst")
    assert (cfg.max_output_tokens, cfg.temperature) == (8000, 0.5)
    with pytest.raises(BackendConfigError):
        BackendConfig("", "m")
    with pytest.raises(BackendConfigError):
        BackendConfig(ENDPOINT, "m", temperature=3.0)


def test_payload_shape(tf_response):
    payload = request_payload(tf_response.background, config())
    assert set(payload) == {"model", "messages", "max_tokens", "temperature"}
    assert payload["max_tokens"] == 8000 and payload["temperature"] == 0.5
    assert all(set(m) == {"role", "content"} for m in payload["messages"])


def test_round_trip_well_formed_report(tf_response):
    seen = {}

    def handler(request):
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=completion(tf_response.report.full_text))

    report = synthesize_llm(tf_response.background, config(), client=client_for(handler))
    assert seen["body"]["temperature"] == 0.5
    assert report.parse_warnings == ()
    assert report.detail_sections == tf_response.report.detail_sections
    assert report.final_summary == tf_response.report.final_summary


def test_free_text_is_kept_with_warning(tf_response):
    text = "The stock looks fine overall and merits tracking."
    report = synthesize_llm(tf_response.background, config(),
                            client=client_for(lambda r: httpx.Response(200, json=completion(text))))
    assert report.full_text == text
    assert report.parse_warnings and report.movement_summary == ""


def test_retries_then_succeeds(tf_response):
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) < 3:
            return httpx.Response(503, text="busy")
        return httpx.Response(200, json=completion("Step 1: Movement Summary\nok"))

    text = complete({"x": 1}, config(max_retries=2), client_for(handler))
    assert text.startswith("Step 1") and len(calls) == 3


def test_transport_errors_are_bounded():
    calls = []

    def handler(request):
        calls.append(1)
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(BackendUnavailableError):
        complete({}, config(max_retries=1), client_for(handler))
    assert len(calls) == 2


def test_token_limit_rejection_is_configuration_error():
    def handler(request):
        return httpx.Response(400, json={"error": "max_tokens exceeds the model's maximum context length"})

    with pytest.raises(BackendConfigError):
        complete({}, config(), client_for(handler))


def test_other_client_errors_and_bad_bodies():
    with pytest.raises(BackendError):
        complete({}, config(), client_for(lambda r: httpx.Response(401, text="no")))
    with pytest.raises(BackendError):
        complete({}, config(), client_for(lambda r: httpx.Response(200, text="not json")))
    with pytest.raises(BackendError):
        complete({}, config(), client_for(lambda r: httpx.Response(200, json={"choices": []})))


def test_custom_response_pointer():
    cfg = config(response_pointer="/output/text")
    text = complete({}, cfg, client_for(lambda r: httpx.Response(200, json={"output": {"text": "hi"}})))
    assert text == "hi"
    assert resolve_pointer({"a/b": [0, {"~": 5}]}, "/a~1b/1/~0") == 5


def test_api_key_header():
    seen = {}

    def handler(request):
        seen.update(request.headers)
        return httpx.Response(200, json=completion("x"))

    complete({}, config(api_key="secret"), client_for(handler))
    assert seen["authorization"] == "Bearer secret"
