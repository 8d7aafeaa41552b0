import json

import httpx
import pytest

from critjudge.backend import (
    BackendError,
    ChatRequest,
    DecodeParams,
    ErrorKind,
    OpenAIChatBackend,
    ScriptedBackend,
    estimate_budget,
    prompt_hash,
    script_entry,
)
from critjudge.prompts import RenderedPrompt


def test_decode_defaults():
    d = DecodeParams()
    assert d.temperature == 0.0
    assert d.max_new_tokens == 64
    with pytest.raises(ValueError):
        DecodeParams(max_new_tokens=0)
    with pytest.raises(ValueError):
        DecodeParams(temperature=-0.1)


def test_request_needs_prompt():
    with pytest.raises(ValueError):
        ChatRequest("sys", "")


def test_estimate_budget():
    assert estimate_budget(ChatRequest("s" * 100, "u" * 200)) == 300
    assert estimate_budget(ChatRequest("", "u" * 50)) == 50


def test_budget_limit_is_inclusive():
    backend = ScriptedBackend(max_chars=50)
    backend.add("", "u" * 50, "2")
    assert backend.complete(ChatRequest("", "u" * 50)).text == "2"
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("", "u" * 51))
    assert exc.value.kind is ErrorKind.CAPACITY_EXCEEDED


def test_scripted_lookup_and_determinism():
    backend = ScriptedBackend()
    backend.add("sys", "prompt", "2")
    for _ in range(3):
        assert backend.complete(ChatRequest("sys", "prompt")).text == "2"
    assert backend.call_count == 3


def test_scripted_unscripted_prompt_fails_loudly():
    backend = ScriptedBackend()
    backend.add("sys", "prompt", "2")
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("sys", "prompt "))
    assert exc.value.kind is ErrorKind.MALFORMED_REPLY


def test_scripted_fault():
    backend = ScriptedBackend()
    backend.add("s", "u", BackendError(ErrorKind.TRANSPORT, "boom"))
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("s", "u"))
    assert exc.value.kind is ErrorKind.TRANSPORT


def test_script_file(tmp_path):
    p1, p2 = RenderedPrompt("s", "one"), RenderedPrompt("", "two")
    doc = {
        "entries": [
            script_entry(p1, "3"),
            script_entry(p2, error=ErrorKind.CAPACITY_EXCEEDED),
            {"key": prompt_hash("x", "y"), "reply": "1"},
        ]
    }
    path = tmp_path / "script.json"
    path.write_text(json.dumps(doc))
    backend = ScriptedBackend.from_file(path)
    assert backend.complete(ChatRequest("s", "one")).text == "3"
    assert backend.complete(ChatRequest("x", "y")).text == "1"
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("", "two"))
    assert exc.value.kind is ErrorKind.CAPACITY_EXCEEDED


def test_prompt_hash_distinguishes_boundary():
    assert prompt_hash("ab", "c") != prompt_hash("a", "bc")


def _openai(handler, **kwargs):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    sleeps = []
    backend = OpenAIChatBackend("http://llm.test/v1/", "sk-test", client=client, sleep=sleeps.append, **kwargs)
    return backend, sleeps


def test_openai_wire_format():
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["auth"] = request.headers["authorization"]
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": "2"}}]})

    backend, _ = _openai(handler)
    req = ChatRequest("system text", "user text\nScore:", DecodeParams(0.0, 64, "m"))
    assert backend.complete(req).text == "2"
    assert seen["url"] == "http://llm.test/v1/chat/completions"
    assert seen["auth"] == "Bearer sk-test"
    assert seen["body"] == {
        "model": "m",
        "messages": [
            {"role": "system", "content": "system text"},
            {"role": "user", "content": "user text\nScore:"},
        ],
        "temperature": 0.0,
        "max_tokens": 64,
    }


def test_openai_retries_transport_then_gives_up():
    attempts = []

    def handler(request):
        attempts.append(1)
        raise httpx.ConnectError("unreachable", request=request)

    backend, sleeps = _openai(handler, retries=2, backoff=0.5)
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("", "hi"))
    assert exc.value.kind is ErrorKind.TRANSPORT
    assert len(attempts) == 3
    assert sleeps == [0.5, 1.0]


def test_openai_retry_recovers():
    replies = iter([httpx.Response(503), httpx.Response(200, json={"choices": [{"message": {"content": "1"}}]})])
    backend, sleeps = _openai(lambda r: next(replies), retries=2)
    assert backend.complete(ChatRequest("", "hi")).text == "1"
    assert len(sleeps) == 1


def test_openai_timeout_kind():
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    backend, _ = _openai(handler, retries=0)
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("", "hi"))
    assert exc.value.kind is ErrorKind.TIMEOUT


def test_openai_capacity_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(200, json={"choices": [{"message": {"content": "1"}}]})

    backend, _ = _openai(handler, max_chars=10, retries=3)
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("", "x" * 11))
    assert exc.value.kind is ErrorKind.CAPACITY_EXCEEDED
    assert calls == []


def test_openai_malformed_body():
    backend, _ = _openai(lambda r: httpx.Response(200, json={"oops": []}), retries=3)
    with pytest.raises(BackendError) as exc:
        backend.complete(ChatRequest("", "hi"))
    assert exc.value.kind is ErrorKind.MALFORMED_REPLY
