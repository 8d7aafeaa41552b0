"""Chat-completion backends: an OpenAI-compatible HTTP client and a scripted mock."""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Protocol

import httpx

log = logging.getLogger(__name__)

DEFAULT_MODEL = "meta-llama/Meta-Llama-3-8B-Instruct"
DEFAULT_MAX_CHARS = 6000


@dataclass(frozen=True)
class DecodeParams:
    temperature: float = 0.0
    max_new_tokens: int = 64
    model_name: str = DEFAULT_MODEL

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")


@dataclass(frozen=True)
class ChatRequest:
    system_message: str
    user_prompt: str
    decode: DecodeParams = field(default_factory=DecodeParams)

    def __post_init__(self):
        if not self.user_prompt:
            raise ValueError("user_prompt must be non-empty")


@dataclass(frozen=True)
class ChatResponse:
    text: str


class ErrorKind(enum.Enum):
    TRANSPORT = "transport"
    TIMEOUT = "timeout"
    CAPACITY_EXCEEDED = "capacity_exceeded"
    MALFORMED_REPLY = "malformed_reply"


RETRYABLE = frozenset({ErrorKind.TRANSPORT, ErrorKind.TIMEOUT})


class BackendError(Exception):
    def __init__(self, kind: ErrorKind, detail: str = ""):
        super().__init__(f"{kind.value}: {detail}" if detail else kind.value)
        self.kind = kind
        self.detail = detail


def prompt_hash(system_message: str, user_prompt: str) -> str:
    """Stable identity of a rendered (system, user) prompt pair."""
    blob = json.dumps([system_message, user_prompt], ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def estimate_budget(request: ChatRequest) -> int:
    return len(request.system_message) + len(request.user_prompt)


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


class _BudgetedBackend:
    def __init__(self, max_chars: int = DEFAULT_MAX_CHARS, parallelism: int = 1):
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        self.max_chars = max_chars
        self._slots = threading.BoundedSemaphore(parallelism)

    def estimate_budget(self, request: ChatRequest) -> int:
        return estimate_budget(request)

    def _check_budget(self, request: ChatRequest) -> None:
        size = self.estimate_budget(request)
        if size > self.max_chars:
            raise BackendError(
                ErrorKind.CAPACITY_EXCEEDED, f"request size {size} exceeds limit {self.max_chars}"
            )

    def complete(self, request: ChatRequest) -> ChatResponse:
        self._check_budget(request)
        with self._slots:
            return self._complete(request)

    def _complete(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError


class OpenAIChatBackend(_BudgetedBackend):
    """Client for any server speaking the OpenAI ``/chat/completions`` protocol.

    Transport errors, timeouts, 429 and 5xx responses are retried ``retries``
    times with exponential backoff; oversize requests are rejected locally
    before anything is sent.
    """

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        *,
        max_chars: int = DEFAULT_MAX_CHARS,
        retries: int = 2,
        backoff: float = 1.0,
        timeout: float = 60.0,
        parallelism: int = 4,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        super().__init__(max_chars=max_chars, parallelism=parallelism)
        if retries < 0:
            raise ValueError("retries must be >= 0")
        self.url = base_url.rstrip("/") + "/chat/completions"
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout)
        self._headers = headers

    def payload(self, request: ChatRequest) -> dict:
        return {
            "model": request.decode.model_name,
            "messages": [
                {"role": "system", "content": request.system_message},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.decode.temperature,
            "max_tokens": request.decode.max_new_tokens,
        }

    def _complete(self, request: ChatRequest) -> ChatResponse:
        body = self.payload(request)
        attempt = 0
        while True:
            try:
                return self._post(body)
            except BackendError as err:
                if err.kind not in RETRYABLE or attempt >= self.retries:
                    raise
                delay = self.backoff * 2**attempt
                log.warning("attempt %d failed (%s); retrying in %.1fs", attempt + 1, err, delay)
                self._sleep(delay)
                attempt += 1

    def _post(self, body: dict) -> ChatResponse:
        try:
            resp = self._client.post(self.url, json=body, headers=self._headers)
        except httpx.TimeoutException as exc:
            raise BackendError(ErrorKind.TIMEOUT, str(exc)) from exc
        except httpx.HTTPError as exc:
            raise BackendError(ErrorKind.TRANSPORT, str(exc)) from exc
        if resp.status_code == 413:
            raise BackendError(ErrorKind.CAPACITY_EXCEEDED, "server rejected request size")
        if resp.status_code >= 400:
            raise BackendError(ErrorKind.TRANSPORT, f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(ErrorKind.MALFORMED_REPLY, f"unexpected body: {resp.text[:200]}") from exc
        if content is None:
            content = ""
        if not isinstance(content, str):
            raise BackendError(ErrorKind.MALFORMED_REPLY, "message content is not a string")
        return ChatResponse(content)

    def close(self):
        self._client.close()


class ScriptedBackend(_BudgetedBackend):
    """Deterministic backend that answers from a table keyed by prompt hash.

    Each script value is either the reply text or a :class:`BackendError` to
    raise. Unscripted prompts raise ``MALFORMED_REPLY`` so that any drift in
    rendered prompt text fails loudly.
    """

    def __init__(
        self,
        script: Mapping[str, str | BackendError] | None = None,
        *,
        max_chars: int = DEFAULT_MAX_CHARS,
        parallelism: int = 16,
    ):
        super().__init__(max_chars=max_chars, parallelism=parallelism)
        self.script: dict[str, str | BackendError] = dict(script or {})
        self._lock = threading.Lock()
        self.calls: list[str] = []

    def add(self, system_message: str, user_prompt: str, reply: str | BackendError) -> None:
        self.script[prompt_hash(system_message, user_prompt)] = reply

    def expect(self, prompt, reply: str | BackendError) -> None:
        """Script the reply for a rendered prompt (anything with system_message/user_prompt)."""
        self.add(prompt.system_message, prompt.user_prompt, reply)

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def _complete(self, request: ChatRequest) -> ChatResponse:
        key = prompt_hash(request.system_message, request.user_prompt)
        with self._lock:
            self.calls.append(key)
        if key not in self.script:
            raise BackendError(
                ErrorKind.MALFORMED_REPLY,
                f"unscripted prompt {key[:12]}: {request.user_prompt[:60]!r}",
            )
        reply = self.script[key]
        if isinstance(reply, BackendError):
            raise reply
        return ChatResponse(reply)

    @classmethod
    def from_file(cls, path: str | Path, **kwargs) -> "ScriptedBackend":
        """Load a script file.

        The file is JSON with an ``entries`` list. Each entry names its prompt
        either by ``key`` (a prompt hash) or by ``system`` + ``user`` text, and
        carries either ``reply`` or ``error`` (an error kind such as
        ``"capacity_exceeded"``).
        """
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        backend = cls(**kwargs)
        for i, entry in enumerate(doc.get("entries", [])):
            if "key" in entry:
                key = entry["key"]
            elif "user" in entry:
                key = prompt_hash(entry.get("system", ""), entry["user"])
            else:
                raise ValueError(f"script entry {i} has neither 'key' nor 'user'")
            if "error" in entry:
                backend.script[key] = BackendError(ErrorKind(entry["error"]), "scripted fault")
            else:
                backend.script[key] = entry["reply"]
        return backend

    def save(self, path: str | Path) -> None:
        entries = []
        for key in sorted(self.script):
            reply = self.script[key]
            if isinstance(reply, BackendError):
                entries.append({"key": key, "error": reply.kind.value})
            else:
                entries.append({"key": key, "reply": reply})
        Path(path).write_text(json.dumps({"entries": entries}, indent=1) + "\n", encoding="utf-8")


def script_entry(prompt, reply: str | None = None, error: ErrorKind | None = None) -> dict:
    """Build one JSON script entry for ``ScriptedBackend.from_file``."""
    entry = {"system": prompt.system_message, "user": prompt.user_prompt}
    if error is not None:
        entry["error"] = error.value
    else:
        entry["reply"] = reply
    return entry
