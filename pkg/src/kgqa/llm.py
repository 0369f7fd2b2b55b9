"""Language-model access: prompt templates, backends, retries, and caching.

The HTTP backend speaks the OpenAI-compatible chat-completion wire format.
The scripted backend replays canned responses from a JSONL file and fails
loudly on any unmatched request, which keeps pipeline tests deterministic.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field

import requests

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.1
MAX_TOKENS_INTERMEDIATE = 256
MAX_TOKENS_FINAL = 1024


class MissingSlot(KeyError):
    """render() called without a binding for a referenced slot."""


class BackendError(RuntimeError):
    """Backend failed after the retry budget."""


class ScriptMiss(LookupError):
    """Scripted backend received a request no matcher covers."""


_SLOT = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class PromptTemplate:
    """Few-shot prompt: instruction, worked examples, then the query block.

    Only ``{name}`` groups whose name is a declared slot are substituted;
    any other braces are literal prompt text (models are asked to wrap
    their key outputs in braces, so prompts quote such braces freely).
    """

    name: str
    instruction: str
    query_format: str
    few_shot: tuple[tuple[str, str], ...]
    slots: tuple[str, ...]
    expected_shots: int

    def __post_init__(self):
        referenced = set(_SLOT.findall(self.instruction)) | set(
            _SLOT.findall(self.query_format))
        dead = set(self.slots) - referenced
        if dead:
            raise ValueError(f"{self.name}: slots never referenced {sorted(dead)}")
        if len(self.few_shot) != self.expected_shots:
            raise ValueError(
                f"{self.name}: {len(self.few_shot)} few-shot examples, "
                f"expected {self.expected_shots}")


def render(template: PromptTemplate, bindings: dict[str, str]) -> str:
    """Serialize instruction, examples in order, then the bound query block."""
    def sub(m: re.Match) -> str:
        name = m.group(1)
        if name not in template.slots:
            return m.group(0)
        if name not in bindings:
            raise MissingSlot(name)
        return bindings[name]

    parts = [_SLOT.sub(sub, template.instruction)]
    for example_input, example_output in template.few_shot:
        parts.append(f"{example_input}\n\nAnswer: {example_output}")
    parts.append(_SLOT.sub(sub, template.query_format))
    return "\n\n".join(parts)


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    max_tokens: int = MAX_TOKENS_INTERMEDIATE
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature out of range: {self.temperature}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


def request_fingerprint(backend_id: str, model: str, request: CompletionRequest) -> str:
    payload = json.dumps(
        [backend_id, model, request.prompt, request.max_tokens, request.temperature],
        ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _approx_tokens(text: str) -> int:
    return len(text.split())


class LlmBackend:
    """Backend contract: invoke() returns response text for a request."""

    backend_id = "abstract"
    model = ""

    def __init__(self):
        self._calls = 0
        self._prompt_tokens = 0
        self._completion_tokens = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    @property
    def token_usage(self) -> dict[str, int]:
        return {"prompt_tokens": self._prompt_tokens,
                "completion_tokens": self._completion_tokens}

    def _record(self, prompt_tokens: int, completion_tokens: int):
        with self._lock:
            self._calls += 1
            self._prompt_tokens += prompt_tokens
            self._completion_tokens += completion_tokens

    def invoke(self, request: CompletionRequest) -> str:
        raise NotImplementedError


class HttpChatBackend(LlmBackend):
    """OpenAI-compatible chat-completion client.

    Credentials come from the environment (api_key_env); endpoint and model
    from configuration.
    """

    backend_id = "http"

    def __init__(self, endpoint: str, model: str,
                 api_key_env: str = "KGQA_API_KEY",
                 timeout: float = 120.0, session=None):
        super().__init__()
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = os.environ.get(api_key_env, "")
        self.timeout = timeout
        self._session = session or requests.Session()

    def invoke(self, request: CompletionRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }
        resp = self._session.post(f"{self.endpoint}/chat/completions",
                                  json=body, headers=headers, timeout=self.timeout)
        if resp.status_code >= 400:
            # 5xx is retryable by complete(); 4xx is a caller error.
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}",
                                 retryable=resp.status_code >= 500)
        data = resp.json()
        text = data["choices"][0]["message"]["content"]
        usage = data.get("usage", {})
        self._record(usage.get("prompt_tokens", _approx_tokens(request.prompt)),
                     usage.get("completion_tokens", _approx_tokens(text)))
        return text


class TransportError(RuntimeError):
    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


DIGEST_MATCHER_PREFIX = "sha256:"


@dataclass
class ScriptEntry:
    matcher: str
    response: str
    note: str = ""

    def matches(self, request: CompletionRequest, fingerprint: str) -> bool:
        if self.matcher.startswith(DIGEST_MATCHER_PREFIX):
            return fingerprint == self.matcher[len(DIGEST_MATCHER_PREFIX):]
        return self.matcher in request.prompt


class ScriptedBackend(LlmBackend):
    """Deterministic backend replaying canned responses.

    Matchers are checked in file order; a matcher is either a prompt
    substring or ``sha256:<hex>`` naming the exact request fingerprint.
    An unmatched request raises ScriptMiss rather than guessing.
    """

    backend_id = "scripted"

    def __init__(self, entries: list[ScriptEntry], model: str = "scripted"):
        super().__init__()
        self.entries = list(entries)
        self.model = model

    @classmethod
    def from_path(cls, path, model: str = "scripted") -> "ScriptedBackend":
        entries = []
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    entries.append(ScriptEntry(obj["matcher"], obj["response"],
                                               obj.get("note", "")))
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise ValueError(f"{path}:{line_no}: bad script entry: {e}") from e
        return cls(entries, model=model)

    def invoke(self, request: CompletionRequest) -> str:
        fingerprint = request_fingerprint(self.backend_id, self.model, request)
        for entry in self.entries:
            if entry.matches(request, fingerprint):
                self._record(_approx_tokens(request.prompt),
                             _approx_tokens(entry.response))
                return entry.response
        head = request.prompt[:400].replace("\n", "\\n")
        raise ScriptMiss(
            f"no scripted response matches request {fingerprint[:12]} "
            f"(prompt head: {head})")


class ResponseCache:
    """Append-only JSONL response cache keyed by request fingerprint.

    A hit returns the byte-identical original response. Corrupt lines in an
    existing cache file are skipped with a warning.
    """

    def __init__(self, path=None):
        self.path = str(path) if path is not None else None
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if self.path and os.path.exists(self.path):
            self._load()

    def _load(self):
        with open(self.path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    self._entries[obj["key"]] = obj["response"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    log.warning("cache %s: skipping corrupt line %d",
                                self.path, line_no)

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> str | None:
        with self._lock:
            value = self._entries.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def contains(self, key: str) -> bool:
        with self._lock:
            return key in self._entries

    def put(self, key: str, response: str, usage: dict | None = None):
        record = json.dumps(
            {"key": key, "response": response, "timestamp": time.time(),
             "usage": usage or {}},
            ensure_ascii=False)
        with self._lock:
            self._entries[key] = response
            if self.path:
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(record + "\n")

    def clear(self):
        with self._lock:
            self._entries.clear()
            if self.path and os.path.exists(self.path):
                os.remove(self.path)


def complete(request: CompletionRequest, backend: LlmBackend,
             cache: ResponseCache | None = None, *,
             retries: int = 3, backoff_s: float = 0.5, sleep=time.sleep,
             bypass_cache: bool = False) -> str:
    """Resolve a completion: cache first, then backend with retries.

    Transport errors and HTTP 5xx are retried up to `retries` attempts;
    4xx and script misses are not. The response is cached before return.
    """
    key = request_fingerprint(backend.backend_id, backend.model, request)
    if cache is not None and not bypass_cache:
        cached = cache.get(key)
        if cached is not None:
            return cached
    last_error: Exception | None = None
    for attempt in range(retries):
        if attempt:
            sleep(backoff_s * (2 ** (attempt - 1)))
        try:
            response = backend.invoke(request)
            break
        except ScriptMiss:
            raise
        except TransportError as e:
            if not e.retryable:
                raise BackendError(str(e)) from e
            last_error = e
        except (requests.RequestException, OSError, KeyError, ValueError) as e:
            last_error = e
    else:
        raise BackendError(f"backend failed after {retries} attempts: {last_error}")
    if cache is not None:
        cache.put(key, response)
    return response


@dataclass
class CallRecord:
    call_id: str
    cached: bool
    prompt_chars: int
    response_chars: int


class LlmClient:
    """Convenience wrapper bundling backend, cache, and request defaults.

    Keeps an in-order call log so pipeline traces can reference call ids.
    """

    def __init__(self, backend: LlmBackend, cache: ResponseCache | None = None,
                 temperature: float = DEFAULT_TEMPERATURE,
                 max_tokens_intermediate: int = MAX_TOKENS_INTERMEDIATE,
                 max_tokens_final: int = MAX_TOKENS_FINAL,
                 sleep=time.sleep):
        self.backend = backend
        self.cache = cache
        self.temperature = temperature
        self.max_tokens_intermediate = max_tokens_intermediate
        self.max_tokens_final = max_tokens_final
        self._sleep = sleep
        self.call_log: list[CallRecord] = []
        self._lock = threading.Lock()

    def complete(self, prompt: str, *, final: bool = False,
                 bypass_cache: bool = False) -> str:
        request = CompletionRequest(
            prompt=prompt,
            max_tokens=self.max_tokens_final if final else self.max_tokens_intermediate,
            temperature=self.temperature,
        )
        key = request_fingerprint(self.backend.backend_id, self.backend.model, request)
        cached = (self.cache is not None and not bypass_cache
                  and self.cache.contains(key))
        response = complete(request, self.backend, self.cache,
                            sleep=self._sleep, bypass_cache=bypass_cache)
        with self._lock:
            self.call_log.append(CallRecord(
                call_id=key[:12], cached=cached,
                prompt_chars=len(prompt), response_chars=len(response)))
        return response

    @property
    def backend_calls(self) -> int:
        return self.backend.calls
