"""Chat-endpoint client and caption rewriting.

The wire contract is the common chat-completion shape: request
``{model, messages, temperature}``, response
``{choices: [{message: {content}}]}``.  A transport is any callable from
request payload to response payload, so tests inject fault-injecting mocks
and the CLI's mock mode runs the whole pipeline offline.

Retry policy: timeouts and empty responses retry up to the configured
budget with jittered exponential backoff; a refusal is retried once and
then fails.  Concurrency is bounded client-side, so at most
``max_inflight`` requests are ever outstanding regardless of caller
parallelism.
"""

from __future__ import annotations

import hashlib
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Iterable, Sequence

from .config import (
    DEFAULT_REFUSAL_PATTERNS, DEFAULT_REWRITE_PROMPT, LlmEndpointConfig,
)
from .filtering import detect_refusal
from .records import REFUSAL, SampleRecord, Status

Transport = Callable[[dict], dict]


class ChatError(RuntimeError):
    pass


class ChatTimeoutError(ChatError):
    pass


class ChatEmptyError(ChatError):
    pass


class ChatRefusalError(ChatError):
    pass


def http_transport(config: LlmEndpointConfig) -> Transport:
    import requests

    url = config.base_url.rstrip("/") + "/chat/completions"

    def send(payload: dict) -> dict:
        try:
            resp = requests.post(url, json=payload, timeout=config.timeout)
        except requests.Timeout as exc:
            raise TimeoutError(str(exc)) from exc
        resp.raise_for_status()
        return resp.json()

    return send


def echo_transport() -> Transport:
    """Mock: answers with the last user message (deterministic identity)."""

    def send(payload: dict) -> dict:
        content = ""
        for message in reversed(payload.get("messages", [])):
            if message.get("role") == "user":
                content = message.get("content", "")
                break
        return {"choices": [{"message": {"content": content}}]}

    return send


def canned_transport(responses: dict[str, str], default: str = "") -> Transport:
    """Mock keyed by the SHA-256 of the last user message."""

    def send(payload: dict) -> dict:
        content = ""
        for message in reversed(payload.get("messages", [])):
            if message.get("role") == "user":
                content = message.get("content", "")
                break
        key = hashlib.sha256(content.encode("utf-8")).hexdigest()
        return {"choices": [{"message": {"content": responses.get(key, default)}}]}

    return send


class ChatClient:
    """Bounded-concurrency chat client with retry/backoff."""

    def __init__(self, config: LlmEndpointConfig,
                 transport: Transport | None = None,
                 refusal_patterns: Sequence[str] = DEFAULT_REFUSAL_PATTERNS,
                 sleep: Callable[[float], None] | None = time.sleep):
        self.config = config
        if transport is None:
            transport = echo_transport() if config.mock else http_transport(config)
        self._transport = transport
        self._refusal_patterns = tuple(refusal_patterns)
        self._sleep = sleep if sleep is not None else (lambda _: None)
        self._sem = threading.BoundedSemaphore(config.max_inflight)
        self._jitter = random.Random(0x5EED)
        self._jitter_lock = threading.Lock()

    def _backoff(self, attempt: int) -> float:
        base = min(self.config.backoff_cap,
                   self.config.backoff_base * (2.0 ** attempt))
        with self._jitter_lock:
            return base * (0.5 + self._jitter.random())

    def chat(self, messages: Sequence[dict]) -> str:
        """One exchange; raises a ChatError subclass after retries."""
        payload = {
            "model": self.config.model,
            "messages": list(messages),
            "temperature": self.config.temperature,
        }
        attempts = self.config.retries + 1
        refusals = 0
        last_error: ChatError | None = None
        for attempt in range(attempts):
            if attempt:
                self._sleep(self._backoff(attempt - 1))
            try:
                with self._sem:
                    response = self._transport(payload)
            except TimeoutError as exc:
                last_error = ChatTimeoutError(f"endpoint timeout: {exc}")
                continue
            try:
                content = response["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise ChatError(f"malformed endpoint response: {response!r}") from exc
            content = (content or "").strip()
            if not content:
                last_error = ChatEmptyError("endpoint returned an empty response")
                continue
            if detect_refusal(content, self._refusal_patterns):
                refusals += 1
                last_error = ChatRefusalError(f"refusal response: {content[:80]!r}")
                if refusals > 1:
                    raise last_error
                continue
            return content
        assert last_error is not None
        raise last_error

    def map_chat(self, items: Sequence[tuple[str, Sequence[dict]]],
                 jobs: int | None = None) -> dict[str, tuple[str, str]]:
        """Run many exchanges; every key is accounted exactly once.

        Returns key -> ("ok", text) or ("timeout" | "empty" | "refusal" |
        "error", message).
        """
        keys = [k for k, _ in items]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate keys in chat batch")
        workers = max(1, jobs if jobs is not None else self.config.max_inflight)

        def run(item):
            key, messages = item
            try:
                return key, ("ok", self.chat(messages))
            except ChatTimeoutError as exc:
                return key, ("timeout", str(exc))
            except ChatEmptyError as exc:
                return key, ("empty", str(exc))
            except ChatRefusalError as exc:
                return key, ("refusal", str(exc))
            except ChatError as exc:
                return key, ("error", str(exc))

        if workers == 1 or len(items) <= 1:
            return dict(map(run, items))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return dict(pool.map(run, items))


def rewrite_caption(raw_text: str, client: ChatClient,
                    prompt_template: str = DEFAULT_REWRITE_PROMPT) -> str:
    """Rewrite PCFG raw text into a natural facial caption."""
    if not raw_text.strip():
        raise ValueError("raw text must be non-empty")
    if "{raw}" not in prompt_template:
        raise ValueError("prompt template must contain a {raw} slot")
    prompt = prompt_template.replace("{raw}", raw_text)
    return client.chat([{"role": "user", "content": prompt}]).strip()


def rewrite_records(records: Iterable[SampleRecord], client: ChatClient,
                    prompt_template: str = DEFAULT_REWRITE_PROMPT,
                    jobs: int | None = None,
                    ) -> tuple[list[SampleRecord], dict[str, int]]:
    """Rewrite every record's raw facial text; order preserved.

    Refusals become rejected records (they are a data defect); transport
    failures keep the record out of the output and are tallied in the
    failure counts, never silently dropped.
    """
    records = list(records)
    items = [(rec.id, [{"role": "user",
                        "content": prompt_template.replace("{raw}", rec.facial_raw)}])
             for rec in records]
    outcomes = client.map_chat(items, jobs=jobs)
    out: list[SampleRecord] = []
    counts = {"ok": 0, "refusal": 0, "timeout": 0, "empty": 0, "error": 0}
    for rec in records:
        kind, payload = outcomes[rec.id]
        counts[kind] += 1
        if kind == "ok":
            rec = replace(rec, facial_caption=payload.strip())
            out.append(rec.advanced(Status.REWRITTEN))
        elif kind == "refusal":
            out.append(rec.rejected(REFUSAL))
        # timeout/empty/error records are reported via counts only
    return out, counts
