import random
import threading

import pytest

from humancorpus.config import LlmEndpointConfig
from humancorpus.records import Status
from humancorpus.rewrite import (
    ChatClient, ChatEmptyError, ChatRefusalError, ChatTimeoutError,
    canned_transport, echo_transport, rewrite_caption, rewrite_records,
)

from .conftest import make_record


def client_with(transport, **overrides):
    config = LlmEndpointConfig(**{"retries": 3, "max_inflight": 4,
                                  **overrides})
    return ChatClient(config, transport=transport, sleep=None)


class FaultTransport:
    """Deterministic fault injector that also audits concurrency."""

    def __init__(self, seed=0, timeout_rate=0.2, refusal_rate=0.1):
        self.rng = random.Random(seed)
        self.timeout_rate = timeout_rate
        self.refusal_rate = refusal_rate
        self.lock = threading.Lock()
        self.inflight = 0
        self.max_inflight = 0
        self.calls = 0

    def __call__(self, payload):
        with self.lock:
            self.inflight += 1
            self.calls += 1
            self.max_inflight = max(self.max_inflight, self.inflight)
            roll = self.rng.random()
        try:
            if roll < self.timeout_rate:
                raise TimeoutError("injected timeout")
            if roll < self.timeout_rate + self.refusal_rate:
                content = "I'm sorry, I can't help with that."
            else:
                content = "rewritten: " + payload["messages"][-1]["content"][:40]
            return {"choices": [{"message": {"content": content}}]}
        finally:
            with self.lock:
                self.inflight -= 1


class TestChatClient:
    def test_echo_identity(self):
        client = client_with(echo_transport())
        out = client.chat([{"role": "user", "content": "hello there"}])
        assert out == "hello there"

    def test_empty_fails_after_retries(self):
        calls = []

        def transport(payload):
            calls.append(1)
            return {"choices": [{"message": {"content": ""}}]}

        client = client_with(transport, retries=2)
        with pytest.raises(ChatEmptyError):
            client.chat([{"role": "user", "content": "x"}])
        assert len(calls) == 3  # retries + 1

    def test_refusal_retried_once_then_fails(self):
        calls = []

        def transport(payload):
            calls.append(1)
            return {"choices": [{"message": {"content": "I cannot do that"}}]}

        client = client_with(transport, retries=5)
        with pytest.raises(ChatRefusalError):
            client.chat([{"role": "user", "content": "x"}])
        assert len(calls) == 2  # one retry, then fail despite budget

    def test_timeout_exhausts_budget(self):
        calls = []

        def transport(payload):
            calls.append(1)
            raise TimeoutError("boom")

        client = client_with(transport, retries=3)
        with pytest.raises(ChatTimeoutError):
            client.chat([{"role": "user", "content": "x"}])
        assert len(calls) == 4

    def test_transient_then_success(self):
        state = {"n": 0}

        def transport(payload):
            state["n"] += 1
            if state["n"] < 3:
                raise TimeoutError("flaky")
            return {"choices": [{"message": {"content": "ok fine"}}]}

        client = client_with(transport, retries=3)
        assert client.chat([{"role": "user", "content": "x"}]) == "ok fine"

    def test_canned_transport_keyed_by_hash(self):
        import hashlib
        key = hashlib.sha256(b"the prompt").hexdigest()
        client = client_with(canned_transport({key: "canned!"},
                                              default="fallback"))
        assert client.chat([{"role": "user", "content": "the prompt"}]) == \
            "canned!"
        assert client.chat([{"role": "user", "content": "other"}]) == \
            "fallback"

    def test_map_accounts_every_item(self):
        transport = FaultTransport(seed=7)
        client = client_with(transport, retries=2, max_inflight=3)
        items = [(f"k{i}", [{"role": "user", "content": f"text {i}"}])
                 for i in range(200)]
        outcomes = client.map_chat(items, jobs=8)
        assert set(outcomes) == {f"k{i}" for i in range(200)}
        kinds = {kind for kind, _ in outcomes.values()}
        assert kinds <= {"ok", "timeout", "refusal", "empty", "error"}
        assert transport.max_inflight <= 3

    def test_map_rejects_duplicate_keys(self):
        client = client_with(echo_transport())
        with pytest.raises(ValueError):
            client.map_chat([("a", []), ("a", [])])

    def test_inflight_bound_under_pressure(self):
        transport = FaultTransport(seed=1, timeout_rate=0.0, refusal_rate=0.0)
        client = client_with(transport, max_inflight=2)
        items = [(f"k{i}", [{"role": "user", "content": "x"}])
                 for i in range(100)]
        client.map_chat(items, jobs=16)
        assert transport.max_inflight <= 2


class TestRewrite:
    def test_mock_identity(self):
        client = client_with(echo_transport())
        out = rewrite_caption("raw text here", client, "{raw}")
        assert out == "raw text here"

    def test_empty_raw_rejected(self):
        client = client_with(echo_transport())
        with pytest.raises(ValueError):
            rewrite_caption("  ", client)

    def test_template_needs_slot(self):
        client = client_with(echo_transport())
        with pytest.raises(ValueError, match="raw"):
            rewrite_caption("text", client, "no slot")

    def test_records_rewritten_in_order(self):
        client = client_with(echo_transport())
        records = [make_record(rid=f"r{i}", facial_raw=f"raw {i}")
                   for i in range(20)]
        out, counts = rewrite_records(records, client, "{raw}")
        assert [r.id for r in out] == [r.id for r in records]
        assert all(r.status is Status.REWRITTEN for r in out)
        assert all(r.facial_caption == f"raw {i}" for i, r in enumerate(out))
        assert counts == {"ok": 20, "refusal": 0, "timeout": 0, "empty": 0,
                          "error": 0}

    def test_refusals_become_rejected_records(self):
        def transport(payload):
            content = payload["messages"][-1]["content"]
            if "2" in content:
                return {"choices": [{"message": {"content": "I cannot."}}]}
            return {"choices": [{"message": {"content": "fine"}}]}

        client = client_with(transport)
        records = [make_record(rid=f"r{i}", facial_raw=f"raw {i}")
                   for i in range(4)]
        out, counts = rewrite_records(records, client, "{raw}")
        assert counts["refusal"] == 1 and counts["ok"] == 3
        rejected = [r for r in out if r.status is Status.REJECTED]
        assert len(rejected) == 1 and rejected[0].reason == "refusal"

    def test_fault_injection_accounting(self):
        transport = FaultTransport(seed=42)
        client = client_with(transport, retries=2, max_inflight=4)
        records = [make_record(rid=f"r{i}", facial_raw=f"raw {i}")
                   for i in range(300)]
        out, counts = rewrite_records(records, client, "{raw}", jobs=8)
        assert sum(counts.values()) == 300
        assert counts["ok"] + counts["refusal"] == len(out)
        assert transport.max_inflight <= 4
