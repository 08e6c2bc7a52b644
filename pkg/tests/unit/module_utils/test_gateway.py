# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

import threading
import time

import pytest
from pydantic import ValidationError

from prompt_rewriter.module_utils.exceptions import (
    AuthMissingError,
    BudgetExhaustedError,
    RemoteError,
)
from prompt_rewriter.module_utils.gateway import (
    Backend,
    GenerationRecord,
    Generator,
    GeneratorConfig,
    RemoteBackend,
    prompt_hash,
)

REMOTE = dict(backend=Backend.REMOTE, endpoint_url="https://llm.example.com/v1/completions")


def test_cache_hit_on_second_call(fake_backend):
    generator = Generator(GeneratorConfig(), backend=fake_backend)
    first = generator.generate("hello")
    second = generator.generate("hello")
    assert first.output == second.output == "HELLO"
    assert not first.from_cache
    assert second.from_cache
    assert generator.stats.model_dump() == {"hits": 1, "misses": 1, "calls": 1}
    assert len(fake_backend.calls) == 1


def test_disk_cache_survives_restart(tmp_path, fake_backend):
    config = GeneratorConfig(cache_dir=str(tmp_path / "cache"))
    Generator(config, backend=fake_backend).generate("persist me")
    again = Generator(config, backend=fake_backend)
    record = again.generate("persist me")
    assert record.from_cache
    assert len(fake_backend.calls) == 1
    assert again.stats.calls == 0
    assert list((tmp_path / "cache").glob("*.tmp")) == []


def test_budget_applies_to_misses_only(fake_backend):
    generator = Generator(GeneratorConfig(budget_calls=1), backend=fake_backend)
    generator.generate("a")
    with pytest.raises(BudgetExhaustedError):
        generator.generate("b")
    assert generator.generate("a").from_cache


def test_generate_many_keeps_order_and_deduplicates(fake_backend):
    generator = Generator(GeneratorConfig(max_inflight=4), backend=fake_backend)
    records = generator.generate_many(["a", "b", "a", "c"])
    assert [r.output for r in records] == ["A", "B", "A", "C"]
    assert sorted(fake_backend.calls) == ["a", "b", "c"]
    assert generator.stats.hits == 1


def test_key_locks_are_released_after_each_flight(fake_backend):
    generator = Generator(GeneratorConfig(max_inflight=4), backend=fake_backend)
    generator.generate_many([f"p{i % 5}" for i in range(20)])
    generator.generate("single")
    assert generator._key_locks == {}
    assert len(fake_backend.calls) == 6


def test_failed_flight_releases_its_key_lock():
    def broken_backend(prompt_text):
        raise RuntimeError("down")

    generator = Generator(GeneratorConfig(), backend=broken_backend)
    with pytest.raises(RuntimeError):
        generator.generate("a")
    assert generator._key_locks == {}


def test_generate_many_collects_exceptions(fake_backend):
    generator = Generator(GeneratorConfig(budget_calls=1), backend=fake_backend)
    results = generator.generate_many(["x", "y"], return_exceptions=True)
    assert sum(isinstance(r, BudgetExhaustedError) for r in results) == 1
    assert sum(isinstance(r, GenerationRecord) for r in results) == 1

    with pytest.raises(BudgetExhaustedError):
        Generator(GeneratorConfig(budget_calls=0), backend=fake_backend).generate_many(["z"])


def test_inflight_calls_are_bounded():
    lock = threading.Lock()
    state = {"now": 0, "peak": 0}

    def slow_backend(prompt_text):
        with lock:
            state["now"] += 1
            state["peak"] = max(state["peak"], state["now"])
        time.sleep(0.02)
        with lock:
            state["now"] -= 1
        return prompt_text

    generator = Generator(GeneratorConfig(max_inflight=2), backend=slow_backend)
    generator.generate_many([f"p{i}" for i in range(8)])
    assert state["peak"] <= 2


def test_config_requires_zero_temperature_unless_sampling():
    with pytest.raises(ValidationError):
        GeneratorConfig(temperature=0.7)
    assert GeneratorConfig(temperature=0.7, allow_sampling=True).temperature == 0.7


def test_remote_config_needs_endpoint():
    with pytest.raises(ValidationError):
        GeneratorConfig(backend=Backend.REMOTE)


def test_prompt_hash_covers_model():
    base = GeneratorConfig()
    assert prompt_hash("p", base) == prompt_hash("p", GeneratorConfig())
    assert prompt_hash("p", base) != prompt_hash("p", GeneratorConfig(model_name="other"))
    assert prompt_hash("p", base) != prompt_hash("q", base)


def test_remote_backend_requires_token(monkeypatch):
    monkeypatch.delenv("PROMPT_REWRITER_TEST_TOKEN", raising=False)
    config = GeneratorConfig(auth_env_var="PROMPT_REWRITER_TEST_TOKEN", **REMOTE)
    with pytest.raises(AuthMissingError):
        RemoteBackend(config)


@pytest.fixture
def remote(monkeypatch, mocker):
    monkeypatch.setenv("GENERATOR_API_KEY", "secret-token")
    session = mocker.Mock()
    session.headers = {}
    backend = RemoteBackend(GeneratorConfig(backoff_seconds=0, **REMOTE), session=session)
    return backend, session


def response(mocker, status, payload=None, text=""):
    reply = mocker.Mock(status_code=status, text=text)
    reply.json.return_value = payload
    return reply


def test_remote_retries_transient_status(remote, mocker):
    backend, session = remote
    session.post.side_effect = [
        response(mocker, 503, text="busy"),
        response(mocker, 200, {"choices": [{"text": "generated text"}]}),
    ]
    assert backend("prompt") == "generated text"
    assert session.post.call_count == 2
    assert session.headers["Authorization"] == "Bearer secret-token"
    payload = session.post.call_args.kwargs["json"]
    assert payload["prompt"] == "prompt"
    assert payload["temperature"] == 0.0


def test_remote_reads_top_level_text(remote, mocker):
    backend, session = remote
    session.post.return_value = response(mocker, 200, {"text": "plain"})
    assert backend("prompt") == "plain"


def test_remote_fails_fast_on_client_error(remote, mocker):
    backend, session = remote
    session.post.return_value = response(mocker, 400, text="bad request")
    with pytest.raises(RemoteError) as exc:
        backend("prompt")
    assert exc.value.status == 400
    assert session.post.call_count == 1


def test_remote_gives_up_after_three_attempts(remote, mocker):
    backend, session = remote
    session.post.return_value = response(mocker, 503, text="busy")
    with pytest.raises(RemoteError) as exc:
        backend("prompt")
    assert exc.value.status == 503
    assert session.post.call_count == 3
