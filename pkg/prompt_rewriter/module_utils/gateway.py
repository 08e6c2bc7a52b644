# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""Uniform access to the frozen document generator.

``Generator`` puts a content-addressed response cache, a call budget, a bound
on in-flight backend calls and single-flight deduplication in front of either
backend: the remote completion endpoint or the local simulator.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Union

import requests
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, model_validator

from prompt_rewriter.module_utils.exceptions import (
    AuthMissingError,
    BudgetExhaustedError,
    RemoteError,
)
from prompt_rewriter.module_utils.simulator import SimProfile, sim_generate

LOG = logging.getLogger(__name__)

TRANSIENT_STATUSES = frozenset({429, 500, 502, 503, 504})
MAX_ATTEMPTS = 3


class Backend(str, Enum):
    REMOTE = "remote"
    SIMULATED = "simulated"


class GeneratorConfig(BaseModel):
    """Generator options; the nested ``generator`` parameter of every module."""

    model_config = ConfigDict(frozen=True)

    backend: Backend = Backend.SIMULATED
    endpoint_url: Optional[str] = None
    model_name: str = "simulator"
    auth_env_var: str = "GENERATOR_API_KEY"
    temperature: float = 0.0
    allow_sampling: bool = False
    max_output_tokens: int = Field(default=256, ge=1)
    max_inflight: int = Field(default=4, ge=1)
    budget_calls: int = Field(default=100000, ge=0)
    cache_dir: Optional[str] = None
    timeout_seconds: float = Field(default=60.0, gt=0)
    backoff_seconds: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def _check_temperature(self) -> "GeneratorConfig":
        if self.temperature != 0 and not self.allow_sampling:
            raise ValueError("temperature must be 0 unless allow_sampling is set")
        if self.backend is Backend.REMOTE and not self.endpoint_url:
            raise ValueError("endpoint_url is required for the remote backend")
        return self


class GenerationRecord(BaseModel):
    prompt_hash: str
    output: str
    backend: str
    latency_ms: float = 0.0
    from_cache: bool = False


class CacheStats(BaseModel):
    hits: int = 0
    misses: int = 0
    calls: int = 0


def prompt_hash(prompt_text: str, config: GeneratorConfig) -> str:
    """SHA-256 over the prompt and the output-determining config fields."""
    material = json.dumps(
        {
            "prompt": prompt_text,
            "model": config.model_name,
            "temperature": config.temperature,
            "max_output_tokens": config.max_output_tokens,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class ResponseCache:
    """In-memory records backed by one JSON file per prompt hash.

    Files are written to a temporary name and renamed, so concurrent readers
    never see a partial record.
    """

    def __init__(self, cache_dir: Optional[str] = None):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._memory: Dict[str, GenerationRecord] = {}
        self._lock = threading.Lock()
        if self.cache_dir is not None:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        assert self.cache_dir is not None
        return self.cache_dir / f"{key}.json"

    def get(self, key: str) -> Optional[GenerationRecord]:
        with self._lock:
            record = self._memory.get(key)
        if record is None and self.cache_dir is not None:
            path = self._path(key)
            if path.is_file():
                record = GenerationRecord.model_validate_json(path.read_text(encoding="utf-8"))
                with self._lock:
                    self._memory[key] = record
        return record

    def put(self, record: GenerationRecord) -> None:
        stored = record.model_copy(update={"from_cache": False})
        with self._lock:
            self._memory[record.prompt_hash] = stored
        if self.cache_dir is None:
            return
        fd, tmp_name = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(stored.model_dump_json())
            os.replace(tmp_name, self._path(record.prompt_hash))
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise


class RemoteBackend:
    """Single-completion HTTP client.

    Request body: ``{"model", "prompt", "temperature", "max_tokens"}``. The
    completion is read from ``choices[0].text`` or a top-level ``text`` field.
    Statuses 429/500/502/503/504 and connection errors are retried with
    exponential backoff, three attempts in total.
    """

    name = Backend.REMOTE.value

    def __init__(self, config: GeneratorConfig, session: Optional[requests.Session] = None):
        load_dotenv()
        token = os.environ.get(config.auth_env_var)
        if not token:
            raise AuthMissingError(config.auth_env_var)
        self.config = config
        self.session = session or requests.Session()
        self.session.headers.update(
            {"Authorization": f"Bearer {token}", "Content-Type": "application/json"}
        )

    def __call__(self, prompt_text: str) -> str:
        payload = {
            "model": self.config.model_name,
            "prompt": prompt_text,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        status: Optional[int] = None
        body = ""
        for attempt in range(MAX_ATTEMPTS):
            if attempt:
                time.sleep(self.config.backoff_seconds * 2 ** (attempt - 1))
            try:
                response = self.session.post(
                    self.config.endpoint_url, json=payload, timeout=self.config.timeout_seconds
                )
            except (requests.ConnectionError, requests.Timeout) as e:
                status, body = None, str(e)
                LOG.warning("generator request failed (attempt %d): %s", attempt + 1, e)
                continue
            if response.status_code in TRANSIENT_STATUSES:
                status, body = response.status_code, response.text
                LOG.warning("generator returned %d (attempt %d)", status, attempt + 1)
                continue
            if response.status_code >= 400:
                raise RemoteError(response.status_code, response.text)
            return self._completion_text(response)
        raise RemoteError(status, body)

    @staticmethod
    def _completion_text(response: requests.Response) -> str:
        try:
            data = response.json()
        except ValueError:
            raise RemoteError(response.status_code, "reply is not JSON") from None
        choices = data.get("choices") if isinstance(data, dict) else None
        if choices and isinstance(choices[0], dict) and "text" in choices[0]:
            return str(choices[0]["text"])
        if isinstance(data, dict) and "text" in data:
            return str(data["text"])
        raise RemoteError(response.status_code, "reply carries no completion text")


class SimulatedBackend:
    name = Backend.SIMULATED.value

    def __init__(self, profile: SimProfile):
        self.profile = profile

    def __call__(self, prompt_text: str) -> str:
        return sim_generate(prompt_text, self.profile)


@dataclass
class _Flight:
    lock: threading.Lock = field(default_factory=threading.Lock)
    users: int = 0


class Generator:
    """Cached, budgeted, concurrency-bounded access to one backend.

    Args:
        config: Gateway options.
        profile: Simulator behaviour, used by the simulated backend only.
        backend: Optional callable ``prompt -> text`` replacing the configured one.

    Raises:
        AuthMissingError: For the remote backend when the token is not set.
    """

    def __init__(
        self,
        config: GeneratorConfig,
        profile: Optional[SimProfile] = None,
        backend=None,
    ):
        self.config = config
        self.profile = profile or SimProfile()
        if backend is not None:
            self.backend = backend
        elif config.backend is Backend.REMOTE:
            self.backend = RemoteBackend(config)
        else:
            self.backend = SimulatedBackend(self.profile)
        self.backend_name = getattr(self.backend, "name", config.backend.value)

        self.cache = ResponseCache(config.cache_dir)
        self.stats = CacheStats()
        self._stats_lock = threading.Lock()
        self._key_locks: Dict[str, _Flight] = {}
        self._key_locks_guard = threading.Lock()
        self._inflight = threading.BoundedSemaphore(config.max_inflight)

    @contextmanager
    def _key_lock(self, key: str) -> Iterator[None]:
        """Serialize generation per prompt key; the entry goes once nobody waits on it."""
        with self._key_locks_guard:
            flight = self._key_locks.setdefault(key, _Flight())
            flight.users += 1
        try:
            with flight.lock:
                yield
        finally:
            with self._key_locks_guard:
                flight.users -= 1
                if not flight.users:
                    del self._key_locks[key]

    def _hit(self, record: GenerationRecord) -> GenerationRecord:
        with self._stats_lock:
            self.stats.hits += 1
        LOG.debug("cache hit %s", record.prompt_hash[:12])
        return record.model_copy(update={"from_cache": True})

    def _reserve_call(self) -> None:
        with self._stats_lock:
            if self.stats.calls >= self.config.budget_calls:
                raise BudgetExhaustedError(self.config.budget_calls)
            self.stats.calls += 1
            self.stats.misses += 1

    def generate(self, prompt_text: str) -> GenerationRecord:
        """Generate one document, consulting the cache first.

        Raises:
            BudgetExhaustedError: On a cache miss once ``budget_calls`` is used up.
            RemoteError: When the remote backend keeps failing.
        """
        key = prompt_hash(prompt_text, self.config)
        record = self.cache.get(key)
        if record is not None:
            return self._hit(record)

        with self._key_lock(key):
            record = self.cache.get(key)
            if record is not None:
                return self._hit(record)
            self._reserve_call()
            with self._inflight:
                started = time.perf_counter()
                output = self.backend(prompt_text)
                latency = (time.perf_counter() - started) * 1000.0
            record = GenerationRecord(
                prompt_hash=key, output=output, backend=self.backend_name, latency_ms=latency
            )
            self.cache.put(record)
            return record

    def generate_many(
        self, prompts: Sequence[str], return_exceptions: bool = False
    ) -> List[Union[GenerationRecord, Exception]]:
        """Generate for every prompt concurrently; results keep input order.

        Args:
            prompts: Rendered prompts.
            return_exceptions: Put per-prompt exceptions in the result list
                instead of raising the first one (in input order).
        """
        if not prompts:
            return []

        def run(text: str) -> Union[GenerationRecord, Exception]:
            try:
                return self.generate(text)
            except Exception as e:  # collected positionally
                return e

        with ThreadPoolExecutor(max_workers=min(self.config.max_inflight, len(prompts))) as pool:
            results = list(pool.map(run, prompts))

        if not return_exceptions:
            for result in results:
                if isinstance(result, Exception):
                    raise result
        return results
