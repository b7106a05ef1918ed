"""Counterexample backends: a chat-completion endpoint, the bounded oracle, or a replay."""
from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from ..errors import ConfigError, ReplayMiss, TransportError
from .oracle import OracleBounds, find_counterexample, script_source
from .protocol import FAILED, OK, RefinementVerdict, render_verdict

log = logging.getLogger(__name__)

HTTP, ORACLE, REPLAY = "http", "oracle", "replay"


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 4
    backoff: float = 1.0  # seconds before the first retry, doubled each time
    max_backoff: float = 30.0


@dataclass
class BackendConfig:
    kind: str = ORACLE
    endpoint: str = ""
    api_key_env: str = "OPENAI_API_KEY"
    model: str = ""
    timeout: float = 120.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    oracle: OracleBounds = field(default_factory=OracleBounds)
    transcript_path: str | None = None  # replay source, or recording target for other kinds
    max_concurrency: int = 4

    def validate(self) -> None:
        if self.kind not in (HTTP, ORACLE, REPLAY):
            raise ConfigError(f"unknown backend kind {self.kind!r}")
        if self.kind == HTTP and not self.endpoint:
            raise ConfigError("http backend needs an endpoint URL")
        if self.kind == REPLAY and not self.transcript_path:
            raise ConfigError("replay backend needs a transcript path")
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be at least 1")

    @property
    def model_id(self) -> str:
        return self.model or {ORACLE: "oracle", REPLAY: "replay"}.get(self.kind, "")


def request_key(program, method: str, assertion) -> str:
    return f"{program.unit_name}.{method}:{assertion.id}"


class Transcript:
    """Append-only newline-delimited record of backend exchanges."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, key: str, attempt: int, bundle, response_text: str) -> None:
        record = {"key": key, "attempt": attempt, "request_digest": bundle.digest(),
                  "request": {"model": bundle.model_id, "temperature": bundle.temperature,
                              "messages": bundle.messages()},
                  "response_text": response_text, "timestamp": time.time()}
        line = json.dumps(record, ensure_ascii=False)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def read_transcript(path) -> list[dict]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc.msg}") from None
            if not isinstance(rec, dict) or "key" not in rec or "response_text" not in rec:
                raise ConfigError(f"{path}:{lineno}: record needs 'key' and 'response_text'")
            out.append(rec)
    return out


class Backend:
    kind = ""

    def __init__(self, transcript: Transcript | None = None):
        self.transcript = transcript

    def query(self, bundle, key: str, attempt: int = 1) -> str:
        text = self._query(bundle, key, attempt)
        if self.transcript is not None:
            self.transcript.append(key, attempt, bundle, text)
        return text

    def _query(self, bundle, key, attempt) -> str:  # pragma: no cover - abstract
        raise NotImplementedError


class OracleBackend(Backend):
    """Answers from the bounded search; needs the AST target carried by the bundle."""

    kind = ORACLE

    def __init__(self, bounds: OracleBounds | None = None, transcript=None):
        super().__init__(transcript)
        self.bounds = bounds or OracleBounds()

    def verdict_for(self, program, method, assertion) -> RefinementVerdict:
        obs = find_counterexample(program, method, assertion, self.bounds)
        if obs is None:
            return RefinementVerdict(OK)
        name = f"cx_{assertion.id[:10]}"
        return RefinementVerdict(FAILED, script_source(program, obs, name).strip())

    def _query(self, bundle, key, attempt) -> str:
        if not bundle.target:
            raise ConfigError("oracle backend needs a prompt built by build_prompt")
        program, method, assertion = bundle.target
        return render_verdict(self.verdict_for(program, method, assertion))


class ReplayBackend(Backend):
    """Serves recorded responses per key, in recording order."""

    kind = REPLAY

    def __init__(self, records, transcript=None):
        super().__init__(transcript)
        self._queues: dict = {}
        for rec in records:
            self._queues.setdefault(rec["key"], []).append(rec)
        self._cursor: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def from_path(cls, path, transcript=None):
        return cls(read_transcript(path), transcript)

    def _query(self, bundle, key, attempt) -> str:
        with self._lock:
            queue = self._queues.get(key, [])
            i = self._cursor.get(key, 0)
            if i >= len(queue):
                raise ReplayMiss(f"no recorded response #{i + 1} for {key}")
            self._cursor[key] = i + 1
        return queue[i]["response_text"]


class HttpBackend(Backend):
    """One chat-completion request per query, retried on rate limits, 5xx and transport errors."""

    kind = HTTP
    RETRY_STATUS = {408, 409, 429, 500, 502, 503, 504}

    def __init__(self, cfg: BackendConfig, transcript=None, client: httpx.Client | None = None,
                 sleep=time.sleep):
        super().__init__(transcript)
        self.cfg = cfg
        self.client = client or httpx.Client(timeout=cfg.timeout)
        self.sleep = sleep

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.cfg.api_key_env, "") if self.cfg.api_key_env else ""
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _query(self, bundle, key, attempt) -> str:
        body = {"model": bundle.model_id or self.cfg.model, "messages": bundle.messages(),
                "temperature": bundle.temperature}
        policy = self.cfg.retry
        delay = policy.backoff
        last = ""
        for n in range(1, policy.attempts + 1):
            try:
                resp = self.client.post(self.cfg.endpoint, json=body, headers=self._headers())
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()["choices"][0]["message"]["content"]
                    except (ValueError, KeyError, IndexError, TypeError):
                        raise TransportError(f"{key}: malformed completion body") from None
                last = f"HTTP {resp.status_code}"
                if resp.status_code not in self.RETRY_STATUS:
                    raise TransportError(f"{key}: {last}")
                retry_after = resp.headers.get("Retry-After")
                if retry_after and retry_after.isdigit():
                    delay = max(delay, float(retry_after))
            if n < policy.attempts:
                log.info("%s: %s, retrying in %.1fs", key, last, delay)
                self.sleep(min(delay, policy.max_backoff))
                delay *= 2
        raise TransportError(f"{key}: giving up after {policy.attempts} attempts ({last})")


def make_backend(cfg: BackendConfig) -> Backend:
    cfg.validate()
    record = None
    if cfg.transcript_path and cfg.kind != REPLAY:
        record = Transcript(cfg.transcript_path)
    if cfg.kind == ORACLE:
        return OracleBackend(cfg.oracle, record)
    if cfg.kind == REPLAY:
        return ReplayBackend.from_path(cfg.transcript_path)
    return HttpBackend(cfg, record)


__all__ = ["BackendConfig", "RetryPolicy", "Backend", "OracleBackend", "ReplayBackend",
           "HttpBackend", "Transcript", "read_transcript", "make_backend", "request_key",
           "HTTP", "ORACLE", "REPLAY", "OK", "FAILED"]
