"""Query, parse and compile-check counterexamples, with a bounded repair loop."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from ..errors import BackendError, CompileError, ProtocolError
from ..subject import parse_test
from .backends import request_key
from .prompt import build_prompt, repair_prompt
from .protocol import FAILED, OK, parse_response

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 3

# outcome status
ACCEPTED, JUDGED_OK, REJECTED, UNJUDGED = "accepted", "ok", "rejected", "unjudged"


@dataclass
class Validation:
    test: object | None  # the accepted TestScript
    diagnostics: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.test is not None


def validate_counterexample(verdict, program, name: str) -> Validation:
    """Compile-only check of a FAILED verdict's test; nothing is executed here."""
    if verdict.verdict != FAILED:
        raise ValueError("only FAILED verdicts carry a counterexample")
    try:
        test = parse_test(verdict.test_source, program, name)
    except CompileError as exc:
        return Validation(None, [str(d) for d in exc.diagnostics])
    return Validation(replace(test, name=name))


@dataclass
class RefinementOutcome:
    key: str
    assertion: object
    status: str
    verdict: str | None  # OK / FAILED from the last parsed response
    test: object | None = None
    test_source: str | None = None
    attempts: int = 0
    diagnostics: list = field(default_factory=list)  # one entry per failed attempt
    error: str | None = None

    @property
    def test_name(self) -> str | None:
        return self.test.name if self.test is not None else None


def refine_assertion(program, method: str, assertion, backend, *, examples=None,
                     few_shot_dir=None, temperature: float = 0.1, model_id: str = "",
                     max_attempts: int = MAX_ATTEMPTS, validate: bool = True) -> RefinementOutcome:
    """At most `max_attempts` backend calls in total for one assertion.

    With `validate=False` the verdict alone is reported (judge-only use).
    """
    key = request_key(program, method, assertion)
    name = f"cx_{assertion.id[:10]}"
    bundle = build_prompt(program, method, assertion, few_shot_dir, temperature=temperature,
                          model_id=model_id, examples=examples)
    out = RefinementOutcome(key, assertion, REJECTED, None)
    current = bundle
    for attempt in range(1, max_attempts + 1):
        out.attempts = attempt
        try:
            raw = backend.query(current, key, attempt)
        except BackendError as exc:
            out.status, out.error = UNJUDGED, f"{type(exc).__name__}: {exc}"
            log.warning("%s: %s", key, out.error)
            return out
        try:
            verdict = parse_response(raw)
        except ProtocolError as exc:
            out.diagnostics.append(f"protocol: {exc}")
            current = repair_prompt(bundle, raw, [f"protocol: {exc}"])
            continue
        out.verdict = verdict.verdict
        if verdict.verdict == OK:
            out.status = JUDGED_OK
            return out
        out.test_source = verdict.test_source
        if not validate:
            out.status = ACCEPTED
            return out
        checked = validate_counterexample(verdict, program, name)
        if checked.accepted:
            out.status, out.test = ACCEPTED, checked.test
            return out
        out.diagnostics.append("; ".join(checked.diagnostics))
        current = repair_prompt(bundle, verdict.test_source, checked.diagnostics)
    out.status = REJECTED
    log.info("%s: counterexample discarded after %d attempts", key, max_attempts)
    return out


def refine_many(program, method: str, assertions, backend, *, max_concurrency: int = 4,
                **kwargs) -> list[RefinementOutcome]:
    """Refine independently and concurrently; results follow the input order."""
    assertions = list(assertions)
    if max_concurrency <= 1 or len(assertions) <= 1:
        return [refine_assertion(program, method, a, backend, **kwargs) for a in assertions]
    with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
        futures = [pool.submit(refine_assertion, program, method, a, backend, **kwargs)
                   for a in assertions]
        return [f.result() for f in futures]
