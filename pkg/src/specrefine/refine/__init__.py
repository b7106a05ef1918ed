"""Counterexample-driven refinement of inferred postconditions."""
from .backends import (
    BackendConfig, HttpBackend, OracleBackend, ReplayBackend, RetryPolicy, Transcript,
    make_backend, read_transcript, request_key,
)
from .loop import (
    ACCEPTED, JUDGED_OK, MAX_ATTEMPTS, REJECTED, UNJUDGED, RefinementOutcome, Validation,
    refine_assertion, refine_many, validate_counterexample,
)
from .oracle import OracleBounds, explore, find_counterexample, script_source
from .prompt import PromptBundle, build_prompt, load_fewshot, repair_prompt
from .protocol import FAILED, OK, RefinementVerdict, parse_response, render_verdict

__all__ = [
    "BackendConfig", "HttpBackend", "OracleBackend", "ReplayBackend", "RetryPolicy",
    "Transcript", "make_backend", "read_transcript", "request_key", "ACCEPTED", "JUDGED_OK",
    "MAX_ATTEMPTS", "REJECTED", "UNJUDGED", "RefinementOutcome", "Validation",
    "refine_assertion", "refine_many", "validate_counterexample", "OracleBounds", "explore",
    "find_counterexample", "script_source", "PromptBundle", "build_prompt", "load_fewshot",
    "repair_prompt", "FAILED", "OK", "RefinementVerdict", "parse_response", "render_verdict",
]
