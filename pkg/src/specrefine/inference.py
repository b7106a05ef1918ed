"""Dynamic filtering: keep the candidates that hold on every observed trace."""
from __future__ import annotations

from dataclasses import dataclass, field

from .assertions import UNDEFINED, CandidateAssertion
from .subject.interp import execute_test


def collect_traces(program, suite, monitor: str, **limits) -> list:
    """Traces of `monitor` across `suite`, in suite order.

    A test that faults or fails an `assert` still contributes the traces it
    produced before aborting; those records carry the outcome in `flag`.
    """
    if not program.has_method(monitor):
        raise KeyError(f"unit {program.unit_name} has no method {monitor!r}")
    traces = []
    for test in suite:
        traces.extend(execute_test(program, test, monitor, **limits).traces)
    return traces


@dataclass
class InferenceResult:
    candidates: list
    survivors: list
    falsified: dict  # id -> (test_id, trace index) of the first failing trace
    undefined_hits: dict  # id -> number of traces evaluating to Undefined
    false_hits: dict  # id -> number of traces evaluating to false
    falsifying_tests: dict  # id -> test ids (suite order) with a failing trace
    trace_count: int
    vacuous: bool = False
    by_id: dict = field(default_factory=dict, repr=False)

    @property
    def survivor_ids(self) -> list:
        return [a.id for a in self.survivors]

    @property
    def undefined_only(self) -> set:
        """Discarded purely through faulting subexpressions, never a plain false."""
        return {k for k in self.falsified if self.false_hits.get(k, 0) == 0}

    def lookup(self, aid: str) -> CandidateAssertion:
        return self.by_id[aid]


def filter_candidates(candidates, traces) -> InferenceResult:
    """An assertion survives iff it evaluates to true on every trace."""
    candidates = list(candidates)
    survivors, falsified, undef, false, tests = [], {}, {}, {}, {}
    for a in candidates:
        fn = a.fn
        n_undef = n_false = 0
        first = None
        failing: list = []
        for i, t in enumerate(traces):
            v = fn(t.post_state, t.pre_state, t.result)
            if v is True:
                continue
            if v is UNDEFINED:
                n_undef += 1
            else:
                n_false += 1
            if first is None:
                first = (t.test_id, i)
            if t.test_id not in failing:
                failing.append(t.test_id)
        if first is None:
            survivors.append(a)
            continue
        falsified[a.id] = first
        tests[a.id] = failing
        if n_undef:
            undef[a.id] = n_undef
        if n_false:
            false[a.id] = n_false
    return InferenceResult(candidates, survivors, falsified, undef, false, tests, len(traces),
                           vacuous=not traces, by_id={a.id: a for a in candidates})


def infer(program, suite, monitor: str, candidates, **limits) -> InferenceResult:
    return filter_candidates(candidates, collect_traces(program, suite, monitor, **limits))
