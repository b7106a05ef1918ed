"""End-to-end workflow: generate, filter, reduce, refine, re-infer once, score."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .assertions import Signature
from .errors import ConfigError
from .fuzzer import FuzzerConfig, default_grammar_text, generate_candidates, load_grammar
from .groundtruth import (
    EnumerationBounds, Enumerator, attribute_discards, attribution_by_test, default_groundtruth_root,
    groundtruth_path, load_groundtruth, score, suspected_violations, verdict_confusion,
)
from .inference import collect_traces, filter_candidates
from .mutation import cluster_and_select, compute_kill_matrix, generate_mutants
from .refine.backends import BackendConfig, make_backend
from .refine.loop import ACCEPTED, refine_many
from .refine.prompt import default_fewshot_dir, load_fewshot
from .subject import parse_subject, parse_test_file

log = logging.getLogger(__name__)

FULL, JUDGE_ONLY = "full", "judge-only"
SCHEMA_VERSION = 1
DEFAULT_BOUNDS = EnumerationBounds(int_lo=-1, int_hi=3, max_len=2, elem_lo=-1, elem_hi=1)


@dataclass
class RunConfig:
    subject: str
    method: str
    suites: list = field(default_factory=list)
    grammar: str | None = None  # None: the shipped default grammar
    fuzzer: FuzzerConfig = field(default_factory=FuzzerConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    bounds: EnumerationBounds = DEFAULT_BOUNDS
    iterations: int = 1
    mode: str = FULL
    out: str | None = None
    seed: int | None = None  # overrides fuzzer.seed when set
    groundtruth: str | None = None  # .assert file, or a root laid out as <unit>/<method>.assert
    few_shot_dir: str | None = None
    temperature: float = 0.1
    keep_zero_kill: bool = False
    refine_all_survivors: bool = False
    max_suite_tests: int | None = None

    def validate(self) -> None:
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")
        if self.mode not in (FULL, JUDGE_ONLY):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.max_suite_tests is not None and self.max_suite_tests < 0:
            raise ConfigError("max_suite_tests must be non-negative")
        self.backend.validate()

    def describe(self) -> dict:
        fz = self.fuzzer
        ob = self.backend.oracle
        return {
            "subject": Path(self.subject).name, "method": self.method,
            "suites": [Path(s).name for s in self.suites],
            "grammar": Path(self.grammar).name if self.grammar else "default.gram",
            "seed": self.seed if self.seed is not None else fz.seed, "mode": self.mode,
            "iterations": self.iterations,
            "fuzzer": {"max_depth": fz.max_depth, "max_candidates": fz.max_candidates,
                       "const_pool": list(fz.const_pool)},
            "backend": {"kind": self.backend.kind, "model": self.backend.model_id,
                        "max_concurrency": self.backend.max_concurrency},
            "oracle_bounds": {"max_calls": ob.max_calls, "int_range": [ob.int_lo, ob.int_hi],
                              "sentinels": list(ob.sentinels)},
            "temperature": self.temperature, "keep_zero_kill": self.keep_zero_kill,
            "refine_all_survivors": self.refine_all_survivors,
            "max_suite_tests": self.max_suite_tests,
        }


@dataclass
class Snapshot:
    """One inference round: filtering plus reduction over a given suite."""

    suite: list
    inference: object
    matrix: object
    clustering: object
    traces: list

    @property
    def survivors(self) -> list:
        return self.inference.survivors

    @property
    def representatives(self) -> list:
        return self.clustering.representatives


@dataclass
class RunReport:
    data: dict
    state: dict = field(default_factory=dict, repr=False)  # in-memory objects for callers

    @property
    def complete(self) -> bool:
        return self.data.get("status") == "complete"

    def without_timing(self) -> dict:
        return {k: v for k, v in self.data.items() if k != "timing_ms"}


def _read(path) -> str:
    return Path(path).read_text("utf-8")


def load_suites(program, paths, limit=None) -> list:
    suite, names = [], set()
    for p in paths:
        for t in parse_test_file(_read(p), program):
            if t.name in names:
                raise ConfigError(f"test name {t.name!r} appears in more than one suite file")
            names.add(t.name)
            suite.append(t)
    return suite[:limit] if limit is not None else suite


def _groundtruth(cfg: RunConfig, sig: Signature):
    if cfg.groundtruth is None:
        root = default_groundtruth_root()
        path = Path(str(groundtruth_path(root, sig.unit, sig.method)))
        return load_groundtruth(sig, root) if path.is_file() else None
    p = Path(cfg.groundtruth)
    if p.is_dir():
        return load_groundtruth(sig, p)
    from .assertions import load_assertions
    return load_assertions(_read(p), sig)


def snapshot(program, method, suite, candidates, mutants, keep_zero_kill) -> Snapshot:
    traces = collect_traces(program, suite, method)
    inf = filter_candidates(candidates, traces)
    km = compute_kill_matrix(program, mutants, suite, inf.survivors, method)
    return Snapshot(list(suite), inf, km, cluster_and_select(km, keep_zero_kill), traces)


def _texts(assertions) -> list:
    return [a.text for a in assertions]


def _side(snap: Snapshot, metrics, reported) -> dict:
    inf = snap.inference
    return {
        "tests": len(snap.suite), "trace_count": inf.trace_count,
        # traces kept from tests that faulted or failed an assert before finishing
        "aborted_test_traces": sum(1 for t in snap.traces if t.flag is not None),
        "vacuous": inf.vacuous,
        "survivor_count": len(inf.survivors), "survivors": _texts(inf.survivors),
        "representative_count": len(snap.representatives),
        "representatives": _texts(snap.representatives),
        "cluster_count": len(snap.clustering.clusters),
        "unranked_count": len(snap.clustering.unranked),
        "undefined_only_discards": len(inf.undefined_only),
        "mutants": len(snap.matrix.mutants), "stillborn": len(snap.matrix.stillborn),
        "metrics": metrics.to_json() if metrics is not None else None,
        "reported_metrics": reported.to_json() if reported is not None else None,
    }


def _reduction(before: int, after: int):
    return (before - after) / before if before else None


def run_pipeline(cfg: RunConfig, backend=None) -> RunReport:
    """One full run. A failing stage yields a partial report naming that stage."""
    timing: dict = {}
    data: dict = {"schema_version": SCHEMA_VERSION, "status": "partial", "failed_stage": None,
                  "error": None, "config": cfg.describe(), "bounds": cfg.bounds.describe()}
    state: dict = {}
    stage = "config"

    def timed(name, fn):
        nonlocal stage
        stage = name
        t0 = time.monotonic()
        try:
            return fn()
        finally:
            timing[name] = round((time.monotonic() - t0) * 1000, 3)

    try:
        cfg.validate()
        program = timed("load", lambda: parse_subject(_read(cfg.subject)))
        if not program.has_method(cfg.method):
            raise ConfigError(f"unit {program.unit_name} has no method {cfg.method!r}")
        suite = timed("load_suite", lambda: load_suites(program, cfg.suites, cfg.max_suite_tests))
        sig = Signature.of(program, cfg.method)
        gt = timed("load_groundtruth", lambda: _groundtruth(cfg, sig))
        data.update({"subject": program.unit_name, "method": cfg.method})
        state.update(program=program, signature=sig, groundtruth=gt)

        fz = cfg.fuzzer
        if cfg.seed is not None:
            fz = FuzzerConfig(cfg.seed, fz.max_depth, fz.max_candidates, fz.const_pool,
                              fz.draws_per_candidate)
        grammar_text = _read(cfg.grammar) if cfg.grammar else default_grammar_text()
        candidates = timed("generate", lambda: generate_candidates(
            load_grammar(grammar_text, sig, fz.const_pool), fz))
        data["candidates"] = len(candidates)
        mutants = timed("mutate", lambda: generate_mutants(program, cfg.method))
        before = timed("infer_before", lambda: snapshot(program, cfg.method, suite, candidates,
                                                        mutants, cfg.keep_zero_kill))
        state.update(candidates=candidates, mutants=mutants, before=before)

        if backend is None:
            backend = make_backend(cfg.backend)
        examples = load_fewshot(cfg.few_shot_dir if cfg.few_shot_dir else default_fewshot_dir())

        current, all_outcomes, new_tests, targets = before, [], [], {}
        for _round in range(cfg.iterations):
            pool = current.survivors if cfg.refine_all_survivors else current.representatives
            outcomes = timed("refine", lambda: refine_many(
                program, cfg.method, pool, backend, max_concurrency=cfg.backend.max_concurrency,
                examples=examples, temperature=cfg.temperature, model_id=cfg.backend.model_id,
                validate=cfg.mode == FULL))
            all_outcomes.extend(outcomes)
            if cfg.mode == JUDGE_ONLY:
                current = _judge_only(current, outcomes)
                continue
            fresh = [o.test for o in outcomes if o.status == ACCEPTED and o.test is not None]
            for o in outcomes:
                if o.status == ACCEPTED and o.test is not None:
                    targets[o.test.name] = o.assertion.id
            new_tests.extend(fresh)
            extended = list(suite) + new_tests
            current = timed("infer_after", lambda: snapshot(
                program, cfg.method, extended, candidates, mutants, cfg.keep_zero_kill))
        after = current
        state.update(after=after, outcomes=all_outcomes, new_tests=new_tests)

        metrics = timed("score", lambda: _score(before, after, gt, cfg.bounds, sig))
        m_before, m_after, r_before, r_after = metrics
        data["before"] = _side(before, m_before, r_before)
        data["after"] = _side(after, m_after, r_after)
        generated = sum(1 for o in all_outcomes if o.verdict == "FAILED")
        data["tests"] = {"before": len(suite), "generated": generated,
                         "compilable": sum(1 for o in all_outcomes if o.status == ACCEPTED
                                           and o.test is not None),
                         "added": len(new_tests), "added_ids": [t.name for t in new_tests],
                         "after": len(after.suite)}
        data["reduction"] = _reduction(len(before.representatives), len(after.representatives))
        data["survivor_reduction"] = _reduction(len(before.survivors), len(after.survivors))
        data["refinement"] = [_outcome_json(o) for o in all_outcomes]
        verdicts = {o.assertion.id: o.verdict for o in all_outcomes if o.verdict is not None}
        data["unjudged"] = [o.assertion.text for o in all_outcomes if o.status == "unjudged"]
        if m_before is not None:
            data["verdict_confusion"] = verdict_confusion(verdicts, m_before.invalid).to_json()
        else:
            data["verdict_confusion"] = None
        # judge-only drops are not caused by any test, so there is nothing to attribute
        attribution = (attribute_discards(before.inference, after.inference, new_tests, targets)
                       if cfg.mode == FULL else {})
        data["attribution"] = {
            before.inference.lookup(aid).text: {"tests": list(a.test_ids), "kind": a.kind}
            for aid, a in attribution.items()}
        data["attribution_by_test"] = {
            t: [before.inference.lookup(aid).text for aid in ids]
            for t, ids in attribution_by_test(attribution).items()}
        traces = before.traces + (after.traces if after is not before else [])
        data["suspected_groundtruth_violations"] = (
            [{"assertion": g, "test": t} for g, t in suspected_violations(gt, traces)]
            if gt is not None else [])
        state.update(attribution=attribution, metrics=metrics)
        data["status"] = "complete"
    except Exception as exc:  # noqa: BLE001 - reported as a partial run
        data["failed_stage"] = stage
        data["error"] = f"{type(exc).__name__}: {exc}"
        log.error("run failed in stage %s: %s", stage, exc)
    data["timing_ms"] = timing
    return RunReport(data, state)


def _judge_only(snap: Snapshot, outcomes) -> Snapshot:
    """Drop every representative judged FAILED; nothing is executed."""
    from .inference import InferenceResult
    from .mutation import Clustering

    failed = {o.assertion.id for o in outcomes if o.verdict == "FAILED"}
    inf = snap.inference
    survivors = [a for a in inf.survivors if a.id not in failed]
    falsified = dict(inf.falsified)
    tests = dict(inf.falsifying_tests)
    for aid in failed:
        falsified.setdefault(aid, ("<judge>", -1))
        tests.setdefault(aid, [])
    new_inf = InferenceResult(inf.candidates, survivors, falsified, dict(inf.undefined_hits),
                              dict(inf.false_hits), tests, inf.trace_count, inf.vacuous, inf.by_id)
    cl = snap.clustering
    clustering = Clustering([[a for a in c if a.id not in failed] for c in cl.clusters],
                            [a for a in cl.representatives if a.id not in failed],
                            [a for a in cl.unranked if a.id not in failed])
    clustering.clusters = [c for c in clustering.clusters if c]
    return Snapshot(snap.suite, new_inf, snap.matrix, clustering, snap.traces)


def _score(before: Snapshot, after: Snapshot, gt, bounds, sig):
    if gt is None:
        return None, None, None, None
    # one decision procedure, fed every concrete observation of the run
    traces = before.traces + (after.traces if after is not before else [])
    enum = Enumerator(sig, bounds, traces)
    return (score(before.survivors, gt, bounds, enumerator=enum),
            score(after.survivors, gt, bounds, enumerator=enum),
            score(before.representatives, gt, bounds, enumerator=enum),
            score(after.representatives, gt, bounds, enumerator=enum))


def _outcome_json(o) -> dict:
    return {"assertion": o.assertion.text, "id": o.assertion.id, "status": o.status,
            "verdict": o.verdict, "attempts": o.attempts, "test": o.test_name,
            "diagnostics": list(o.diagnostics), "error": o.error}
