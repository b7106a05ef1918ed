from __future__ import annotations

import random

import pytest

import oracles
from specrefine.assertions import Signature, parse_assertion
from specrefine.fuzzer import FuzzerConfig, default_grammar_text, generate_candidates, load_grammar
from specrefine.groundtruth import load_groundtruth
from specrefine.inference import collect_traces, filter_candidates, infer
from specrefine.subject import parse_test

from conftest import WRAP_ASSERTION, load_program, load_suite


def test_weak_suite_never_moves_front(queue, queue_weak):
    traces = collect_traces(queue, queue_weak, "getFront")
    assert len(traces) == 6
    assert all(t.post_state["front"] == 0 and t.pre_state["front"] == 0 for t in traces)


def test_empty_suite(queue, queue_sig):
    assert collect_traces(queue, [], "getFront") == []
    a = parse_assertion("front == 7", queue_sig)
    res = filter_candidates([a], [])
    assert res.vacuous and res.survivors == [a]


def test_one_trace_per_test(queue):
    suite = [parse_test(f"new QueueAr({n}); getFront();", queue, f"t{n}") for n in range(1, 6)]
    assert len(collect_traces(queue, suite, "getFront")) == 5


def test_unknown_monitor(queue, queue_weak):
    with pytest.raises(KeyError):
        collect_traces(queue, queue_weak, "nope")


def test_fig1b_survives_then_falls(queue, queue_sig, queue_weak):
    fig = parse_assertion(WRAP_ASSERTION, queue_sig)
    taut = parse_assertion("1 == 1", queue_sig)
    res = infer(queue, queue_weak, "getFront", [fig, taut])
    assert res.survivor_ids == [fig.id, taut.id]
    cx = parse_test("new QueueAr(2); enqueue(1); dequeue(); enqueue(2); getFront();", queue, "cx")
    res = infer(queue, list(queue_weak) + [cx], "getFront", [fig, taut])
    assert res.survivor_ids == [taut.id]
    assert res.falsified[fig.id] == ("cx", 6)
    assert res.falsifying_tests[fig.id] == ["cx"]
    assert res.false_hits[fig.id] == 1


def test_undefined_counted_separately(queue, queue_sig, queue_weak):
    a = parse_assertion("result > -100", queue_sig)  # result is null on the empty queue
    b = parse_assertion("front > 0", queue_sig)
    res = infer(queue, queue_weak, "getFront", [a, b])
    assert res.survivors == []
    assert res.undefined_hits[a.id] == 2 and a.id not in res.false_hits
    assert res.undefined_only == {a.id}
    assert b.id not in res.undefined_hits and res.false_hits[b.id] == 6


def test_partition_and_soundness(queue, queue_sig, queue_weak):
    cands = generate_candidates(load_grammar(default_grammar_text(), queue_sig), FuzzerConfig())
    traces = collect_traces(queue, queue_weak, "getFront")
    res = filter_candidates(cands, traces)
    ids = {a.id for a in cands}
    assert not set(res.survivor_ids) & set(res.falsified)
    assert set(res.survivor_ids) | set(res.falsified) == ids
    assert res.undefined_only <= set(res.falsified)
    for a in res.survivors:
        for t in traces:
            assert a.fn(t.post_state, t.pre_state, t.result) is True
    # independently recompute the survivor set
    expect = [a.id for a in cands
              if all(a.fn(t.post_state, t.pre_state, t.result) is True for t in traces)]
    assert res.survivor_ids == expect


def test_faulting_test_traces_participate(queue, queue_sig):
    a = parse_assertion("currentSize == 0", queue_sig)
    t = parse_test("new QueueAr(1); enqueue(3); getFront(); int? v = getFront(); assert v == null;",
                   queue, "tf")
    res = infer(queue, [t], "getFront", [a])
    assert res.falsified[a.id] == ("tf", 0)


def _scripts(program, rng, n):
    out = []
    for i in range(n):
        cargs, calls = oracles.random_script(program, rng)
        out.append(parse_test(oracles.script_text(program.unit_name, cargs, calls, f"r{i}"), program))
    return out


@pytest.mark.parametrize("unit,method", [("QueueAr", "getFront"), ("QueueAr", "isEmpty"),
                                         ("SimpleMethods", "abs"), ("SimpleMethods", "getMin"),
                                         ("StackAr", "top")])
def test_valid_ground_truth_never_falsified(unit, method):
    program = load_program(unit)
    sig = Signature.of(program, method)
    gt = load_groundtruth(sig)
    rng = random.Random(5)
    suite = _scripts(program, rng, 300)
    res = infer(program, suite, method, gt)
    assert res.trace_count > 50
    assert res.survivor_ids == [g.id for g in gt]


def test_monotone_under_added_tests(queue, queue_sig, queue_weak):
    cands = generate_candidates(load_grammar(default_grammar_text(), queue_sig), FuzzerConfig())
    rng = random.Random(9)
    suite = list(queue_weak)
    prev = set(infer(queue, suite, "getFront", cands).survivor_ids)
    for _ in range(10):
        suite += _scripts(queue, rng, 2)
        cur = set(infer(queue, suite, "getFront", cands).survivor_ids)
        assert cur <= prev
        prev = cur


def test_suite_file_weak_variants_load():
    for unit in ("QueueAr", "SimpleMethods", "StackAr"):
        program = load_program(unit)
        assert load_suite(program, f"{unit}_weak")
