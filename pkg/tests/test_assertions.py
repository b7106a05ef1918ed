from __future__ import annotations

import itertools
import random
from types import SimpleNamespace

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from specrefine.assertions import (
    UNDEFINED, Signature, dump_assertions, eval_assertion, holds, load_assertions, parse_assertion,
)
from specrefine.errors import ScopeError, SourceSyntaxError, SourceTypeError
from specrefine.subject import parse_test, run_test

from conftest import WRAP_ASSERTION

SIG = Signature("U", "m", (("x", "int"), ("y", "int"), ("n", "int?"), ("b", "bool"), ("xs", "int[]")),
                (("p", "int"),), "int")
VOCAB = oracles.Vocabulary({"x": "int", "y": "int", "n": "int?", "b": "bool", "xs": "int[]"},
                           {"p": "int"}, "int")
ARR_SIG = Signature("A", "m", (("s", "int[]"), ("t", "int[]")), (), "void")


def obs(post, pre=None, result=None):
    return SimpleNamespace(post_state=post, pre_state=pre or {}, result=result)


def test_implication_desugars(queue_sig):
    a = parse_assertion("(currentSize == front) ==> (front < 1)", queue_sig)
    b = parse_assertion("currentSize != front || front < 1", queue_sig)
    assert a.expr == b.expr and a.text == b.text == WRAP_ASSERTION and a.id == b.id


def test_implication_is_right_associative():
    a = parse_assertion("b ==> x > 0 ==> y > 0", SIG)
    assert a.text == "(!b || ((x <= 0) || (y > 0)))"


def test_this_prefix(queue_sig):
    a = parse_assertion("this.currentSize != this.front || this.front < 1", queue_sig)
    assert a.text == WRAP_ASSERTION


def test_abs_result_assertion(abs_sig):
    a = parse_assertion("result >= 0", abs_sig)
    assert a.text == "(result >= 0)"


def test_nested_old_rejected():
    with pytest.raises(SourceSyntaxError):
        parse_assertion("old(old(x)) == 1", SIG)


@pytest.mark.parametrize("text,err", [
    ("size(x) == 1", SourceTypeError),
    ("x + 1", SourceTypeError),
    ("zz == 1", ScopeError),
    ("frob(xs) == 1", ScopeError),
    ("x == ", SourceSyntaxError),
    ("b == 1", SourceTypeError),
])
def test_rejections(text, err):
    with pytest.raises(err):
        parse_assertion(text, SIG)


def test_result_scope(queue):
    void_sig = Signature.of(queue, "enqueue")
    with pytest.raises(ScopeError):
        parse_assertion("result == 1", void_sig)
    with pytest.raises(ScopeError):
        parse_assertion("old(result) == 1", SIG)


def test_fig1b_false_on_circular_state(queue_sig):
    a = parse_assertion(WRAP_ASSERTION, queue_sig)
    t = obs({"theArray": (0, 2), "currentSize": 1, "front": 1, "back": 1}, result=2)
    assert eval_assertion(a, t) is False


def test_pairwise_equal_on_pure_method(queue, queue_sig, queue_weak):
    a = parse_assertion("pairwiseEqual(theArray, old(theArray))", queue_sig)
    traces = [tr for t in queue_weak for tr in run_test(queue, t, "getFront")]
    assert traces and all(eval_assertion(a, tr) is True for tr in traces)


def test_is_reverse_and_out_of_range():
    a = parse_assertion("isReverse(s, t)", ARR_SIG)
    assert eval_assertion(a, obs({"s": (1, 2, 3), "t": (3, 2, 1)})) is True
    g = parse_assertion("getElement(s, size(s)) == 0", ARR_SIG)
    assert eval_assertion(g, obs({"s": (1, 2), "t": ()})) is UNDEFINED
    assert eval_assertion(g, obs({"s": None, "t": ()})) is UNDEFINED


def test_index_sugar():
    a = parse_assertion("s[0] == s.length", ARR_SIG)
    assert a.text == "(getElement(s, 0) == size(s))"


def test_type_array_tag():
    a = parse_assertion("typeArray(s) == typeArray(t)", ARR_SIG)
    assert eval_assertion(a, obs({"s": (1,), "t": ()})) is True


def test_null_aware_equality(queue_sig):
    a = parse_assertion("result == null", queue_sig)
    assert holds(a, obs({}, result=None)) and not holds(a, obs({}, result=3))
    b = parse_assertion("result > 0", queue_sig)
    assert eval_assertion(b, obs({}, result=None)) is UNDEFINED


def test_short_circuit_guards_fault():
    a = parse_assertion("size(s) == 0 || getElement(s, 0) >= -1", ARR_SIG)
    assert eval_assertion(a, obs({"s": (), "t": ()})) is True


def test_division_by_zero_is_undefined():
    a = parse_assertion("x / y == 0", SIG)
    assert eval_assertion(a, obs({"x": 1, "y": 0}, {"p": 0})) is UNDEFINED


def test_wrapping_in_assertions():
    a = parse_assertion("x + 1 < x", SIG)
    assert eval_assertion(a, obs({"x": 2 ** 31 - 1})) is True
    b = parse_assertion("-(x) == x", SIG)
    assert eval_assertion(b, obs({"x": -2 ** 31})) is True


def test_helper_laws_brute_force():
    same = parse_assertion("pairwiseEqual(s, s)", ARR_SIG)
    rev = parse_assertion("isReverse(s, t)", ARR_SIG)
    size = {n: parse_assertion(f"size(s) == {n}", ARR_SIG) for n in range(4)}
    seqs = [t for k in range(4) for t in itertools.product((-1, 0, 1), repeat=k)]
    assert len(seqs) == 40
    for s in seqs:
        env = obs({"s": s, "t": tuple(reversed(s))})
        assert holds(same, env) and holds(rev, env) and holds(size[len(s)], env)
        for t in seqs:
            e2 = obs({"s": s, "t": t})
            assert holds(rev, e2) == (list(s) == list(t)[::-1])


def test_assertion_file_round_trip(queue_sig):
    text = "# ground truth\n\nfront == old(front)\nresult == null || currentSize > 0  # note\n"
    got = load_assertions(text, queue_sig)
    assert [a.text for a in got] == ["(front == old(front))",
                                     "((result == null) || (currentSize > 0))"]
    again = load_assertions(dump_assertions(got, "header"), queue_sig)
    assert again == got


def test_assertion_file_error_line(queue_sig):
    with pytest.raises(ScopeError) as exc:
        load_assertions("front == 0\n\nnope == 1\n", queue_sig)
    assert exc.value.line == 3 and "line 3" in str(exc.value)


# -- property tests against the reference evaluator ---------------------------

def random_env(rng):
    ints = (0, 1, -1, 2, -2, 3, oracles.INT_MIN, oracles.INT_MAX)
    env = {}
    for ph in ("pre", "post"):
        env[(ph, "x")] = rng.choice(ints)
        env[(ph, "y")] = rng.choice(ints)
        env[(ph, "n")] = rng.choice((None,) + ints)
        env[(ph, "b")] = rng.random() < 0.5
        env[(ph, "xs")] = tuple(rng.choice((-1, 0, 1, 2)) for _ in range(rng.randint(0, 3)))
    env[("pre", "p")] = rng.choice(ints)
    env[("result",)] = rng.choice(ints)
    return env


def as_obs(env):
    post = {k[1]: v for k, v in env.items() if k[0] == "post"}
    pre = {k[1]: v for k, v in env.items() if k[0] == "pre"}
    return obs(post, pre, env[("result",)])


def lib_value(v):
    return oracles.UNDEF if v is UNDEFINED else v


@settings(max_examples=400, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_evaluator_agrees_with_reference(seed):
    rng = random.Random(seed)
    term = oracles.random_bool(rng, VOCAB, 3)
    a = parse_assertion(oracles.text(term), SIG)
    for _ in range(5):
        env = random_env(rng)
        assert lib_value(eval_assertion(a, as_obs(env))) == oracles.evaluate(term, env, {"p"})


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_desugaring_soundness(seed):
    rng = random.Random(seed)
    left, right = oracles.random_bool(rng, VOCAB, 2), oracles.random_bool(rng, VOCAB, 2)
    lt, rt = oracles.text(left), oracles.text(right)
    imp = parse_assertion(f"({lt}) ==> ({rt})", SIG)
    dis = parse_assertion(f"!({lt}) || ({rt})", SIG)
    for _ in range(5):
        t = as_obs(random_env(rng))
        assert eval_assertion(imp, t) is eval_assertion(dis, t)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_canonical_text_is_a_fixed_point(seed):
    rng = random.Random(seed)
    a = parse_assertion(oracles.text(oracles.random_bool(rng, VOCAB, 3)), SIG)
    b = parse_assertion(a.text, SIG)
    assert b.text == a.text and b.expr == a.expr


FIELD_VOCAB = oracles.Vocabulary({"currentSize": "int", "front": "int", "back": "int",
                                  "theArray": "int[]"}, {}, "none")


@pytest.mark.parametrize("monitor", ["getFront", "isEmpty", "isFull"])
def test_old_is_transparent_on_pure_methods(queue, monitor):
    sig = Signature.of(queue, monitor)
    t = parse_test("new QueueAr(3); enqueue(4); getFront(); isEmpty(); isFull(); dequeue(); "
                   "enqueue(-9); enqueue(2); getFront(); isEmpty(); isFull();", queue)
    traces = run_test(queue, t, monitor)
    assert traces
    rng = random.Random(11)
    checked = 0
    for _ in range(300):
        e = oracles.random_int(rng, FIELD_VOCAB, 3)
        e_text = oracles.text(e)
        if "old(" in e_text:
            continue
        a = parse_assertion(f"old({e_text}) == {e_text}", sig)
        probe = parse_assertion(f"{e_text} == {e_text}", sig)
        for tr in traces:
            if eval_assertion(probe, tr) is UNDEFINED:
                continue  # a faulting subexpression is Undefined on both sides
            assert eval_assertion(a, tr) is True
            checked += 1
    assert checked > 100
