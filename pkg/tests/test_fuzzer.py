from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from specrefine.assertions import Signature, parse_assertion
from specrefine.fuzzer import (
    NT, FuzzerConfig, GrammarError, default_grammar_text, generate_candidates, load_grammar,
)

from conftest import WRAP_ASSERTION

SMALL = """
<S> ::= <IntExpr> <RelOp> <IntExpr>
<IntExpr> ::= <IntVar> | <IntConst>
<RelOp> ::= "==" | "<"
"""


def test_builtins_spliced_from_signature(queue_sig):
    g = load_grammar(SMALL, queue_sig)
    assert {p[0] for p in g.productions("IntVar")} == {"currentSize", "front", "back"}
    assert {p[0] for p in g.productions("ArrVar")} == {"theArray"}
    assert g.productions("Result") == [("result",)]
    assert {p[0] for p in g.productions("OldIntVar")} == {"old(currentSize)", "old(front)", "old(back)"}


def test_params_are_int_vars(abs_sig):
    g = load_grammar(SMALL, abs_sig, const_pool=(0, 1, -1))
    assert [p[0] for p in g.productions("IntVar")] == ["x"]
    assert g.language(100) and "x == -1" in g.language(100)


def test_const_pool_exact(queue_sig):
    g = load_grammar('<S> ::= <IntConst> "==" <IntConst>', queue_sig, const_pool=[0, 1])
    assert {p[0] for p in g.productions("IntConst")} == {"0", "1"}
    assert set(g.language()) == {"0 == 0", "0 == 1", "1 == 0", "1 == 1"}


def test_undefined_nonterminal_named(queue_sig):
    with pytest.raises(GrammarError, match="<Foo>"):
        load_grammar("<S> ::= <Foo> \"==\" <IntVar>", queue_sig)


@pytest.mark.parametrize("text", [
    "<S> ::= <S> \"+\" <S>",            # no terminating production
    "<S> ::= <A>\n<A> ::= <B>\n<B> ::= <A>",
    "<S> ::=",                        # empty production set
    "<S> ::= <IntVar> \"==\" <IntVar>\n<S> ::= \"true\"",  # duplicate rule
    "<IntVar> ::= \"x\"",             # builtin redefined
    "no rule here",
])
def test_grammar_errors(text, queue_sig):
    with pytest.raises(GrammarError):
        load_grammar(text, queue_sig)


def test_comments_continuations_and_quotes(queue_sig):
    text = ('# header\n<S> ::= <IntVar> "==" "0"   # trailing\n'
            '        | <IntVar> "!=" "1"\n<X> ::= "#"\n')
    g = load_grammar(text, queue_sig)
    assert len(g.productions("S")) == 2
    assert g.productions("X") == [("#",)]
    assert all(isinstance(p[0], NT) for p in g.productions("S"))


def test_void_method_prunes_result(queue):
    sig = Signature.of(queue, "enqueue")
    g = load_grammar(default_grammar_text(), sig)
    assert g.productions("Result") == []
    assert any(name == "ResultFact" for name, _ in g.pruned)
    for a in generate_candidates(g, FuzzerConfig(max_candidates=300)):
        assert "result" not in a.text


def test_default_grammar_contains_fig1b(queue_sig):
    g = load_grammar(default_grammar_text(), queue_sig)
    out = generate_candidates(g, FuzzerConfig(max_candidates=300))
    assert WRAP_ASSERTION in {a.text for a in out}
    assert len(out) <= 300


def test_default_grammar_abs(abs_sig):
    out = generate_candidates(load_grammar(default_grammar_text(), abs_sig), FuzzerConfig())
    assert "(result >= 0)" in {a.text for a in out}


def test_singleton(queue_sig):
    g = load_grammar(default_grammar_text(), queue_sig)
    assert len(generate_candidates(g, FuzzerConfig(max_candidates=1))) == 1


def test_recursive_grammar_terminates(queue_sig):
    text = ('<S> ::= <E> "==" <E>\n'
            '<E> ::= <IntVar> | "(" <E> "+" <E> ")" | "(" <E> "*" <E> ")"')
    out = generate_candidates(load_grammar(text, queue_sig), FuzzerConfig(max_depth=3, max_candidates=50))
    assert out and all(a.text.count("(") <= 2 ** 4 for a in out)


def test_unproductive_sampling_is_short(queue_sig):
    g = load_grammar('<S> ::= "front" "==" "front"', queue_sig)
    assert len(generate_candidates(g, FuzzerConfig(max_candidates=10))) == 1


def test_ill_typed_derivations_skipped(abs_sig):
    g = load_grammar('<S> ::= <IntVar> "==" "true" | <IntVar> "==" "0"', abs_sig)
    out = generate_candidates(g, FuzzerConfig(max_candidates=10))
    assert [a.text for a in out] == ["(x == 0)"]


def test_config_validation():
    with pytest.raises(ValueError):
        FuzzerConfig(max_depth=0)
    with pytest.raises(ValueError):
        FuzzerConfig(max_candidates=0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 63 - 1), n=st.integers(1, 120), depth=st.integers(1, 8),
       method=st.sampled_from(["getFront", "isEmpty", "enqueue", "dequeue"]))
def test_generation_properties(queue, seed, n, depth, method):
    sig = Signature.of(queue, method)
    g = load_grammar(default_grammar_text(), sig)
    cfg = FuzzerConfig(seed=seed, max_depth=depth, max_candidates=n)
    first = generate_candidates(g, cfg)
    assert [a.text for a in first] == [a.text for a in generate_candidates(g, cfg)]
    assert len(first) <= n
    assert len({a.id for a in first}) == len(first)
    for a in first:
        assert parse_assertion(a.text, sig).id == a.id
