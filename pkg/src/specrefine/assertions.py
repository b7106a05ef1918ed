"""Postcondition language: parsing, typing, canonical rendering and
three-valued evaluation against trace records.

An assertion refers to post-state fields by bare name (or ``this.f``),
to parameters (always their entry value), to ``result``, to ``old(e)``
(``e`` evaluated in the entry state) and to the sequence helpers
``size``, ``getElement``, ``pairwiseEqual``, ``isReverse`` and ``typeArray``.
Evaluation yields True, False or `UNDEFINED` when a subexpression faults.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import ScopeError, SourceSyntaxError, SourceTypeError
from .lexer import TokenStream, tokenize
from .subject.ast import (
    ARITH_OPS, ARRAY, BOOL, EQ_OPS, INT, NINT, NULL, REL_OPS, VOID, Binary, BoolLit,
    Call, IntLit, Name, NullLit, SubjectProgram, Unary,
)
from .subject.checker import comparable
from .subject.interp import java_div, java_mod, wrap

TAG = "tag"
HELPERS = {
    # name: (argument types, result type)
    "size": ((ARRAY,), INT),
    "getElement": ((ARRAY, INT), INT),
    "pairwiseEqual": ((ARRAY, ARRAY), BOOL),
    "isReverse": ((ARRAY, ARRAY), BOOL),
    "typeArray": ((ARRAY,), TAG),
}
_NEGATED = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
INT_MIN, INT_MAX = -(2 ** 31), 2 ** 31 - 1


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Undefined"


UNDEFINED = _Undefined()


@dataclass(frozen=True)
class Old:
    expr: object
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class ResultRef:
    pos: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Signature:
    """Vocabulary an assertion may use: the unit's fields and one method's interface."""

    unit: str
    method: str
    fields: tuple  # ((name, type), ...)
    params: tuple  # ((name, type), ...)
    return_type: str

    @classmethod
    def of(cls, program: SubjectProgram, method: str) -> "Signature":
        m = program.method(method)
        return cls(program.unit_name, method,
                   tuple((f.name, f.type) for f in program.fields),
                   tuple((p.name, p.type) for p in m.params), m.return_type)

    @property
    def field_types(self) -> dict:
        return dict(self.fields)

    @property
    def param_types(self) -> dict:
        return dict(self.params)


# -- tree utilities ----------------------------------------------------------

def sub_exprs(e) -> list:
    if isinstance(e, Old):
        return [e.expr]
    if isinstance(e, Unary):
        return [e.operand]
    if isinstance(e, Binary):
        return [e.left, e.right]
    if isinstance(e, Call):
        return list(e.args)
    return []


def node_count(e) -> int:
    return 1 + sum(node_count(c) for c in sub_exprs(e))


def negate(e):
    """Logical negation that flips comparisons instead of wrapping them."""
    if isinstance(e, Binary) and e.op in _NEGATED:
        return Binary(_NEGATED[e.op], e.left, e.right, e.pos)
    if isinstance(e, Unary) and e.op == "!":
        return e.operand
    return Unary("!", e, getattr(e, "pos", (0, 0)))


def render(e) -> str:
    """Canonical text: binary operators fully parenthesized, decimal literals."""
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, Name):
        return e.id
    if isinstance(e, ResultRef):
        return "result"
    if isinstance(e, Old):
        return f"old({render(e.expr)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(render(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = render(e.operand)
        if isinstance(e.operand, IntLit):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        return f"({render(e.left)} {e.op} {render(e.right)})"
    raise TypeError(f"not an assertion node: {e!r}")


# -- parsing -----------------------------------------------------------------

_LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%"))


class _AssertionParser:
    def __init__(self, text: str):
        self.ts = TokenStream(tokenize(text))
        self.old_depth = 0

    def parse(self):
        if self.ts.cur.kind == "eof":
            self.ts.fail("assertion")
        e = self.implication()
        if self.ts.cur.kind != "eof":
            self.ts.fail("end of assertion")
        return e

    def implication(self):
        left = self.binary(0)
        if self.ts.at("==>"):
            self.ts.advance()
            right = self.implication()
            return Binary("||", negate(left), right, getattr(left, "pos", (0, 0)))
        return left

    def binary(self, level):
        if level == len(_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ts = self.ts
        while ts.cur.kind == "op" and ts.cur.text in _LEVELS[level]:
            tok = ts.advance()
            left = Binary(tok.text, left, self.binary(level + 1), (tok.line, tok.col))
        return left

    def unary(self):
        ts = self.ts
        tok = ts.cur
        pos = (tok.line, tok.col)
        if ts.accept("!"):
            return Unary("!", self.unary(), pos)
        if ts.accept("-"):
            if ts.cur.kind == "int":
                lit = ts.advance()
                value = -int(lit.text)
                if value < INT_MIN:
                    raise SourceSyntaxError(f"integer literal -{lit.text} out of range", lit.line, lit.col)
                return self.postfix(IntLit(value, pos))
            return Unary("-", self.unary(), pos)
        return self.postfix(self.primary())

    def postfix(self, e):
        ts = self.ts
        while True:
            tok = ts.cur
            if ts.accept("["):
                idx = self.implication()
                ts.expect("]")
                e = Call("getElement", (e, idx), (tok.line, tok.col))
            elif ts.at(".") and ts.peek().kind == "ident" and ts.peek().text == "length":
                ts.advance()
                ts.advance()
                e = Call("size", (e,), (tok.line, tok.col))
            else:
                return e

    def primary(self):
        ts = self.ts
        tok = ts.cur
        pos = (tok.line, tok.col)
        if tok.kind == "int":
            ts.advance()
            if int(tok.text) > INT_MAX:
                raise SourceSyntaxError(f"integer literal {tok.text} out of range", tok.line, tok.col)
            return IntLit(int(tok.text), pos)
        if ts.accept("true"):
            return BoolLit(True, pos)
        if ts.accept("false"):
            return BoolLit(False, pos)
        if ts.accept("null"):
            return NullLit(pos)
        if ts.accept("this"):
            ts.expect(".")
            return Name(ts.expect_ident("field name").text, pos)
        if ts.accept("("):
            e = self.implication()
            ts.expect(")")
            return e
        if tok.kind == "ident":
            ts.advance()
            if tok.text == "result" and not ts.at("("):
                return ResultRef(pos)
            if tok.text == "old" and ts.at("("):
                if self.old_depth:
                    raise SourceSyntaxError("old() cannot be nested", tok.line, tok.col)
                ts.advance()
                self.old_depth += 1
                inner = self.implication()
                self.old_depth -= 1
                ts.expect(")")
                return Old(inner, pos)
            if ts.at("("):
                ts.advance()
                args = []
                if not ts.at(")"):
                    while True:
                        args.append(self.implication())
                        if not ts.accept(","):
                            break
                ts.expect(")")
                return Call(tok.text, tuple(args), pos)
            return Name(tok.text, pos)
        ts.fail("assertion term")


# -- typing ------------------------------------------------------------------

def _type_of(e, sig: Signature, in_old: bool = False) -> str:
    if isinstance(e, IntLit):
        return INT
    if isinstance(e, BoolLit):
        return BOOL
    if isinstance(e, NullLit):
        return NULL
    if isinstance(e, Name):
        params, fields = sig.param_types, sig.field_types
        if e.id in params:
            return params[e.id]
        if e.id in fields:
            return fields[e.id]
        raise ScopeError(f"unknown identifier {e.id!r}", *e.pos)
    if isinstance(e, ResultRef):
        if in_old:
            raise ScopeError("result cannot appear inside old()", *e.pos)
        if sig.return_type == VOID:
            raise ScopeError(f"result used for void method {sig.method!r}", *e.pos)
        return sig.return_type
    if isinstance(e, Old):
        return _type_of(e.expr, sig, True)
    if isinstance(e, Call):
        if e.name not in HELPERS:
            raise ScopeError(f"unknown helper {e.name}()", *e.pos)
        want, ret = HELPERS[e.name]
        if len(e.args) != len(want):
            raise SourceTypeError(f"{e.name}() takes {len(want)} argument(s), {len(e.args)} given", *e.pos)
        for i, (a, w) in enumerate(zip(e.args, want)):
            ty = _type_of(a, sig, in_old)
            ok = ty == w or (w == INT and ty == NINT)
            if not ok:
                raise SourceTypeError(f"argument {i + 1} of {e.name}() must be {w}, found {ty}", *e.pos)
        return ret
    if isinstance(e, Unary):
        ty = _type_of(e.operand, sig, in_old)
        want = BOOL if e.op == "!" else INT
        if not (ty == want or (want == INT and ty == NINT)):
            raise SourceTypeError(f"operator {e.op} expects {want}, found {ty}", *e.pos)
        return want
    if isinstance(e, Binary):
        lt = _type_of(e.left, sig, in_old)
        rt = _type_of(e.right, sig, in_old)
        if e.op in ARITH_OPS or e.op in REL_OPS:
            for ty in (lt, rt):
                if ty not in (INT, NINT):
                    raise SourceTypeError(f"operator {e.op} expects int, found {ty}", *e.pos)
            return INT if e.op in ARITH_OPS else BOOL
        if e.op in ("&&", "||"):
            for ty in (lt, rt):
                if ty != BOOL:
                    raise SourceTypeError(f"operator {e.op} expects bool, found {ty}", *e.pos)
            return BOOL
        if e.op in EQ_OPS:
            if not ((lt == TAG and rt == TAG) or (TAG not in (lt, rt) and comparable(lt, rt)
                                                   and ARRAY not in (lt, rt))):
                raise SourceTypeError(f"cannot compare {lt} with {rt}", *e.pos)
            return BOOL
    raise SourceSyntaxError(f"unsupported assertion node {type(e).__name__}", *getattr(e, "pos", (0, 0)))


# -- evaluation --------------------------------------------------------------

def _is_bad(v) -> bool:
    return v is None or v is UNDEFINED


def _compile(e, sig: Signature, in_old: bool = False):
    """Closure over (post, pre, result) implementing short-circuit three-valued logic."""
    if isinstance(e, (IntLit, BoolLit)):
        v = e.value
        return lambda post, pre, res: v
    if isinstance(e, NullLit):
        return lambda post, pre, res: None
    if isinstance(e, Name):
        ident = e.id
        if ident in sig.param_types or in_old:
            return lambda post, pre, res: pre[ident]
        return lambda post, pre, res: post[ident]
    if isinstance(e, ResultRef):
        return lambda post, pre, res: res
    if isinstance(e, Old):
        return _compile(e.expr, sig, True)
    if isinstance(e, Call):
        fs = [_compile(a, sig, in_old) for a in e.args]
        return _HELPER_IMPLS[e.name](*fs)
    if isinstance(e, Unary):
        fo = _compile(e.operand, sig, in_old)
        if e.op == "!":
            def not_(post, pre, res):
                v = fo(post, pre, res)
                return UNDEFINED if v is UNDEFINED else (not v)
            return not_

        def neg(post, pre, res):
            v = fo(post, pre, res)
            return UNDEFINED if _is_bad(v) else wrap(-v)
        return neg
    if isinstance(e, Binary):
        fl, fr = _compile(e.left, sig, in_old), _compile(e.right, sig, in_old)
        op = e.op
        if op == "||":
            def or_(post, pre, res):
                a = fl(post, pre, res)
                if a is UNDEFINED:
                    return UNDEFINED
                return True if a else fr(post, pre, res)
            return or_
        if op == "&&":
            def and_(post, pre, res):
                a = fl(post, pre, res)
                if a is UNDEFINED:
                    return UNDEFINED
                return fr(post, pre, res) if a else False
            return and_
        if op in EQ_OPS:
            want = op == "=="

            def eq(post, pre, res):
                a = fl(post, pre, res)
                if a is UNDEFINED:
                    return UNDEFINED
                b = fr(post, pre, res)
                if b is UNDEFINED:
                    return UNDEFINED
                return (a == b) == want
            return eq
        fn = _ARITH[op]

        def arith(post, pre, res):
            a = fl(post, pre, res)
            if _is_bad(a):
                return UNDEFINED
            b = fr(post, pre, res)
            if _is_bad(b):
                return UNDEFINED
            return fn(a, b)
        return arith
    raise TypeError(f"cannot compile {e!r}")


def _div(a, b):
    return UNDEFINED if b == 0 else java_div(a, b)


def _mod(a, b):
    return UNDEFINED if b == 0 else java_mod(a, b)


_ARITH = {
    "+": lambda a, b: wrap(a + b), "-": lambda a, b: wrap(a - b),
    "*": lambda a, b: wrap(a * b), "/": _div, "%": _mod,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


def _h_size(fx):
    def size(post, pre, res):
        x = fx(post, pre, res)
        return UNDEFINED if _is_bad(x) else len(x)
    return size


def _h_get(fx, fi):
    def get_element(post, pre, res):
        x = fx(post, pre, res)
        if _is_bad(x):
            return UNDEFINED
        i = fi(post, pre, res)
        if _is_bad(i) or not 0 <= i < len(x):
            return UNDEFINED
        return x[i]
    return get_element


def _h_pairwise(fa, fb):
    def pairwise_equal(post, pre, res):
        a = fa(post, pre, res)
        if _is_bad(a):
            return UNDEFINED
        b = fb(post, pre, res)
        if _is_bad(b):
            return UNDEFINED
        return tuple(a) == tuple(b)
    return pairwise_equal


def _h_reverse(fa, fb):
    def is_reverse(post, pre, res):
        a = fa(post, pre, res)
        if _is_bad(a):
            return UNDEFINED
        b = fb(post, pre, res)
        if _is_bad(b):
            return UNDEFINED
        return tuple(a) == tuple(reversed(b))
    return is_reverse


def _h_type(fx):
    def type_array(post, pre, res):
        return UNDEFINED if _is_bad(fx(post, pre, res)) else "IntArray"
    return type_array


_HELPER_IMPLS = {"size": _h_size, "getElement": _h_get, "pairwiseEqual": _h_pairwise,
                 "isReverse": _h_reverse, "typeArray": _h_type}


# -- public surface ----------------------------------------------------------

@dataclass(frozen=True)
class CandidateAssertion:
    expr: object = field(repr=False)
    text: str
    id: str
    signature: Signature = field(compare=False, repr=False)
    fn: object = field(compare=False, repr=False, default=None)

    def __hash__(self) -> int:
        return hash(self.text)

    def __eq__(self, other) -> bool:
        return isinstance(other, CandidateAssertion) and self.text == other.text

    @property
    def size(self) -> int:
        return node_count(self.expr)

    def slots(self) -> frozenset:
        cached = self.__dict__.get("_slots")
        if cached is None:
            cached = slots_of(self.expr, self.signature)
            object.__setattr__(self, "_slots", cached)
        return cached

    def __str__(self) -> str:
        return self.text


def assertion_id(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]


def make_assertion(expr, sig: Signature) -> CandidateAssertion:
    ty = _type_of(expr, sig)
    if ty != BOOL:
        raise SourceTypeError(f"assertion must be bool, found {ty}", *getattr(expr, "pos", (1, 1)))
    text = render(expr)
    return CandidateAssertion(expr, text, assertion_id(text), sig, _compile(expr, sig))


def parse_assertion(text: str, signature: Signature) -> CandidateAssertion:
    try:
        expr = _AssertionParser(text).parse()
    except RecursionError:
        raise SourceSyntaxError("assertion nested too deeply", 1, 1) from None
    return make_assertion(expr, signature)


def eval_assertion(a: CandidateAssertion, t) -> object:
    """True, False or UNDEFINED for assertion `a` on trace record `t`."""
    return a.fn(t.post_state, t.pre_state, t.result)


def holds(a: CandidateAssertion, t) -> bool:
    return a.fn(t.post_state, t.pre_state, t.result) is True


def slots_of(e, sig: Signature, in_old: bool = False) -> frozenset:
    """Observation slots read by `e`: ("post", f), ("pre", f or p) and ("result",)."""
    params = sig.param_types
    out = set()

    def go(node, old):
        if isinstance(node, Name):
            if node.id in params or old:
                out.add(("pre", node.id))
            else:
                out.add(("post", node.id))
        elif isinstance(node, ResultRef):
            out.add(("result",))
        for c in sub_exprs(node):
            go(c, old or isinstance(node, Old))

    go(e, in_old)
    return frozenset(out)


def load_assertions(text: str, signature: Signature) -> list[CandidateAssertion]:
    """Read the assertion-file format: one assertion per line, ``#`` comments."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse_assertion(line, signature))
        except (SourceSyntaxError, SourceTypeError, ScopeError) as exc:
            d = exc.diagnostics[0]
            raise type(exc)(f"line {lineno}: {d.message}", lineno, d.col) from None
    return out


def dump_assertions(assertions, header: str | None = None) -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines.extend(a.text for a in assertions)
    return "\n".join(lines) + "\n"
