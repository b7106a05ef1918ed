"""Closure-compiling interpreter for subject units with entry/exit monitoring.

Each method body is compiled once into nested Python closures and cached on
the (immutable) program object. A `Machine` holds the state of the single
instance a test constructs; calls to the monitored method produce one
`TraceRecord` each, with the entry state deep-copied so `old()` stays exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .ast import (
    ARRAY, BOOL, INT, NINT, Assert, Assign, Binary, BoolLit, Call, ExprStmt, If,
    Index, IntLit, Length, Name, NewArray, NewUnit, NullLit, Return, SubjectProgram,
    TestScript, Unary, VarDecl, While,
)

INT_MIN, INT_MAX = -(2 ** 31), 2 ** 31 - 1
DEFAULT_MAX_STEPS = 100_000
DEFAULT_MAX_ARRAY_LEN = 16
MAX_CALL_DEPTH = 200

PASS, TEST_FAILURE, RUNTIME_FAULT = "pass", "TestFailure", "RuntimeFault"


def wrap(x: int) -> int:
    return ((x + 0x80000000) & 0xFFFFFFFF) - 0x80000000


def java_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return wrap(q if (a < 0) == (b < 0) else -q)


def java_mod(a: int, b: int) -> int:
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def snapshot(value):
    return tuple(value) if isinstance(value, list) else value


def default_value(ty: str):
    if ty == INT:
        return 0
    if ty == BOOL:
        return False
    return None


class RuntimeFault(Exception):
    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        super().__init__(f"{kind}: {message}" if message else kind)


@dataclass(frozen=True)
class TraceRecord:
    """One observation of the monitored method: entry state, exit state, result.

    `pre_state` maps every field and parameter to its value at entry;
    `post_state` maps every field to its value at exit. Arrays are tuples.
    """

    method: str
    pre_state: dict
    post_state: dict
    result: object
    test_id: str
    flag: Optional[str] = None

    def key(self) -> tuple:
        return (tuple(sorted(self.pre_state.items())), tuple(sorted(self.post_state.items())),
                type(self.result).__name__, self.result)


@dataclass
class Execution:
    test_id: str
    traces: list = field(default_factory=list)
    outcome: str = PASS
    message: str = ""

    @property
    def faulted(self) -> bool:
        return self.outcome == RUNTIME_FAULT


class _Ret:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


def _fault_null(what: str = "null dereference"):
    raise RuntimeFault("NullDereference", what)


def _unbox(v):
    if v is None:
        _fault_null("null unboxed to int")
    return v


def _coercer(ty: str):
    return _unbox if ty == INT else None


class _Compiler:
    def __init__(self, program: SubjectProgram | None, fields: dict):
        self.fields = fields
        self.program = program
        self.scopes: list[dict] = [{}]

    def local_type(self, name):
        for frame in reversed(self.scopes):
            if name in frame:
                return frame[name]
        return None

    def type_of_target(self, name: str) -> str:
        ty = self.local_type(name)
        return ty if ty is not None else self.fields.get(name, INT)

    # expressions
    def expr(self, e):
        if isinstance(e, IntLit):
            v = e.value
            return lambda m, l: v
        if isinstance(e, BoolLit):
            v = e.value
            return lambda m, l: v
        if isinstance(e, NullLit):
            return lambda m, l: None
        if isinstance(e, Name):
            ident = e.id
            if self.local_type(ident) is None and ident in self.fields:
                return lambda m, l: m.fields[ident]
            return lambda m, l: l[ident]
        if isinstance(e, Index):
            fa, fi = self.expr(e.array), self.expr(e.index)

            def index(m, l):
                a = fa(m, l)
                i = fi(m, l)
                if a is None or i is None:
                    _fault_null()
                if not 0 <= i < len(a):
                    raise RuntimeFault("IndexOutOfBounds", f"index {i} for length {len(a)}")
                return a[i]
            return index
        if isinstance(e, Length):
            fa = self.expr(e.array)

            def length(m, l):
                a = fa(m, l)
                if a is None:
                    _fault_null()
                return len(a)
            return length
        if isinstance(e, Call):
            name = e.name
            fargs = [self.expr(a) for a in e.args]
            return lambda m, l: m.invoke(name, [f(m, l) for f in fargs])
        if isinstance(e, Unary):
            fo = self.expr(e.operand)
            if e.op == "!":
                return lambda m, l: not fo(m, l)

            def neg(m, l):
                v = fo(m, l)
                if v is None:
                    _fault_null()
                return wrap(-v)
            return neg
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, NewArray):
            fs = self.expr(e.size)

            def new_array(m, l):
                n = fs(m, l)
                if n is None:
                    _fault_null()
                if n < 0:
                    raise RuntimeFault("NegativeArraySize", str(n))
                if n > m.max_array_len:
                    raise RuntimeFault("ArrayTooLarge", f"length {n} exceeds bound {m.max_array_len}")
                return [0] * n
            return new_array
        raise TypeError(f"cannot compile {type(e).__name__}")

    def binary(self, e):
        fl, fr = self.expr(e.left), self.expr(e.right)
        op = e.op
        if op == "&&":
            return lambda m, l: fl(m, l) and fr(m, l)
        if op == "||":
            return lambda m, l: fl(m, l) or fr(m, l)
        if op in ("==", "!="):
            want = op == "=="

            def eq(m, l):
                a, b = fl(m, l), fr(m, l)
                if isinstance(a, list) or isinstance(b, list):
                    return (a is b) == want
                return (a == b) == want
            return eq

        def operands(m, l):
            a, b = fl(m, l), fr(m, l)
            if a is None or b is None:
                _fault_null()
            return a, b

        if op == "+":
            def f(m, l):
                a, b = operands(m, l)
                return wrap(a + b)
        elif op == "-":
            def f(m, l):
                a, b = operands(m, l)
                return wrap(a - b)
        elif op == "*":
            def f(m, l):
                a, b = operands(m, l)
                return wrap(a * b)
        elif op in ("/", "%"):
            fn = java_div if op == "/" else java_mod

            def f(m, l):
                a, b = operands(m, l)
                if b == 0:
                    raise RuntimeFault("DivisionByZero", op)
                return fn(a, b)
        elif op == "<":
            def f(m, l):
                a, b = operands(m, l)
                return a < b
        elif op == "<=":
            def f(m, l):
                a, b = operands(m, l)
                return a <= b
        elif op == ">":
            def f(m, l):
                a, b = operands(m, l)
                return a > b
        elif op == ">=":
            def f(m, l):
                a, b = operands(m, l)
                return a >= b
        else:
            raise TypeError(f"unknown operator {op}")
        return f

    # statements
    def block(self, body, new_scope=True):
        if new_scope:
            self.scopes.append({})
        fns = [self.stmt(s) for s in body]
        if new_scope:
            self.scopes.pop()

        def run(m, l):
            for fn in fns:
                r = fn(m, l)
                if r is not None:
                    return r
            return None
        return run

    def stmt(self, st):
        if isinstance(st, VarDecl):
            name, ty = st.name, st.type
            finit = self.expr(st.init) if st.init is not None else None
            self.scopes[-1][name] = ty
            dv = default_value(ty)
            coerce = _coercer(ty)

            def decl(m, l):
                m.tick()
                if finit is None:
                    l[name] = dv
                else:
                    v = finit(m, l)
                    l[name] = coerce(v) if coerce else v
            return decl
        if isinstance(st, Assign):
            fv = self.expr(st.value)
            target = st.target
            if isinstance(target, Name):
                ident = target.id
                coerce = _coercer(self.type_of_target(ident))
                if self.local_type(ident) is None and ident in self.fields:
                    def assign_field(m, l):
                        m.tick()
                        v = fv(m, l)
                        m.fields[ident] = coerce(v) if coerce else v
                    return assign_field

                def assign_local(m, l):
                    m.tick()
                    v = fv(m, l)
                    l[ident] = coerce(v) if coerce else v
                return assign_local
            fa, fi = self.expr(target.array), self.expr(target.index)

            def store(m, l):
                m.tick()
                a = fa(m, l)
                i = fi(m, l)
                v = fv(m, l)
                if a is None or i is None or v is None:
                    _fault_null()
                if not 0 <= i < len(a):
                    raise RuntimeFault("IndexOutOfBounds", f"index {i} for length {len(a)}")
                a[i] = v
            return store
        if isinstance(st, If):
            fc = self.expr(st.cond)
            ft = self.block(st.then)
            fe = self.block(st.orelse) if st.orelse is not None else None

            def if_(m, l):
                m.tick()
                if fc(m, l):
                    return ft(m, l)
                if fe is not None:
                    return fe(m, l)
                return None
            return if_
        if isinstance(st, While):
            fc = self.expr(st.cond)
            fb = self.block(st.body)

            def while_(m, l):
                m.tick()
                while fc(m, l):
                    m.tick()
                    r = fb(m, l)
                    if r is not None:
                        return r
                return None
            return while_
        if isinstance(st, Return):
            fv = self.expr(st.value) if st.value is not None else None

            def ret(m, l):
                m.tick()
                return _Ret(fv(m, l) if fv is not None else None)
            return ret
        if isinstance(st, ExprStmt):
            fe = self.expr(st.expr)

            def call_stmt(m, l):
                m.tick()
                fe(m, l)
            return call_stmt
        if isinstance(st, Assert):
            fc = self.expr(st.cond)

            def assert_(m, l):
                m.tick()
                if not fc(m, l):
                    raise _AssertFailed(st.pos)
            return assert_
        raise TypeError(f"cannot compile {type(st).__name__}")


class _AssertFailed(Exception):
    pass


@dataclass
class _CompiledMethod:
    name: str
    param_names: tuple
    coercers: tuple
    body: object
    return_coerce: object


def _compile_program(program: SubjectProgram) -> dict:
    cached = program.__dict__.get("_compiled")
    if cached is not None:
        return cached
    fields = program.field_types
    out = {}
    callables = [(m.name, m.params, m.body, m.return_type) for m in program.methods]
    callables.append(("<init>", program.constructor.params, program.constructor.body, "void"))
    for name, params, body, ret in callables:
        comp = _Compiler(program, fields)
        comp.scopes = [{p.name: p.type for p in params}]
        fn = comp.block(body, new_scope=False)
        out[name] = _CompiledMethod(
            name, tuple(p.name for p in params), tuple(_coercer(p.type) for p in params),
            fn, _coercer(ret))
    object.__setattr__(program, "_compiled", out)
    return out


class Machine:
    """State of one subject instance plus monitoring hooks.

    Single-use and not thread-safe; create one per execution.
    """

    def __init__(self, program: SubjectProgram, monitor: str | None = None, *,
                 test_id: str = "", max_steps: int = DEFAULT_MAX_STEPS,
                 max_array_len: int = DEFAULT_MAX_ARRAY_LEN):
        self.program = program
        self.compiled = _compile_program(program)
        self.monitor = monitor
        self.test_id = test_id
        self.max_steps = max_steps
        self.max_array_len = max_array_len
        self.steps = 0
        self.depth = 0
        self.field_names = tuple(f.name for f in program.fields)
        self.fields = {f.name: default_value(f.type) for f in program.fields}
        self.traces: list[TraceRecord] = []

    def tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise RuntimeFault("StepLimit", f"exceeded {self.max_steps} steps")

    def state(self) -> tuple:
        return tuple(snapshot(self.fields[n]) for n in self.field_names)

    def load_state(self, state: tuple) -> None:
        self.fields = {n: (list(v) if isinstance(v, tuple) else v)
                       for n, v in zip(self.field_names, state)}

    def construct(self, args) -> None:
        self._run("<init>", args)

    def _run(self, name, args):
        cm = self.compiled[name]
        self.tick()
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            raise RuntimeFault("StackOverflow", f"call depth exceeds {MAX_CALL_DEPTH}")
        l = {}
        for pname, coerce, v in zip(cm.param_names, cm.coercers, args):
            l[pname] = coerce(v) if coerce else v
        r = cm.body(self, l)
        self.depth -= 1
        value = r.value if r is not None else None
        if cm.return_coerce is not None:
            value = cm.return_coerce(value)
        return value

    def invoke(self, name: str, args):
        if name != self.monitor:
            return self._run(name, args)
        pre = {n: snapshot(self.fields[n]) for n in self.field_names}
        cm = self.compiled[name]
        for pname, v in zip(cm.param_names, args):
            pre[pname] = snapshot(v)
        value = self._run(name, args)
        post = {n: snapshot(self.fields[n]) for n in self.field_names}
        self.traces.append(TraceRecord(name, pre, post, snapshot(value), self.test_id))
        return value


def _compile_test(test: TestScript, program: SubjectProgram):
    cached = test.__dict__.get("_compiled")
    if cached is not None:
        return cached
    comp = _Compiler(None, {})
    steps = []
    for st in test.statements:
        if isinstance(st, NewUnit):
            fargs = [comp.expr(a) for a in st.args]
            steps.append(("new", fargs))
        else:
            steps.append(("stmt", comp.stmt(st)))
    object.__setattr__(test, "_compiled", steps)
    return steps


def execute_test(program: SubjectProgram, test: TestScript, monitor: str | None, *,
                 max_steps: int = DEFAULT_MAX_STEPS,
                 max_array_len: int = DEFAULT_MAX_ARRAY_LEN) -> Execution:
    """Run a checked test script; faults and failed asserts abort it but keep earlier traces."""
    m = Machine(program, monitor, test_id=test.name, max_steps=max_steps, max_array_len=max_array_len)
    steps = _compile_test(test, program)
    ex = Execution(test.name)
    l: dict = {}
    try:
        for kind, payload in steps:
            if kind == "new":
                m.construct([f(m, l) for f in payload])
            else:
                payload(m, l)
    except RuntimeFault as fault:
        ex.outcome, ex.message = RUNTIME_FAULT, str(fault)
    except _AssertFailed as failed:
        line, col = failed.args[0]
        ex.outcome, ex.message = TEST_FAILURE, f"assertion failed at {line}:{col}"
    except RecursionError:
        ex.outcome, ex.message = RUNTIME_FAULT, "StackOverflow: host recursion limit"
    if ex.outcome != PASS:
        ex.traces = [replace(t, flag=ex.outcome) for t in m.traces]
    else:
        ex.traces = m.traces
    return ex


def run_test(program: SubjectProgram, test: TestScript, monitor: str, **limits) -> list[TraceRecord]:
    if not program.has_method(monitor):
        raise KeyError(f"unit {program.unit_name} has no method {monitor!r}")
    return execute_test(program, test, monitor, **limits).traces
