"""Name resolution and type checking for subject units and test scripts."""
from __future__ import annotations

from ..errors import Diagnostic, raise_diagnostics
from .ast import (
    ARITH_OPS, ARRAY, BOOL, EQ_OPS, INT, LOGIC_OPS, NINT, NULL, REL_OPS, VOID,
    Assert, Assign, Binary, BoolLit, Call, ExprStmt, If, Index, IntLit, Length,
    Name, NewArray, NewUnit, NullLit, Return, SubjectProgram, TestScript, Unary,
    VarDecl, While,
)

ERR = "<error>"
_NUMERIC = (INT, NINT)


def assignable(src: str, dst: str) -> bool:
    if src == ERR or dst == ERR or src == dst:
        return True
    if src in _NUMERIC and dst in _NUMERIC:
        return True
    return src == NULL and dst in (NINT, ARRAY)


def comparable(a: str, b: str) -> bool:
    if ERR in (a, b):
        return True
    numeric = (INT, NINT, NULL)
    if a in numeric and b in numeric:
        return not (a == NULL and b == INT or a == INT and b == NULL)
    if a == BOOL and b == BOOL:
        return True
    return {a, b} <= {ARRAY, NULL} and NULL in (a, b)


def definitely_returns(body: tuple) -> bool:
    for st in body:
        if isinstance(st, Return):
            return True
        if isinstance(st, If) and st.orelse is not None:
            if definitely_returns(st.then) and definitely_returns(st.orelse):
                return True
    return False


class _Scope:
    def __init__(self):
        self.frames: list[dict] = [{}]

    def push(self):
        self.frames.append({})

    def pop(self):
        self.frames.pop()

    def lookup(self, name: str):
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None

    def declare(self, name: str, ty: str) -> bool:
        if self.lookup(name) is not None:
            return False
        self.frames[-1][name] = ty
        return True


class Checker:
    def __init__(self, program: SubjectProgram | None):
        self.program = program
        self.diags: list[Diagnostic] = []
        self.fields: dict = {}
        self.methods: dict = {}
        if program is not None:
            self.fields = program.field_types
            self.methods = {m.name: m for m in program.methods}
        self.scope = _Scope()
        self.in_ctor = False
        self.ctor_params: set = set()
        self.test_mode = False
        self.return_type = VOID

    def error(self, kind: str, node, message: str):
        line, col = getattr(node, "pos", (0, 0)) or (0, 0)
        self.diags.append(Diagnostic(kind, line, col, message))

    # -- program -------------------------------------------------------------

    def check_program(self) -> None:
        prog = self.program
        seen = set()
        for f in prog.fields:
            if f.name in seen:
                self.error("NameError", f, f"duplicate field {f.name!r}")
            seen.add(f.name)
        mseen = set()
        for m in prog.methods:
            if m.name in mseen:
                self.error("NameError", m, f"duplicate method {m.name!r}")
            if m.name in seen:
                self.error("NameError", m, f"method {m.name!r} clashes with a field")
            if m.name == prog.unit_name:
                self.error("NameError", m, f"method {m.name!r} clashes with the unit name")
            mseen.add(m.name)
        self.in_ctor = True
        self.ctor_params = {p.name for p in prog.constructor.params}
        self.check_callable(prog.constructor.params, VOID, prog.constructor.body, prog.constructor)
        self.in_ctor = False
        for m in prog.methods:
            self.check_callable(m.params, m.return_type, m.body, m)
            if m.return_type != VOID and not definitely_returns(m.body):
                self.error("TypeError", m, f"method {m.name!r} may finish without returning {m.return_type}")

    def check_callable(self, params, ret, body, node):
        self.scope = _Scope()
        self.return_type = ret
        for p in params:
            if p.name in self.fields:
                self.error("NameError", p, f"parameter {p.name!r} shadows a field")
            elif not self.scope.declare(p.name, p.type):
                self.error("NameError", p, f"duplicate parameter {p.name!r}")
        self.check_block(body, new_scope=False)

    def check_block(self, body, new_scope=True):
        if new_scope:
            self.scope.push()
        for st in body:
            self.check_stmt(st)
        if new_scope:
            self.scope.pop()

    def check_stmt(self, st):
        if isinstance(st, VarDecl):
            if st.init is not None:
                ty = self.check_expr(st.init)
                if not assignable(ty, st.type):
                    self.error("TypeError", st, f"cannot initialize {st.type} variable {st.name!r} with {ty}")
            if st.name in self.fields and not self.test_mode:
                self.error("NameError", st, f"local {st.name!r} shadows a field")
            elif not self.scope.declare(st.name, st.type):
                self.error("NameError", st, f"duplicate variable {st.name!r}")
        elif isinstance(st, Assign):
            vty = self.check_expr(st.value)
            target = st.target
            if isinstance(target, Name):
                tty = self.resolve(target)
                what = "field" if self.scope.lookup(target.id) is None and target.id in self.fields else "variable"
                if tty != ERR and not assignable(vty, tty):
                    self.error("TypeError", st, f"cannot assign {vty} to {tty} {what} {target.id!r}")
            else:
                tty = self.check_expr(target)
                if not assignable(vty, tty):
                    self.error("TypeError", st, f"cannot store {vty} into an int[] element")
        elif isinstance(st, If):
            self.check_cond(st.cond)
            self.check_block(st.then)
            if st.orelse is not None:
                self.check_block(st.orelse)
        elif isinstance(st, While):
            self.check_cond(st.cond)
            self.check_block(st.body)
        elif isinstance(st, Return):
            if st.value is None:
                if self.return_type != VOID:
                    self.error("TypeError", st, f"missing return value of type {self.return_type}")
            else:
                ty = self.check_expr(st.value)
                if self.return_type == VOID:
                    self.error("TypeError", st, "void callable cannot return a value")
                elif not assignable(ty, self.return_type):
                    self.error("TypeError", st, f"cannot return {ty} from a method returning {self.return_type}")
        elif isinstance(st, ExprStmt):
            self.check_expr(st.expr, statement=True)
        elif isinstance(st, Assert):
            if not self.test_mode:
                self.error("SyntaxError", st, "assert is only allowed in test scripts")
            self.check_cond(st.cond)
        elif isinstance(st, NewUnit):
            self.error("TypeError", st, "unexpected construction")
        else:  # pragma: no cover - parser guarantees the statement set
            self.error("SyntaxError", st, f"unknown statement {type(st).__name__}")

    def check_cond(self, cond):
        ty = self.check_expr(cond)
        if ty not in (BOOL, ERR):
            self.error("TypeError", cond, f"condition must be bool, found {ty}")

    def resolve(self, name: Name) -> str:
        ty = self.scope.lookup(name.id)
        if ty is not None:
            return ty
        if not self.test_mode and name.id in self.fields:
            return self.fields[name.id]
        self.error("NameError", name, f"unresolved identifier {name.id!r}")
        return ERR

    def check_call(self, call: Call) -> str:
        m = self.methods.get(call.name)
        arg_types = [self.check_expr(a) for a in call.args]
        if m is None:
            self.error("NameError", call, f"unknown method {call.name!r}")
            return ERR
        if len(arg_types) != len(m.params):
            self.error("ArityError", call,
                       f"{call.name}() takes {len(m.params)} argument(s), {len(arg_types)} given")
            return m.return_type
        for i, (aty, p) in enumerate(zip(arg_types, m.params)):
            if not assignable(aty, p.type):
                self.error("TypeError", call.args[i],
                           f"argument {i + 1} of {call.name}() expects {p.type}, found {aty}")
        return m.return_type

    def check_expr(self, e, statement: bool = False) -> str:
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, NullLit):
            return NULL
        if isinstance(e, Name):
            return self.resolve(e)
        if isinstance(e, Call):
            ty = self.check_call(e)
            if ty == VOID and not statement:
                self.error("TypeError", e, f"void method {e.name!r} used as a value")
                return ERR
            return ty
        if isinstance(e, Index):
            aty = self.check_expr(e.array)
            ity = self.check_expr(e.index)
            if aty not in (ARRAY, ERR):
                self.error("TypeError", e, f"cannot index a value of type {aty}")
            if ity not in (INT, NINT, ERR):
                self.error("TypeError", e.index, f"array index must be int, found {ity}")
            return INT
        if isinstance(e, Length):
            aty = self.check_expr(e.array)
            if aty not in (ARRAY, ERR):
                self.error("TypeError", e, f".length of a value of type {aty}")
            return INT
        if isinstance(e, Unary):
            ty = self.check_expr(e.operand)
            want = BOOL if e.op == "!" else INT
            if ty != ERR and not (ty == want or (want == INT and ty == NINT)):
                self.error("TypeError", e, f"operator {e.op} expects {want}, found {ty}")
            return want
        if isinstance(e, Binary):
            lt = self.check_expr(e.left)
            rt = self.check_expr(e.right)
            if e.op in ARITH_OPS or e.op in REL_OPS:
                for side, ty in ((e.left, lt), (e.right, rt)):
                    if ty not in (INT, NINT, ERR):
                        self.error("TypeError", side, f"operator {e.op} expects int, found {ty}")
                return INT if e.op in ARITH_OPS else BOOL
            if e.op in LOGIC_OPS:
                for side, ty in ((e.left, lt), (e.right, rt)):
                    if ty not in (BOOL, ERR):
                        self.error("TypeError", side, f"operator {e.op} expects bool, found {ty}")
                return BOOL
            if e.op in EQ_OPS:
                if not comparable(lt, rt):
                    self.error("TypeError", e, f"cannot compare {lt} with {rt}")
                return BOOL
        if isinstance(e, NewArray):
            sty = self.check_expr(e.size)
            if not self.in_ctor:
                self.error("TypeError", e, "arrays can only be allocated in the constructor")
            elif not (isinstance(e.size, IntLit) or (isinstance(e.size, Name) and e.size.id in self.ctor_params)):
                self.error("TypeError", e, "array length must be a literal or a constructor parameter")
            elif sty not in (INT, NINT, ERR):
                self.error("TypeError", e, f"array length must be int, found {sty}")
            return ARRAY
        self.error("SyntaxError", e, f"unsupported expression {type(e).__name__}")
        return ERR

    # -- tests ---------------------------------------------------------------

    def check_test(self, test: TestScript) -> None:
        self.test_mode = True
        self.scope = _Scope()
        prog = self.program
        stmts = test.statements
        if not stmts or not isinstance(stmts[0], NewUnit):
            node = stmts[0] if stmts else test
            self.error("TypeError", node, f"test {test.name!r} must start with new {prog.unit_name}(...)")
        for i, st in enumerate(stmts):
            if isinstance(st, NewUnit):
                if i != 0:
                    self.error("TypeError", st, "exactly one instance may be constructed per test")
                    continue
                if st.unit != prog.unit_name:
                    self.error("NameError", st, f"unknown unit {st.unit!r}")
                    continue
                params = prog.constructor.params
                arg_types = [self.check_expr(a) for a in st.args]
                if len(arg_types) != len(params):
                    self.error("ArityError", st,
                               f"{prog.unit_name}() takes {len(params)} argument(s), {len(arg_types)} given")
                    continue
                for j, (aty, p) in enumerate(zip(arg_types, params)):
                    if not assignable(aty, p.type):
                        self.error("TypeError", st.args[j],
                                   f"argument {j + 1} of {prog.unit_name}() expects {p.type}, found {aty}")
            else:
                self.check_stmt(st)


def check_program(program: SubjectProgram) -> SubjectProgram:
    checker = Checker(program)
    checker.check_program()
    raise_diagnostics(checker.diags)
    return program


def check_test(test: TestScript, program: SubjectProgram) -> TestScript:
    checker = Checker(program)
    checker.check_test(test)
    raise_diagnostics(checker.diags)
    return test
