"""Recursive-descent parser for subject units and test scripts (syntax only)."""
from __future__ import annotations

from ..errors import SourceSyntaxError
from ..lexer import Token, TokenStream, tokenize
from .ast import (
    ARRAY, BOOL, INT, NINT, VOID, Assert, Assign, Binary, BoolLit, Call, Constructor,
    ExprStmt, FieldDecl, If, Index, IntLit, Length, MethodDef, Name, NewArray, NewUnit,
    NullLit, Param, Return, SubjectProgram, TestScript, Unary, VarDecl, While,
)

INT_MIN, INT_MAX = -(2 ** 31), 2 ** 31 - 1

_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


def _p(tok: Token) -> tuple:
    return (tok.line, tok.col)


class Parser:
    def __init__(self, source: str):
        self.ts = TokenStream(tokenize(source))

    # -- types ---------------------------------------------------------------

    def at_type(self) -> bool:
        return self.ts.at("int") or self.ts.at("bool")

    def parse_type(self) -> str:
        ts = self.ts
        if ts.accept("bool"):
            return BOOL
        if ts.accept("int"):
            if ts.at("[") and ts.peek().is_("]"):
                ts.advance()
                ts.advance()
                return ARRAY
            if ts.accept("?"):
                return NINT
            return INT
        ts.fail("type")

    # -- unit ----------------------------------------------------------------

    def parse_program(self) -> SubjectProgram:
        ts = self.ts
        start = ts.expect("unit")
        name = ts.expect_ident("unit name").text
        ts.expect("{")
        fields, methods, ctor = [], [], None
        while not ts.at("}"):
            tok = ts.cur
            if tok.kind == "ident" and tok.text == name and ts.peek().is_("("):
                ts.advance()
                params = self.parse_params()
                body = self.parse_block()
                if ctor is not None:
                    raise SourceSyntaxError("duplicate constructor", tok.line, tok.col)
                ctor = Constructor(params, body, _p(tok))
                continue
            if ts.accept("void"):
                ret = VOID
            elif self.at_type():
                ret = self.parse_type()
            else:
                ts.fail("field, constructor or method declaration", "'}'")
            ident = ts.expect_ident("member name")
            if ts.accept(";"):
                if ret == VOID:
                    raise SourceSyntaxError("field cannot be void", ident.line, ident.col)
                fields.append(FieldDecl(ret, ident.text, _p(tok)))
                continue
            params = self.parse_params()
            body = self.parse_block()
            methods.append(MethodDef(ident.text, params, ret, body, _p(tok)))
        ts.expect("}")
        if ts.cur.kind != "eof":
            ts.fail("end of input")
        if ctor is None:
            ctor = Constructor((), (), _p(start))
        return SubjectProgram(name, tuple(fields), ctor, tuple(methods), _p(start))

    def parse_params(self) -> tuple:
        ts = self.ts
        ts.expect("(")
        params = []
        if not ts.at(")"):
            while True:
                tok = ts.cur
                ty = self.parse_type()
                params.append(Param(ty, ts.expect_ident("parameter name").text, _p(tok)))
                if not ts.accept(","):
                    break
        ts.expect(")")
        return tuple(params)

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> tuple:
        ts = self.ts
        ts.expect("{")
        body = []
        while not ts.at("}"):
            if ts.cur.kind == "eof":
                ts.fail("'}'")
            body.append(self.parse_stmt())
        ts.expect("}")
        return tuple(body)

    def parse_body(self) -> tuple:
        if self.ts.at("{"):
            return self.parse_block()
        return (self.parse_stmt(),)

    def parse_stmt(self, test_mode: bool = False):
        ts = self.ts
        tok = ts.cur
        pos = _p(tok)
        if self.at_type():
            ty = self.parse_type()
            name = ts.expect_ident("variable name").text
            init = self.parse_expr() if ts.accept("=") else None
            ts.expect(";")
            return VarDecl(ty, name, init, pos)
        if not test_mode:
            if ts.accept("if"):
                ts.expect("(")
                cond = self.parse_expr()
                ts.expect(")")
                then = self.parse_body()
                orelse = None
                if ts.accept("else"):
                    orelse = self.parse_body()
                return If(cond, then, orelse, pos)
            if ts.accept("while"):
                ts.expect("(")
                cond = self.parse_expr()
                ts.expect(")")
                return While(cond, self.parse_body(), pos)
            if ts.accept("return"):
                value = None if ts.at(";") else self.parse_expr()
                ts.expect(";")
                return Return(value, pos)
        else:
            if ts.accept("assert"):
                cond = self.parse_expr()
                ts.expect(";")
                return Assert(cond, pos)
            if ts.accept("new"):
                unit = ts.expect_ident("unit name").text
                args = self.parse_args()
                ts.expect(";")
                return NewUnit(unit, args, pos)
        if tok.kind == "ident" or tok.is_("this"):
            target = self.parse_postfix(self.parse_primary())
            if ts.accept("="):
                if not isinstance(target, (Name, Index)):
                    raise SourceSyntaxError("invalid assignment target", tok.line, tok.col)
                value = self.parse_expr()
                ts.expect(";")
                return Assign(target, value, pos)
            if isinstance(target, Call):
                ts.expect(";")
                return ExprStmt(target, pos)
            ts.fail("'='", "'('")
        ts.fail("statement")

    # -- expressions ---------------------------------------------------------

    def parse_expr(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        ts = self.ts
        left = self.parse_expr(level + 1)
        ops = _BINARY_LEVELS[level]
        while ts.cur.kind == "op" and ts.cur.text in ops:
            tok = ts.advance()
            right = self.parse_expr(level + 1)
            left = Binary(tok.text, left, right, _p(tok))
        return left

    def parse_unary(self):
        ts = self.ts
        tok = ts.cur
        if ts.accept("!"):
            return Unary("!", self.parse_unary(), _p(tok))
        if ts.accept("-"):
            if ts.cur.kind == "int":
                lit = ts.advance()
                value = -int(lit.text)
                if value < INT_MIN:
                    raise SourceSyntaxError(f"integer literal -{lit.text} out of range", lit.line, lit.col)
                return self.parse_postfix(IntLit(value, _p(tok)))
            return Unary("-", self.parse_unary(), _p(tok))
        return self.parse_postfix(self.parse_primary())

    def parse_args(self) -> tuple:
        ts = self.ts
        ts.expect("(")
        args = []
        if not ts.at(")"):
            while True:
                args.append(self.parse_expr())
                if not ts.accept(","):
                    break
        ts.expect(")")
        return tuple(args)

    def parse_primary(self):
        ts = self.ts
        tok = ts.cur
        pos = _p(tok)
        if tok.kind == "int":
            ts.advance()
            value = int(tok.text)
            if value > INT_MAX:
                raise SourceSyntaxError(f"integer literal {tok.text} out of range", tok.line, tok.col)
            return IntLit(value, pos)
        if ts.accept("true"):
            return BoolLit(True, pos)
        if ts.accept("false"):
            return BoolLit(False, pos)
        if ts.accept("null"):
            return NullLit(pos)
        if ts.accept("this"):
            ts.expect(".")
            ident = ts.expect_ident("field name")
            return Name(ident.text, pos)
        if ts.accept("new"):
            ts.expect("int")
            ts.expect("[")
            size = self.parse_expr()
            ts.expect("]")
            return NewArray(size, pos)
        if tok.kind == "ident":
            ts.advance()
            if ts.at("("):
                return Call(tok.text, self.parse_args(), pos)
            return Name(tok.text, pos)
        if ts.accept("("):
            inner = self.parse_expr()
            ts.expect(")")
            return inner
        ts.fail("expression")

    def parse_postfix(self, expr):
        ts = self.ts
        while True:
            tok = ts.cur
            if ts.accept("["):
                idx = self.parse_expr()
                ts.expect("]")
                expr = Index(expr, idx, _p(tok))
            elif ts.at(".") and ts.peek().kind == "ident" and ts.peek().text == "length":
                ts.advance()
                ts.advance()
                expr = Length(expr, _p(tok))
            else:
                return expr

    # -- tests ---------------------------------------------------------------

    def parse_test_body(self, name: str, pos: tuple, closing: bool) -> TestScript:
        ts = self.ts
        stmts = []
        while not (ts.at("}") if closing else ts.cur.kind == "eof"):
            if ts.cur.kind == "eof":
                ts.fail("'}'")
            stmts.append(self.parse_stmt(test_mode=True))
        return TestScript(name, tuple(stmts), pos)

    def parse_test_blocks(self) -> list[TestScript]:
        ts = self.ts
        scripts = []
        while ts.cur.kind != "eof":
            start = ts.expect("test")
            name = ts.expect_ident("test name").text
            ts.expect("{")
            scripts.append(self.parse_test_body(name, _p(start), closing=True))
            ts.expect("}")
        return scripts

    def parse_single_test(self, default_name: str) -> TestScript:
        ts = self.ts
        if ts.at("test"):
            scripts = self.parse_test_blocks()
            if len(scripts) != 1:
                raise SourceSyntaxError(f"expected exactly one test block, found {len(scripts)}", 1, 1)
            return scripts[0]
        script = self.parse_test_body(default_name, _p(ts.cur), closing=False)
        return script


def parse_program_syntax(source: str) -> SubjectProgram:
    return Parser(source).parse_program()


def parse_expr_syntax(source: str):
    p = Parser(source)
    expr = p.parse_expr()
    if p.ts.cur.kind != "eof":
        p.ts.fail("end of input")
    return expr
