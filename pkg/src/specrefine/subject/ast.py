"""Syntax tree of the subject language.

Nodes are frozen dataclasses; source positions are excluded from equality so
that two trees compare equal iff they are structurally identical.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

INT, BOOL, ARRAY, NINT, VOID, NULL = "int", "bool", "int[]", "int?", "void", "null"
VALUE_TYPES = (INT, BOOL, ARRAY, NINT)

Pos = tuple  # (line, col)


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


# -- expressions ------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class NullLit:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Name:
    id: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Index:
    array: "Expr"
    index: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Length:
    array: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class NewArray:
    size: "Expr"
    pos: Pos = _pos()


Expr = Union[IntLit, BoolLit, NullLit, Name, Index, Length, Call, Unary, Binary, NewArray]

ARITH_OPS = ("+", "-", "*", "/", "%")
REL_OPS = ("<", "<=", ">", ">=")
EQ_OPS = ("==", "!=")
LOGIC_OPS = ("&&", "||")


# -- statements -------------------------------------------------------------

@dataclass(frozen=True)
class VarDecl:
    type: str
    name: str
    init: Optional[Expr]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    target: Union[Name, Index]
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: Optional[tuple]
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr]
    pos: Pos = _pos()


@dataclass(frozen=True)
class ExprStmt:
    expr: Call
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class NewUnit:
    unit: str
    args: tuple
    pos: Pos = _pos()


Stmt = Union[VarDecl, Assign, If, While, Return, ExprStmt, Assert, NewUnit]


# -- declarations -----------------------------------------------------------

@dataclass(frozen=True)
class Param:
    type: str
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class FieldDecl:
    type: str
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class MethodDef:
    name: str
    params: tuple
    return_type: str
    body: tuple
    pos: Pos = _pos()

    @property
    def param_types(self) -> dict:
        return {p.name: p.type for p in self.params}


@dataclass(frozen=True)
class Constructor:
    params: tuple
    body: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class SubjectProgram:
    unit_name: str
    fields: tuple
    constructor: Constructor
    methods: tuple
    pos: Pos = _pos()

    @property
    def field_types(self) -> dict:
        return {f.name: f.type for f in self.fields}

    def method(self, name: str) -> MethodDef:
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def has_method(self, name: str) -> bool:
        return any(m.name == name for m in self.methods)


@dataclass(frozen=True)
class TestScript:
    name: str
    statements: tuple
    pos: Pos = _pos()

    def call_count(self) -> int:
        """Number of top-level method invocations (construction excluded)."""
        count = 0
        for st in self.statements:
            if isinstance(st, ExprStmt) or (isinstance(st, VarDecl) and isinstance(st.init, Call)):
                count += 1
        return count


def children(node) -> list:
    """Direct sub-nodes of a node, in source order."""
    if isinstance(node, (Index,)):
        return [node.array, node.index]
    if isinstance(node, Length):
        return [node.array]
    if isinstance(node, Call):
        return list(node.args)
    if isinstance(node, Unary):
        return [node.operand]
    if isinstance(node, Binary):
        return [node.left, node.right]
    if isinstance(node, NewArray):
        return [node.size]
    if isinstance(node, VarDecl):
        return [node.init] if node.init is not None else []
    if isinstance(node, Assign):
        return [node.target, node.value]
    if isinstance(node, If):
        return [node.cond, *node.then, *(node.orelse or ())]
    if isinstance(node, While):
        return [node.cond, *node.body]
    if isinstance(node, Return):
        return [node.value] if node.value is not None else []
    if isinstance(node, (ExprStmt,)):
        return [node.expr]
    if isinstance(node, Assert):
        return [node.cond]
    if isinstance(node, NewUnit):
        return list(node.args)
    return []


def walk(node):
    yield node
    for child in children(node):
        yield from walk(child)


def count_nodes(node) -> int:
    return sum(1 for _ in walk(node))
