"""Deterministic pretty-printer; `parse_subject(render_subject(p)) == p`."""
from __future__ import annotations

from .ast import (
    VOID, Assert, Assign, Binary, BoolLit, Call, ExprStmt, If, Index, IntLit, Length,
    MethodDef, Name, NewArray, NewUnit, NullLit, Return, SubjectProgram, TestScript,
    Unary, VarDecl, While,
)

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7


def _prec(e) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _UNARY_PREC
    return 8


def render_expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Index):
        return f"{_atom(e.array)}[{render_expr(e.index)}]"
    if isinstance(e, Length):
        return f"{_atom(e.array)}.length"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, NewArray):
        return f"new int[{render_expr(e.size)}]"
    if isinstance(e, Unary):
        inner = render_expr(e.operand)
        # a literal right after "-" would re-parse as a negative literal
        if isinstance(e.operand, Binary) or inner[:1].isdigit():
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        left = render_expr(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = render_expr(e.right)
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"cannot render {type(e).__name__}")


def _atom(e) -> str:
    text = render_expr(e)
    if isinstance(e, (Binary, Unary)) or (isinstance(e, IntLit) and e.value < 0):
        return f"({text})"
    return text


def _stmts(body, indent: int, out: list) -> None:
    pad = "  " * indent
    for st in body:
        if isinstance(st, VarDecl):
            init = f" = {render_expr(st.init)}" if st.init is not None else ""
            out.append(f"{pad}{st.type} {st.name}{init};")
        elif isinstance(st, Assign):
            out.append(f"{pad}{render_expr(st.target)} = {render_expr(st.value)};")
        elif isinstance(st, If):
            out.append(f"{pad}if ({render_expr(st.cond)}) {{")
            _stmts(st.then, indent + 1, out)
            if st.orelse is not None:
                out.append(f"{pad}}} else {{")
                _stmts(st.orelse, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(st, While):
            out.append(f"{pad}while ({render_expr(st.cond)}) {{")
            _stmts(st.body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(st, Return):
            out.append(f"{pad}return;" if st.value is None else f"{pad}return {render_expr(st.value)};")
        elif isinstance(st, ExprStmt):
            out.append(f"{pad}{render_expr(st.expr)};")
        elif isinstance(st, Assert):
            out.append(f"{pad}assert {render_expr(st.cond)};")
        elif isinstance(st, NewUnit):
            out.append(f"{pad}new {st.unit}({', '.join(render_expr(a) for a in st.args)});")
        else:
            raise TypeError(f"cannot render {type(st).__name__}")


def _params(params) -> str:
    return ", ".join(f"{p.type} {p.name}" for p in params)


def render_method(method: MethodDef, indent: int = 0) -> str:
    pad = "  " * indent
    out = [f"{pad}{method.return_type} {method.name}({_params(method.params)}) {{"]
    _stmts(method.body, indent + 1, out)
    out.append(f"{pad}}}")
    return "\n".join(out) + "\n"


def render_subject(program: SubjectProgram) -> str:
    out = [f"unit {program.unit_name} {{"]
    for f in program.fields:
        out.append(f"  {f.type} {f.name};")
    if program.fields:
        out.append("")
    ctor = program.constructor
    out.append(f"  {program.unit_name}({_params(ctor.params)}) {{")
    _stmts(ctor.body, 2, out)
    out.append("  }")
    for m in program.methods:
        out.append("")
        out.append(render_method(m, indent=1).rstrip("\n"))
    out.append("}")
    return "\n".join(out) + "\n"


def render_test(test: TestScript) -> str:
    out = [f"test {test.name} {{"]
    _stmts(test.statements, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"
