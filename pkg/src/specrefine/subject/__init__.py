"""The built-in subject language: parsing, checking, rendering and execution."""
from __future__ import annotations

from ..errors import SourceSyntaxError
from .ast import SubjectProgram, TestScript, MethodDef
from .checker import check_program, check_test
from .interp import (
    Execution, Machine, RuntimeFault, TraceRecord, execute_test, run_test, wrap,
    INT_MIN, INT_MAX, PASS, TEST_FAILURE, RUNTIME_FAULT,
)
from .parser import Parser
from .render import render_expr, render_method, render_subject, render_test


def _guard(fn):
    try:
        return fn()
    except RecursionError:
        raise SourceSyntaxError("input nested too deeply", 1, 1) from None


def parse_subject(source: str) -> SubjectProgram:
    """Parse and check a `.sj` unit. Raises a `CompileError` subclass on any diagnostic."""
    return _guard(lambda: check_program(Parser(source).parse_program()))


def parse_test(source: str, program: SubjectProgram, name: str = "t0") -> TestScript:
    """Parse one test script (a `test` block or a bare statement list) and check it
    against `program`: names, arity and argument types of every call."""
    return _guard(lambda: check_test(Parser(source).parse_single_test(name), program))


def parse_test_file(source: str, program: SubjectProgram) -> list[TestScript]:
    """Parse a `.sjt` file holding any number of `test <name> { ... }` blocks."""
    def go():
        scripts = Parser(source).parse_test_blocks()
        seen = set()
        for s in scripts:
            if s.name in seen:
                raise SourceSyntaxError(f"duplicate test name {s.name!r}", *s.pos)
            seen.add(s.name)
            check_test(s, program)
        return scripts
    return _guard(go)


__all__ = [
    "SubjectProgram", "TestScript", "MethodDef", "TraceRecord", "Execution", "Machine",
    "RuntimeFault", "parse_subject", "parse_test", "parse_test_file", "run_test",
    "execute_test", "render_subject", "render_method", "render_test", "render_expr",
    "wrap", "INT_MIN", "INT_MAX", "PASS", "TEST_FAILURE", "RUNTIME_FAULT",
]
