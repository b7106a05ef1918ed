"""Reduction by mutation analysis.

First-order mutants are taken from the monitored method and everything it
calls. An assertion kills a mutant when it fails (false or Undefined) on some
trace the suite produces against that mutant. Assertions with identical kill
rows are clustered and one representative is kept per cluster.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields, is_dataclass, replace

import numpy as np

from .errors import CompileError
from .subject.ast import (
    ARITH_OPS, Assign, Binary, Call, EQ_OPS, If, IntLit, REL_OPS, Unary, While, walk,
)
from .subject.checker import check_program
from .subject.interp import INT_MAX, INT_MIN, RUNTIME_FAULT, execute_test
from .subject.render import render_expr

AOR, ROR, CRP, NEG, DEL = "AOR", "ROR", "CRP", "NEG", "DEL"
_ARITH = ("+", "-", "*", "/", "%")
_RELEQ = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Edit:
    operator: str
    path: str
    original: str
    replacement: str


@dataclass(frozen=True)
class Mutant:
    id: int
    program: object = field(repr=False)
    edit: Edit
    method: str


def _is_node(x) -> bool:
    return is_dataclass(x) and not isinstance(x, type)


def _fragment(node) -> str:
    if isinstance(node, Assign):
        return f"{render_expr(node.target)} = {render_expr(node.value)};"
    return render_expr(node)


def _own_mutations(node, path):
    """(operator, path, original, replacement, new node) for edits at `node` itself."""
    if isinstance(node, Binary) and node.op in ARITH_OPS:
        for op in _ARITH:
            if op != node.op:
                new = replace(node, op=op)
                yield AOR, path, _fragment(node), _fragment(new), new
    elif isinstance(node, Binary) and (node.op in REL_OPS or node.op in EQ_OPS):
        for op in _RELEQ:
            if op != node.op:
                new = replace(node, op=op)
                yield ROR, path, _fragment(node), _fragment(new), new
    elif isinstance(node, IntLit):
        seen = {node.value}
        for v in (node.value + 1, node.value - 1, 0):
            if INT_MIN <= v <= INT_MAX and v not in seen:
                seen.add(v)
                new = replace(node, value=v)
                yield CRP, path, str(node.value), str(v), new


def _mutations(node, path):
    yield from _own_mutations(node, path)
    for f in fields(node):
        if f.name == "pos":
            continue
        val = getattr(node, f.name)
        sub = f"{path}.{f.name}"
        if isinstance(node, (If, While)) and f.name == "cond":
            new = Unary("!", val, getattr(val, "pos", (0, 0)))
            yield NEG, sub, render_expr(val), render_expr(new), replace(node, cond=new)
        if _is_node(val):
            for op, p, o, r, child in _mutations(val, sub):
                yield op, p, o, r, replace(node, **{f.name: child})
        elif isinstance(val, tuple):
            for i, item in enumerate(val):
                if not _is_node(item):
                    continue
                ipath = f"{sub}[{i}]"
                if isinstance(item, Assign):
                    yield DEL, ipath, _fragment(item), "", replace(node, **{f.name: val[:i] + val[i + 1:]})
                for op, p, o, r, child in _mutations(item, ipath):
                    yield op, p, o, r, replace(node, **{f.name: val[:i] + (child,) + val[i + 1:]})


def reachable_methods(program, monitor: str) -> list[str]:
    """`monitor` followed by the methods it calls, transitively, in program order."""
    seen = {monitor}
    todo = [monitor]
    while todo:
        m = program.method(todo.pop())
        for node in (n for st in m.body for n in walk(st)):
            if isinstance(node, Call) and node.name not in seen and program.has_method(node.name):
                seen.add(node.name)
                todo.append(node.name)
    return [m.name for m in program.methods if m.name in seen]


def generate_mutants(program, monitor: str) -> list[Mutant]:
    out: list[Mutant] = []
    seen = {program}
    for name in reachable_methods(program, monitor):
        idx = next(i for i, m in enumerate(program.methods) if m.name == name)
        method = program.methods[idx]
        for op, path, orig, repl, new_method in _mutations(method, name):
            methods = program.methods[:idx] + (new_method,) + program.methods[idx + 1:]
            mutated = replace(program, methods=methods)
            if mutated in seen:
                continue
            seen.add(mutated)
            try:
                check_program(mutated)
            except CompileError:
                continue
            out.append(Mutant(len(out), mutated, Edit(op, path, orig, repl), name))
    return out


@dataclass
class KillMatrix:
    assertions: list
    mutants: list
    kills: np.ndarray  # bool, shape (len(assertions), len(mutants))
    stillborn: list = field(default_factory=list)  # mutant ids

    @property
    def live(self) -> np.ndarray:
        dead = set(self.stillborn)
        return np.array([m.id not in dead for m in self.mutants], dtype=bool)

    def row(self, aid: str) -> np.ndarray:
        i = next(i for i, a in enumerate(self.assertions) if a.id == aid)
        return self.kills[i]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["assertion"] + [m.id for m in self.mutants])
        for a, row in zip(self.assertions, self.kills):
            w.writerow([a.id] + [int(x) for x in row])
        return buf.getvalue()


def compute_kill_matrix(original, mutants, suite, survivors, monitor: str, **limits) -> KillMatrix:
    survivors = list(survivors)
    kills = np.zeros((len(survivors), len(mutants)), dtype=bool)
    stillborn = []
    for j, mutant in enumerate(mutants):
        runs = [execute_test(mutant.program, t, monitor, **limits) for t in suite]
        if runs and all(r.outcome == RUNTIME_FAULT for r in runs):
            stillborn.append(mutant.id)
            continue
        traces = [t for r in runs for t in r.traces]
        for i, a in enumerate(survivors):
            fn = a.fn
            kills[i, j] = any(fn(t.post_state, t.pre_state, t.result) is not True for t in traces)
    return KillMatrix(survivors, list(mutants), kills, stillborn)


@dataclass
class Clustering:
    clusters: list  # lists of assertions, first-appearance order
    representatives: list
    unranked: list  # members of the all-zero-kill cluster

    def cluster_of(self, aid: str) -> list:
        return next(c for c in self.clusters if any(a.id == aid for a in c))


def _representative(members):
    return min(members, key=lambda a: (a.size, a.text))


def cluster_and_select(matrix: KillMatrix, keep_zero_kill: bool = False) -> Clustering:
    """Group identical kill rows (live mutants only); pick the smallest member of each.

    With `keep_zero_kill` every assertion of the zero-kill group is reported
    as a representative of its own, after the ranked ones.
    """
    live = matrix.live
    groups: dict = {}
    zero = []
    for a, row in zip(matrix.assertions, matrix.kills):
        key = row[live].tobytes()
        if not row[live].any():
            zero.append(a)
            continue
        groups.setdefault(key, []).append(a)
    clusters = list(groups.values())
    reps = [_representative(c) for c in clusters]
    if keep_zero_kill:
        reps.extend(zero)
    return Clustering(clusters, reps, zero)
