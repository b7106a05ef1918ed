"""Deterministic counterexample search over bounded test scripts.

Scripts are ordered by number of calls, then constructor arguments, then the
calls themselves (method name, then arguments ascending). The search explores
the bounded script space breadth first, merging scripts that reach the same
instance state: any continuation of the later script has an identical,
earlier-ordered twin. Every distinct observation of the monitored method is
kept with the first script producing it, so one exploration answers every
assertion about that method.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

from ..subject.ast import (
    ARRAY, BOOL, INT, NINT, BoolLit, Call, ExprStmt, IntLit, NewUnit, NullLit, TestScript,
)
from ..subject.interp import (
    DEFAULT_MAX_ARRAY_LEN, DEFAULT_MAX_STEPS, INT_MAX, INT_MIN, Machine, RuntimeFault,
    default_value,
)
from ..subject.render import render_test

SENTINELS = (INT_MIN, INT_MAX)


@dataclass(frozen=True)
class OracleBounds:
    max_calls: int = 4
    int_lo: int = -2
    int_hi: int = 2
    sentinels: tuple = SENTINELS
    max_steps: int = 10_000
    max_array_len: int = DEFAULT_MAX_ARRAY_LEN

    def __post_init__(self):
        if self.max_calls < 1:
            raise ValueError("max_calls must be at least 1")
        if self.int_lo > self.int_hi:
            raise ValueError("int_lo must not exceed int_hi")

    def int_values(self) -> tuple:
        return tuple(sorted(set(range(self.int_lo, self.int_hi + 1)) | set(self.sentinels)))

    def domain(self, ty: str) -> tuple:
        if ty == INT:
            return self.int_values()
        if ty == NINT:
            return (None,) + self.int_values()
        if ty == BOOL:
            return (False, True)
        if ty == ARRAY:
            return (None,)
        raise ValueError(f"no argument domain for {ty}")


@dataclass(frozen=True)
class Observation:
    trace: object
    ctor_args: tuple
    calls: tuple  # ((method, args), ...), the last one is the monitored call


@dataclass
class Exploration:
    observations: list
    states: int
    scripts_run: int


_cache: dict = {}
_cache_lock = threading.Lock()
_key_locks: dict = {}


def _fresh(machine: Machine, fields: dict) -> None:
    machine.fields = dict(fields)
    machine.steps = 0
    machine.depth = 0
    machine.traces = []


def _explore(program, monitor: str, bounds: OracleBounds) -> Exploration:
    m = Machine(program, monitor, test_id="oracle", max_steps=bounds.max_steps,
                max_array_len=bounds.max_array_len)
    defaults = {f.name: default_value(f.type) for f in program.fields}
    seen_states: set = set()
    frontier = []
    runs = 0
    ctor_domains = [bounds.domain(p.type) for p in program.constructor.params]
    for args in itertools.product(*ctor_domains):
        _fresh(m, defaults)
        runs += 1
        try:
            m.construct(list(args))
        except (RuntimeFault, RecursionError):
            continue
        state = m.state()
        if state not in seen_states:
            seen_states.add(state)
            frontier.append((state, args, ()))
    methods = sorted(program.methods, key=lambda md: md.name)
    menu = [(md.name, list(itertools.product(*[bounds.domain(p.type) for p in md.params])))
            for md in methods]
    observations = []
    seen_obs: set = set()
    for _ in range(bounds.max_calls):
        nxt = []
        for state, cargs, calls in frontier:
            for name, arg_lists in menu:
                for args in arg_lists:
                    m.load_state(state)
                    m.steps = m.depth = 0
                    m.traces = []
                    runs += 1
                    faulted = False
                    try:
                        m.invoke(name, list(args))
                    except (RuntimeFault, RecursionError):
                        faulted = True
                    script = calls + ((name, args),)
                    # nested calls of the monitor count too, as do traces before a fault
                    for t in m.traces:
                        k = t.key()
                        if k not in seen_obs:
                            seen_obs.add(k)
                            observations.append(Observation(t, cargs, script))
                    if faulted:
                        continue
                    new_state = m.state()
                    if new_state not in seen_states:
                        seen_states.add(new_state)
                        nxt.append((new_state, cargs, script))
        frontier = nxt
        if not frontier:
            break
    return Exploration(observations, len(seen_states), runs)


def explore(program, monitor: str, bounds: OracleBounds) -> Exploration:
    """Cached exploration; concurrent callers for one key wait for a single run."""
    key = (program, monitor, bounds)
    with _cache_lock:
        if key in _cache:
            return _cache[key]
        lock = _key_locks.setdefault(key, threading.Lock())
    with lock:
        with _cache_lock:
            if key in _cache:
                return _cache[key]
        result = _explore(program, monitor, bounds)
        with _cache_lock:
            _cache[key] = result
        return result


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()
        _key_locks.clear()


def find_counterexample(program, monitor: str, assertion, bounds: OracleBounds):
    """First observation (in script order) on which `assertion` is not true, or None."""
    fn = assertion.fn
    for obs in explore(program, monitor, bounds).observations:
        t = obs.trace
        if fn(t.post_state, t.pre_state, t.result) is not True:
            return obs
    return None


def _literal(v):
    if v is None:
        return NullLit()
    if isinstance(v, bool):
        return BoolLit(v)
    return IntLit(v)


def script_test(program, obs: Observation, name: str) -> TestScript:
    stmts = [NewUnit(program.unit_name, tuple(_literal(a) for a in obs.ctor_args))]
    stmts.extend(ExprStmt(Call(meth, tuple(_literal(a) for a in args))) for meth, args in obs.calls)
    return TestScript(name, tuple(stmts))


def script_source(program, obs: Observation, name: str) -> str:
    return render_test(script_test(program, obs, name))


__all__ = ["OracleBounds", "Observation", "Exploration", "explore", "find_counterexample",
           "script_test", "script_source", "clear_cache", "DEFAULT_MAX_STEPS"]
