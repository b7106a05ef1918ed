"""Scoring against ground-truth postconditions.

Implication G ⊨ a is decided by enumerating abstract observations (pre-state,
post-state, result) over finite bounds: every tuple satisfying all premises
must satisfy the conclusion. States need not be reachable. Optionally a list of
concrete trace observations is checked as well, which keeps the verdict sound
for values that the bounds do not cover.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .assertions import CandidateAssertion, Signature, load_assertions
from .errors import BoundsExplosion
from .subject.ast import ARRAY, BOOL, INT, NINT
from .subject.interp import INT_MAX, INT_MIN

TARGETED, COLLATERAL = "targeted", "collateral"


@dataclass(frozen=True)
class EnumerationBounds:
    int_lo: int = -4
    int_hi: int = 4
    sentinels: tuple = (INT_MIN, INT_MAX)
    max_len: int = 2
    elem_lo: int = -1
    elem_hi: int = 1
    ceiling: int = 5_000_000  # search nodes per decision

    def __post_init__(self):
        if self.int_lo > self.int_hi:
            raise ValueError("int_lo must not exceed int_hi")
        if self.elem_lo > self.elem_hi:
            raise ValueError("elem_lo must not exceed elem_hi")
        if self.max_len < 0:
            raise ValueError("max_len must be non-negative")

    def ints(self) -> tuple:
        return tuple(sorted(set(range(self.int_lo, self.int_hi + 1)) | set(self.sentinels)))

    def arrays(self) -> tuple:
        elems = range(self.elem_lo, self.elem_hi + 1)
        return tuple(t for n in range(self.max_len + 1) for t in itertools.product(elems, repeat=n))

    def domain(self, ty: str) -> tuple:
        if ty == INT:
            return self.ints()
        if ty == NINT:
            return (None,) + self.ints()
        if ty == BOOL:
            return (False, True)
        if ty == ARRAY:
            return self.arrays()
        raise ValueError(f"no enumeration domain for {ty}")

    def describe(self) -> dict:
        return {"int_range": [self.int_lo, self.int_hi], "sentinels": list(self.sentinels),
                "array_max_len": self.max_len, "element_range": [self.elem_lo, self.elem_hi],
                "ceiling": self.ceiling}

    @classmethod
    def parse(cls, text: str) -> "EnumerationBounds":
        """`lo:hi[,len=L][,elems=a:b][,sentinels=on|off][,ceiling=N]`, e.g. `-4:4,len=2`."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty bounds")
        lo, hi = (int(x) for x in parts[0].split(":"))
        kw: dict = {"int_lo": lo, "int_hi": hi}
        for p in parts[1:]:
            k, _, v = p.partition("=")
            if k == "len":
                kw["max_len"] = int(v)
            elif k == "elems":
                a, b = (int(x) for x in v.split(":"))
                kw["elem_lo"], kw["elem_hi"] = a, b
            elif k == "sentinels":
                kw["sentinels"] = (INT_MIN, INT_MAX) if v in ("on", "yes", "1") else ()
            elif k == "ceiling":
                kw["ceiling"] = int(v)
            else:
                raise ValueError(f"unknown bounds key {k!r}")
        return cls(**kw)


def slot_type(slot: tuple, sig: Signature) -> str:
    if slot[0] == "result":
        return sig.return_type
    name = slot[1]
    return sig.param_types.get(name) or sig.field_types[name]


def _put(env, slot, value):
    post, pre, res = env
    if slot[0] == "post":
        post[slot[1]] = value
    elif slot[0] == "pre":
        pre[slot[1]] = value
    else:
        res[0] = value


class Enumerator:
    """Bounded decision procedure for one method signature; caches premise models."""

    def __init__(self, signature: Signature, bounds: EnumerationBounds | None = None,
                 observations=()):
        self.sig = signature
        self.bounds = bounds or EnumerationBounds()
        self.observations = [(dict(t.post_state), dict(t.pre_state), t.result) for t in observations]
        self._models: dict = {}
        self._lock = threading.Lock()
        self.vacuous = False  # set when some premise set turned out unsatisfiable

    def domain(self, slot):
        return self.bounds.domain(slot_type(slot, self.sig))

    # -- enumeration -----------------------------------------------------

    def _order(self, premises, extra_slots) -> list:
        order: list = []
        for p in sorted(premises, key=lambda a: (len(a.slots()), a.text)):
            for s in sorted(p.slots()):
                if s not in order:
                    order.append(s)
        for s in sorted(extra_slots):
            if s not in order:
                order.append(s)
        return order

    def models(self, premises) -> tuple:
        """(slot order, list of value tuples) satisfying every premise, cached."""
        key = frozenset(a.text for a in premises)
        with self._lock:
            hit = self._models.get(key)
        if hit is not None:
            return hit
        order = self._order(premises, ())
        checks = [[] for _ in order]
        for p in premises:
            last = max(order.index(s) for s in p.slots()) if p.slots() else -1
            if last < 0:
                checks_const = p.fn({}, {}, None)
                if checks_const is not True:
                    result = (tuple(order), [])
                    with self._lock:
                        self._models[key] = result
                    return result
                continue
            checks[last].append(p.fn)
        domains = [self.domain(s) for s in order]
        post, pre, res = {}, {}, [None]
        env = (post, pre, res)
        out: list = []
        values = [None] * len(order)
        nodes = 0
        ceiling = self.bounds.ceiling

        def go(i):
            nonlocal nodes
            if i == len(order):
                out.append(tuple(values))
                return
            slot = order[i]
            fs = checks[i]
            for v in domains[i]:
                nodes += 1
                if nodes > ceiling:
                    raise BoundsExplosion(nodes, ceiling)
                _put(env, slot, v)
                values[i] = v
                if all(f(post, pre, res[0]) is True for f in fs):
                    go(i + 1)

        go(0)
        result = (tuple(order), out)
        with self._lock:
            self._models[key] = result
        return result

    def satisfiable(self, premises) -> bool:
        return bool(self.models(premises)[1]) or any(
            all(p.fn(post, pre, r) is True for p in premises) for post, pre, r in self.observations)

    def implies(self, premises, conclusion: CandidateAssertion) -> bool:
        premises = list(premises)
        if self._observation_refutes(premises, conclusion):
            return False
        component, rest = _connected(premises, conclusion.slots())
        if rest and not self.satisfiable(rest):
            self.vacuous = True
            return True
        order, models = self.models(component)
        extra = sorted(s for s in conclusion.slots() if s not in order)
        extra_domains = [self.domain(s) for s in extra]
        fn = conclusion.fn
        post, pre, res = {}, {}, [None]
        env = (post, pre, res)
        nodes = 0
        for model in models:
            for slot, v in zip(order, model):
                _put(env, slot, v)
            for ext in itertools.product(*extra_domains):
                nodes += 1
                if nodes > self.bounds.ceiling:
                    raise BoundsExplosion(nodes, self.bounds.ceiling)
                for slot, v in zip(extra, ext):
                    _put(env, slot, v)
                if fn(post, pre, res[0]) is not True:
                    return False
        if not models:
            self.vacuous = True
        return True

    def _observation_refutes(self, premises, conclusion) -> bool:
        for post, pre, r in self.observations:
            if all(p.fn(post, pre, r) is True for p in premises) and conclusion.fn(post, pre, r) is not True:
                return True
        return False


def _connected(premises, seed_slots) -> tuple[list, list]:
    """Premises transitively sharing a slot with `seed_slots`, and the others."""
    slots = set(seed_slots)
    inside: list = []
    outside = list(premises)
    changed = True
    while changed:
        changed = False
        for p in list(outside):
            if p.slots() & slots:
                inside.append(p)
                outside.remove(p)
                slots |= p.slots()
                changed = True
    # keep the caller's order for deterministic caching
    order = {id(p): i for i, p in enumerate(premises)}
    inside.sort(key=lambda p: order[id(p)])
    return inside, outside


def implies(premises, conclusion, bounds: EnumerationBounds | None = None, observations=()) -> bool:
    return Enumerator(conclusion.signature, bounds, observations).implies(premises, conclusion)


# -- metrics -----------------------------------------------------------------

def f1_score(p, r):
    if p is None or r is None or p == 0 or r == 0:
        return 0.0
    return 2 * p * r / (p + r)


@dataclass
class MetricsReport:
    precision: float | None
    recall: float | None
    f1: float
    invalid: list  # ids of A not implied by G
    labels: dict  # id -> "valid" | "invalid"
    implied_ground_truth: dict  # ground-truth text -> implied by the valid part of A
    inferred_count: int
    ground_truth_count: int
    g_unsatisfiable: bool = False
    vacuous: bool = False
    bounds: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "inferred": self.inferred_count, "ground_truth": self.ground_truth_count,
                "invalid": list(self.invalid), "labels": dict(self.labels),
                "implied_ground_truth": dict(self.implied_ground_truth),
                "g_unsatisfiable": self.g_unsatisfiable, "vacuous": self.vacuous,
                "bounds": self.bounds}


def score(inferred, ground_truth, bounds: EnumerationBounds | None = None, observations=(),
          enumerator: Enumerator | None = None) -> MetricsReport:
    inferred, ground_truth = list(inferred), list(ground_truth)
    bounds = bounds or EnumerationBounds()
    if enumerator is None:
        sig = (ground_truth or inferred)[0].signature if (ground_truth or inferred) else None
        enumerator = Enumerator(sig, bounds, observations) if sig is not None else None
    labels, invalid, valid = {}, [], []
    for a in inferred:
        ok = enumerator.implies(ground_truth, a)
        labels[a.id] = "valid" if ok else "invalid"
        (valid if ok else invalid).append(a)
    implied_gt = {g.text: enumerator.implies(valid, g) for g in ground_truth}
    precision = len(valid) / len(inferred) if inferred else None
    recall = sum(implied_gt.values()) / len(ground_truth) if ground_truth else None
    g_unsat = bool(ground_truth) and not enumerator.satisfiable(ground_truth)
    return MetricsReport(precision, recall, f1_score(precision, recall), [a.id for a in invalid],
                         labels, implied_gt, len(inferred), len(ground_truth), g_unsat,
                         enumerator.vacuous if enumerator else False, bounds.describe())


@dataclass
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None

    def to_json(self) -> dict:
        return {"TP": self.tp, "FP": self.fp, "TN": self.tn, "FN": self.fn,
                "precision": self.precision, "recall": self.recall}


def verdict_confusion(verdicts: dict, invalid) -> Confusion:
    """`verdicts` maps assertion id to "OK" or "FAILED"; `invalid` holds ids judged invalid."""
    invalid = set(invalid)
    tp = fp = tn = fn = 0
    for aid, v in verdicts.items():
        bad = aid in invalid
        if v == "FAILED":
            tp, fp = tp + bad, fp + (not bad)
        elif v == "OK":
            tn, fn = tn + (not bad), fn + bad
    return Confusion(tp, fp, tn, fn)


@dataclass(frozen=True)
class Attribution:
    assertion_id: str
    test_ids: tuple  # new tests with a failing trace for the assertion
    kind: str  # targeted | collateral


def attribute_discards(before, after, new_tests, targets: dict | None = None) -> dict:
    """Assertions surviving `before` but falsified in `after`, keyed by id.

    `targets` maps a new test's name to the id of the assertion it was made for.
    """
    targets = targets or {}
    new_names = [t if isinstance(t, str) else t.name for t in new_tests]
    new_set = set(new_names)
    out = {}
    after_ok = set(after.survivor_ids)
    for aid in before.survivor_ids:
        if aid in after_ok or aid not in after.falsified:
            continue
        tests = tuple(t for t in after.falsifying_tests.get(aid, []) if t in new_set)
        kind = TARGETED if any(targets.get(t) == aid for t in tests) else COLLATERAL
        out[aid] = Attribution(aid, tests, kind)
    return out


def attribution_by_test(attribution: dict) -> dict:
    by_test: dict = {}
    for aid, att in attribution.items():
        for t in att.test_ids:
            by_test.setdefault(t, []).append(aid)
    return by_test


def suspected_violations(ground_truth, traces) -> list:
    """(ground-truth text, test id) for ground truth falsified by an actual trace."""
    out = []
    for g in ground_truth:
        for t in traces:
            if g.fn(t.post_state, t.pre_state, t.result) is not True:
                out.append((g.text, t.test_id))
                break
    return out


# -- files -------------------------------------------------------------------

def groundtruth_path(root, unit: str, method: str) -> Path:
    return Path(str(root)) / unit / f"{method}.assert"


def default_groundtruth_root():
    return resources.files("specrefine") / "data" / "groundtruth"


def load_groundtruth(signature: Signature, root=None) -> list[CandidateAssertion]:
    root = root if root is not None else default_groundtruth_root()
    path = groundtruth_path(root, signature.unit, signature.method)
    return load_assertions(Path(str(path)).read_text("utf-8"), signature)
