"""Reference implementations used only by the tests.

Everything here is written against its own small term representation and
shares no evaluation code with the package: assertions are built as tuples,
rendered to text for the library parser, and evaluated by a naive recursive
walker that always evaluates both operands before combining them.
"""
from __future__ import annotations

import itertools
import random

INT_MIN, INT_MAX = -(2 ** 31), 2 ** 31 - 1
UNDEF = "<undef>"


def wrap32(x: int) -> int:
    return (x + 2 ** 31) % 2 ** 32 - 2 ** 31


def tdiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def tmod(a: int, b: int) -> int:
    return a - tdiv(a, b) * b


# -- terms -------------------------------------------------------------------
# ("int", v) ("bool", v) ("null",) ("var", name) ("old", name) ("result",)
# ("not", t) ("neg", t) ("bin", op, l, r) ("call", helper, *args)

def text(t) -> str:
    k = t[0]
    if k == "int":
        return str(t[1]) if t[1] >= 0 else f"(0 - {-t[1]})"
    if k == "bool":
        return "true" if t[1] else "false"
    if k == "null":
        return "null"
    if k == "var":
        return t[1]
    if k == "old":
        return f"old({t[1]})"
    if k == "result":
        return "result"
    if k == "not":
        return f"!({text(t[1])})"
    if k == "neg":
        return f"-({text(t[1])})"
    if k == "bin":
        return f"({text(t[2])} {t[1]} {text(t[3])})"
    if k == "call":
        return f"{t[1]}({', '.join(text(a) for a in t[2:])})"
    raise ValueError(t)


def slots(t, params) -> set:
    k = t[0]
    if k == "var":
        return {("pre", t[1])} if t[1] in params else {("post", t[1])}
    if k == "old":
        return {("pre", t[1])}
    if k == "result":
        return {("result",)}
    out = set()
    for c in t[1:]:
        if isinstance(c, tuple):
            out |= slots(c, params)
    return out


def evaluate(t, env, params):
    """Three-valued value of term `t`; `env` maps slots to concrete values."""
    k = t[0]
    if k in ("int", "bool"):
        return t[1]
    if k == "null":
        return None
    if k == "var":
        return env[("pre", t[1])] if t[1] in params else env[("post", t[1])]
    if k == "old":
        return env[("pre", t[1])]
    if k == "result":
        return env[("result",)]
    if k == "not":
        v = evaluate(t[1], env, params)
        return UNDEF if v == UNDEF else (not v)
    if k == "neg":
        v = evaluate(t[1], env, params)
        return UNDEF if v is None or v == UNDEF else wrap32(-v)
    if k == "call":
        args = [evaluate(a, env, params) for a in t[2:]]
        if any(a is None or a == UNDEF for a in args):
            return UNDEF
        name = t[1]
        if name == "size":
            return len(args[0])
        if name == "getElement":
            arr, i = args
            return arr[i] if 0 <= i < len(arr) else UNDEF
        if name == "pairwiseEqual":
            return list(args[0]) == list(args[1])
        if name == "isReverse":
            return list(args[0]) == list(args[1])[::-1]
        raise ValueError(name)
    op, left, right = t[1], evaluate(t[2], env, params), evaluate(t[3], env, params)
    if op in ("||", "&&"):
        if left == UNDEF:
            return UNDEF
        if op == "||":
            return True if left else right
        return right if left else False
    if op in ("==", "!="):
        if left == UNDEF or right == UNDEF:
            return UNDEF
        same = left == right and type(left) is type(right) or (left is None and right is None)
        return same if op == "==" else not same
    if left is None or right is None or left == UNDEF or right == UNDEF:
        return UNDEF
    if op == "+":
        return wrap32(left + right)
    if op == "-":
        return wrap32(left - right)
    if op == "*":
        return wrap32(left * right)
    if op == "/":
        return UNDEF if right == 0 else wrap32(tdiv(left, right))
    if op == "%":
        return UNDEF if right == 0 else tmod(left, right)
    return {"<": left < right, "<=": left <= right, ">": left > right, ">=": left >= right}[op]


# -- random terms over a fixed vocabulary ------------------------------------

class Vocabulary:
    """Names by type for the random term generator.

    `fields` and `params` map names to "int", "int?", "bool" or "int[]".
    """

    def __init__(self, fields: dict, params: dict, result: str):
        self.fields, self.params, self.result = dict(fields), dict(params), result

    def of_type(self, ty):
        names = [("var", n) for n, t in {**self.fields, **self.params}.items() if t == ty]
        names += [("old", n) for n, t in self.fields.items() if t == ty]
        if self.result == ty:
            names.append(("result",))
        return names

    def slot_type(self, slot):
        if slot[0] == "result":
            return self.result
        return self.params.get(slot[1]) or self.fields[slot[1]]


def random_int(rng: random.Random, vocab: Vocabulary, depth: int):
    leaves = vocab.of_type("int") + [("int", rng.choice((0, 1, -1, 2)))]
    if depth <= 0 or rng.random() < 0.45:
        leaf = rng.choice(leaves)
        return ("neg", leaf) if rng.random() < 0.1 else leaf
    if vocab.of_type("int[]") and rng.random() < 0.2:
        arr = rng.choice(vocab.of_type("int[]"))
        if rng.random() < 0.5:
            return ("call", "size", arr)
        return ("call", "getElement", arr, random_int(rng, vocab, depth - 1))
    op = rng.choice(("+", "-", "*", "/", "%"))
    return ("bin", op, random_int(rng, vocab, depth - 1), random_int(rng, vocab, depth - 1))


def random_bool(rng: random.Random, vocab: Vocabulary, depth: int = 2):
    r = rng.random()
    if depth <= 0 or r < 0.35:
        ints = set(vocab.of_type("int?"))
        if ints and rng.random() < 0.3:
            x = rng.choice(sorted(ints))
            return ("bin", rng.choice(("==", "!=")), x, rng.choice((("null",), random_int(rng, vocab, 0))))
        bools = vocab.of_type("bool")
        if bools and rng.random() < 0.2:
            return rng.choice(bools)
        op = rng.choice(("==", "!=", "<", "<=", ">", ">="))
        return ("bin", op, random_int(rng, vocab, 1), random_int(rng, vocab, 1))
    if r < 0.45:
        return ("not", random_bool(rng, vocab, depth - 1))
    if vocab.of_type("int[]") and r < 0.52:
        arrs = vocab.of_type("int[]")
        return ("call", rng.choice(("pairwiseEqual", "isReverse")), rng.choice(arrs), rng.choice(arrs))
    return ("bin", rng.choice(("||", "&&")), random_bool(rng, vocab, depth - 1),
            random_bool(rng, vocab, depth - 1))


# -- bounded implication, the slow way ----------------------------------------

def domain(ty: str, ints, arrays):
    if ty == "int":
        return list(ints)
    if ty == "int?":
        return [None] + list(ints)
    if ty == "bool":
        return [False, True]
    if ty == "int[]":
        return list(arrays)
    raise ValueError(ty)


def bounded_values(lo, hi, sentinels=True, max_len=2, elem_lo=-1, elem_hi=1):
    ints = sorted(set(range(lo, hi + 1)) | ({INT_MIN, INT_MAX} if sentinels else set()))
    elems = range(elem_lo, elem_hi + 1)
    arrays = [t for n in range(max_len + 1) for t in itertools.product(elems, repeat=n)]
    return ints, arrays


def brute_implies(premises, conclusion, vocab: Vocabulary, ints, arrays) -> bool:
    """Every tuple over the joint slots that makes all premises true makes the conclusion true."""
    params = set(vocab.params)
    every = set(slots(conclusion, params))
    for p in premises:
        every |= slots(p, params)
    order = sorted(every)
    doms = [domain(vocab.slot_type(s), ints, arrays) for s in order]
    for values in itertools.product(*doms):
        env = dict(zip(order, values))
        if all(evaluate(p, env, params) is True for p in premises):
            if evaluate(conclusion, env, params) is not True:
                return False
    return True


def brute_score(inferred, truth, vocab, ints, arrays):
    """(precision, recall, f1) by the textbook definitions."""
    valid = [a for a in inferred if brute_implies(truth, a, vocab, ints, arrays)]
    precision = len(valid) / len(inferred) if inferred else None
    recall = (sum(brute_implies(valid, g, vocab, ints, arrays) for g in truth) / len(truth)
              if truth else None)
    if not precision or not recall:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


# -- clustering --------------------------------------------------------------

def brute_partition(rows, live):
    """Groups of row indices with identical live-column kill sets, zero rows excluded.

    Pairwise comparison over plain lists, in first-appearance order.
    """
    cols = [j for j, ok in enumerate(live) if ok]
    keyed = [[bool(rows[i][j]) for j in cols] for i in range(len(rows))]
    groups: list = []
    for i, k in enumerate(keyed):
        if not any(k):
            continue
        for g in groups:
            if keyed[g[0]] == k:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


# -- scripts -----------------------------------------------------------------

def script_text(unit: str, ctor_args, calls, name: str = "t") -> str:
    def lit(v):
        return "null" if v is None else ("true" if v is True else "false" if v is False else str(v))
    lines = [f"test {name} {{", f"  new {unit}({', '.join(lit(a) for a in ctor_args)});"]
    lines += [f"  {m}({', '.join(lit(a) for a in args)});" for m, args in calls]
    lines.append("}")
    return "\n".join(lines) + "\n"


def argument_domain(ty: str, ints):
    if ty == "int":
        return list(ints)
    if ty == "int?":
        return [None] + list(ints)
    if ty == "bool":
        return [False, True]
    return [None]


def all_scripts(program, max_calls: int, ints):
    """Every (ctor args, call sequence) with 1..max_calls calls over the given argument values."""
    ctor = [argument_domain(p.type, ints) for p in program.constructor.params]
    menu = []
    for m in sorted(program.methods, key=lambda m: m.name):
        for args in itertools.product(*[argument_domain(p.type, ints) for p in m.params]):
            menu.append((m.name, args))
    for cargs in itertools.product(*ctor):
        for n in range(1, max_calls + 1):
            for calls in itertools.product(menu, repeat=n):
                yield cargs, calls


def random_script(program, rng: random.Random, max_calls: int = 5, ints=(-3, -1, 0, 1, 2, 5)):
    cargs = [rng.choice(argument_domain(p.type, ints)) for p in program.constructor.params]
    calls = []
    for _ in range(rng.randint(1, max_calls)):
        m = rng.choice(program.methods)
        calls.append((m.name, [rng.choice(argument_domain(p.type, ints)) for p in m.params]))
    return cargs, calls
