"""Grammar-based generation of candidate postconditions.

Grammars are plain-text `.gram` files (see docs/grammar-format.md). A handful
of builtin nonterminals are filled in from the target method's signature, so one
grammar serves every subject.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from importlib import resources

from .assertions import CandidateAssertion, Signature, parse_assertion
from .errors import CompileError
from .subject.ast import ARRAY, BOOL, INT, VOID

BUILTINS = ("IntVar", "BoolVar", "ArrVar", "IntConst", "Result", "OldIntVar")

_RULE = re.compile(r"^\s*<([A-Za-z_][A-Za-z0-9_]*)>\s*::=(.*)$")
_SYMBOL = re.compile(r'"((?:[^"\\]|\\.)*)"|<([A-Za-z_][A-Za-z0-9_]*)>|(\S+)')


class GrammarError(ValueError):
    pass


@dataclass(frozen=True)
class NT:
    name: str

    def __str__(self) -> str:
        return f"<{self.name}>"


@dataclass
class FuzzerConfig:
    seed: int = 0
    max_depth: int = 6
    max_candidates: int = 300
    const_pool: tuple = (0, 1)
    draws_per_candidate: int = 100

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be at least 1")
        self.const_pool = tuple(int(c) for c in self.const_pool)


@dataclass
class AssertionGrammar:
    rules: dict  # name -> list of productions (tuples of str | NT)
    start: str
    signature: Signature
    pruned: list = field(default_factory=list)

    def productions(self, name: str) -> list:
        return self.rules.get(name, [])

    def language(self, limit: int = 100_000) -> list[str]:
        """Every string the grammar derives, in discovery order (small grammars only)."""
        memo: dict = {}

        def expand(name, stack):
            if name in memo:
                return memo[name]
            if name in stack:
                raise GrammarError(f"<{name}> is recursive; its language is infinite")
            out = []
            for prod in self.rules.get(name, []):
                partial = [""]
                for sym in prod:
                    parts = expand(sym.name, stack | {name}) if isinstance(sym, NT) else [sym]
                    partial = [_join(p, s) for p in partial for s in parts]
                    if len(partial) > limit:
                        raise GrammarError(f"language of <{name}> exceeds {limit} strings")
                out.extend(partial)
            memo[name] = out
            return out

        return list(dict.fromkeys(expand(self.start, frozenset())))


def _join(a: str, b: str) -> str:
    return b if not a else (a if not b else f"{a} {b}")


def _parse_rules(text: str) -> tuple[dict, str]:
    rules: dict = {}
    start = None
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = _RULE.match(line)
        if m:
            current = m.group(1)
            if current in BUILTINS:
                raise GrammarError(f"line {lineno}: <{current}> is builtin and cannot be redefined")
            if current in rules:
                raise GrammarError(f"line {lineno}: <{current}> defined twice")
            rules[current] = []
            start = start or current
            body = m.group(2)
        elif line.lstrip().startswith("|") and current is not None:
            body = line
        else:
            raise GrammarError(f"line {lineno}: expected '<Name> ::= ...' or a '|' continuation")
        rules[current].extend(_split_alternatives(body, lineno, current))
    if start is None:
        raise GrammarError("grammar defines no rules")
    for name, prods in rules.items():
        if not prods:
            raise GrammarError(f"<{name}> has an empty production set")
    return rules, start


def _strip_comment(line: str) -> str:
    out, quoted = [], False
    for i, ch in enumerate(line):
        if ch == '"' and (i == 0 or line[i - 1] != "\\"):
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def _split_alternatives(body: str, lineno: int, name: str) -> list:
    alts, cur = [], []
    seen_any = False
    for m in _SYMBOL.finditer(body):
        quoted, nt, bare = m.groups()
        if bare == "|":
            if seen_any or cur:
                if not cur:
                    raise GrammarError(f"line {lineno}: empty alternative in <{name}>")
                alts.append(tuple(cur))
            cur = []
            seen_any = True
            continue
        if quoted is not None:
            cur.append(bytes(quoted, "utf-8").decode("unicode_escape"))
        elif nt is not None:
            cur.append(NT(nt))
        else:
            cur.append(bare)
    if cur:
        alts.append(tuple(cur))
    elif seen_any and alts:
        raise GrammarError(f"line {lineno}: empty alternative in <{name}>")
    return alts


def builtin_productions(signature: Signature, const_pool) -> dict:
    fields = signature.fields
    params = signature.params
    ints = [n for n, t in fields + params if t == INT]
    return {
        "IntVar": [(n,) for n in ints],
        "BoolVar": [(n,) for n, t in fields + params if t == BOOL],
        "ArrVar": [(n,) for n, t in fields + params if t == ARRAY],
        "IntConst": [(str(c),) for c in dict.fromkeys(const_pool)],
        "Result": [] if signature.return_type == VOID else [("result",)],
        "OldIntVar": [(f"old({n})",) for n, t in fields if t == INT],
    }


def load_grammar(text: str, signature: Signature, const_pool=(0, 1)) -> AssertionGrammar:
    rules, start = _parse_rules(text)
    for name, prods in rules.items():
        for prod in prods:
            for sym in prod:
                if isinstance(sym, NT) and sym.name not in rules and sym.name not in BUILTINS:
                    raise GrammarError(f"undefined nonterminal <{sym.name}> used in <{name}>")
    # productivity with builtins counted as terminals
    productive = _productive({**rules, **{b: [("x",)] for b in BUILTINS}})
    dead = [n for n in rules if n not in productive]
    if dead:
        raise GrammarError("nonterminal(s) with no terminating production: "
                           + ", ".join(f"<{n}>" for n in dead))
    full = dict(rules)
    full.update(builtin_productions(signature, const_pool))
    # drop alternatives that cannot terminate for this signature (empty builtins)
    live = _productive(full)
    pruned = []
    for name in list(full):
        keep = [p for p in full[name] if all(not isinstance(s, NT) or s.name in live for s in p)]
        pruned.extend((name, p) for p in full[name] if p not in keep)
        full[name] = keep
    return AssertionGrammar(full, start, signature, pruned)


def _productive(rules: dict) -> set:
    productive: set = set()
    changed = True
    while changed:
        changed = False
        for name, prods in rules.items():
            if name not in productive and any(
                    all(not isinstance(s, NT) or s.name in productive for s in p) for p in prods):
                productive.add(name)
                changed = True
    return productive


def default_grammar_text() -> str:
    return (resources.files("specrefine") / "data" / "grammars" / "default.gram").read_text("utf-8")


def _min_heights(g: AssertionGrammar) -> dict:
    inf = float("inf")
    height = {n: inf for n in g.rules}
    changed = True
    while changed:
        changed = False
        for name, prods in g.rules.items():
            for p in prods:
                h = 1 + max((height[s.name] for s in p if isinstance(s, NT)), default=0)
                if h < height[name]:
                    height[name] = h
                    changed = True
    return height


def _prod_height(prod, heights) -> float:
    return 1 + max((heights[s.name] for s in prod if isinstance(s, NT)), default=0)


def _derive(g: AssertionGrammar, rng: random.Random, heights: dict, max_depth: int) -> str:
    out: list[str] = []

    def go(name, depth):
        prods = g.rules[name]
        if depth >= max_depth:
            prod = min(prods, key=lambda p: _prod_height(p, heights))
        else:
            prod = prods[rng.randrange(len(prods))]
        for sym in prod:
            if isinstance(sym, NT):
                go(sym.name, depth + 1)
            else:
                out.append(sym)

    go(g.start, 0)
    return " ".join(out)


def generate_candidates(g: AssertionGrammar, cfg: FuzzerConfig) -> list[CandidateAssertion]:
    """Seeded random derivations, deduplicated by canonical id, in discovery order."""
    if not g.rules.get(g.start):
        return []
    rng = random.Random(cfg.seed)
    heights = _min_heights(g)
    seen_raw: set = set()
    seen_ids: set = set()
    out: list[CandidateAssertion] = []
    for _ in range(cfg.max_candidates * cfg.draws_per_candidate):
        raw = _derive(g, rng, heights, cfg.max_depth)
        if raw in seen_raw:
            continue
        seen_raw.add(raw)
        try:
            a = parse_assertion(raw, g.signature)
        except CompileError:
            continue
        if a.id in seen_ids:
            continue
        seen_ids.add(a.id)
        out.append(a)
        if len(out) >= cfg.max_candidates:
            break
    return out
