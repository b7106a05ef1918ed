"""Sample candidate postconditions from a grammar."""
from specrefine.assertions import Signature
from specrefine.fuzzer import FuzzerConfig, default_grammar_text, generate_candidates, load_grammar
from specrefine.subject import parse_subject
from importlib import resources

queue = parse_subject((resources.files("specrefine") / "data" / "subjects" / "QueueAr.sj").read_text())
sig = Signature.of(queue, "getFront")

# <IntVar>, <Result> and friends come from the method signature; a small
# grammar only has to say how to combine them.
small = """
<S> ::= <IntVar> <Op> <IntConst> | <Result> "==" "null"
<Op> ::= "==" | "<" | ">="
"""
g = load_grammar(small, sig, const_pool=(0, 1))
print(len(g.language()), "sentences in the small grammar, e.g.", g.language()[:4])

cands = generate_candidates(load_grammar(default_grammar_text(), sig), FuzzerConfig(seed=1))
print(len(cands), "candidates from the default grammar")
for a in cands[:8]:
    print(" ", a.id, a.text)

# same seed, same list
again = generate_candidates(load_grammar(default_grammar_text(), sig), FuzzerConfig(seed=1))
print("deterministic:", [a.id for a in again] == [a.id for a in cands])
