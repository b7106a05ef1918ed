"""Group survivors by the mutants they kill and keep one per group."""
from importlib import resources

from specrefine.assertions import Signature
from specrefine.fuzzer import FuzzerConfig, default_grammar_text, generate_candidates, load_grammar
from specrefine.inference import infer
from specrefine.mutation import cluster_and_select, compute_kill_matrix, generate_mutants
from specrefine.subject import parse_subject, parse_test_file

data = resources.files("specrefine") / "data"
queue = parse_subject((data / "subjects" / "QueueAr.sj").read_text())
weak = parse_test_file((data / "suites" / "QueueAr_weak.sjt").read_text(), queue)
sig = Signature.of(queue, "getFront")
survivors = infer(queue, weak, "getFront",
                  generate_candidates(load_grammar(default_grammar_text(), sig), FuzzerConfig())).survivors

mutants = generate_mutants(queue, "getFront")
for m in mutants[:5]:
    print(m.id, m.method, m.edit.operator, repr(m.edit.original), "->", repr(m.edit.replacement))
print("...", len(mutants), "mutants")

km = compute_kill_matrix(queue, mutants, weak, survivors, "getFront")
print("kill matrix", km.kills.shape, "kills per assertion:", km.kills.sum(axis=1)[:12])

cl = cluster_and_select(km)
print(len(survivors), "survivors ->", len(cl.clusters), "clusters,", len(cl.unranked), "kill nothing")
for rep in cl.representatives:
    print("  representative", rep.text)
