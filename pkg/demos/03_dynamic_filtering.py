"""Keep the candidates that hold on every trace of a test suite."""
from importlib import resources

from specrefine.assertions import Signature
from specrefine.fuzzer import FuzzerConfig, default_grammar_text, generate_candidates, load_grammar
from specrefine.inference import infer
from specrefine.subject import parse_subject, parse_test, parse_test_file

data = resources.files("specrefine") / "data"
queue = parse_subject((data / "subjects" / "QueueAr.sj").read_text())
weak = parse_test_file((data / "suites" / "QueueAr_weak.sjt").read_text(), queue)
sig = Signature.of(queue, "getFront")
cands = generate_candidates(load_grammar(default_grammar_text(), sig), FuzzerConfig())

res = infer(queue, weak, "getFront", cands)
print(f"{len(cands)} candidates, {res.trace_count} traces, {len(res.survivors)} survivors")

# The weak suite never dequeues, so `front` stays 0 and some survivors are
# only true by accident.
wrap = "((currentSize != front) || (front < 1))"
print(wrap, "survives:", wrap in {a.text for a in res.survivors})

# One more test that moves `front` is enough to refute it; survivors only shrink.
extra = parse_test("new QueueAr(2); enqueue(1); dequeue(); enqueue(2); getFront();", queue, "extra")
res2 = infer(queue, weak + [extra], "getFront", cands)
print(len(res2.survivors), "survivors with the extra test;",
      "subset:", set(res2.survivor_ids) <= set(res.survivor_ids))
