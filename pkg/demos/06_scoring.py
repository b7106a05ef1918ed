"""Score inferred postconditions against ground truth by bounded implication."""
from specrefine.assertions import Signature, parse_assertion
from specrefine.groundtruth import EnumerationBounds, implies, score, verdict_confusion

sig = Signature("Demo", "m", (("x", "int"), ("y", "int")), (), "int")
A = lambda text: parse_assertion(text, sig)  # noqa: E731

# Implication is decided by enumerating every state within the bounds.
print(implies([A("x >= 0")], A("x >= -1")))        # True
print(implies([A("x >= -1")], A("x >= 0")))        # False
print(implies([], A("x + 1 > x")))                 # False, x = INT_MAX wraps
print(implies([], A("x + 1 > x"), EnumerationBounds(sentinels=())))  # True without sentinels

truth = [A("x >= 0"), A("y == 0")]
inferred = [A("x >= -1"), A("x >= 1"), A("y == 0")]
m = score(inferred, truth, EnumerationBounds(-4, 4))
print(f"precision {m.precision:.3f} recall {m.recall:.3f} f1 {m.f1:.3f}")
print("invalid:", [a.text for a in inferred if a.id in m.invalid])

# Verdicts from a judge can be checked against those labels.
c = verdict_confusion({a.id: v for a, v in zip(inferred, ("OK", "FAILED", "OK"))}, m.invalid)
print(c.to_json())
