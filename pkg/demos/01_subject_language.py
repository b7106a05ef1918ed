"""Load a subject, run a test script against it and look at the recorded traces."""
from importlib import resources

from specrefine.subject import execute_test, parse_subject, parse_test, render_method

data = resources.files("specrefine") / "data"
queue = parse_subject((data / "subjects" / "QueueAr.sj").read_text())
print(render_method(queue.method("getFront")))

# A test constructs one instance and calls methods on it. Every return from the
# monitored method leaves one trace record with the state on entry and exit.
test = parse_test("new QueueAr(2); enqueue(1); dequeue(); enqueue(2); getFront();", queue, "wrap")
ex = execute_test(queue, test, "getFront")
for t in ex.traces:
    print("pre ", t.pre_state)
    print("post", t.post_state, "result", t.result)

# Integers are 32-bit and wrap, which is what makes abs() interesting.
simple = parse_subject((data / "subjects" / "SimpleMethods.sj").read_text())
ex = execute_test(simple, parse_test("new SimpleMethods(); abs(-2147483648);", simple), "abs")
print("abs(INT_MIN) =", ex.traces[0].result)

# Faults end the test but keep what was recorded before them.
bad = parse_subject("unit A { int[] xs; A() { xs = new int[1]; } int at(int i) { return xs[i]; } }")
ex = execute_test(bad, parse_test("new A(); at(0); at(5);", bad), "at")
print(ex.outcome, ex.message, "-", len(ex.traces), "trace(s) kept")
