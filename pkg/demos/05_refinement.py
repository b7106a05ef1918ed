"""Ask a backend whether a survivor can fail, and turn the answer into a test."""
from importlib import resources
import tempfile
from pathlib import Path

from specrefine.assertions import Signature, parse_assertion
from specrefine.refine import (
    OracleBackend, OracleBounds, ReplayBackend, Transcript, build_prompt, parse_response,
    refine_assertion,
)
from specrefine.subject import parse_subject

data = resources.files("specrefine") / "data"
queue = parse_subject((data / "subjects" / "QueueAr.sj").read_text())
a = parse_assertion("currentSize != front || front < 1", Signature.of(queue, "getFront"))

# The prompt a chat model would receive.
bundle = build_prompt(queue, "getFront", a)
print(bundle.user_text.splitlines()[0], "...", bundle.user_text.splitlines()[-1])

# The oracle backend answers by bounded search over call sequences, in the same
# [[VERDICT]] format a model is asked to use.
v = OracleBackend(OracleBounds(max_calls=4)).verdict_for(queue, "getFront", a)
print(v.verdict)
print(v.test_source)

# Answers are parsed leniently but must carry a verdict.
print(parse_response("Looks wrong to me.\n[[VERDICT]]: **OK**").verdict)

# Recording a transcript makes a run replayable without the backend.
path = Path(tempfile.mkdtemp()) / "transcript.jsonl"
first = refine_assertion(queue, "getFront", a, OracleBackend(transcript=Transcript(path)))
again = refine_assertion(queue, "getFront", a, ReplayBackend.from_path(path))
print(first.status, first.test_name, "| replayed:", again.status, again.test_name)
