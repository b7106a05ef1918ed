"""The whole workflow on the queue example, ending in a report directory."""
import tempfile
from importlib import resources

from specrefine.pipeline import RunConfig, run_pipeline
from specrefine.report import emit_report, table_text, write_artifacts

data = resources.files("specrefine") / "data"
cfg = RunConfig(str(data / "subjects" / "QueueAr.sj"), "getFront",
                [str(data / "suites" / "QueueAr_weak.sjt")],
                keep_zero_kill=True)  # the spurious survivors here kill no mutant
report = run_pipeline(cfg)
print(table_text([report.data]))

d = report.data
print("tests added:", d["tests"]["added"], "| survivors", d["before"]["survivor_count"], "->",
      d["after"]["survivor_count"])
print("wraparound assertion attribution:",
      d["attribution"]["((currentSize != front) || (front < 1))"])

out = tempfile.mkdtemp()
paths = emit_report(report, out) + write_artifacts(report, out)
print("wrote", ", ".join(p.name for p in paths), "to", out)

# The same run from the command line:
#   python -m specrefine run --subject QueueAr.sj --method getFront \
#       --suite QueueAr_weak.sjt --keep-zero-kill --out results/
