from __future__ import annotations

import csv
import io
import json

import jsonschema
import pytest

from specrefine.cli import main
from specrefine.errors import ConfigError
from specrefine.pipeline import JUDGE_ONLY, RunConfig, run_pipeline
from specrefine.refine import BackendConfig, OracleBounds, ReplayBackend, request_key
from specrefine.report import TABLE_COLUMNS, dumps, emit_report, table_csv, table_text, write_artifacts

from conftest import WRAP_ASSERTION, ROOT, SUBJECTS, SUITES

SCHEMA = json.loads((ROOT / "docs" / "report-schema.json").read_text("utf-8"))
QUEUE = str(SUBJECTS / "QueueAr.sj")
QUEUE_WEAK = str(SUITES / "QueueAr_weak.sjt")
SIMPLE = str(SUBJECTS / "SimpleMethods.sj")
SIMPLE_WEAK = str(SUITES / "SimpleMethods_weak.sjt")


def queue_cfg(**kw):
    return RunConfig(QUEUE, "getFront", [QUEUE_WEAK],
                     backend=BackendConfig(oracle=OracleBounds(max_calls=4)), **kw)


@pytest.fixture(scope="module")
def queue_run():
    return run_pipeline(queue_cfg(keep_zero_kill=True))


def test_report_validates(queue_run):
    assert queue_run.complete
    jsonschema.validate(queue_run.data, SCHEMA)
    keys = list(queue_run.data)
    assert set(SCHEMA["required"]) <= set(keys)
    assert keys == [k for k in SCHEMA["properties"] if k in keys] == list(SCHEMA["properties"])


def test_queue_run_refines(queue_run):
    d = queue_run.data
    assert WRAP_ASSERTION in d["before"]["survivors"] and WRAP_ASSERTION not in d["after"]["survivors"]
    assert d["attribution"][WRAP_ASSERTION]["kind"] == "targeted"
    assert d["tests"]["after"] == d["tests"]["before"] + d["tests"]["added"]
    mb, ma = d["before"]["metrics"], d["after"]["metrics"]
    assert ma["precision"] > mb["precision"]
    assert ma["recall"] == mb["recall"]
    assert d["suspected_groundtruth_violations"] == []


def test_partial_report_names_stage(tmp_path):
    bad = tmp_path / "Broken.sj"
    bad.write_text("unit Broken { Broken() { } int f() { return g(); } }")
    rep = run_pipeline(RunConfig(str(bad), "f"))
    assert not rep.complete
    assert rep.data["failed_stage"] == "load" and "g" in rep.data["error"]
    jsonschema.validate(rep.data, SCHEMA)
    missing = run_pipeline(RunConfig(QUEUE, "getFront", [str(tmp_path / "nope.sjt")]))
    assert missing.data["failed_stage"] == "load_suite"
    assert "partial run" in table_text([missing.data])
    with pytest.raises(ConfigError):
        RunConfig(QUEUE, "getFront", iterations=0).validate()


def test_judge_only_executes_nothing():
    rep = run_pipeline(queue_cfg(keep_zero_kill=True, mode=JUDGE_ONLY))
    d = rep.data
    assert rep.complete and d["tests"]["added"] == 0 and d["tests"]["after"] == d["tests"]["before"]
    assert WRAP_ASSERTION not in d["after"]["survivors"]
    assert d["attribution"] == {}
    jsonschema.validate(d, SCHEMA)


def test_all_ok_replay_changes_nothing(queue_run):
    st = queue_run.state
    records = [{"key": request_key(st["program"], "getFront", a), "attempt": 1,
                "response_text": "[[VERDICT]] OK"} for a in st["before"].representatives]
    rep = run_pipeline(queue_cfg(keep_zero_kill=True), backend=ReplayBackend(records))
    d = rep.data
    assert d["before"] == d["after"]
    assert d["tests"]["added"] == 0 and d["attribution"] == {}
    assert d["verdict_confusion"]["precision"] is None


def test_emit_and_table(tmp_path, queue_run):
    paths = emit_report(queue_run, tmp_path) + write_artifacts(queue_run, tmp_path)
    names = {p.name for p in paths}
    assert {"report.json", "table.csv", "table.txt", "survivors_before.assert",
            "counterexamples.sjt", "kill_matrix_after.csv"} <= names
    assert json.loads((tmp_path / "report.json").read_text()) == queue_run.data
    rows = list(csv.reader(io.StringIO(table_csv([queue_run.data]))))
    assert tuple(rows[0]) == TABLE_COLUMNS and rows[1][0] == "QueueAr_getFront"
    assert rows[1][TABLE_COLUMNS.index("Recall_before")] == "83.33"
    assert list(csv.reader(io.StringIO(table_csv([{"status": "partial"}]))))[1][4] == "NA"


def test_dumps_is_stable():
    assert dumps({"b": 1, "a": [1.5, None]}) == '{\n  "b": 1,\n  "a": [\n    1.5,\n    null\n  ]\n}\n'


# -- command line ------------------------------------------------------------

def test_cli_run_and_report(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "--subject", SIMPLE, "--method", "abs", "--suite", SIMPLE_WEAK,
                 "--out", str(out)])
    assert code == 0
    data = json.loads((out / "report.json").read_text())
    assert "(result >= 0)" in data["attribution"]
    assert "abs(-2147483648);" in (out / "counterexamples.sjt").read_text()
    assert main(["report", str(out / "report.json"), "--out", str(tmp_path / "t")]) == 0
    assert (tmp_path / "t" / "table.csv").read_text().startswith("Subject,#GT")
    assert "SimpleMethods_abs" in capsys.readouterr().out


def test_cli_infer_refine_evaluate(tmp_path, capsys):
    base = ["--subject", SIMPLE, "--method", "abs", "--suite", SIMPLE_WEAK]
    assert main(["infer", *base, "--out", str(tmp_path / "i")]) == 0
    surv = (tmp_path / "i" / "survivors.assert").read_text()
    assert "(result >= 0)" in surv
    assert json.loads((tmp_path / "i" / "infer.json").read_text())["subject"] == "SimpleMethods"
    af = tmp_path / "a.assert"
    af.write_text("result >= 0\nx < 0 || result == x\n")
    assert main(["refine", *base, "--assertions", str(af), "--out", str(tmp_path / "r")]) == 0
    outcomes = json.loads((tmp_path / "r" / "refine.json").read_text())
    assert [o["status"] for o in outcomes] == ["accepted", "ok"]
    assert main(["evaluate", *base, "--assertions", str(af), "--out", str(tmp_path / "e")]) == 0
    m = json.loads((tmp_path / "e" / "metrics.json").read_text())
    assert (m["precision"], m["recall"]) == (0.5, 0.5)
    assert "precision 0.5000" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "--subject", str(tmp_path / "none.sj"), "--method", "f",
                 "--out", str(tmp_path)]) == 2
    assert main(["evaluate", "--subject", SIMPLE, "--method", "abs"]) == 1
    assert main(["run", "--subject", SIMPLE, "--method", "abs", "--backend", "replay",
                 "--out", str(tmp_path / "r")]) == 2
    assert json.loads((tmp_path / "r" / "report.json").read_text())["failed_stage"] == "config"
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_aborted_test_traces_are_counted(tmp_path):
    suite = tmp_path / "s.sjt"
    suite.write_text("test ok { new QueueAr(2); getFront(); }\n"
                     "test bad { new QueueAr(2); enqueue(4); getFront(); assert false; getFront(); }\n")
    rep = run_pipeline(RunConfig(QUEUE, "getFront", [str(suite)]))
    assert rep.complete
    assert rep.data["before"]["trace_count"] == 2
    assert rep.data["before"]["aborted_test_traces"] == 1
    jsonschema.validate(rep.data, SCHEMA)
