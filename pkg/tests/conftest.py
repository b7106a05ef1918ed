from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from specrefine.assertions import Signature
from specrefine.subject import parse_subject, parse_test_file

DATA = Path(str(resources.files("specrefine") / "data"))
SUBJECTS = DATA / "subjects"
SUITES = DATA / "suites"
ROOT = Path(__file__).resolve().parents[1]

WRAP_ASSERTION = "((currentSize != front) || (front < 1))"


def load_program(name: str):
    return parse_subject((SUBJECTS / f"{name}.sj").read_text("utf-8"))


def load_suite(program, name: str):
    return parse_test_file((SUITES / f"{name}.sjt").read_text("utf-8"), program)


@pytest.fixture(scope="session")
def queue():
    return load_program("QueueAr")


@pytest.fixture(scope="session")
def simple():
    return load_program("SimpleMethods")


@pytest.fixture(scope="session")
def stack():
    return load_program("StackAr")


@pytest.fixture(scope="session")
def queue_sig(queue):
    return Signature.of(queue, "getFront")


@pytest.fixture(scope="session")
def abs_sig(simple):
    return Signature.of(simple, "abs")


@pytest.fixture(scope="session")
def queue_weak(queue):
    return load_suite(queue, "QueueAr_weak")


@pytest.fixture(scope="session")
def simple_weak(simple):
    return load_suite(simple, "SimpleMethods_weak")


# -- acceptance summary: one PASS/FAIL line per criterion ----------------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "tests": []})
    if rep.when == "call":
        entry["tests"].append(item.name)
    if rep.failed or rep.skipped:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        verdict = "PASS" if e["ok"] and e["tests"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {e['title']}  ({len(e['tests'])} tests)")
