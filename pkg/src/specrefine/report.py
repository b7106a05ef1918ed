"""Report files: the JSON run document and the before/after metrics table."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .assertions import dump_assertions
from .subject.render import render_test

TABLE_COLUMNS = ("Subject", "#GT", "#Tests_before", "#Tests_after", "Precision_before",
                 "Precision_after", "Recall_before", "Recall_after", "F1_before", "F1_after")


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def _pct(x) -> str:
    return "NA" if x is None else f"{100 * x:.2f}"


def table_row(data: dict) -> dict:
    before, after = data.get("before") or {}, data.get("after") or {}
    mb, ma = before.get("metrics") or {}, after.get("metrics") or {}
    return {
        "Subject": f"{data.get('subject', '?')}_{data.get('method', '?')}",
        "#GT": mb.get("ground_truth", "NA") if mb else "NA",
        "#Tests_before": before.get("tests", "NA"), "#Tests_after": after.get("tests", "NA"),
        "Precision_before": _pct(mb.get("precision")), "Precision_after": _pct(ma.get("precision")),
        "Recall_before": _pct(mb.get("recall")), "Recall_after": _pct(ma.get("recall")),
        "F1_before": _pct(mb.get("f1")), "F1_after": _pct(ma.get("f1")),
    }


def table_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    w.writeheader()
    for data in reports:
        w.writerow(table_row(data))
    return buf.getvalue()


def table_text(reports) -> str:
    rows = [TABLE_COLUMNS] + [tuple(str(table_row(d)[c]) for c in TABLE_COLUMNS) for d in reports]
    widths = [max(len(r[i]) for r in rows) for i in range(len(TABLE_COLUMNS))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    for d in reports:
        if d.get("status") != "complete":
            lines.append(f"(partial run: stage {d.get('failed_stage')} failed: {d.get('error')})")
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_report(report, out_dir, formats=("json", "csv", "txt")) -> list[Path]:
    """Write report.json, table.csv and table.txt (as selected) into `out_dir`."""
    data = report.data if hasattr(report, "data") else report
    out = Path(out_dir)
    paths = []
    if "json" in formats:
        paths.append(_write(out / "report.json", dumps(data)))
    if "csv" in formats:
        paths.append(_write(out / "table.csv", table_csv([data])))
    if "txt" in formats:
        paths.append(_write(out / "table.txt", table_text([data])))
    return paths


def write_artifacts(report, out_dir) -> list[Path]:
    """Survivor sets, representatives, added tests and kill matrices of a complete run."""
    st = report.state
    out = Path(out_dir)
    paths = []
    for side in ("before", "after"):
        snap = st.get(side)
        if snap is None:
            continue
        paths.append(_write(out / f"survivors_{side}.assert",
                            dump_assertions(snap.survivors, f"survivors, {side} refinement")))
        paths.append(_write(out / f"representatives_{side}.assert",
                            dump_assertions(snap.representatives, f"representatives, {side} refinement")))
        paths.append(_write(out / f"kill_matrix_{side}.csv", snap.matrix.to_csv()))
    tests = st.get("new_tests") or []
    if tests:
        paths.append(_write(out / "counterexamples.sjt", "\n".join(render_test(t) for t in tests)))
    return paths
