"""Command line: `python -m specrefine {infer,refine,evaluate,run,report}`."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .assertions import Signature, dump_assertions, load_assertions
from .errors import CompileError, ConfigError
from .fuzzer import FuzzerConfig, GrammarError, default_grammar_text, generate_candidates, load_grammar
from .groundtruth import EnumerationBounds, score
from .refine.backends import BackendConfig, RetryPolicy, make_backend
from .refine.loop import ACCEPTED, refine_many
from .refine.oracle import SENTINELS, OracleBounds
from .refine.prompt import default_fewshot_dir, load_fewshot
from .report import dumps, emit_report, table_csv, table_text, write_artifacts
from .subject import parse_subject, render_test

log = logging.getLogger("specrefine")


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None


def _bounds(text: str) -> EnumerationBounds:
    try:
        return EnumerationBounds.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _shared() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("subject and suite")
    g.add_argument("--subject", help="subject unit (.sj)")
    g.add_argument("--method", help="monitored method")
    g.add_argument("--suite", action="append", default=[], help="test file (.sjt); repeatable")
    g.add_argument("--max-suite-tests", type=int, default=None, metavar="N",
                   help="keep only the first N suite tests")
    g = p.add_argument_group("generation and reduction")
    g.add_argument("--grammar", help="assertion grammar (.gram); default: the shipped grammar")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-candidates", type=int, default=300)
    g.add_argument("--max-depth", type=int, default=6)
    g.add_argument("--const-pool", type=_ints, default=(0, 1), metavar="C1,C2,...")
    g.add_argument("--keep-zero-kill", action="store_true",
                   help="report assertions that kill no mutant as representatives too")
    g = p.add_argument_group("refinement")
    g.add_argument("--backend", choices=("http", "oracle", "replay"), default="oracle")
    g.add_argument("--model", default="")
    g.add_argument("--temperature", type=float, default=0.1)
    g.add_argument("--endpoint", default="", help="chat-completion URL (http backend)")
    g.add_argument("--api-key-env", default="OPENAI_API_KEY",
                   help="environment variable holding the bearer token")
    g.add_argument("--transcript", help="replay source, or where other backends record exchanges")
    g.add_argument("--max-concurrency", type=int, default=4)
    g.add_argument("--retries", type=int, default=4, help="http attempts per request")
    g.add_argument("--oracle-max-calls", type=int, default=4)
    g.add_argument("--oracle-ints", type=_range, default=(-2, 2), metavar="LO:HI")
    g.add_argument("--no-sentinels", action="store_true",
                   help="do not add -2147483648 and 2147483647 to oracle arguments")
    g.add_argument("--few-shot-dir", help="directory of few-shot examples")
    g.add_argument("--iterations", type=int, default=1)
    g.add_argument("--judge-only", action="store_true",
                   help="drop FAILED assertions on the verdict alone, without running tests")
    g.add_argument("--refine-all-survivors", action="store_true")
    g = p.add_argument_group("scoring and output")
    g.add_argument("--groundtruth", help=".assert file or a <unit>/<method>.assert tree")
    g.add_argument("--bounds", type=_bounds, default=pl.DEFAULT_BOUNDS,
                   metavar="LO:HI[,len=L][,elems=A:B][,sentinels=on|off][,ceiling=N]")
    g.add_argument("--out", help="output directory")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if not getattr(args, n)]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join(missing))


def backend_config(args) -> BackendConfig:
    lo, hi = args.oracle_ints
    return BackendConfig(
        kind=args.backend, endpoint=args.endpoint, api_key_env=args.api_key_env, model=args.model,
        retry=RetryPolicy(attempts=args.retries),
        oracle=OracleBounds(max_calls=args.oracle_max_calls, int_lo=lo, int_hi=hi,
                            sentinels=() if args.no_sentinels else SENTINELS),
        transcript_path=args.transcript, max_concurrency=args.max_concurrency)


def run_config(args) -> pl.RunConfig:
    _need(args, "subject", "method")
    return pl.RunConfig(
        subject=args.subject, method=args.method, suites=list(args.suite), grammar=args.grammar,
        fuzzer=FuzzerConfig(args.seed, args.max_depth, args.max_candidates, args.const_pool),
        backend=backend_config(args), bounds=args.bounds, iterations=args.iterations,
        mode=pl.JUDGE_ONLY if args.judge_only else pl.FULL, out=args.out, seed=args.seed,
        groundtruth=args.groundtruth, few_shot_dir=args.few_shot_dir,
        temperature=args.temperature, keep_zero_kill=args.keep_zero_kill,
        refine_all_survivors=args.refine_all_survivors, max_suite_tests=args.max_suite_tests)


def _out(args) -> Path:
    return Path(args.out or ".")


def _load(args):
    cfg = run_config(args)
    program = parse_subject(Path(cfg.subject).read_text("utf-8"))
    if not program.has_method(cfg.method):
        raise ConfigError(f"unit {program.unit_name} has no method {cfg.method!r}")
    suite = pl.load_suites(program, cfg.suites, cfg.max_suite_tests)
    return cfg, program, suite, Signature.of(program, cfg.method)


def _infer(cfg, program, suite, sig):
    text = Path(cfg.grammar).read_text("utf-8") if cfg.grammar else default_grammar_text()
    candidates = generate_candidates(load_grammar(text, sig, cfg.fuzzer.const_pool), cfg.fuzzer)
    from .mutation import generate_mutants
    mutants = generate_mutants(program, cfg.method)
    return candidates, pl.snapshot(program, cfg.method, suite, candidates, mutants, cfg.keep_zero_kill)


def cmd_infer(args) -> int:
    cfg, program, suite, sig = _load(args)
    candidates, snap = _infer(cfg, program, suite, sig)
    out = _out(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / "survivors.assert").write_text(dump_assertions(snap.survivors), "utf-8")
    (out / "representatives.assert").write_text(dump_assertions(snap.representatives), "utf-8")
    (out / "unranked.assert").write_text(dump_assertions(snap.clustering.unranked), "utf-8")
    (out / "kill_matrix.csv").write_text(snap.matrix.to_csv(), "utf-8")
    inf = snap.inference
    summary = {"subject": program.unit_name, "method": cfg.method, "candidates": len(candidates),
               "tests": len(suite), "trace_count": inf.trace_count, "vacuous": inf.vacuous,
               "survivors": len(inf.survivors), "representatives": len(snap.representatives),
               "unranked": len(snap.clustering.unranked),
               "falsified": {inf.lookup(k).text: {"test": t, "trace": i}
                             for k, (t, i) in inf.falsified.items()},
               "undefined_hits": {inf.lookup(k).text: n for k, n in inf.undefined_hits.items()}}
    (out / "infer.json").write_text(dumps(summary), "utf-8")
    print(f"{len(candidates)} candidates, {len(inf.survivors)} survivors, "
          f"{len(snap.representatives)} representatives -> {out}")
    return 0


def cmd_refine(args) -> int:
    cfg, program, suite, sig = _load(args)
    if args.assertions:
        targets = load_assertions(Path(args.assertions).read_text("utf-8"), sig)
    else:
        _, snap = _infer(cfg, program, suite, sig)
        targets = snap.survivors if cfg.refine_all_survivors else snap.representatives
    backend = make_backend(cfg.backend)
    examples = load_fewshot(cfg.few_shot_dir or default_fewshot_dir())
    outcomes = refine_many(program, cfg.method, targets, backend,
                           max_concurrency=cfg.backend.max_concurrency, examples=examples,
                           temperature=cfg.temperature, model_id=cfg.backend.model_id,
                           validate=cfg.mode == pl.FULL)
    out = _out(args)
    out.mkdir(parents=True, exist_ok=True)
    tests = [o.test for o in outcomes if o.status == ACCEPTED and o.test is not None]
    (out / "counterexamples.sjt").write_text("\n".join(render_test(t) for t in tests), "utf-8")
    (out / "refine.json").write_text(dumps([pl._outcome_json(o) for o in outcomes]), "utf-8")
    for o in outcomes:
        print(f"{o.status:9} {o.verdict or '-':6} {o.assertion.text}")
    return 0


def cmd_evaluate(args) -> int:
    _need(args, "subject", "method", "assertions")
    program = parse_subject(Path(args.subject).read_text("utf-8"))
    sig = Signature.of(program, args.method)
    inferred = load_assertions(Path(args.assertions).read_text("utf-8"), sig)
    cfg = run_config(args)
    gt = pl._groundtruth(cfg, sig)
    if gt is None:
        raise ConfigError(f"no ground truth for {sig.unit}.{sig.method}; pass --groundtruth")
    m = score(inferred, gt, args.bounds)
    text = dumps(m.to_json())
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "metrics.json").write_text(text, "utf-8")
    fmt = lambda x: "NA" if x is None else f"{x:.4f}"  # noqa: E731
    print(f"precision {fmt(m.precision)}  recall {fmt(m.recall)}  f1 {fmt(m.f1)}  "
          f"(|A|={m.inferred_count}, |G|={m.ground_truth_count})")
    return 0


def cmd_run(args) -> int:
    cfg = run_config(args)
    report = pl.run_pipeline(cfg)
    out = _out(args)
    paths = emit_report(report, out)
    if report.complete:
        paths += write_artifacts(report, out)
    sys.stdout.write(table_text([report.data]))
    for p in paths:
        log.info("wrote %s", p)
    return 0 if report.complete else 2


def cmd_report(args) -> int:
    docs = [json.loads(Path(p).read_text("utf-8")) for p in args.input]
    sys.stdout.write(table_text(docs))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "table.csv").write_text(table_csv(docs), "utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specrefine",
                                     description="Postcondition inference and refinement.")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = _shared()
    p = sub.add_parser("infer", parents=[shared], help="generate, filter and reduce candidates")
    p.set_defaults(func=cmd_infer)
    p = sub.add_parser("refine", parents=[shared], help="ask the backend for counterexamples")
    p.add_argument("--assertions", help="assertion file to judge; default: infer first")
    p.set_defaults(func=cmd_refine)
    p = sub.add_parser("evaluate", parents=[shared], help="score an assertion file")
    p.add_argument("--assertions", help="assertion file to score")
    p.set_defaults(func=cmd_evaluate)
    p = sub.add_parser("run", parents=[shared], help="the full pipeline with reports")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("report", help="tabulate report.json files")
    p.add_argument("input", nargs="+", help="report.json files")
    p.add_argument("--out", help="directory for table.csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CompileError, GrammarError, OSError, KeyError) as exc:
        print(f"specrefine: error: {exc}", file=sys.stderr)
        return 1
