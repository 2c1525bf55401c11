"""Command-line surface.

    tabbench run <framework_id[,fw2...]> <suite.yaml> <constraint_id> [options]
    tabbench report <results.ndjson> -o <dir> [filters]
    tabbench serve <results.ndjson> [--port N] [--ui-dir DIR]
    tabbench validate <suite.yaml> [--constraints ...] [--frameworks ...]

`run` exits 0 as long as every job produced a record (framework failures
are data, not harness faults); harness faults exit 1, usage errors 2.
Running a second framework against the same store file accumulates
records, and an interrupted run resumes where it stopped.
"""

from __future__ import annotations

import argparse
import shlex
import sys
from pathlib import Path

from .errors import TabbenchError
from .executor import RunConfig, execute
from .report import ReportConfig, bundle_report
from .specs import (
    parse_constraints,
    parse_frameworks,
    parse_suite,
    validate_run_plan,
)
from .store import load


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabbench",
        description="Benchmark external framework adapters on tabular tasks "
        "and analyze the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a framework x suite x constraint plan")
    run.add_argument("framework_id", help="framework id, or comma-separated ids")
    run.add_argument("benchmark", help="path to the suite YAML file")
    run.add_argument("constraint_id", help="constraint name from constraints.yaml")
    run.add_argument("-p", "--parallelism", type=int, default=1)
    run.add_argument(
        "-m", "--runner-mode", choices=("local", "wrapped"), default="local",
        help="'wrapped' prefixes adapter commands with --isolation-wrapper",
    )
    run.add_argument("-o", "--output-dir", default="runs")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--constraints", help="constraints.yaml (default: next to suite)")
    run.add_argument("--frameworks", help="frameworks.yaml (default: next to suite)")
    run.add_argument("--store", help="results file (default: <output-dir>/results.ndjson)")
    run.add_argument("--isolation-wrapper", default="",
                     help="command prefix for wrapped mode, e.g. a container runner")
    run.add_argument("--measure-inference", action="store_true")
    run.add_argument("--no-stratify", action="store_true")
    run.add_argument(
        "--run-config",
        help="YAML with optional keys errors.memory_patterns, "
        "errors.data_patterns (regex lists extending the defaults) and "
        "isolation_wrapper",
    )

    report = sub.add_parser("report", help="render the report bundle from a store")
    report.add_argument("store")
    report.add_argument("-o", "--output-dir", default="report")
    report.add_argument("--frameworks", help="comma-separated subset")
    report.add_argument("--tasks", help="comma-separated subset")
    report.add_argument("--constraint", help="constraint id for multi-constraint stores")
    report.add_argument("--metric", choices=("auc", "logloss", "rmse"),
                        help="restrict to tasks with this metric")
    report.add_argument("--alpha", type=float, default=0.05)
    report.add_argument("--prior-framework", default="constpred")
    report.add_argument("--scale-baseline")
    report.add_argument("--bt-max-depth", type=int, default=3)
    report.add_argument("--bt-seed", type=int, default=0)
    report.add_argument(
        "--overrides",
        help="YAML list of manual record annotations "
        "(framework_id/task_id[/fold] selectors with status/score/note)",
    )

    serve = sub.add_parser("serve", help="serve the analysis API and explorer UI")
    serve.add_argument("store")
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ui-dir", help="directory with the built explorer bundle")

    validate = sub.add_parser("validate", help="check spec files and the run plan")
    validate.add_argument("benchmark", help="path to the suite YAML file")
    validate.add_argument("--constraints")
    validate.add_argument("--frameworks")
    return parser


def _sibling(suite_path: Path, override: str | None, default_name: str) -> Path:
    if override:
        return Path(override)
    return suite_path.parent / default_name


def _load_plan_inputs(args):
    suite_path = Path(args.benchmark)
    suite, tasks = parse_suite(suite_path)
    constraints = parse_constraints(
        _sibling(suite_path, args.constraints, "constraints.yaml")
    )
    frameworks = parse_frameworks(
        _sibling(suite_path, args.frameworks, "frameworks.yaml")
    )
    return suite_path, suite, tasks, constraints, frameworks


def cmd_run(args) -> int:
    suite_path, suite, tasks, constraints, frameworks = _load_plan_inputs(args)
    wanted = args.framework_id.split(",")
    by_id = {f.id: f for f in frameworks}
    missing = [w for w in wanted if w not in by_id]
    if missing:
        print(f"unknown framework id(s): {', '.join(missing)}", file=sys.stderr)
        return 2
    by_cid = {c.id: c for c in constraints}
    if args.constraint_id not in by_cid:
        print(f"unknown constraint id: {args.constraint_id}", file=sys.stderr)
        return 2
    selected = [by_id[w] for w in wanted]
    constraint = by_cid[args.constraint_id]
    plan = validate_run_plan(suite, tasks, selected, constraint)

    out_dir = Path(args.output_dir)
    store_path = Path(args.store) if args.store else out_dir / "results.ndjson"

    from .executor import DEFAULT_DATA_PATTERNS, DEFAULT_MEMORY_PATTERNS

    memory_patterns = DEFAULT_MEMORY_PATTERNS
    data_patterns = DEFAULT_DATA_PATTERNS
    wrapper = shlex.split(args.isolation_wrapper) if args.isolation_wrapper else None
    if args.run_config:
        import yaml

        doc = yaml.safe_load(Path(args.run_config).read_text(encoding="utf-8")) or {}
        errors_cfg = doc.get("errors", {})
        memory_patterns = memory_patterns + tuple(
            errors_cfg.get("memory_patterns", [])
        )
        data_patterns = data_patterns + tuple(errors_cfg.get("data_patterns", []))
        if not wrapper and doc.get("isolation_wrapper"):
            wrapper = shlex.split(str(doc["isolation_wrapper"]))
    if args.runner_mode == "wrapped" and not wrapper:
        print("wrapped mode needs --isolation-wrapper", file=sys.stderr)
        return 2
    config = RunConfig(
        work_dir=out_dir / "work",
        store_path=store_path,
        parallelism=args.parallelism,
        seed=args.seed,
        stratify=not args.no_stratify,
        measure_inference=args.measure_inference,
        isolation_wrapper=wrapper if args.runner_mode == "wrapped" else None,
        memory_patterns=memory_patterns,
        data_patterns=data_patterns,
    )
    store = execute(plan, tasks, selected, constraint, config)
    by_status: dict[str, int] = {}
    for record in store.records.values():
        by_status[record.status] = by_status.get(record.status, 0) + 1
    summary = ", ".join(f"{k}: {v}" for k, v in sorted(by_status.items()))
    print(f"{len(store.records)} records in {store_path} ({summary})")
    return 0


def cmd_report(args) -> int:
    store = load(args.store)
    if args.overrides:
        import yaml

        from .store import apply_overrides

        entries = yaml.safe_load(Path(args.overrides).read_text(encoding="utf-8"))
        store = apply_overrides(store, entries or [])
    config = ReportConfig(
        out_dir=Path(args.output_dir),
        alpha=args.alpha,
        prior_framework=args.prior_framework,
        scale_baseline=args.scale_baseline,
        frameworks=args.frameworks.split(",") if args.frameworks else None,
        tasks=args.tasks.split(",") if args.tasks else None,
        constraint_id=args.constraint,
        metric=args.metric,
        bt_max_depth=args.bt_max_depth,
        bt_seed=args.bt_seed,
    )
    bundle = bundle_report(store, config)
    print(f"{len(bundle.artifacts)} artifacts in {bundle.directory}")
    for notice in bundle.notices:
        print(f"note: {notice}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve_forever

    store = load(args.store)
    ui_dir = Path(args.ui_dir) if args.ui_dir else None
    print(f"serving {args.store} on http://{args.host}:{args.port}/")
    serve_forever(store, args.port, args.host, ui_dir)
    return 0


def cmd_validate(args) -> int:
    suite_path, suite, tasks, constraints, frameworks = _load_plan_inputs(args)
    for constraint in constraints:
        plan = validate_run_plan(suite, tasks, frameworks, constraint)
        print(
            f"{suite.id} x {constraint.id}: {len(plan.jobs)} jobs "
            f"({len(suite.tasks)} tasks x folds x {len(frameworks)} frameworks)"
        )
    return 0


COMMANDS = {
    "run": cmd_run,
    "report": cmd_report,
    "serve": cmd_serve,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except TabbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
