#!/usr/bin/env python3
"""Executing the job matrix against external adapters.

Each job materializes a cross-validation fold to CSV, writes a manifest,
and spawns the adapter's fit_predict verb under the declared budget.
Failures never abort the run; they are classified (time / memory / data /
implementation) and stored like any other result.  The store file is
append-only during the run and resumable: interrupt this script and run
it again, and completed jobs are skipped.

    python demos/02_run_benchmark.py [workdir]
"""

import sys
from pathlib import Path

from tabbench.executor import RunConfig, execute
from tabbench.specs import (
    parse_constraints,
    parse_frameworks,
    parse_suite,
    validate_run_plan,
)

workdir = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/demo")

suite, tasks = parse_suite("demo/suite.yaml")
constraints = {c.id: c for c in parse_constraints("demo/constraints.yaml")}
frameworks = parse_frameworks("demo/frameworks.yaml")

# constpred runs in-process; mock-accurate is a real subprocess adapter.
selected = [f for f in frameworks if f.id in ("constpred", "mock-accurate",
                                              "mock-crashy")]
constraint = constraints["1m2c"]
plan = validate_run_plan(suite, tasks, selected, constraint)
print(f"running {len(plan.jobs)} jobs under {constraint.id} ...")

store = execute(
    plan, tasks, selected, constraint,
    RunConfig(
        work_dir=workdir / "work",
        store_path=workdir / "results.ndjson",
        parallelism=4,
        seed=0,
    ),
)

by_status: dict = {}
for record in store.records.values():
    by_status.setdefault(record.status, []).append(record)
for status, records in sorted(by_status.items()):
    print(f"  {status}: {len(records)} jobs")

ok = by_status.get("ok", [])
for fw in ("constpred", "mock-accurate"):
    scores = [r.score for r in ok
              if r.framework_id == fw and r.task_id == "toy-binary"]
    if scores:
        print(f"  {fw} mean AUC on toy-binary: {sum(scores) / len(scores):.3f}")
print(f"\nstore written to {workdir / 'results.ndjson'}")
