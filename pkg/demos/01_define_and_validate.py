#!/usr/bin/env python3
"""Declaring an experiment: tasks, budgets, frameworks, and the job plan.

Everything a run needs is declared in three YAML files.  Parsing
validates eagerly and fills defaults (10 folds, the metric matching the
problem type, one hour of leniency), and the resulting specs are
immutable.  Run from the repository root:

    python demos/01_define_and_validate.py
"""

from tabbench.specs import (
    canonical_yaml,
    parse_constraints,
    parse_frameworks,
    parse_suite,
    validate_run_plan,
)

suite, tasks = parse_suite("demo/suite.yaml")
constraints = parse_constraints("demo/constraints.yaml")
frameworks = parse_frameworks("demo/frameworks.yaml")

print(f"suite {suite.id!r} with tasks: {', '.join(suite.tasks)}")
for task in tasks:
    print(f"  {task.id}: {task.problem_type}, metric={task.metric}, "
          f"{task.n_folds} folds")

for constraint in constraints:
    print(f"constraint {constraint.id}: {constraint.max_runtime_s:.0f}s budget, "
          f"{constraint.cores} cores, leniency {constraint.leniency_s:.0f}s")

# The job plan is the plain cross product, in a deterministic order.
plan = validate_run_plan(suite, tasks, frameworks, constraints[0])
print(f"\nplan: {len(plan.jobs)} jobs = "
      f"{len(tasks)} tasks x 10 folds x {len(frameworks)} frameworks")
print("first three:", plan.jobs[:3])

# Specs re-serialize canonically (sorted keys), so they diff cleanly.
print("\ncanonical form of the first task:")
print(canonical_yaml(tasks[0]))
