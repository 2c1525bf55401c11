"""Shared fixtures: toy datasets, suite files, and mock framework specs."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tabbench.ranks import ScoreMatrix
from tabbench.specs import ConstraintSpec, FrameworkSpec


def make_matrix(frameworks, tasks, metrics, n_folds, values, prior):
    values = np.asarray(values, dtype=float)
    return ScoreMatrix(
        frameworks=tuple(frameworks),
        tasks=tuple(tasks),
        metrics=tuple(metrics),
        n_folds=tuple(n_folds),
        values=values,
        imputed=np.zeros_like(values, dtype=bool),
        prior_values=np.asarray(prior, dtype=float),
    )


def write_csv(path: Path, header, rows) -> Path:
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def toy_binary_csv(path: Path, n: int = 30) -> Path:
    """Deterministic binary task: label is 'pos' iff x1 > x2."""
    rows = []
    for i in range(n):
        x1 = (i * 37) % 19
        x2 = (i * 53) % 17
        rows.append([x1, x2, "pos" if x1 > x2 else "neg"])
    return write_csv(path, ["x1", "x2", "label"], rows)


def toy_multiclass_csv(path: Path, n: int = 30) -> Path:
    """Three classes in contiguous x1 bands so a 1-NN mock can learn them."""
    rows = []
    for i in range(n):
        x1 = (i * 29) % 23
        x2 = (i * 41) % 13
        label = "c0" if x1 < 8 else ("c1" if x1 < 16 else "c2")
        rows.append([x1, x2, label])
    return write_csv(path, ["x1", "x2", "label"], rows)


def toy_regression_csv(path: Path, n: int = 30) -> Path:
    rows = []
    for i in range(n):
        x1 = (i * 31) % 21
        x2 = (i * 47) % 11
        rows.append([x1, x2, round(2.0 * x1 - 0.5 * x2, 3)])
    return write_csv(path, ["x1", "x2", "y"], rows)


def mock_framework(fw_id: str, behavior: str, env=None) -> FrameworkSpec:
    return FrameworkSpec(
        id=fw_id,
        adapter_cmd=("{python}", "-m", "tabbench.mock_adapter", behavior),
        mode="local",
        env=dict(env or {}),
        version_label="mock",
    )


def builtin_constpred(fw_id: str = "constpred") -> FrameworkSpec:
    return FrameworkSpec(
        id=fw_id,
        adapter_cmd=("builtin:constant-predictor",),
        mode="local",
        version_label="builtin",
    )


@pytest.fixture
def small_constraint():
    return ConstraintSpec(
        id="30s2c", max_runtime_s=30, cores=2, memory_mb=2048, leniency_s=10
    )


@pytest.fixture
def toy_suite_dir(tmp_path):
    """Directory with three toy task CSVs and a suite YAML."""
    data = tmp_path / "tasks"
    data.mkdir()
    toy_binary_csv(data / "bin.csv")
    toy_multiclass_csv(data / "multi.csv")
    toy_regression_csv(data / "reg.csv")
    suite = tmp_path / "suite.yaml"
    suite.write_text(
        f"""\
id: demo-suite
tasks:
  - id: toy-binary
    dataset_ref: {data / 'bin.csv'}
    target_column: label
    problem_type: binary
    n_folds: 10
    split_seed: 7
  - id: toy-multiclass
    dataset_ref: {data / 'multi.csv'}
    target_column: label
    problem_type: multiclass
    n_folds: 10
    split_seed: 7
  - id: toy-regression
    dataset_ref: {data / 'reg.csv'}
    target_column: y
    problem_type: regression
    n_folds: 10
    split_seed: 7
""",
        encoding="utf-8",
    )
    return tmp_path
