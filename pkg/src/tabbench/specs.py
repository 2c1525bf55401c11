"""Declarative experiment model: tasks, suites, constraints, frameworks.

Specs are parsed from YAML, validated eagerly, and immutable afterwards.
Parsing is a pure function of the file bytes, and every spec serializes
to a canonical YAML form (sorted keys) that re-parses to an equal spec.
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass, field, asdict
from pathlib import Path

import yaml

from .errors import (
    SuiteSyntaxError,
    UnknownFramework,
    UnknownTask,
    ValidationError,
)
from .metrics import METRICS

PROBLEM_TYPES = ("binary", "multiclass", "regression")

# default evaluation metric per problem type
DEFAULT_METRIC = {"binary": "auc", "multiclass": "logloss", "regression": "rmse"}

DEFAULT_N_FOLDS = 10
DEFAULT_LENIENCY_S = 3600

# adapter_cmd first-token prefix marking an in-process baseline
BUILTIN_PREFIX = "builtin:"
BUILTIN_ADAPTERS = ("constant-predictor",)


@dataclass(frozen=True)
class TaskSpec:
    id: str
    dataset_ref: str
    target_column: str
    problem_type: str
    n_folds: int = DEFAULT_N_FOLDS
    split_seed: int = 0
    metric: str = ""

    def __post_init__(self):
        if self.problem_type not in PROBLEM_TYPES:
            raise ValidationError(
                f"task {self.id!r}: unknown problem_type {self.problem_type!r}"
            )
        if not self.metric:
            object.__setattr__(self, "metric", DEFAULT_METRIC[self.problem_type])
        if self.metric not in METRICS:
            raise ValidationError(
                f"task {self.id!r}: unknown metric {self.metric!r}"
            )
        if self.n_folds < 2:
            raise ValidationError(f"task {self.id!r}: n_folds must be >= 2")
        if not self.target_column:
            raise ValidationError(f"task {self.id!r}: missing target_column")


@dataclass(frozen=True)
class SuiteSpec:
    id: str
    tasks: tuple[str, ...]

    def __post_init__(self):
        if not self.tasks:
            raise ValidationError(f"suite {self.id!r}: no tasks")
        if len(set(self.tasks)) != len(self.tasks):
            raise ValidationError(f"suite {self.id!r}: duplicate task ids")


@dataclass(frozen=True)
class ConstraintSpec:
    id: str
    max_runtime_s: float
    cores: int
    memory_mb: int | None = None
    disk_gb: int | None = None  # advisory only
    leniency_s: float = DEFAULT_LENIENCY_S

    def __post_init__(self):
        for name in ("max_runtime_s", "cores", "memory_mb", "disk_gb"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValidationError(
                    f"constraint {self.id!r}: {name} must be positive, got {value}"
                )
        if self.leniency_s < 0:
            raise ValidationError(f"constraint {self.id!r}: negative leniency_s")


@dataclass(frozen=True)
class FrameworkSpec:
    id: str
    adapter_cmd: tuple[str, ...]
    mode: str = "local"
    env: dict = field(default_factory=dict)
    version_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "adapter_cmd", tuple(self.adapter_cmd))
        if not self.adapter_cmd:
            raise ValidationError(f"framework {self.id!r}: empty adapter_cmd")

    @property
    def is_builtin(self) -> bool:
        return self.adapter_cmd[0].startswith(BUILTIN_PREFIX)

    @property
    def builtin_name(self) -> str:
        return self.adapter_cmd[0][len(BUILTIN_PREFIX):]


@dataclass(frozen=True)
class ValidatedPlan:
    suite_id: str
    constraint_id: str
    jobs: tuple[tuple[str, int, str], ...]  # (task_id, fold, framework_id)

    def canonical(self) -> str:
        lines = [f"{self.suite_id}\t{self.constraint_id}"]
        lines += [f"{t}\t{f}\t{w}" for (t, f, w) in self.jobs]
        return "\n".join(lines) + "\n"


def _load_yaml(path) -> object:
    path = Path(path)
    if not path.exists():
        raise SuiteSyntaxError(f"no such file: {path}")
    try:
        return yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise SuiteSyntaxError(f"{path}: {exc}") from exc


def _require_mapping(doc, what: str) -> dict:
    if not isinstance(doc, dict):
        raise SuiteSyntaxError(f"{what} must be a YAML mapping, got {type(doc).__name__}")
    return doc


def parse_suite(path) -> tuple[SuiteSpec, list[TaskSpec]]:
    """Parse a suite file into a SuiteSpec plus its fully validated tasks."""
    doc = _require_mapping(_load_yaml(path), "suite file")
    if "id" not in doc or "tasks" not in doc:
        raise ValidationError("suite file needs 'id' and 'tasks'")
    tasks = []
    for entry in doc["tasks"]:
        entry = dict(_require_mapping(entry, "task entry"))
        unknown = set(entry) - {
            "id", "dataset_ref", "target_column", "problem_type",
            "n_folds", "split_seed", "metric",
        }
        if unknown:
            raise ValidationError(f"task entry has unknown fields: {sorted(unknown)}")
        for required in ("id", "dataset_ref", "target_column", "problem_type"):
            if required not in entry:
                raise ValidationError(f"task entry missing {required!r}: {entry}")
        tasks.append(TaskSpec(**entry))
    suite = SuiteSpec(id=str(doc["id"]), tasks=tuple(t.id for t in tasks))
    return suite, tasks


def parse_constraints(path) -> list[ConstraintSpec]:
    """Parse a constraints file: one named entry per budget."""
    doc = _require_mapping(_load_yaml(path), "constraints file")
    specs = []
    for cid, body in doc.items():
        body = dict(_require_mapping(body, f"constraint {cid!r}"))
        unknown = set(body) - {
            "max_runtime_s", "cores", "memory_mb", "disk_gb", "leniency_s",
        }
        if unknown:
            raise ValidationError(
                f"constraint {cid!r} has unknown fields: {sorted(unknown)}"
            )
        if "max_runtime_s" not in body or "cores" not in body:
            raise ValidationError(f"constraint {cid!r} needs max_runtime_s and cores")
        specs.append(ConstraintSpec(id=str(cid), **body))
    return specs


def parse_frameworks(path) -> list[FrameworkSpec]:
    """Parse framework registrations; adapter commands must resolve."""
    doc = _require_mapping(_load_yaml(path), "frameworks file")
    specs = []
    for fid, body in doc.items():
        body = dict(_require_mapping(body, f"framework {fid!r}"))
        unknown = set(body) - {"adapter_cmd", "mode", "env", "version_label"}
        if unknown:
            raise ValidationError(
                f"framework {fid!r} has unknown fields: {sorted(unknown)}"
            )
        cmd = body.pop("adapter_cmd", None)
        if isinstance(cmd, str):
            cmd = cmd.split()
        if not cmd:
            raise ValidationError(f"framework {fid!r}: missing adapter_cmd")
        spec = FrameworkSpec(id=str(fid), adapter_cmd=tuple(cmd), **body)
        _check_resolvable(spec)
        specs.append(spec)
    return specs


def _check_resolvable(fw: FrameworkSpec) -> None:
    head = fw.adapter_cmd[0]
    if fw.is_builtin:
        if fw.builtin_name not in BUILTIN_ADAPTERS:
            raise ValidationError(
                f"framework {fw.id!r}: unknown builtin {fw.builtin_name!r}"
            )
        return
    if head == "{python}":  # expanded to sys.executable at invocation
        return
    if shutil.which(head) is None and not Path(head).exists():
        raise ValidationError(
            f"framework {fw.id!r}: adapter command {head!r} not found"
        )


def validate_run_plan(
    suite: SuiteSpec,
    tasks: list[TaskSpec],
    frameworks: list[FrameworkSpec],
    constraint: ConstraintSpec,
) -> ValidatedPlan:
    """Cross product of (task, fold, framework) in deterministic order."""
    if not frameworks:
        raise ValidationError("no frameworks to run")
    by_id = {t.id: t for t in tasks}
    for tid in suite.tasks:
        if tid not in by_id:
            raise UnknownTask(f"suite references unknown task {tid!r}")
    fw_ids = [f.id for f in frameworks]
    if len(set(fw_ids)) != len(fw_ids):
        raise UnknownFramework(f"duplicate framework ids in {fw_ids}")
    jobs = [
        (tid, fold, fw.id)
        for tid in suite.tasks
        for fold in range(by_id[tid].n_folds)
        for fw in frameworks
    ]
    return ValidatedPlan(
        suite_id=suite.id, constraint_id=constraint.id, jobs=tuple(jobs)
    )


def canonical_yaml(spec) -> str:
    """Canonical serialization: sorted keys, defaults materialized."""
    data = asdict(spec)
    data.pop("id", None)
    if isinstance(spec, SuiteSpec):
        data["tasks"] = list(spec.tasks)
    if isinstance(spec, FrameworkSpec):
        data["adapter_cmd"] = list(spec.adapter_cmd)
    return yaml.safe_dump({spec.id: data}, sort_keys=True, default_flow_style=False)
