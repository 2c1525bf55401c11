"""Runs the job matrix with bounded parallelism and classifies failures.

Failure taxonomy (precedence time > memory > data > implementation):
  time            wall time strictly exceeded budget + leniency
  memory          killed by an out-of-memory signal or memory-style stderr
  data            stderr matches a configured data-characteristic pattern
  implementation  everything else

Pattern tables are configuration with the documented defaults below; the
category boundaries are honest-but-crude by construction, so keeping them
user-editable beats hardcoding.
"""

from __future__ import annotations

import datetime
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .adapters import (
    constant_predictor,
    invoke_adapter,
    measure_inference,
    parse_prediction_file,
    read_adapter_timings,
    write_manifest,
    write_prediction_file,
)
from .data import (
    Dataset,
    compute_metafeatures,
    generate_splits,
    load_dataset,
    materialize_fold,
)
from .errors import (
    FormatError,
    ProbabilityError,
    SingleClass,
    SpawnError,
    TabbenchError,
    UnknownClass,
)
from .metrics import auc_binary, log_loss, rmse
from .specs import ConstraintSpec, FrameworkSpec, TaskSpec, ValidatedPlan
from .store import JobRecord, ResultsStore, StoreWriter, load_partial

DEFAULT_MEMORY_PATTERNS = (
    r"MemoryError",
    r"std::bad_alloc",
    r"OutOfMemory",
    r"out of memory",
    r"oom-kill",
    r"Cannot allocate memory",
    r"unable to allocate",
    r"Segmentation fault",
)

DEFAULT_DATA_PATTERNS = (
    r"contains 1 class",
    r"only one class",
    r"single class",
    r"least populated class",
)

LOG_EXCERPT_CHARS = 400

INFERENCE_FILE_ROWS = 10_000


@dataclass
class RunConfig:
    work_dir: Path
    store_path: Path
    parallelism: int = 1
    seed: int = 0
    stratify: bool = True
    measure_inference: bool = False
    isolation_wrapper: list | None = None
    memory_patterns: tuple = DEFAULT_MEMORY_PATTERNS
    data_patterns: tuple = DEFAULT_DATA_PATTERNS
    env_overrides: dict = field(default_factory=dict)


def classify_failure(
    exit_code,
    wall_time_s: float,
    budget_s: float,
    leniency_s: float,
    stderr: str,
    memory_patterns=DEFAULT_MEMORY_PATTERNS,
    data_patterns=DEFAULT_DATA_PATTERNS,
) -> str:
    """Map a failed job to its error category."""
    if wall_time_s > budget_s + leniency_s:
        return "time"
    if exit_code == -9:  # killed by the kernel, not by our timeout path
        return "memory"
    for pattern in memory_patterns:
        if re.search(pattern, stderr, re.IGNORECASE):
            return "memory"
    for pattern in data_patterns:
        if re.search(pattern, stderr, re.IGNORECASE):
            return "data"
    return "implementation"


def score_prediction_set(pred_set, metric: str) -> float:
    """Turn validated predictions into a metric value.

    Binary AUC uses the lexicographically last class label as the
    positive class; AUC is symmetric under swapping, so the choice only
    fixes the orientation consistently across frameworks.
    """
    if metric == "rmse":
        return rmse(pred_set.predictions, pred_set.truth)
    if metric == "logloss":
        return log_loss(pred_set.probabilities, pred_set.truth, pred_set.class_list)
    if metric == "auc":
        positive = pred_set.class_list[-1]
        pos_col = pred_set.class_list.index(positive)
        scores = [row[pos_col] for row in pred_set.probabilities]
        truth01 = [1 if t == positive else 0 for t in pred_set.truth]
        return auc_binary(scores, truth01)
    raise ValueError(f"unknown metric {metric!r}")


@dataclass
class _TaskData:
    task: TaskSpec
    dataset: Dataset
    fold_dirs: list[Path]
    truths: list[list]  # test truth per fold
    train_truths: list[list]


def _prepare_task(task: TaskSpec, work_dir: Path, stratify: bool) -> _TaskData:
    schema = None
    if task.problem_type in ("binary", "multiclass"):
        schema = {task.target_column: "categorical"}
    ds = load_dataset(task.dataset_ref, task.target_column, schema)
    splits = generate_splits(ds, task.n_folds, task.split_seed, stratify=stratify)
    fold_dirs = []
    truths = []
    train_truths = []
    targets = ds.target_values()
    for split in splits:
        fold_dir = work_dir / "data" / task.id / str(split.fold_index)
        materialize_fold(ds, split, fold_dir)
        fold_dirs.append(fold_dir)
        truths.append([targets[i] for i in split.test_rows])
        train_truths.append([targets[i] for i in split.train_rows])
    return _TaskData(task, ds, fold_dirs, truths, train_truths)


def _inference_samples(fold_dir: Path) -> dict:
    """Build the two measurement inputs from the fold's test file."""
    import csv

    with open(fold_dir / "test.csv", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    single = fold_dir / "infer_single.csv"
    big = fold_dir / "infer_file10k.csv"
    if not single.exists():
        with open(single, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerow(rows[0])
    if not big.exists():
        with open(big, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(INFERENCE_FILE_ROWS):
                writer.writerow(rows[i % len(rows)])
    return {
        "single_row_memory": (single, 1),
        "file_10k": (big, INFERENCE_FILE_ROWS),
    }


def _measurement_dict(measurements: dict) -> dict | None:
    out = {}
    for scenario, m in measurements.items():
        if m is None:
            continue
        out[scenario] = {
            "repetitions": m.repetitions,
            "median_s": m.median_s,
            "rows": m.rows,
            "rows_per_second": m.rows_per_second,
            "harness_wall_s": m.harness_wall_s,
            "self_reported_total_s": m.self_reported_total_s,
        }
    return out or None


def _run_builtin_job(
    fw: FrameworkSpec, td: _TaskData, fold: int, out_dir: Path
) -> tuple:
    """In-process constant predictor through the shared file path."""
    start = time.monotonic()
    pred = constant_predictor(
        td.train_truths[fold],
        td.task.problem_type,
        len(td.truths[fold]),
        truth=td.truths[fold],
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    write_prediction_file(out_dir / "predictions.csv", pred)
    wall = time.monotonic() - start
    return wall, wall


def _execute_one(
    job: tuple[str, int, str],
    task_data: dict,
    frameworks: dict,
    constraint: ConstraintSpec,
    config: RunConfig,
) -> JobRecord:
    task_id, fold, fw_id = job
    td = task_data[task_id]
    fw = frameworks[fw_id]
    task = td.task
    out_dir = config.work_dir / "jobs" / task_id / str(fold) / fw_id
    budget = constraint.max_runtime_s
    leniency = constraint.leniency_s

    wall = 0.0
    timings = None
    stderr = ""
    exit_code: int | None = 0
    try:
        if fw.is_builtin:
            wall, train_s = _run_builtin_job(fw, td, fold, out_dir)
            timings = (train_s, 0.0)
        else:
            manifest = write_manifest(
                task, fw, constraint, td.fold_dirs[fold], out_dir, config.seed
            )
            result = invoke_adapter(
                fw, manifest, budget, leniency, config.isolation_wrapper
            )
            wall = result.wall_time_s
            stderr = result.stderr
            exit_code = result.exit_code
            if result.killed_on_timeout or result.exit_code != 0:
                raise _JobFailed(stderr)
            adapter_timings = read_adapter_timings(out_dir)
            if adapter_timings is not None:
                timings = (
                    adapter_timings.training_duration_s,
                    adapter_timings.predict_duration_s,
                )
        pred_set = parse_prediction_file(
            out_dir / "predictions.csv", td.truths[fold], task.problem_type
        )
        score = score_prediction_set(pred_set, task.metric)
        inference = None
        if config.measure_inference and not fw.is_builtin:
            samples = _inference_samples(td.fold_dirs[fold])
            measurements = measure_inference(
                fw,
                out_dir / "model",
                samples,
                isolation_wrapper=config.isolation_wrapper,
                work_dir=out_dir,
            )
            inference = _measurement_dict(measurements)
        return JobRecord(
            framework_id=fw_id,
            task_id=task_id,
            fold=fold,
            constraint_id=constraint.id,
            status="ok",
            wall_time_s=wall,
            training_duration_s=timings[0] if timings else None,
            predict_duration_s=timings[1] if timings else None,
            score=score,
            metric=task.metric,
            inference=inference,
        )
    except (SingleClass, UnknownClass) as exc:
        status = "data"
        excerpt = f"{type(exc).__name__}: {exc}"
    except _JobFailed:
        status = classify_failure(
            exit_code, wall, budget, leniency, stderr,
            config.memory_patterns, config.data_patterns,
        )
        excerpt = stderr[-LOG_EXCERPT_CHARS:]
    except (FormatError, ProbabilityError, SpawnError, TabbenchError) as exc:
        message = f"{type(exc).__name__}: {exc}\n{stderr}"
        status = classify_failure(
            exit_code, wall, budget, leniency, message,
            config.memory_patterns, config.data_patterns,
        )
        excerpt = message[-LOG_EXCERPT_CHARS:]
    return JobRecord(
        framework_id=fw_id,
        task_id=task_id,
        fold=fold,
        constraint_id=constraint.id,
        status=status,
        wall_time_s=wall,
        training_duration_s=timings[0] if timings else None,
        predict_duration_s=timings[1] if timings else None,
        score=None,
        metric=task.metric,
        log_excerpt=excerpt,
    )


class _JobFailed(Exception):
    pass


def _run_metadata(
    plan: ValidatedPlan,
    tasks: list[TaskSpec],
    frameworks: list[FrameworkSpec],
    constraint: ConstraintSpec,
    task_data: dict,
    config: RunConfig,
) -> dict:
    return {
        "suite_id": plan.suite_id,
        "constraint": {
            "id": constraint.id,
            "max_runtime_s": constraint.max_runtime_s,
            "cores": constraint.cores,
            "memory_mb": constraint.memory_mb,
            "disk_gb": constraint.disk_gb,
            "leniency_s": constraint.leniency_s,
        },
        "seed": config.seed,
        "stratified": config.stratify,
        "tool_version": __version__,
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "frameworks": [
            {"id": f.id, "mode": f.mode, "version_label": f.version_label}
            for f in frameworks
        ],
        "tasks": [
            {
                "id": t.id,
                "problem_type": t.problem_type,
                "metric": t.metric,
                "n_folds": t.n_folds,
                "metafeatures": compute_metafeatures(task_data[t.id].dataset).as_dict(),
            }
            for t in tasks
        ],
    }


def execute(
    plan: ValidatedPlan,
    tasks: list[TaskSpec],
    frameworks: list[FrameworkSpec],
    constraint: ConstraintSpec,
    config: RunConfig,
) -> ResultsStore:
    """Run every planned job once; failures become records, never raises.

    Rerunning against an existing store file skips completed keys, so an
    interrupted run resumes where it stopped.
    """
    config.work_dir = Path(config.work_dir)
    config.store_path = Path(config.store_path)
    if config.parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    task_by_id = {t.id: t for t in tasks}
    fw_by_id = {f.id: f for f in frameworks}
    task_data = {
        tid: _prepare_task(task_by_id[tid], config.work_dir, config.stratify)
        for tid in sorted({j[0] for j in plan.jobs})
    }

    existing = None
    if config.store_path.exists():
        existing = load_partial(config.store_path)
    metadata = (
        existing.metadata
        if existing is not None
        else _run_metadata(plan, tasks, frameworks, constraint, task_data, config)
    )
    writer = StoreWriter(config.store_path, metadata, existing)
    done = set(existing.records) if existing is not None else set()
    pending = [
        (t, f, w)
        for (t, f, w) in plan.jobs
        if (w, t, f, constraint.id) not in done
    ]

    lock = threading.Lock()

    def run_job(job):
        record = _execute_one(job, task_data, fw_by_id, constraint, config)
        with lock:
            writer.append(record)
        return record

    if config.parallelism == 1:
        for job in pending:
            run_job(job)
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            list(pool.map(run_job, pending))
    return writer.finalize()
