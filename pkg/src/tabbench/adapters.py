"""The framework integration boundary.

Adapters are external executables speaking a two-verb protocol:

    <adapter_cmd> fit_predict <manifest.json>
    <adapter_cmd> predict <model_dir> <input_csv> <output_csv>
                  [--repeat N --timings <timings.json>]

`fit_predict` reads the manifest, trains within the communicated budget,
and writes into the manifest's output_dir: `predictions.csv` (header
`prediction[,p_<class>...]`), `result.json` with self-reported durations,
and a `model/` directory reusable by the `predict` verb.  An adapter that
does not implement `predict` exits with code 64 for that verb.

For inference measurement the adapter performs the repetitions itself and
reports one in-process duration per repetition; a subprocess-spawn wall
clock would swamp single-row timings with interpreter startup.  The
harness records its own wall time alongside.
"""

from __future__ import annotations

import json
import os
import signal
import statistics
import subprocess
import sys
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import FormatError, IoError, ProbabilityError, SpawnError
from .specs import ConstraintSpec, FrameworkSpec, TaskSpec

PROB_TOL = 1e-6
KILL_GRACE_S = 5.0
UNSUPPORTED_VERB_EXIT = 64

INFERENCE_SCENARIOS = ("single_row_memory", "file_10k")
INFERENCE_REPETITIONS = 10


@dataclass(frozen=True)
class Manifest:
    train_path: str
    test_path: str
    schema_path: str
    problem_type: str
    metric: str
    max_runtime_s: float
    cores: int
    memory_mb: int | None
    output_dir: str
    mode: str
    seed: int


@dataclass(frozen=True)
class AdapterTimings:
    training_duration_s: float
    predict_duration_s: float


@dataclass(frozen=True)
class PredictionSet:
    row_count: int
    predictions: tuple
    probabilities: tuple | None  # rows over class_list, classification only
    class_list: tuple | None
    truth: tuple | None


@dataclass(frozen=True)
class InvocationResult:
    exit_code: int | None
    killed_on_timeout: bool
    wall_time_s: float
    stdout: str
    stderr: str


@dataclass(frozen=True)
class InferenceMeasurement:
    scenario: str
    repetitions: int
    timings_s: tuple
    median_s: float
    rows: int
    harness_wall_s: float
    self_reported_total_s: float | None

    @property
    def rows_per_second(self) -> float:
        from .metrics import inference_rows_per_second

        return inference_rows_per_second(self)


def write_manifest(
    task: TaskSpec,
    fw: FrameworkSpec,
    constraint: ConstraintSpec,
    fold_dir,
    output_dir,
    seed: int,
) -> Path:
    """Write the job manifest JSON; the budget is passed through unmodified."""
    fold_dir = Path(fold_dir)
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {output_dir}: {exc}") from exc
    manifest = Manifest(
        train_path=str(fold_dir / "train.csv"),
        test_path=str(fold_dir / "test.csv"),
        schema_path=str(fold_dir / "schema.json"),
        problem_type=task.problem_type,
        metric=task.metric,
        max_runtime_s=constraint.max_runtime_s,
        cores=constraint.cores,
        memory_mb=constraint.memory_mb,
        output_dir=str(output_dir),
        mode=fw.mode,
        seed=seed,
    )
    path = output_dir / "manifest.json"
    try:
        path.write_text(
            json.dumps(asdict(manifest), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def resolve_cmd(fw: FrameworkSpec, isolation_wrapper: list | None = None) -> list[str]:
    """Expand placeholders; prepend the optional isolation wrapper."""
    argv = [sys.executable if tok == "{python}" else tok for tok in fw.adapter_cmd]
    if isolation_wrapper:
        argv = list(isolation_wrapper) + argv
    return argv


def _run(
    argv: list[str],
    env: dict,
    timeout_s: float | None,
    cwd=None,
) -> InvocationResult:
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            argv,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            env=env,
            cwd=cwd,
            start_new_session=True,
            text=True,
        )
    except (FileNotFoundError, PermissionError, OSError) as exc:
        raise SpawnError(f"cannot spawn {argv[0]!r}: {exc}") from exc
    killed = False
    try:
        stdout, stderr = proc.communicate(timeout=timeout_s)
    except subprocess.TimeoutExpired:
        killed = True
        try:
            os.killpg(proc.pid, signal.SIGTERM)
        except ProcessLookupError:
            pass
        try:
            stdout, stderr = proc.communicate(timeout=KILL_GRACE_S)
        except subprocess.TimeoutExpired:
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except ProcessLookupError:
                pass
            stdout, stderr = proc.communicate()
    wall = time.monotonic() - start
    return InvocationResult(
        exit_code=proc.returncode,
        killed_on_timeout=killed,
        wall_time_s=wall,
        stdout=stdout or "",
        stderr=stderr or "",
    )


def invoke_adapter(
    fw: FrameworkSpec,
    manifest_path,
    budget_s: float,
    leniency_s: float,
    isolation_wrapper: list | None = None,
) -> InvocationResult:
    """Spawn `fit_predict`; forcibly terminate at budget + leniency."""
    argv = resolve_cmd(fw, isolation_wrapper) + ["fit_predict", str(manifest_path)]
    env = dict(os.environ)
    env.update({str(k): str(v) for k, v in fw.env.items()})
    return _run(argv, env, timeout_s=budget_s + leniency_s)


def read_adapter_timings(output_dir) -> AdapterTimings | None:
    path = Path(output_dir) / "result.json"
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        timings = AdapterTimings(
            training_duration_s=float(doc["training_duration_s"]),
            predict_duration_s=float(doc["predict_duration_s"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad result.json in {output_dir}: {exc}") from exc
    if timings.training_duration_s < 0 or timings.predict_duration_s < 0:
        raise FormatError(f"negative durations in {path}")
    return timings


def parse_prediction_file(path, truth, problem_type: str) -> PredictionSet:
    """Read and validate an adapter's prediction CSV against the fold truth."""
    import csv as _csv

    path = Path(path)
    if not path.exists():
        raise FormatError(f"no prediction file at {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = _csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        rows = list(reader)
    if "prediction" not in header:
        raise FormatError(f"{path}: missing 'prediction' column")
    if len(rows) != len(truth):
        raise FormatError(
            f"{path}: {len(rows)} prediction rows but {len(truth)} test rows"
        )
    pred_idx = header.index("prediction")

    if problem_type == "regression":
        try:
            predictions = tuple(float(r[pred_idx]) for r in rows)
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}: unparseable prediction: {exc}") from exc
        return PredictionSet(
            row_count=len(rows),
            predictions=predictions,
            probabilities=None,
            class_list=None,
            truth=tuple(float(t) for t in truth),
        )

    class_list = tuple(h[len("p_"):] for h in header if h.startswith("p_"))
    if not class_list:
        raise FormatError(f"{path}: classification file without p_<class> columns")
    prob_idx = [header.index(f"p_{c}") for c in class_list]
    predictions = []
    prob_rows = []
    for line_no, r in enumerate(rows, start=2):
        try:
            label = r[pred_idx]
            probs = np.array([float(r[i]) for i in prob_idx])
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}:{line_no}: {exc}") from exc
        if label not in class_list:
            raise FormatError(
                f"{path}:{line_no}: predicted label {label!r} not in classes"
            )
        if np.any(probs < -PROB_TOL) or np.any(probs > 1 + PROB_TOL):
            raise ProbabilityError(f"{path}:{line_no}: probability outside [0, 1]")
        total = probs.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise ProbabilityError(
                f"{path}:{line_no}: probabilities sum to {total}, not 1"
            )
        probs = np.clip(probs / total, 0.0, 1.0)
        predictions.append(label)
        prob_rows.append(tuple(float(p) for p in probs))
    return PredictionSet(
        row_count=len(rows),
        predictions=tuple(predictions),
        probabilities=tuple(prob_rows),
        class_list=class_list,
        truth=tuple(truth),
    )


def write_prediction_file(path, pred_set: PredictionSet) -> None:
    """Serialize a PredictionSet; parse(write(ps)) is the identity."""
    import csv as _csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        if pred_set.class_list is not None:
            writer.writerow(
                ["prediction"] + [f"p_{c}" for c in pred_set.class_list]
            )
            for label, probs in zip(pred_set.predictions, pred_set.probabilities):
                writer.writerow([label] + [repr(p) for p in probs])
        else:
            writer.writerow(["prediction"])
            for value in pred_set.predictions:
                writer.writerow([repr(value)])


def constant_predictor(
    train_truth, problem_type: str, test_row_count: int, truth=None
) -> PredictionSet:
    """Baseline predicting the empirical class distribution or target mean.

    Every test row gets the identical prediction: the class-prior vector
    plus the modal label for classification, or the training mean for
    regression.  The prior vector minimizes training log loss among all
    constant probability vectors.
    """
    train_truth = list(train_truth)
    if not train_truth:
        raise ValueError("empty training target")
    if problem_type == "regression":
        mean = float(np.mean([float(v) for v in train_truth]))
        return PredictionSet(
            row_count=test_row_count,
            predictions=(mean,) * test_row_count,
            probabilities=None,
            class_list=None,
            truth=tuple(truth) if truth is not None else None,
        )
    counts: dict[str, int] = {}
    for label in train_truth:
        counts[label] = counts.get(label, 0) + 1
    class_list = tuple(sorted(counts))
    n = len(train_truth)
    prior = tuple(counts[c] / n for c in class_list)
    modal = max(class_list, key=lambda c: (counts[c], c))
    return PredictionSet(
        row_count=test_row_count,
        predictions=(modal,) * test_row_count,
        probabilities=(prior,) * test_row_count,
        class_list=class_list,
        truth=tuple(truth) if truth is not None else None,
    )


def measure_inference(
    fw: FrameworkSpec,
    model_dir,
    sample_files: dict,
    repetitions: int = INFERENCE_REPETITIONS,
    isolation_wrapper: list | None = None,
    work_dir=None,
) -> dict[str, InferenceMeasurement | None]:
    """Run the inference-time protocol for each scenario.

    `sample_files` maps scenario name -> (input_csv, row_count).  The
    adapter performs `repetitions` timed predictions in one process and
    writes the per-repetition durations; the median of those is recorded.
    An adapter lacking the predict verb yields None for every scenario
    (measurement absent, not a failure).
    """
    results: dict[str, InferenceMeasurement | None] = {}
    work_dir = Path(work_dir) if work_dir else Path(model_dir).parent
    env = dict(os.environ)
    env.update({str(k): str(v) for k, v in fw.env.items()})
    for scenario, (input_csv, rows) in sample_files.items():
        out_csv = work_dir / f"infer_{scenario}.csv"
        timings_json = work_dir / f"timings_{scenario}.json"
        argv = resolve_cmd(fw, isolation_wrapper) + [
            "predict",
            str(model_dir),
            str(input_csv),
            str(out_csv),
            "--repeat",
            str(repetitions),
            "--timings",
            str(timings_json),
        ]
        res = _run(argv, env, timeout_s=None)
        if res.exit_code == UNSUPPORTED_VERB_EXIT:
            results[scenario] = None
            continue
        if res.exit_code != 0:
            raise FormatError(
                f"{fw.id}: predict verb failed ({res.exit_code}): {res.stderr[-500:]}"
            )
        try:
            doc = json.loads(timings_json.read_text(encoding="utf-8"))
            timings = tuple(float(t) for t in doc["timings_s"])
            self_total = doc.get("self_reported_total_s")
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise FormatError(f"{fw.id}: bad timings file: {exc}") from exc
        if len(timings) != repetitions:
            raise FormatError(
                f"{fw.id}: expected {repetitions} timings, got {len(timings)}"
            )
        results[scenario] = InferenceMeasurement(
            scenario=scenario,
            repetitions=repetitions,
            timings_s=timings,
            median_s=float(statistics.median(timings)),
            rows=rows,
            harness_wall_s=res.wall_time_s,
            self_reported_total_s=(
                float(self_total) if self_total is not None else None
            ),
        )
    return results
