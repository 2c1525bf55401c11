"""Mock framework adapters exercising the subprocess protocol.

Run as:  python -m tabbench.mock_adapter <behavior> <verb> <args...>

Behaviors:
  accurate  1-nearest-neighbour on the training fold; near-perfect on the
            deterministic toy tasks and supports the predict verb.
  slow      sleeps forever during fit_predict (gets killed at the budget).
  crashy    raises a generic pipeline exception.
  oom       fails with a memory-style error message.
  dataerr   fails with a data-characteristic error message.

Environment knobs (all optional):
  TABBENCH_MOCK_TRAIN_S       extra sleep during fit to shape timing plots
  TABBENCH_MOCK_ROW_DELAY_S   per-row predict delay for tiny inputs (<= 100 rows)
  TABBENCH_MOCK_FILE_DELAY_S  per-call predict delay for file-sized inputs
  TABBENCH_MOCK_OUTLIER_REP   repetition index whose delay is multiplied by 10
"""

from __future__ import annotations

import csv
import json
import math
import os
import shutil
import sys
import time
from pathlib import Path

UNSUPPORTED_VERB_EXIT = 64


def _read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def _env_float(name: str, default: float = 0.0) -> float:
    return float(os.environ.get(name, default))


class NearestNeighbour:
    """Tiny 1-NN over mixed numeric/categorical features."""

    def __init__(self, header, rows, schema, target):
        self.target = target
        self.kinds = {c["name"]: c["kind"] for c in schema["columns"]}
        self.feature_names = [h for h in header if h != target]
        t_idx = header.index(target)
        f_idx = [i for i, h in enumerate(header) if h != target]
        self.points = [[r[i] for i in f_idx] for r in rows]
        self.labels = [r[t_idx] for r in rows]

    def _distance(self, a, b) -> float:
        d = 0.0
        for name, x, y in zip(self.feature_names, a, b):
            if self.kinds.get(name) == "numeric":
                fx = float(x) if x != "" else 0.0
                fy = float(y) if y != "" else 0.0
                d += (fx - fy) ** 2
            else:
                d += 0.0 if x == y else 1.0
        return d

    def predict_row(self, row) -> str:
        best = min(
            range(len(self.points)),
            key=lambda i: (self._distance(self.points[i], row), i),
        )
        return self.labels[best]


def _class_probs(class_list, predicted):
    if len(class_list) == 1:
        return [1.0]
    hi = 0.9
    lo = (1.0 - hi) / (len(class_list) - 1)
    return [hi if c == predicted else lo for c in class_list]


def _reorder_input(header, rows, feature_names):
    idx = [header.index(f) for f in feature_names]
    return [[r[i] for i in idx] for r in rows]


def cmd_fit_predict(behavior: str, manifest_path: str) -> int:
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    if behavior == "slow":
        time.sleep(_env_float("TABBENCH_MOCK_SLEEP_S", 86400.0))
        return 0
    if behavior == "crashy":
        raise RuntimeError("synthetic pipeline optimization failure")
    if behavior == "oom":
        print("MemoryError: unable to allocate 512. GiB for model search", file=sys.stderr)
        return 1
    if behavior == "dataerr":
        print("ValueError: y contains 1 class after internal split", file=sys.stderr)
        return 1

    t0 = time.monotonic()
    extra = _env_float("TABBENCH_MOCK_TRAIN_S")
    if extra:
        time.sleep(extra)
    out_dir = Path(manifest["output_dir"])
    schema = json.loads(Path(manifest["schema_path"]).read_text(encoding="utf-8"))
    train_header, train_rows = _read_csv(manifest["train_path"])
    test_header, test_rows = _read_csv(manifest["test_path"])

    model_dir = out_dir / "model"
    model_dir.mkdir(parents=True, exist_ok=True)
    shutil.copy(manifest["train_path"], model_dir / "train.csv")
    shutil.copy(manifest["schema_path"], model_dir / "schema.json")
    (model_dir / "meta.json").write_text(
        json.dumps({"problem_type": manifest["problem_type"], "target": schema["target"]}),
        encoding="utf-8",
    )
    train_s = time.monotonic() - t0

    t1 = time.monotonic()
    nn, meta = _load_model(model_dir)
    predictions = _predict_rows(nn, test_header, test_rows)
    _write_predictions(out_dir / "predictions.csv", nn, meta, predictions)
    predict_s = time.monotonic() - t1
    (out_dir / "result.json").write_text(
        json.dumps(
            {"training_duration_s": train_s, "predict_duration_s": predict_s}
        ),
        encoding="utf-8",
    )
    return 0


def _load_model(model_dir):
    model_dir = Path(model_dir)
    schema = json.loads((model_dir / "schema.json").read_text(encoding="utf-8"))
    meta = json.loads((model_dir / "meta.json").read_text(encoding="utf-8"))
    header, rows = _read_csv(model_dir / "train.csv")
    return NearestNeighbour(header, rows, schema, meta["target"]), meta


def _predict_rows(nn: NearestNeighbour, input_header, input_rows):
    rows = _reorder_input(input_header, input_rows, nn.feature_names)
    return [nn.predict_row(r) for r in rows]


def _write_predictions(path, nn, meta, predicted_labels):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if meta["problem_type"] == "regression":
            writer.writerow(["prediction"])
            for label in predicted_labels:
                writer.writerow([label])
        else:
            class_list = sorted(set(nn.labels))
            writer.writerow(["prediction"] + [f"p_{c}" for c in class_list])
            for label in predicted_labels:
                writer.writerow([label] + [repr(p) for p in _class_probs(class_list, label)])


def cmd_predict(behavior: str, argv: list[str]) -> int:
    if behavior != "accurate":
        print(f"{behavior}: predict verb not supported", file=sys.stderr)
        return UNSUPPORTED_VERB_EXIT
    model_dir, input_csv, output_csv = argv[:3]
    repeat = 1
    timings_path = None
    rest = argv[3:]
    while rest:
        flag = rest.pop(0)
        if flag == "--repeat":
            repeat = int(rest.pop(0))
        elif flag == "--timings":
            timings_path = rest.pop(0)
        else:
            print(f"unknown predict flag {flag!r}", file=sys.stderr)
            return 2

    row_delay = _env_float("TABBENCH_MOCK_ROW_DELAY_S")
    file_delay = _env_float("TABBENCH_MOCK_FILE_DELAY_S")
    outlier_rep = int(os.environ.get("TABBENCH_MOCK_OUTLIER_REP", -1))

    nn, meta = _load_model(model_dir)
    in_memory_header, in_memory_rows = _read_csv(input_csv)
    small = len(in_memory_rows) <= 100
    total_start = time.monotonic()
    timings = []
    predictions = None
    for rep in range(repeat):
        factor = 10.0 if rep == outlier_rep else 1.0
        if small:
            # single-row style: data already in memory, time only inference
            start = time.perf_counter()
            if row_delay:
                time.sleep(row_delay * len(in_memory_rows) * factor)
            predictions = _predict_rows(nn, in_memory_header, in_memory_rows)
            timings.append(time.perf_counter() - start)
        else:
            # file style: loading from disk is part of the measurement
            start = time.perf_counter()
            header, rows = _read_csv(input_csv)
            if file_delay:
                time.sleep(file_delay * factor)
            predictions = _predict_rows(nn, header, rows)
            timings.append(time.perf_counter() - start)
    total = time.monotonic() - total_start

    _write_predictions(output_csv, nn, meta, predictions)
    if timings_path:
        Path(timings_path).write_text(
            json.dumps(
                {"timings_s": timings, "self_reported_total_s": total}
            ),
            encoding="utf-8",
        )
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) < 2:
        print(__doc__, file=sys.stderr)
        return 2
    behavior, verb = argv[0], argv[1]
    if behavior not in ("accurate", "slow", "crashy", "oom", "dataerr"):
        print(f"unknown behavior {behavior!r}", file=sys.stderr)
        return 2
    if verb == "fit_predict":
        return cmd_fit_predict(behavior, argv[2])
    if verb == "predict":
        return cmd_predict(behavior, argv[2:])
    print(f"unsupported verb {verb!r}", file=sys.stderr)
    return UNSUPPORTED_VERB_EXIT


if __name__ == "__main__":
    sys.exit(main())
