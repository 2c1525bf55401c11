"""Tabular data loading, deterministic CV splits, fold materialization.

Cells are kept as raw strings (None = missing) so materialized CSV files
round-trip bit-exactly.  The only adapter-facing format is RFC 4180 CSV,
UTF-8, header row, empty string for missing values.
"""

from __future__ import annotations

import csv
import io
import json
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoError, SchemaError, TooFewRows

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Dataset:
    columns: tuple[tuple[str, str], ...]  # (name, kind)
    rows: tuple[tuple[str | None, ...], ...]
    target: str

    @property
    def n_instances(self) -> int:
        return len(self.rows)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.columns if n != self.target)

    @property
    def target_index(self) -> int:
        return [n for n, _ in self.columns].index(self.target)

    @property
    def target_kind(self) -> str:
        return dict(self.columns)[self.target]

    def target_values(self) -> list:
        i = self.target_index
        if self.target_kind == NUMERIC:
            return [float(r[i]) for r in self.rows]
        return [r[i] for r in self.rows]


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train_rows: tuple[int, ...]
    test_rows: tuple[int, ...]


@dataclass(frozen=True)
class MetaFeatures:
    n_instances: int
    n_features: int
    missing_ratio: float
    n_classes: int
    minority_class_ratio: float
    categorical_ratio: float

    def as_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "n_features": self.n_features,
            "missing_ratio": self.missing_ratio,
            "n_classes": self.n_classes,
            "minority_class_ratio": self.minority_class_ratio,
            "categorical_ratio": self.categorical_ratio,
        }


@dataclass(frozen=True)
class FoldFiles:
    train_csv: Path
    test_csv: Path
    test_truth: Path
    schema_json: Path


def _read_text(ref: str) -> str:
    if str(ref).startswith(("http://", "https://")):
        try:
            with urllib.request.urlopen(str(ref)) as resp:
                return resp.read().decode("utf-8")
        except (urllib.error.URLError, urllib.error.HTTPError) as exc:
            raise IoError(f"cannot fetch {ref}: {exc}") from exc
    path = Path(ref)
    if not path.exists():
        raise IoError(f"no such file: {path}")
    return path.read_text(encoding="utf-8")


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_dataset(ref, target_column: str, schema: dict | None = None) -> Dataset:
    """Load a CSV resource into a typed Dataset.

    `schema` maps column name -> kind; unlisted columns are inferred as
    numeric iff every non-missing cell parses as a decimal number.
    Classification callers should declare the target categorical so that
    numeric-looking labels stay string tokens.
    """
    text = _read_text(ref)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{ref}: empty file") from None
    if target_column not in header:
        raise SchemaError(f"{ref}: target column {target_column!r} not in header")
    raw_rows = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise SchemaError(
                f"{ref}:{line_no}: expected {len(header)} cells, got {len(row)}"
            )
        raw_rows.append(tuple(cell if cell != "" else None for cell in row))

    schema = dict(schema or {})
    kinds = []
    for col_idx, name in enumerate(header):
        if name in schema:
            kind = schema[name]
            if kind not in (NUMERIC, CATEGORICAL):
                raise SchemaError(f"{ref}: unknown kind {kind!r} for {name!r}")
            if kind == NUMERIC:
                for r in raw_rows:
                    cell = r[col_idx]
                    if cell is not None and not _is_number(cell):
                        raise SchemaError(
                            f"{ref}: column {name!r} declared numeric but "
                            f"cell {cell!r} does not parse"
                        )
        else:
            cells = [r[col_idx] for r in raw_rows if r[col_idx] is not None]
            kind = NUMERIC if cells and all(_is_number(c) for c in cells) else CATEGORICAL
        kinds.append((name, kind))

    target_idx = header.index(target_column)
    for r in raw_rows:
        if r[target_idx] is None:
            raise SchemaError(f"{ref}: missing value in target column")
    return Dataset(columns=tuple(kinds), rows=tuple(raw_rows), target=target_column)


def generate_splits(
    ds: Dataset, n_folds: int, seed: int, stratify: bool = True
) -> list[FoldSplit]:
    """Deterministic k-fold splits.

    Stratified (classification): per class, shuffle row indices with the
    seed and deal round-robin to folds with a fold cursor carried across
    classes, so per-class coverage is as even as integer arithmetic allows
    and total test sizes differ by at most one.  Regression or
    stratify=False: plain shuffled round-robin.
    """
    n = ds.n_instances
    if n_folds > n:
        raise TooFewRows(f"{n_folds} folds but only {n} rows")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=int)
    cursor = 0
    if stratify and ds.target_kind == CATEGORICAL:
        by_class: dict[str, list[int]] = {}
        ti = ds.target_index
        for i, row in enumerate(ds.rows):
            by_class.setdefault(row[ti], []).append(i)
        for label in sorted(by_class):
            idx = np.array(by_class[label])
            rng.shuffle(idx)
            for i in idx:
                assignment[i] = cursor % n_folds
                cursor += 1
    else:
        idx = np.arange(n)
        rng.shuffle(idx)
        for i in idx:
            assignment[i] = cursor % n_folds
            cursor += 1
    splits = []
    for fold in range(n_folds):
        test = tuple(int(i) for i in np.flatnonzero(assignment == fold))
        train = tuple(int(i) for i in np.flatnonzero(assignment != fold))
        splits.append(FoldSplit(fold_index=fold, train_rows=train, test_rows=test))
    return splits


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow(["" if c is None else c for c in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def materialize_fold(ds: Dataset, split: FoldSplit, directory) -> FoldFiles:
    """Write train.csv (with target), test.csv (without), truth.csv, schema.json."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {directory}: {exc}") from exc
    names = [n for n, _ in ds.columns]
    ti = ds.target_index
    feature_idx = [i for i in range(len(names)) if i != ti]

    train_csv = directory / "train.csv"
    test_csv = directory / "test.csv"
    truth_csv = directory / "truth.csv"
    schema_json = directory / "schema.json"

    _write_csv(train_csv, names, (ds.rows[i] for i in split.train_rows))
    _write_csv(
        test_csv,
        [names[i] for i in feature_idx],
        ([ds.rows[r][i] for i in feature_idx] for r in split.test_rows),
    )
    _write_csv(truth_csv, [ds.target], ([ds.rows[r][ti]] for r in split.test_rows))
    schema = {
        "columns": [{"name": n, "kind": k} for n, k in ds.columns],
        "target": ds.target,
    }
    try:
        schema_json.write_text(json.dumps(schema, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {schema_json}: {exc}") from exc
    return FoldFiles(train_csv, test_csv, truth_csv, schema_json)


def compute_metafeatures(ds: Dataset) -> MetaFeatures:
    """Exact dataset descriptors used as split covariates in rank trees."""
    n = ds.n_instances
    feature_idx = [i for i in range(len(ds.columns)) if i != ds.target_index]
    d = len(feature_idx)
    missing = sum(
        1 for row in ds.rows for i in feature_idx if row[i] is None
    )
    missing_ratio = missing / (n * d) if n * d else 0.0
    categorical = sum(1 for i in feature_idx if ds.columns[i][1] == CATEGORICAL)
    categorical_ratio = categorical / d if d else 0.0
    if ds.target_kind == CATEGORICAL:
        counts: dict[str, int] = {}
        ti = ds.target_index
        for row in ds.rows:
            counts[row[ti]] = counts.get(row[ti], 0) + 1
        n_classes = len(counts)
        minority = min(counts.values()) / n
    else:
        n_classes = 0
        minority = 1.0
    return MetaFeatures(
        n_instances=n,
        n_features=d,
        missing_ratio=missing_ratio,
        n_classes=n_classes,
        minority_class_ratio=minority,
        categorical_ratio=categorical_ratio,
    )
