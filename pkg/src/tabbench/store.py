"""Append-only results store: one JobRecord per (framework, task, fold, constraint).

On disk the store is newline-delimited JSON: a header record with run
metadata, one record per job, and a trailing checksum record.  At-rest
files are canonical (records sorted by framework, task, fold; sorted JSON
keys) so logically equal stores serialize to identical bytes.  During a
run the file is appended record-by-record and made canonical on finalize;
`load_partial` accepts such in-progress files for resuming.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import CorruptStore, IoError

STATUSES = ("ok", "memory", "time", "data", "implementation")

Key = tuple[str, str, int, str]  # (framework_id, task_id, fold, constraint_id)


@dataclass(frozen=True)
class JobRecord:
    framework_id: str
    task_id: str
    fold: int
    constraint_id: str
    status: str
    wall_time_s: float
    training_duration_s: float | None = None
    predict_duration_s: float | None = None
    score: float | None = None
    metric: str | None = None
    inference: dict | None = None  # scenario -> {median_s, rows, rows_per_second, ...}
    log_excerpt: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if (self.status == "ok") != (self.score is not None):
            raise ValueError(
                f"status {self.status!r} inconsistent with score {self.score!r}"
            )

    @property
    def key(self) -> Key:
        return (self.framework_id, self.task_id, self.fold, self.constraint_id)


@dataclass
class ResultsStore:
    metadata: dict
    records: dict[Key, JobRecord] = field(default_factory=dict)

    def append(self, record: JobRecord) -> None:
        if record.key in self.records:
            raise ValueError(f"duplicate record for {record.key}")
        self.records[record.key] = record

    def sorted_records(self) -> list[JobRecord]:
        return [
            self.records[k]
            for k in sorted(self.records, key=lambda k: (k[0], k[1], k[2], k[3]))
        ]

    @property
    def framework_ids(self) -> list[str]:
        seen = [f["id"] for f in self.metadata.get("frameworks", [])]
        extra = sorted({k[0] for k in self.records} - set(seen))
        return seen + extra

    @property
    def task_ids(self) -> list[str]:
        return [t["id"] for t in self.metadata.get("tasks", [])]

    def task_info(self, task_id: str) -> dict:
        for t in self.metadata.get("tasks", []):
            if t["id"] == task_id:
                return t
        raise KeyError(f"no task {task_id!r} in store metadata")


def _record_line(record: JobRecord) -> str:
    doc = {"kind": "record", **asdict(record)}
    return json.dumps(doc, sort_keys=True)


def _header_line(metadata: dict) -> str:
    return json.dumps({"kind": "header", **metadata}, sort_keys=True)


def canonical_lines(store: ResultsStore) -> list[str]:
    return [_header_line(store.metadata)] + [
        _record_line(r) for r in store.sorted_records()
    ]


def _checksum(lines: list[str]) -> str:
    digest = hashlib.sha256()
    for line in lines:
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def persist(store: ResultsStore, path) -> Path:
    """Write the canonical store file with its trailing checksum record."""
    path = Path(path)
    lines = canonical_lines(store)
    lines.append(json.dumps({"kind": "checksum", "sha256": _checksum(lines)}))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def _parse_lines(text: str, *, tolerate_tail: bool):
    metadata = None
    records = []
    checksum = None
    raw_lines = text.split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    seen_lines: list[str] = []
    for i, line in enumerate(raw_lines):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError:
            if tolerate_tail and i == len(raw_lines) - 1:
                break  # interrupted mid-write; the partial job is discarded
            raise CorruptStore(f"line {i + 1}: invalid JSON")
        kind = doc.pop("kind", None)
        if kind == "header":
            if metadata is not None:
                raise CorruptStore("multiple header records")
            metadata = doc
        elif kind == "record":
            records.append(doc)
        elif kind == "checksum":
            checksum = doc.get("sha256")
            if i != len(raw_lines) - 1:
                raise CorruptStore("checksum record before end of file")
            break
        else:
            raise CorruptStore(f"line {i + 1}: unknown kind {kind!r}")
        seen_lines.append(line)
    if metadata is None:
        raise CorruptStore("missing header record")
    return metadata, records, checksum, seen_lines


def _build(metadata: dict, record_docs: list[dict]) -> ResultsStore:
    store = ResultsStore(metadata=metadata)
    for doc in record_docs:
        store.append(JobRecord(**doc))
    return store


def load(path) -> ResultsStore:
    """Load a finalized store; checksum must be present and match."""
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such file: {path}")
    metadata, records, checksum, lines = _parse_lines(
        path.read_text(encoding="utf-8"), tolerate_tail=False
    )
    if checksum is None:
        raise CorruptStore("missing checksum record")
    if checksum != _checksum(lines):
        raise CorruptStore("checksum mismatch")
    return _build(metadata, records)


def load_partial(path) -> ResultsStore:
    """Load an in-progress store for resume; tolerates a torn final line."""
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such file: {path}")
    metadata, records, _, _ = _parse_lines(
        path.read_text(encoding="utf-8"), tolerate_tail=True
    )
    return _build(metadata, records)


def merge(a: ResultsStore, b: ResultsStore) -> ResultsStore:
    """Union of two stores with disjoint record keys."""
    overlap = set(a.records) & set(b.records)
    if overlap:
        raise ValueError(f"stores overlap on {sorted(overlap)[:3]}...")
    merged = ResultsStore(metadata=dict(a.metadata))
    merged.records.update(a.records)
    merged.records.update(b.records)
    return merged


def apply_overrides(store: ResultsStore, overrides: list[dict]) -> ResultsStore:
    """Manual per-record annotations for editorial reclassification.

    Each entry selects records by framework_id/task_id (and optionally
    fold/constraint_id) and replaces status and/or score; the note is
    appended to the record's log excerpt so the intervention stays
    visible.  The source store is left untouched.
    """
    out = ResultsStore(metadata=dict(store.metadata), records=dict(store.records))
    for entry in overrides:
        selector_keys = ("framework_id", "task_id", "fold", "constraint_id")
        selector = {k: entry[k] for k in selector_keys if k in entry}
        if "framework_id" not in selector or "task_id" not in selector:
            raise ValueError(f"override needs framework_id and task_id: {entry}")
        matched = [
            key
            for key, record in out.records.items()
            if all(getattr(record, k) == v for k, v in selector.items())
        ]
        if not matched:
            raise ValueError(f"override matched no records: {entry}")
        for key in matched:
            record = out.records[key]
            status = entry.get("status", record.status)
            score = entry.get("score", record.score)
            note = entry.get("note", "manual override")
            excerpt = (record.log_excerpt + f" [override: {note}]").strip()
            out.records[key] = JobRecord(
                framework_id=record.framework_id,
                task_id=record.task_id,
                fold=record.fold,
                constraint_id=record.constraint_id,
                status=status,
                wall_time_s=record.wall_time_s,
                training_duration_s=record.training_duration_s,
                predict_duration_s=record.predict_duration_s,
                score=score,
                metric=record.metric,
                inference=record.inference,
                log_excerpt=excerpt,
            )
    return out


def canonical_content(store: ResultsStore, mask_times: bool = False) -> str:
    """Canonical text for equality comparison; optionally masks wall clocks."""
    if not mask_times:
        return "\n".join(canonical_lines(store)) + "\n"
    lines = [_header_line({k: v for k, v in store.metadata.items() if k != "created_at"})]
    for r in store.sorted_records():
        doc = {"kind": "record", **asdict(r)}
        for k in ("wall_time_s", "training_duration_s", "predict_duration_s"):
            doc[k] = None
        if doc.get("inference"):
            doc["inference"] = sorted(doc["inference"])
        lines.append(json.dumps(doc, sort_keys=True))
    return "\n".join(lines) + "\n"


class StoreWriter:
    """Serialized incremental writer used by the executor while running.

    When `existing` records are handed in (resume), the file is rewritten
    from them first, which also drops any torn trailing line from the
    interrupted run.
    """

    def __init__(self, path, metadata: dict, existing: ResultsStore | None = None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", encoding="utf-8")
        self._fh.write(_header_line(metadata) + "\n")
        if existing is not None:
            for record in existing.sorted_records():
                self._fh.write(_record_line(record) + "\n")
        self._fh.flush()

    def append(self, record: JobRecord) -> None:
        self._fh.write(_record_line(record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def finalize(self) -> ResultsStore:
        """Rewrite the file canonically with a checksum and return the store."""
        self.close()
        store = load_partial(self.path)
        persist(store, self.path)
        return store
