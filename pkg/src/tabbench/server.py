"""Read-only HTTP/JSON service exposing the analysis engine plus the
static explorer UI.

Every analysis endpoint is a POST with an explicit filter object, so a
response is a pure function of (store, request body); identical requests
return identical bytes.  The store is loaded once and never written.
Tree requests can take seconds, so they pass through a small semaphore
instead of blocking the whole server (requests are thread-per-connection).
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path

import numpy as np

from .bt import derive_preferences, grow_bt_tree
from .errors import PortInUse, TabbenchError
from .ranks import (
    build_score_matrix,
    cd_analysis,
    impute_missing,
    pareto_front,
    scale_scores,
)
from .report import ERROR_CATEGORIES, cd_groups
from .store import ResultsStore

ANALYSIS_WORKERS = 2


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _matrix(store, body):
    try:
        sm = build_score_matrix(
            store,
            body.get("frameworks"),
            body.get("tasks"),
            body.get("prior_framework", "constpred"),
            constraint_id=body.get("constraint_id"),
            metric=body.get("metric"),
        )
        return impute_missing(sm)
    except (TabbenchError, KeyError, ValueError) as exc:
        raise ApiError(422, f"cannot build score matrix: {exc}") from exc


def analysis_cd(store: ResultsStore, body: dict) -> dict:
    sm = _matrix(store, body)
    if sm.k < 2:
        raise ApiError(422, "CD analysis needs at least 2 frameworks")
    if sm.n_tasks < 2:
        raise ApiError(422, "CD analysis needs at least 2 tasks")
    alpha = float(body.get("alpha", 0.05))
    try:
        result = cd_analysis(sm, alpha)
    except TabbenchError as exc:
        raise ApiError(422, str(exc)) from exc
    return {
        "frameworks": list(result.frameworks),
        "avg_ranks": list(result.avg_ranks),
        "per_task_ranks": [list(r) for r in result.per_task_ranks],
        "friedman_chi2": result.friedman_chi2,
        "friedman_pvalue": result.friedman_pvalue,
        "critical_difference": result.critical_difference,
        "alpha": result.alpha,
        "groups": [list(g) for g in cd_groups(result)],
    }


def analysis_scaled(store: ResultsStore, body: dict) -> dict:
    sm = _matrix(store, body)
    baseline = body.get("baseline") or body.get("prior_framework", "constpred")
    try:
        scaled, excluded = scale_scores(sm, baseline)
    except TabbenchError as exc:
        raise ApiError(422, str(exc)) from exc
    values = [
        [None if np.isnan(v) else float(v) for v in scaled[i, :]]
        for i in range(sm.k)
    ]
    return {
        "baseline": baseline,
        "frameworks": list(sm.frameworks),
        "tasks": list(sm.tasks),
        "scaled": values,
        "excluded_tasks": excluded,
    }


def analysis_pareto(store: ResultsStore, body: dict) -> dict:
    sm = _matrix(store, body)
    baseline = body.get("baseline") or body.get("prior_framework", "constpred")
    scenario = body.get("scenario", "file_10k")
    rates: dict[str, list[float]] = {}
    for r in store.records.values():
        if r.framework_id not in sm.frameworks:
            continue
        if r.inference and scenario in r.inference:
            rates.setdefault(r.framework_id, []).append(
                r.inference[scenario]["rows_per_second"]
            )
    if not rates:
        raise ApiError(422, f"no inference measurements for scenario {scenario!r}")
    try:
        scaled, _ = scale_scores(sm, baseline)
    except TabbenchError as exc:
        raise ApiError(422, str(exc)) from exc
    points = {}
    for fw in sorted(rates):
        i = sm.frameworks.index(fw)
        points[fw] = [
            float(np.median(rates[fw])),
            float(np.nanmean(scaled[i, :])),
        ]
    front = pareto_front(points.values())
    return {"scenario": scenario, "points": points,
            "front": [[x, y] for x, y in front]}


def analysis_bttree(store: ResultsStore, body: dict) -> dict:
    sm = _matrix(store, body)
    if sm.k < 2:
        raise ApiError(422, "BT tree needs at least 2 frameworks")
    metafeatures = {
        t["id"]: t.get("metafeatures", {})
        for t in store.metadata.get("tasks", [])
        if t["id"] in sm.tasks
    }
    features = body.get("metafeatures") or ["n_instances", "n_features"]
    for f in features:
        if not all(f in m for m in metafeatures.values()):
            raise ApiError(422, f"unknown meta-feature {f!r}")
    try:
        observations = derive_preferences(sm, metafeatures)
        tree = grow_bt_tree(
            observations,
            list(features),
            sm.frameworks,
            alpha=float(body.get("alpha", 0.05)),
            max_depth=int(body.get("max_depth", 3)),
            min_node=body.get("min_node"),
            seed=int(body.get("seed", 0)),
        )
    except TabbenchError as exc:
        raise ApiError(422, str(exc)) from exc
    return tree.to_json()


def analysis_errors(store: ResultsStore, body: dict) -> dict:
    frameworks = body.get("frameworks") or store.framework_ids
    tasks = body.get("tasks")
    counts = {fw: {cat: 0 for cat in ERROR_CATEGORIES} for fw in frameworks}
    for r in store.records.values():
        if r.framework_id not in counts or r.status == "ok":
            continue
        if tasks is not None and r.task_id not in tasks:
            continue
        counts[r.framework_id][r.status] += 1
    return {"categories": list(ERROR_CATEGORIES), "counts": counts}


ANALYSES = {
    "cd": analysis_cd,
    "scaled": analysis_scaled,
    "pareto": analysis_pareto,
    "bttree": analysis_bttree,
    "errors": analysis_errors,
}


class _Server(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, store: ResultsStore, ui_dir: Path | None):
        super().__init__(address, _Handler)
        self.store = store
        self.ui_dir = ui_dir
        self.analysis_slots = threading.BoundedSemaphore(ANALYSIS_WORKERS)


class _Handler(BaseHTTPRequestHandler):
    server_version = "tabbench"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, payload, status=200):
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status, message):
        self._send_json({"error": message}, status=status)

    def do_GET(self):
        store = self.server.store
        if self.path == "/api/frameworks":
            self._send_json(store.framework_ids)
        elif self.path == "/api/tasks":
            self._send_json(store.metadata.get("tasks", []))
        elif self.path == "/api/results":
            from dataclasses import asdict

            self._send_json([asdict(r) for r in store.sorted_records()])
        elif self.path == "/api/metafeatures":
            self._send_json(
                [
                    {"id": t["id"], "metafeatures": t.get("metafeatures", {})}
                    for t in store.metadata.get("tasks", [])
                ]
            )
        elif self.path == "/api/openapi.yaml":
            text = (
                resources.files("tabbench").joinpath("openapi.yaml").read_text("utf-8")
            )
            body = text.encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/yaml")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
        elif self.path == "/" or self.path.startswith("/ui"):
            self._serve_static()
        else:
            self._send_error_json(404, f"no such endpoint {self.path}")

    def do_POST(self):
        if not self.path.startswith("/api/analysis/"):
            self._send_error_json(404, f"no such endpoint {self.path}")
            return
        name = self.path[len("/api/analysis/"):]
        fn = ANALYSES.get(name)
        if fn is None:
            self._send_error_json(404, f"unknown analysis {name!r}")
            return
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode("utf-8")) if raw.strip() else {}
        except json.JSONDecodeError as exc:
            self._send_error_json(400, f"invalid JSON body: {exc}")
            return
        if not isinstance(body, dict):
            self._send_error_json(400, "request body must be a JSON object")
            return
        with self.server.analysis_slots:
            try:
                payload = fn(self.server.store, body)
            except ApiError as exc:
                self._send_error_json(exc.status, exc.message)
                return
        self._send_json(payload)

    def _serve_static(self):
        ui_dir = self.server.ui_dir
        if self.path in ("/", "/ui", "/ui/"):
            rel = "index.html"
        else:
            rel = self.path[len("/ui/"):].split("?", 1)[0]
        if ui_dir is None:
            self._send_error_json(404, "no UI bundle configured (--ui-dir)")
            return
        target = (Path(ui_dir) / rel).resolve()
        if not str(target).startswith(str(Path(ui_dir).resolve())):
            self._send_error_json(403, "path escapes the UI directory")
            return
        if not target.is_file():
            self._send_error_json(404, f"no such asset {rel!r}")
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(
    store: ResultsStore, port: int, host: str = "127.0.0.1",
    ui_dir: Path | None = None,
) -> _Server:
    try:
        return _Server((host, port), store, ui_dir)
    except OSError as exc:
        raise PortInUse(f"cannot bind {host}:{port}: {exc}") from exc


def serve_forever(store: ResultsStore, port: int, host: str = "127.0.0.1",
                  ui_dir: Path | None = None) -> None:
    server = make_server(store, port, host, ui_dir)
    try:
        server.serve_forever()
    finally:
        server.server_close()
