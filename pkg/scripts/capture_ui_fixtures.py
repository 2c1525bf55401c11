#!/usr/bin/env python3
"""Capture live API responses from a demo store into the explorer's test
fixtures (frontend/tests/fixtures/).

The explorer's tests assert that every numeric it renders appears
verbatim in a captured response, so fixtures must be real server output,
not handwritten JSON.  Run from the repository root:

    python3 scripts/capture_ui_fixtures.py
"""

import json
import shutil
import sys
import tempfile
import threading
import urllib.request
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from tabbench.executor import RunConfig, execute  # noqa: E402
from tabbench.server import make_server  # noqa: E402
from tabbench.specs import (  # noqa: E402
    ConstraintSpec,
    FrameworkSpec,
    TaskSpec,
    SuiteSpec,
    validate_run_plan,
)

FIXTURES = REPO / "frontend" / "tests" / "fixtures"


def build_store(workdir: Path):
    tasks = [
        TaskSpec("toy-binary", str(REPO / "demo/tasks/bin.csv"), "label",
                 "binary", n_folds=4, split_seed=7),
        TaskSpec("toy-multiclass", str(REPO / "demo/tasks/multi.csv"), "label",
                 "multiclass", n_folds=4, split_seed=7),
        TaskSpec("toy-regression", str(REPO / "demo/tasks/reg.csv"), "y",
                 "regression", n_folds=4, split_seed=7),
    ]
    suite = SuiteSpec("fixture-suite", tuple(t.id for t in tasks))
    frameworks = [
        FrameworkSpec("constpred", ("builtin:constant-predictor",),
                      version_label="builtin"),
        FrameworkSpec("mock-accurate",
                      ("{python}", "-m", "tabbench.mock_adapter", "accurate"),
                      version_label="mock"),
        FrameworkSpec("mock-crashy",
                      ("{python}", "-m", "tabbench.mock_adapter", "crashy"),
                      version_label="mock"),
    ]
    constraint = ConstraintSpec("30s10s", max_runtime_s=30, cores=2,
                                memory_mb=2048, leniency_s=10)
    plan = validate_run_plan(suite, tasks, frameworks, constraint)
    config = RunConfig(
        work_dir=workdir / "work",
        store_path=workdir / "results.ndjson",
        parallelism=4,
        seed=0,
        measure_inference=True,
    )
    return execute(plan, tasks, frameworks, constraint, config)


def capture(base: str, fixtures: Path) -> None:
    def get(path):
        with urllib.request.urlopen(base + path) as resp:
            return json.loads(resp.read())

    def post(path, body):
        req = urllib.request.Request(
            base + path, data=json.dumps(body).encode(),
            headers={"Content-Type": "application/json"}, method="POST",
        )
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read())

    bt_body = {
        "metafeatures": ["n_instances", "n_features"],
        "max_depth": 3,
        "alpha": 0.05,
        "min_node": 2,
    }
    captured = {
        "frameworks.json": get("/api/frameworks"),
        "tasks.json": get("/api/tasks"),
        "metafeatures.json": get("/api/metafeatures"),
        "cd.json": post("/api/analysis/cd", {"alpha": 0.05}),
        "cd_subset.json": post(
            "/api/analysis/cd",
            {"alpha": 0.05, "frameworks": ["constpred", "mock-accurate"]},
        ),
        "scaled.json": post("/api/analysis/scaled", {"baseline": "constpred"}),
        "pareto.json": post("/api/analysis/pareto", {}),
        "bttree.json": post("/api/analysis/bttree", bt_body),
        "errors.json": post("/api/analysis/errors", {}),
    }
    fixtures.mkdir(parents=True, exist_ok=True)
    for name, doc in captured.items():
        (fixtures / name).write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"wrote {fixtures / name}")
    # the request bodies the fixtures answer (for request-construction tests)
    (fixtures / "requests.json").write_text(
        json.dumps(
            {
                "cd": {"alpha": 0.05},
                "cd_subset": {
                    "alpha": 0.05,
                    "frameworks": ["constpred", "mock-accurate"],
                },
                "bttree": bt_body,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        workdir = Path(tmp)
        print("building demo store (includes inference measurement) ...")
        store = build_store(workdir)
        print(f"{len(store.records)} records")
        server = make_server(store, port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            base = f"http://127.0.0.1:{server.server_address[1]}"
            if FIXTURES.exists():
                shutil.rmtree(FIXTURES)
            capture(base, FIXTURES)
        finally:
            server.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
