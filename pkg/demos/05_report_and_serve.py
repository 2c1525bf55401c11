#!/usr/bin/env python3
"""Rendering the report bundle and exposing the analysis over HTTP.

The bundle is a directory of CSV tables and hand-emitted SVG figures
plus an index page; rendering the same store twice produces identical
bytes.  The same analyses are available as JSON endpoints for the
browser explorer (see frontend/), started with:

    tabbench serve runs/demo/results.ndjson --ui-dir frontend/dist

Run demos/02_run_benchmark.py first, then:

    python demos/05_report_and_serve.py [workdir]
"""

import sys
from pathlib import Path

from tabbench.report import ReportConfig, bundle_report
from tabbench.store import load

workdir = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/demo")
store = load(workdir / "results.ndjson")

bundle = bundle_report(store, ReportConfig(out_dir=workdir / "report"))
print(f"report bundle in {bundle.directory}:")
for name in bundle.artifacts:
    size = (bundle.directory / name).stat().st_size
    print(f"  {name:<24} {size:>7} bytes")
for notice in bundle.notices:
    print(f"  note: {notice}")

print("\nopen", bundle.directory / "index.html", "in a browser, or start")
print(f"  tabbench serve {workdir / 'results.ndjson'}")
print("and explore the JSON API, e.g.")
print("  curl -s localhost:8321/api/frameworks")
print("  curl -s -X POST localhost:8321/api/analysis/cd -d '{\"alpha\": 0.05}'")
