#!/usr/bin/env python3
"""From raw fold scores to comparative statistics.

Missing results are imputed with the constant predictor's score on the
same fold, performances are averaged over folds and ranked per task
(best = 1, ties averaged), and the rank distribution feeds the Friedman
test plus the Nemenyi critical difference.  Scaled scores map a baseline
to 0 and the best observed performance to 1 on every task.

Run demos/02_run_benchmark.py first, then:

    python demos/03_rank_analysis.py [workdir]
"""

import sys
from pathlib import Path

import numpy as np

from tabbench.ranks import (
    build_score_matrix,
    cd_analysis,
    impute_missing,
    scale_scores,
)
from tabbench.store import load

workdir = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/demo")
store = load(workdir / "results.ndjson")

sm = build_score_matrix(store)
missing = int(np.isnan(sm.values).sum() - sum(
    (sm.values.shape[2] - f) * sm.k for f in sm.n_folds
))
sm = impute_missing(sm)
print(f"{sm.k} frameworks x {sm.n_tasks} tasks; imputed cells: "
      f"{int(sm.imputed.sum())}")

result = cd_analysis(sm, alpha=0.05)
order = np.argsort(result.avg_ranks)
print("\naverage ranks (lower is better):")
for i in order:
    print(f"  {result.frameworks[i]:<14} {result.avg_ranks[i]:.2f}")
print(f"Friedman chi2 = {result.friedman_chi2:.3f}, "
      f"p = {result.friedman_pvalue:.4f}")
print(f"critical difference at alpha={result.alpha}: "
      f"{result.critical_difference:.3f}")

best, worst = order[0], order[-1]
verdict = "differ" if result.different(best, worst) else "do not differ"
print(f"{result.frameworks[best]} and {result.frameworks[worst]} "
      f"{verdict} significantly")

scaled, excluded = scale_scores(sm, "constpred")
print("\nmean scaled score (constpred = 0, best observed = 1):")
for i, fw in enumerate(sm.frameworks):
    print(f"  {fw:<14} {np.nanmean(scaled[i]):+.3f}")
if excluded:
    print(f"degenerate tasks excluded from scaling: {excluded}")
