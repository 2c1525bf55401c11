"""Comparative statistics over a results store.

Pipeline: build a fold-level ScoreMatrix, impute missing cells with the
constant-predictor value of the same (task, fold), average folds, rank
per task (best = 1, ties averaged), then Friedman chi-square, Nemenyi
critical difference, per-task affine scaling against a baseline column,
and Pareto fronts in the (inference speed, scaled accuracy) plane.

All transformations are pure; orientation is normalized exactly once per
metric through higher_is_better, so error metrics never need ad-hoc sign
handling downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateInput, DegenerateScale, MissingBaseline
from .metrics import HIGHER_IS_BETTER
from .stats import chi2_sf, nemenyi_q
from .store import ResultsStore


@dataclass(frozen=True)
class ScoreMatrix:
    frameworks: tuple[str, ...]
    tasks: tuple[str, ...]
    metrics: tuple[str, ...]  # one per task
    n_folds: tuple[int, ...]  # one per task
    values: np.ndarray  # (k, N, max_folds), NaN = missing
    imputed: np.ndarray  # bool, same shape
    prior_values: np.ndarray  # (N, max_folds) constant-predictor scores

    @property
    def k(self) -> int:
        return len(self.frameworks)

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    def is_complete(self) -> bool:
        for t, folds in enumerate(self.n_folds):
            if np.isnan(self.values[:, t, :folds]).any():
                return False
        return True

    def oriented(self) -> np.ndarray:
        """Values flipped so that larger is always better."""
        out = self.values.copy()
        for t, metric in enumerate(self.metrics):
            if not HIGHER_IS_BETTER[metric]:
                out[:, t, :] = -out[:, t, :]
        return out


@dataclass(frozen=True)
class CdResult:
    frameworks: tuple[str, ...]
    avg_ranks: tuple[float, ...]
    per_task_ranks: tuple[tuple[float, ...], ...]  # N rows of k ranks
    friedman_chi2: float
    friedman_pvalue: float
    critical_difference: float
    alpha: float

    def different(self, i: int, j: int) -> bool:
        return abs(self.avg_ranks[i] - self.avg_ranks[j]) >= self.critical_difference


def build_score_matrix(
    store: ResultsStore,
    frameworks: list[str] | None = None,
    tasks: list[str] | None = None,
    prior_framework: str = "constpred",
    constraint_id: str | None = None,
    metric: str | None = None,
) -> ScoreMatrix:
    """Arrange per-fold scores from the store; missing cells stay NaN.

    The `prior_framework` column (the built-in constant predictor) is the
    imputation source; it may also appear among the analyzed frameworks.
    A store holding several constraints must be filtered to one via
    `constraint_id`; `metric` restricts the task set to one metric.
    """
    frameworks = list(frameworks if frameworks is not None else store.framework_ids)
    tasks = list(tasks if tasks is not None else store.task_ids)
    if metric is not None:
        tasks = [t for t in tasks if store.task_info(t)["metric"] == metric]
    if not tasks:
        raise DegenerateInput("no tasks left after filtering")
    constraints = {k[3] for k in store.records}
    if constraint_id is None:
        if len(constraints) > 1:
            raise DegenerateInput(
                f"store holds constraints {sorted(constraints)}; pick one"
            )
    metrics = tuple(store.task_info(t)["metric"] for t in tasks)
    n_folds = tuple(int(store.task_info(t)["n_folds"]) for t in tasks)
    max_folds = max(n_folds)
    k, n = len(frameworks), len(tasks)
    values = np.full((k, n, max_folds), np.nan)
    prior = np.full((n, max_folds), np.nan)
    fw_index = {f: i for i, f in enumerate(frameworks)}
    task_index = {t: i for i, t in enumerate(tasks)}
    for record in store.records.values():
        if constraint_id is not None and record.constraint_id != constraint_id:
            continue
        t = task_index.get(record.task_id)
        if t is None or record.score is None:
            continue
        if record.framework_id == prior_framework:
            prior[t, record.fold] = record.score
        f = fw_index.get(record.framework_id)
        if f is not None:
            values[f, t, record.fold] = record.score
    return ScoreMatrix(
        frameworks=tuple(frameworks),
        tasks=tuple(tasks),
        metrics=metrics,
        n_folds=n_folds,
        values=values,
        imputed=np.zeros_like(values, dtype=bool),
        prior_values=prior,
    )


def impute_missing(sm: ScoreMatrix) -> ScoreMatrix:
    """Replace every missing (framework, task, fold) cell with that fold's
    constant-predictor value, keeping a provenance flag."""
    values = sm.values.copy()
    imputed = sm.imputed.copy()
    for t, folds in enumerate(sm.n_folds):
        for fold in range(folds):
            missing = np.isnan(values[:, t, fold])
            if not missing.any():
                continue
            fill = sm.prior_values[t, fold]
            if np.isnan(fill):
                raise MissingBaseline(
                    f"no constant-predictor score for task {sm.tasks[t]!r} fold {fold}"
                )
            values[missing, t, fold] = fill
            imputed[missing, t, fold] = True
    return replace(sm, values=values, imputed=imputed)


def _rank_best_first(oriented_row: np.ndarray) -> np.ndarray:
    """Ranks 1..k, best (largest) = 1, ties get the average rank."""
    v = np.asarray(oriented_row, dtype=float)
    order = np.argsort(-v, kind="mergesort")
    ranks = np.empty(len(v))
    sv = v[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def fold_means(sm: ScoreMatrix) -> np.ndarray:
    """Per (framework, task) mean over that task's folds; matrix must be complete."""
    if not sm.is_complete():
        raise DegenerateInput("score matrix has missing cells; impute first")
    means = np.empty((sm.k, sm.n_tasks))
    for t, folds in enumerate(sm.n_folds):
        means[:, t] = sm.values[:, t, :folds].mean(axis=1)
    return means


def average_ranks(sm: ScoreMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-task rank vectors and their mean across tasks (R-bar)."""
    means = fold_means(sm)
    oriented = means.copy()
    for t, metric in enumerate(sm.metrics):
        if not HIGHER_IS_BETTER[metric]:
            oriented[:, t] = -oriented[:, t]
    per_task = np.stack(
        [_rank_best_first(oriented[:, t]) for t in range(sm.n_tasks)]
    )
    return per_task, per_task.mean(axis=0)


def friedman_test(per_task_ranks: np.ndarray) -> tuple[float, float]:
    """Friedman chi-square over N tasks ranking k frameworks.

    chi2 = [12N / (k(k+1))] * [sum_j Rbar_j^2 - k(k+1)^2 / 4],
    p from the chi-square survival function with k - 1 dof.
    """
    per_task_ranks = np.asarray(per_task_ranks, dtype=float)
    if per_task_ranks.ndim != 2:
        raise DegenerateInput("need an (N, k) rank matrix")
    n, k = per_task_ranks.shape
    if n < 2 or k < 2:
        raise DegenerateInput(f"need N >= 2 and k >= 2, got N={n}, k={k}")
    rbar = per_task_ranks.mean(axis=0)
    chi2 = (12.0 * n / (k * (k + 1))) * (
        float((rbar**2).sum()) - k * (k + 1) ** 2 / 4.0
    )
    chi2 = max(0.0, chi2)
    return chi2, chi2_sf(chi2, k - 1)


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference: pairs at |Rbar_i - Rbar_j| >= CD differ."""
    return nemenyi_q(k, alpha) * np.sqrt(k * (k + 1) / (6.0 * n))


def cd_analysis(sm: ScoreMatrix, alpha: float = 0.05) -> CdResult:
    per_task, rbar = average_ranks(sm)
    chi2, pvalue = friedman_test(per_task)
    cd = nemenyi_cd(sm.k, sm.n_tasks, alpha)
    return CdResult(
        frameworks=sm.frameworks,
        avg_ranks=tuple(float(r) for r in rbar),
        per_task_ranks=tuple(tuple(float(x) for x in row) for row in per_task),
        friedman_chi2=chi2,
        friedman_pvalue=pvalue,
        critical_difference=float(cd),
        alpha=alpha,
    )


def scale_scores(
    sm: ScoreMatrix, baseline_framework: str
) -> tuple[np.ndarray, list[str]]:
    """Affine per-task rescaling: baseline -> 0, best observed -> 1.

    Returns an (k, N) array of scaled fold-means with NaN columns for
    degenerate tasks (best equals baseline), plus the excluded task ids.
    """
    if baseline_framework not in sm.frameworks:
        raise MissingBaseline(f"no baseline column {baseline_framework!r}")
    b = sm.frameworks.index(baseline_framework)
    means = fold_means(sm)
    oriented = means.copy()
    for t, metric in enumerate(sm.metrics):
        if not HIGHER_IS_BETTER[metric]:
            oriented[:, t] = -oriented[:, t]
    scaled = np.full_like(oriented, np.nan)
    excluded = []
    for t in range(sm.n_tasks):
        base = oriented[b, t]
        best = oriented[:, t].max()
        if best == base:
            excluded.append(sm.tasks[t])
            continue
        scaled[:, t] = (oriented[:, t] - base) / (best - base)
    return scaled, excluded


def scale_task(values_oriented, baseline_value: float) -> np.ndarray:
    """Scale one task's oriented values; raises on a degenerate span."""
    values_oriented = np.asarray(values_oriented, dtype=float)
    best = values_oriented.max()
    if best == baseline_value:
        raise DegenerateScale("best observed equals the baseline")
    return (values_oriented - baseline_value) / (best - baseline_value)


def pareto_front(points) -> list[tuple[float, float]]:
    """Maximal points under (speed, score) dominance, sorted by speed.

    A point dominates another when it is >= in both coordinates and > in
    at least one; duplicates collapse to a single front member.
    """
    unique = sorted(set((float(x), float(y)) for x, y in points))
    front = []
    for p in unique:
        dominated = any(
            q != p and q[0] >= p[0] and q[1] >= p[1] for q in unique
        )
        if not dominated:
            front.append(p)
    front.sort(key=lambda p: p[0])
    return front
