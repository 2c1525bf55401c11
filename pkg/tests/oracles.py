"""Independent brute-force oracles used to derive expected test values.

Everything here deliberately avoids the code paths under test: AUC by
pair counting, BT worths by simplex grid search, the Friedman statistic
via exact rational arithmetic on the rank-sum formula, Nemenyi q by
Monte-Carlo simulation of the studentized range, and Pareto fronts by
quadratic pairwise filtering.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def auc_pair_count(scores, truth) -> float:
    """AUC as (#correct (pos, neg) pairs + 0.5 ties) / (n_pos * n_neg)."""
    pos = [s for s, t in zip(scores, truth) if t == 1]
    neg = [s for s, t in zip(scores, truth) if t == 0]
    credit = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                credit += 1.0
            elif p == q:
                credit += 0.5
    return credit / (len(pos) * len(neg))


def bt_ll(effective_wins, pi) -> float:
    """BT log-likelihood with 0*log(0) = 0 and -inf where impossible."""
    k = len(pi)
    ll = 0.0
    for i in range(k):
        for j in range(k):
            if i == j or effective_wins[i][j] == 0:
                continue
            denom = pi[i] + pi[j]
            if pi[i] <= 0 or denom <= 0:
                return -np.inf
            ll += effective_wins[i][j] * (np.log(pi[i]) - np.log(denom))
    return ll


def bt_grid_search(effective_wins, step: float = 1e-3):
    """Best worth vector on the simplex grid with the given step."""
    k = len(effective_wins)
    m = round(1.0 / step)
    best_pi, best_ll = None, -np.inf
    if k == 2:
        for a in range(m + 1):
            pi = (a * step, (m - a) * step)
            ll = bt_ll(effective_wins, pi)
            if ll > best_ll:
                best_ll, best_pi = ll, pi
        return np.array(best_pi), best_ll
    if k == 3:
        grid = np.arange(m + 1)
        a, b = np.meshgrid(grid, grid, indexing="ij")
        keep = a + b <= m
        a, b = a[keep], b[keep]
        p1 = a * step
        p2 = b * step
        p3 = 1.0 - p1 - p2
        ll = np.zeros(len(p1))
        p = [p1, p2, p3]
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(3):
                for j in range(3):
                    if i == j or effective_wins[i][j] == 0:
                        continue
                    term = effective_wins[i][j] * (
                        np.log(p[i]) - np.log(p[i] + p[j])
                    )
                    ll = ll + np.where(np.isnan(term), -np.inf, term)
        idx = int(np.argmax(ll))
        return np.array([p1[idx], p2[idx], p3[idx]]), float(ll[idx])
    raise ValueError("grid oracle supports k in {2, 3}")


def friedman_chi2_exact(per_task_ranks) -> Fraction:
    """Friedman statistic via the rank-sum form in exact rationals:
    chi2 = 12 / (N k (k+1)) * sum_j R_j^2 - 3 N (k+1)."""
    ranks = [[Fraction(x).limit_denominator(10**6) for x in row] for row in per_task_ranks]
    n = len(ranks)
    k = len(ranks[0])
    column_sums = [sum(row[j] for row in ranks) for j in range(k)]
    total = sum(r * r for r in column_sums)
    return Fraction(12, n * k * (k + 1)) * total - 3 * n * (k + 1)


def enumerate_rank_matrices(k: int, n: int):
    """All (k!)^n per-task rank assignments (no ties)."""
    base = list(itertools.permutations(range(1, k + 1)))
    yield from itertools.product(base, repeat=n)


def nemenyi_q_montecarlo(k: int, alpha: float, samples: int = 2_000_000,
                         seed: int = 12345) -> float:
    """(1 - alpha) quantile of range(Z_1..Z_k) / sqrt(2) by simulation."""
    rng = np.random.default_rng(seed)
    chunks = []
    remaining = samples
    while remaining > 0:
        m = min(remaining, 500_000)
        z = rng.standard_normal((m, k))
        chunks.append((z.max(axis=1) - z.min(axis=1)) / np.sqrt(2.0))
        remaining -= m
    ranges = np.concatenate(chunks)
    return float(np.quantile(ranges, 1.0 - alpha))


def pareto_brute(points):
    """Non-dominated subset by pairwise comparison (maximize both)."""
    unique = sorted(set(tuple(map(float, p)) for p in points))
    front = []
    for p in unique:
        if not any(
            q != p and q[0] >= p[0] and q[1] >= p[1] for q in unique
        ):
            front.append(p)
    return sorted(front)


def stratified_fold_counts(splits, labels):
    """Per (fold, class) test counts for checking round-robin evenness."""
    table = {}
    for split in splits:
        for row in split.test_rows:
            key = (split.fold_index, labels[row])
            table[key] = table.get(key, 0) + 1
    return table
