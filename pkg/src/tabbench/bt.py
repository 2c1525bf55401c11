"""Bradley-Terry preference modeling and recursive partitioning over
dataset descriptors.

One observation is the preference ranking of the frameworks on one
(task, fold), derived from the imputed score matrix.  A BT model is
fitted per tree node by minorization-maximization; parameter instability
along each candidate descriptor is tested with a permutation sup-LM
statistic over per-observation score contributions, Bonferroni-corrected
across descriptors.  A node splits on the most unstable descriptor at
the cutpoint maximizing the summed child log-likelihoods.

Ties count as half a win for each side, which keeps the standard BT
likelihood intact.  Instability scores are gradients with respect to
log-worths with the last framework as reference; leaf worths do not
depend on that choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantFeature,
    DisconnectedGraph,
    NoValidCutpoint,
    TooFewObservations,
)

TIE_TOL = 1e-9
MLE_TOL = 1e-10
MLE_MAX_SWEEPS = 20_000
WORTH_FLOOR = 1e-12
PERMUTATIONS = 199
TRIM_FRACTION = 0.1


@dataclass(frozen=True)
class PreferenceObservation:
    task_id: str
    fold: int
    ranking: tuple[int, ...]  # preorder group per framework, 0 = best
    meta: dict[str, float]


@dataclass(frozen=True)
class PairCounts:
    frameworks: tuple[str, ...]
    wins: np.ndarray  # wins[i, j] = times i beat j
    ties: np.ndarray  # symmetric

    @property
    def k(self) -> int:
        return len(self.frameworks)

    def effective_wins(self) -> np.ndarray:
        return self.wins + 0.5 * self.ties


@dataclass(frozen=True)
class WorthVector:
    frameworks: tuple[str, ...]
    worths: np.ndarray  # positive, sums to 1
    log_likelihood: float
    degenerate: tuple[str, ...] = ()  # frameworks pinned at the floor

    def as_dict(self) -> dict:
        return {f: float(w) for f, w in zip(self.frameworks, self.worths)}


@dataclass(frozen=True)
class BtLeaf:
    worth: WorthVector
    n: int


@dataclass(frozen=True)
class BtSplit:
    feature: str
    cutpoint: float
    p_value: float  # Bonferroni-corrected
    n: int
    left: "BtLeaf | BtSplit"  # observations with feature <= cutpoint
    right: "BtLeaf | BtSplit"


@dataclass(frozen=True)
class BtTree:
    root: BtLeaf | BtSplit
    frameworks: tuple[str, ...]
    alpha: float
    max_depth: int
    min_node: int

    def leaves(self) -> list[BtLeaf]:
        out = []

        def walk(node):
            if isinstance(node, BtLeaf):
                out.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    def to_json(self) -> dict:
        def encode(node):
            if isinstance(node, BtLeaf):
                return {
                    "kind": "leaf",
                    "n": node.n,
                    "worths": node.worth.as_dict(),
                    "degenerate": list(node.worth.degenerate),
                }
            return {
                "kind": "split",
                "feature": node.feature,
                "cutpoint": node.cutpoint,
                "p_value": node.p_value,
                "n": node.n,
                "left": encode(node.left),
                "right": encode(node.right),
            }

        return {
            "frameworks": list(self.frameworks),
            "alpha": self.alpha,
            "max_depth": self.max_depth,
            "min_node": self.min_node,
            "root": encode(self.root),
        }

    def to_dot(self) -> str:
        lines = ["digraph bt_tree {", "  node [shape=box];"]
        counter = [0]

        def walk(node) -> int:
            idx = counter[0]
            counter[0] += 1
            if isinstance(node, BtLeaf):
                rows = "\\n".join(
                    f"{f}: {w:.3f}" for f, w in sorted(node.worth.as_dict().items())
                )
                lines.append(f'  n{idx} [label="n = {node.n}\\n{rows}"];')
                return idx
            lines.append(
                f'  n{idx} [label="{node.feature}\\np = {node.p_value:.4f}"];'
            )
            li = walk(node.left)
            lines.append(f'  n{idx} -> n{li} [label="<= {node.cutpoint:g}"];')
            ri = walk(node.right)
            lines.append(f'  n{idx} -> n{ri} [label="> {node.cutpoint:g}"];')
            return idx

        walk(self.root)
        lines.append("}")
        return "\n".join(lines) + "\n"


def derive_preferences(sm, metafeatures: dict[str, dict]) -> list[PreferenceObservation]:
    """One observation per (task, fold) from a complete score matrix.

    Scores are oriented so larger is better; frameworks whose oriented
    scores differ by at most 1e-9 join the same preorder group (chained
    while sorting, so the result is a valid total preorder).
    """
    oriented = sm.oriented()
    observations = []
    for t, task_id in enumerate(sm.tasks):
        meta = {k: float(v) for k, v in metafeatures[task_id].items()}
        for fold in range(sm.n_folds[t]):
            scores = oriented[:, t, fold]
            if np.isnan(scores).any():
                raise ValueError("score matrix must be imputed first")
            order = np.argsort(-scores, kind="mergesort")
            groups = np.empty(len(scores), dtype=int)
            group = 0
            groups[order[0]] = 0
            for prev, cur in zip(order, order[1:]):
                if scores[prev] - scores[cur] > TIE_TOL:
                    group += 1
                groups[cur] = group
            observations.append(
                PreferenceObservation(
                    task_id=task_id,
                    fold=fold,
                    ranking=tuple(int(g) for g in groups),
                    meta=meta,
                )
            )
    return observations


def pair_counts(
    observations: list[PreferenceObservation], frameworks: tuple[str, ...]
) -> PairCounts:
    k = len(frameworks)
    wins = np.zeros((k, k))
    ties = np.zeros((k, k))
    for obs in observations:
        r = obs.ranking
        for i in range(k):
            for j in range(i + 1, k):
                if r[i] < r[j]:
                    wins[i, j] += 1
                elif r[j] < r[i]:
                    wins[j, i] += 1
                else:
                    ties[i, j] += 1
                    ties[j, i] += 1
    return PairCounts(frameworks=frameworks, wins=wins, ties=ties)


def _check_connected(n_matrix: np.ndarray) -> None:
    k = n_matrix.shape[0]
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(k):
            if j not in seen and n_matrix[i, j] > 0:
                seen.add(j)
                frontier.append(j)
    if len(seen) != k:
        raise DisconnectedGraph(
            f"only {len(seen)} of {k} frameworks connected by comparisons"
        )


def bt_log_likelihood(pc: PairCounts, worths: np.ndarray) -> float:
    a = pc.effective_wins()
    ll = 0.0
    k = pc.k
    for i in range(k):
        for j in range(k):
            if i != j and a[i, j] > 0:
                ll += a[i, j] * (
                    math.log(worths[i]) - math.log(worths[i] + worths[j])
                )
    return ll


def fit_bt_mle(pc: PairCounts, return_history: bool = False):
    """Maximum-likelihood worths by minorization-maximization.

    Update: pi_i <- W_i / sum_{j != i} n_ij / (pi_i + pi_j), renormalized
    each sweep; the likelihood is non-decreasing across sweeps.  A
    framework with zero effective wins has its worth pinned at 1e-12 and
    is reported as degenerate.  With return_history=True also returns the
    per-sweep log-likelihood trace.
    """
    a = pc.effective_wins()
    n = a + a.T
    _check_connected(n)
    k = pc.k

    # The interior MLE exists only on strongly connected subsets of the
    # win digraph (ties count both ways, so tied pairs are always mutual
    # edges).  A framework that never takes anything from some opponent
    # set has a boundary MLE: its worth drifts to 0 hyperbolically, which
    # both stalls the MM loop and loses the within-tier ratios.  Fit each
    # strongly connected component interiorly and scale the tiers of the
    # condensation by the worth floor, which reproduces the boundary
    # limit (cross-tier pairs contribute zero to the likelihood there).
    tiers = _condensation_tiers(a)
    pi = np.empty(k)
    sweeps_budget = MLE_MAX_SWEEPS
    histories = []
    for component, level in tiers:
        idx = np.array(sorted(component))
        sub = _mm_interior(
            a[np.ix_(idx, idx)], sweeps_budget,
            collect=return_history,
        )
        if return_history:
            sub, hist = sub
            histories.append((idx, hist))
        pi[idx] = sub * WORTH_FLOOR**level
    pi = np.maximum(pi, 0.0)
    pi[pi == 0.0] = WORTH_FLOOR ** len(tiers)
    pi = pi / pi.sum()

    top = min(tiers, key=lambda cl: cl[1])[0]
    worth = WorthVector(
        frameworks=pc.frameworks,
        worths=pi,
        log_likelihood=bt_log_likelihood(pc, pi),
        degenerate=tuple(
            f for i, f in enumerate(pc.frameworks) if i not in top
        ),
    )
    if return_history:
        return worth, _merge_histories(pc, histories, pi)
    return worth


def _condensation_tiers(a: np.ndarray) -> list[tuple[set, int]]:
    """Strongly connected components of the win digraph with their
    topological depth (0 = never dominated)."""
    k = a.shape[0]
    reach = (a > 0) | np.eye(k, dtype=bool)
    for _ in range(int(math.ceil(math.log2(max(k, 2)))) + 1):
        reach = reach | (reach @ reach)
    mutual = reach & reach.T
    seen = set()
    components = []
    for i in range(k):
        if i in seen:
            continue
        comp = {j for j in range(k) if mutual[i, j]}
        seen |= comp
        components.append(comp)

    memo: dict[frozenset, int] = {}

    def level(comp):
        key = frozenset(comp)
        if key in memo:
            return memo[key]
        memo[key] = 0  # break cycles defensively; condensation is a DAG
        parents = [
            other
            for other in components
            if other is not comp
            and any(a[p, c] > 0 for p in other for c in comp)
        ]
        value = 1 + max((level(p) for p in parents), default=-1)
        memo[key] = value
        return value

    return [(comp, level(comp)) for comp in components]


def _mm_interior(a_sub: np.ndarray, max_sweeps: int, collect: bool = False):
    """MM iteration on a strongly connected block; converges geometrically."""
    m = a_sub.shape[0]
    if m == 1:
        return (np.ones(1), [np.ones(1)]) if collect else np.ones(1)
    n = a_sub + a_sub.T
    w = a_sub.sum(axis=1)
    mask = n > 0
    pi = np.full(m, 1.0 / m)
    trace = [pi.copy()] if collect else None
    for _ in range(max_sweeps):
        denom_matrix = np.zeros((m, m))
        psum = pi[:, None] + pi[None, :]
        denom_matrix[mask] = n[mask] / psum[mask]
        denom = denom_matrix.sum(axis=1)
        new_pi = w / denom
        new_pi = new_pi / new_pi.sum()
        delta = np.abs(new_pi - pi).max()
        pi = new_pi
        if collect:
            trace.append(pi.copy())
        if delta < MLE_TOL:
            break
    return (pi, trace) if collect else pi


def _merge_histories(pc: PairCounts, histories, final_pi) -> list[float]:
    """Global log-likelihood trace built from the per-component sweeps."""
    length = max(len(h) for _, h in histories)
    k = pc.k
    out = []
    for step in range(length):
        pi = final_pi.copy()
        for idx, hist in histories:
            snap = hist[min(step, len(hist) - 1)]
            scale = final_pi[idx].sum()
            pi[idx] = snap * scale
        out.append(bt_log_likelihood(pc, pi))
    return out


def _observation_scores(
    observations: list[PreferenceObservation], worths: np.ndarray
) -> np.ndarray:
    """Per-observation gradient of the pairwise log-likelihood with
    respect to log-worths (last framework as reference): (n_obs, k-1)."""
    k = len(worths)
    p = worths[:, None] / (worths[:, None] + worths[None, :])
    rankings = np.array([obs.ranking for obs in observations])
    n_obs = len(observations)
    scores = np.zeros((n_obs, k - 1))
    for i in range(k - 1):
        for j in range(k):
            if i == j:
                continue
            r_i = rankings[:, i]
            r_j = rankings[:, j]
            x = np.where(r_i < r_j, 1.0, np.where(r_i == r_j, 0.5, 0.0))
            scores[:, i] += x - p[i, j]
    return scores


def _sup_lm_statistic(scores: np.ndarray, order: np.ndarray, cuts: np.ndarray,
                      v_inv: np.ndarray) -> float:
    n = scores.shape[0]
    cumulative = np.cumsum(scores[order], axis=0)
    best = 0.0
    for t in cuts:
        s_t = cumulative[t - 1]
        quad = float(s_t @ v_inv @ s_t)
        stat = quad * n / (t * (n - t))
        if stat > best:
            best = stat
    return best


def instability_pvalue(
    observations: list[PreferenceObservation],
    worth: WorthVector,
    meta_feature: str,
    permutations: int = PERMUTATIONS,
    seed: int = 0,
) -> float:
    """Permutation p-value of the sup-LM parameter-instability statistic.

    Observations are ordered by the feature; cumulative score-process
    norms are maximized over cut positions between distinct feature
    values inside a 10% boundary trim.  The null distribution comes from
    permuting the ordering (deterministic for a given seed); p is
    (1 + #{perm >= observed}) / (permutations + 1), so the smallest
    attainable p is 1 / (permutations + 1).
    """
    values = np.array([obs.meta[meta_feature] for obs in observations])
    if np.unique(values).size < 2:
        raise ConstantFeature(f"{meta_feature!r} constant within node")
    n = len(observations)
    scores = _observation_scores(observations, worth.worths)
    scores = scores - scores.mean(axis=0)
    v = scores.T @ scores / n
    v_inv = np.linalg.pinv(v)

    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    trim = max(1, int(math.ceil(TRIM_FRACTION * n)))
    distinct_boundary = sorted_vals[:-1] != sorted_vals[1:]
    cut_positions = np.array(
        [t for t in range(trim, n - trim + 1)
         if t <= n - 1 and distinct_boundary[t - 1]],
        dtype=int,
    )
    if cut_positions.size == 0:
        raise ConstantFeature(
            f"{meta_feature!r} admits no cut inside the trimmed range"
        )
    observed = _sup_lm_statistic(scores, order, cut_positions, v_inv)

    rng = np.random.default_rng(seed)
    exceed = 0
    identity = np.arange(n)
    for _ in range(permutations):
        perm = rng.permutation(identity)
        stat = _sup_lm_statistic(scores, perm, cut_positions, v_inv)
        if stat >= observed:
            exceed += 1
    return (1 + exceed) / (permutations + 1)


def best_cutpoint(
    observations: list[PreferenceObservation],
    meta_feature: str,
    min_node: int,
    frameworks: tuple[str, ...],
) -> tuple[float, float]:
    """Cutpoint (midpoint of consecutive distinct values) maximizing the
    sum of the child BT log-likelihoods."""
    values = np.array([obs.meta[meta_feature] for obs in observations])
    distinct = np.unique(values)
    best = None
    for lo, hi in zip(distinct[:-1], distinct[1:]):
        cut = 0.5 * (lo + hi)
        left = [o for o, v in zip(observations, values) if v <= cut]
        right = [o for o, v in zip(observations, values) if v > cut]
        if len(left) < min_node or len(right) < min_node:
            continue
        try:
            ll = (
                fit_bt_mle(pair_counts(left, frameworks)).log_likelihood
                + fit_bt_mle(pair_counts(right, frameworks)).log_likelihood
            )
        except DisconnectedGraph:
            continue
        if best is None or ll > best[1]:
            best = (cut, ll)
    if best is None:
        raise NoValidCutpoint(
            f"no cutpoint on {meta_feature!r} leaves {min_node} observations per side"
        )
    return best


def grow_bt_tree(
    observations: list[PreferenceObservation],
    meta_features: list[str],
    frameworks: tuple[str, ...],
    alpha: float = 0.05,
    max_depth: int = 3,
    min_node: int | None = None,
    permutations: int = PERMUTATIONS,
    seed: int = 0,
) -> BtTree:
    """Recursive partitioning: fit, test each feature, Bonferroni-correct,
    split on the lowest corrected p-value while p < alpha and the depth
    and minimum-node limits permit."""
    if min_node is None:
        min_node = 8 * len(frameworks)
    if len(observations) < 2 * min_node:
        raise TooFewObservations(
            f"{len(observations)} observations < 2 * min_node = {2 * min_node}"
        )
    node_counter = [0]

    def build(node_obs, depth):
        node_id = node_counter[0]
        node_counter[0] += 1
        worth = fit_bt_mle(pair_counts(node_obs, frameworks))
        leaf = BtLeaf(worth=worth, n=len(node_obs))
        if depth >= max_depth or len(node_obs) < 2 * min_node:
            return leaf
        candidates = []
        tested = 0
        for f_idx, feature in enumerate(meta_features):
            try:
                p = instability_pvalue(
                    node_obs, worth, feature,
                    permutations=permutations,
                    seed=_node_seed(seed, node_id, f_idx),
                )
            except ConstantFeature:
                continue
            tested += 1
            candidates.append((p, feature))
        if not candidates:
            return leaf
        candidates.sort()
        p_raw, feature = candidates[0]
        p_corrected = min(1.0, p_raw * tested)
        if p_corrected >= alpha:
            return leaf
        try:
            cut, _ = best_cutpoint(node_obs, feature, min_node, frameworks)
        except NoValidCutpoint:
            return leaf
        left_obs = [o for o in node_obs if o.meta[feature] <= cut]
        right_obs = [o for o in node_obs if o.meta[feature] > cut]
        return BtSplit(
            feature=feature,
            cutpoint=float(cut),
            p_value=float(p_corrected),
            n=len(node_obs),
            left=build(left_obs, depth + 1),
            right=build(right_obs, depth + 1),
        )

    root = build(list(observations), 0)
    return BtTree(
        root=root,
        frameworks=frameworks,
        alpha=alpha,
        max_depth=max_depth,
        min_node=min_node,
    )


def _node_seed(seed: int, node_id: int, feature_idx: int) -> int:
    return int(
        np.random.SeedSequence(
            entropy=seed, spawn_key=(node_id, feature_idx)
        ).generate_state(1)[0]
    )
