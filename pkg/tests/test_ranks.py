"""Imputation, ranks, Friedman/Nemenyi, scaling, Pareto fronts."""

from __future__ import annotations

import numpy as np
import pytest

from oracles import (
    enumerate_rank_matrices,
    friedman_chi2_exact,
    nemenyi_q_montecarlo,
    pareto_brute,
)
from tabbench.errors import DegenerateInput, MissingBaseline, UnsupportedAlpha, UnsupportedK
from tabbench.ranks import (
    ScoreMatrix,
    average_ranks,
    cd_analysis,
    friedman_test,
    impute_missing,
    nemenyi_cd,
    pareto_front,
    scale_scores,
)
from tabbench.stats import chi2_sf

from conftest import make_matrix


class TestImputation:
    def test_missing_cell_takes_fold_prior_bit_exactly(self):
        values = np.array([
            [[0.9, 0.8, 0.7]],
            [[0.6, np.nan, 0.5]],
        ])
        prior = np.array([[0.41, 1.09, 0.37]])
        sm = make_matrix(["a", "b"], ["t"], ["logloss"], [3], values, prior)
        out = impute_missing(sm)
        assert out.values[1, 0, 1] == 1.09
        assert out.imputed[1, 0, 1]
        assert not out.imputed[0, 0, 1]
        assert out.is_complete()

    def test_complete_matrix_unchanged(self):
        values = np.ones((2, 1, 3))
        prior = np.full((1, 3), 9.9)
        sm = make_matrix(["a", "b"], ["t"], ["auc"], [3], values, prior)
        out = impute_missing(sm)
        assert np.array_equal(out.values, sm.values)
        assert not out.imputed.any()

    def test_all_folds_missing_all_imputed(self):
        values = np.array([
            [[0.9, 0.8]],
            [[np.nan, np.nan]],
        ])
        prior = np.array([[0.5, 0.6]])
        out = impute_missing(make_matrix(["a", "b"], ["t"], ["auc"], [2], values, prior))
        assert list(out.values[1, 0]) == [0.5, 0.6]
        assert out.imputed[1, 0].all()

    def test_missing_baseline_raises(self):
        values = np.array([[[np.nan]]])
        prior = np.array([[np.nan]])
        with pytest.raises(MissingBaseline):
            impute_missing(make_matrix(["a"], ["t"], ["auc"], [1], values, prior))


class TestAverageRanks:
    def test_monotone_auc(self):
        values = np.array([[[0.9]], [[0.8]], [[0.7]]])
        sm = make_matrix(
            ["A", "B", "C"], ["t"], ["auc"], [1], values, np.zeros((1, 1))
        )
        per_task, rbar = average_ranks(sm)
        assert list(per_task[0]) == [1.0, 2.0, 3.0]
        assert list(rbar) == [1.0, 2.0, 3.0]

    def test_logloss_tie_averaged(self):
        values = np.array([[[0.5]], [[0.5]]])
        sm = make_matrix(["A", "B"], ["t"], ["logloss"], [1], values, np.zeros((1, 1)))
        per_task, _ = average_ranks(sm)
        assert list(per_task[0]) == [1.5, 1.5]

    def test_opposite_tasks_average_to_center(self):
        values = np.array(
            [
                [[0.9], [0.1]],
                [[0.8], [0.2]],
                [[0.7], [0.3]],
            ]
        )
        sm = make_matrix(
            ["A", "B", "C"], ["t1", "t2"], ["auc", "auc"], [1, 1],
            values, np.zeros((2, 1)),
        )
        per_task, rbar = average_ranks(sm)
        assert list(per_task[0]) == [1.0, 2.0, 3.0]
        assert list(per_task[1]) == [3.0, 2.0, 1.0]
        assert list(rbar) == [2.0, 2.0, 2.0]

    def test_rank_sums_property(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            k = int(rng.integers(2, 6))
            n = int(rng.integers(1, 5))
            folds = int(rng.integers(1, 4))
            values = rng.random((k, n, folds))
            sm = make_matrix(
                [f"f{i}" for i in range(k)],
                [f"t{j}" for j in range(n)],
                ["auc"] * n,
                [folds] * n,
                values,
                np.zeros((n, folds)),
            )
            per_task, rbar = average_ranks(sm)
            for row in per_task:
                assert row.sum() == pytest.approx(k * (k + 1) / 2)
            assert np.all(rbar >= 1.0) and np.all(rbar <= k)

    def test_ranks_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(1)
        values = rng.random((3, 2, 4))
        sm = make_matrix(
            ["A", "B", "C"], ["t1", "t2"], ["auc", "auc"], [4, 4],
            values, np.zeros((2, 4)),
        )
        _, rbar = average_ranks(sm)
        # per-task strictly monotone transform of the fold-mean ordering:
        # scale each task's scores by a positive factor and shift
        transformed = values * 3.0 + 1.0
        sm2 = make_matrix(
            ["A", "B", "C"], ["t1", "t2"], ["auc", "auc"], [4, 4],
            transformed, np.zeros((2, 4)),
        )
        _, rbar2 = average_ranks(sm2)
        assert np.argmin(rbar) == np.argmin(rbar2)
        assert np.argmax(rbar) == np.argmax(rbar2)


class TestFriedman:
    def test_null_case(self):
        ranks = [[1.0, 2.0, 3.0], [3.0, 2.0, 1.0], [2.0, 1.0, 3.0], [2.0, 3.0, 1.0]]
        chi2, p = friedman_test(ranks)
        rbar = np.mean(ranks, axis=0)
        assert list(rbar) == [2.0, 2.0, 2.0]
        assert chi2 == 0.0
        assert p == 1.0

    def test_k3_n4_formula_value(self):
        ranks = [[1, 2, 3]] * 4
        chi2, _ = friedman_test(ranks)
        assert chi2 == pytest.approx(8.0, abs=1e-12)

    def test_k2_n9_formula_value(self):
        ranks = [[1, 2]] * 9
        chi2, _ = friedman_test(ranks)
        assert chi2 == pytest.approx(9.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_exact_enumeration_oracle(self, n):
        for matrix in enumerate_rank_matrices(3, n):
            chi2, _ = friedman_test(np.array(matrix, dtype=float))
            exact = friedman_chi2_exact(matrix)
            assert chi2 == pytest.approx(float(exact), abs=1e-12)

    def test_label_permutation_invariance(self):
        rng = np.random.default_rng(3)
        ranks = np.array([rng.permutation([1.0, 2.0, 3.0, 4.0]) for _ in range(6)])
        chi2, _ = friedman_test(ranks)
        perm = rng.permutation(4)
        chi2_p, _ = friedman_test(ranks[:, perm])
        assert chi2_p == pytest.approx(chi2, abs=1e-12)

    def test_degenerate_input(self):
        with pytest.raises(DegenerateInput):
            friedman_test([[1.0, 2.0]])

    def test_pvalue_against_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        for chi2, dof in [(8.0, 2), (9.0, 1), (0.5, 4), (25.0, 7), (3.3, 19)]:
            assert chi2_sf(chi2, dof) == pytest.approx(
                scipy_stats.chi2.sf(chi2, dof), rel=1e-10
            )


class TestNemenyi:
    def test_cd_value_k3_n10(self):
        cd = nemenyi_cd(3, 10, alpha=0.05)
        assert cd == pytest.approx(1.0478, abs=0.0005)

    def test_quadrupling_n_halves_cd(self):
        assert nemenyi_cd(4, 40, 0.05) == pytest.approx(nemenyi_cd(4, 10, 0.05) / 2)

    def test_boundary_convention_geq(self):
        values = np.array([[[0.9], [0.9]], [[0.8], [0.8]]])
        sm = make_matrix(
            ["A", "B"], ["t1", "t2"], ["auc", "auc"], [1, 1], values, np.zeros((2, 1))
        )
        result = cd_analysis(sm, alpha=0.05)
        gap = abs(result.avg_ranks[0] - result.avg_ranks[1])
        # artificial: compare using the exact gap as the CD
        from dataclasses import replace

        forced = replace(result, critical_difference=gap)
        assert forced.different(0, 1)

    def test_unsupported_parameters(self):
        with pytest.raises(UnsupportedAlpha):
            nemenyi_cd(3, 10, alpha=0.2)
        with pytest.raises(UnsupportedK):
            nemenyi_cd(25, 10, alpha=0.05)

    def test_table_against_montecarlo(self):
        from tabbench.stats import nemenyi_q

        for k in (2, 3, 5):
            q_mc = nemenyi_q_montecarlo(k, 0.05, samples=1_000_000)
            assert nemenyi_q(k, 0.05) == pytest.approx(q_mc, abs=0.005)


class TestScaling:
    def test_linear_interpolation_auc(self):
        values = np.array([[[0.8]], [[0.9]], [[0.85]]])
        sm = make_matrix(
            ["rf", "best", "mid"], ["t"], ["auc"], [1], values, np.zeros((1, 1))
        )
        scaled, excluded = scale_scores(sm, "rf")
        assert excluded == []
        assert scaled[0, 0] == 0.0
        assert scaled[1, 0] == 1.0
        assert scaled[2, 0] == pytest.approx(0.5)

    def test_logloss_negate_first(self):
        values = np.array([[[0.6]], [[0.4]], [[0.7]]])
        sm = make_matrix(
            ["rf", "best", "worse"], ["t"], ["logloss"], [1], values, np.zeros((1, 1))
        )
        scaled, _ = scale_scores(sm, "rf")
        assert scaled[1, 0] == 1.0
        assert scaled[2, 0] == pytest.approx(-0.5)

    def test_degenerate_task_excluded(self):
        values = np.array([[[0.8], [0.5]], [[0.8], [0.9]]])
        sm = make_matrix(
            ["rf", "other"], ["t1", "t2"], ["auc", "auc"], [1, 1],
            values, np.zeros((2, 1)),
        )
        scaled, excluded = scale_scores(sm, "rf")
        assert excluded == ["t1"]
        assert np.isnan(scaled[:, 0]).all()
        assert scaled[1, 1] == 1.0

    def test_scaling_preserves_ordering(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            values = rng.random((4, 1, 3))
            sm = make_matrix(
                ["rf", "b", "c", "d"], ["t"], ["rmse"], [3], values, np.zeros((1, 3))
            )
            from tabbench.ranks import fold_means

            means = fold_means(sm)
            oriented = -means[:, 0]
            scaled, excluded = scale_scores(sm, "rf")
            if excluded:
                continue
            assert list(np.argsort(oriented)) == list(np.argsort(scaled[:, 0]))


class TestBuildMatrixFilters:
    def test_multi_constraint_store_needs_filter(self):
        from tabbench.ranks import build_score_matrix
        from tabbench.store import JobRecord, ResultsStore

        store = ResultsStore(
            metadata={
                "suite_id": "s",
                "tasks": [{"id": "t", "metric": "auc", "n_folds": 1,
                           "problem_type": "binary", "metafeatures": {}}],
                "frameworks": [{"id": "f", "mode": "local", "version_label": ""}],
            }
        )
        for cid, score in (("1h", 0.8), ("4h", 0.9)):
            store.append(
                JobRecord(
                    framework_id="f", task_id="t", fold=0, constraint_id=cid,
                    status="ok", wall_time_s=1.0, score=score, metric="auc",
                )
            )
        with pytest.raises(DegenerateInput):
            build_score_matrix(store)
        sm = build_score_matrix(store, constraint_id="4h")
        assert sm.values[0, 0, 0] == 0.9

    def test_metric_filter_restricts_tasks(self):
        from tabbench.ranks import build_score_matrix
        from tabbench.store import JobRecord, ResultsStore

        store = ResultsStore(
            metadata={
                "suite_id": "s",
                "tasks": [
                    {"id": "a", "metric": "auc", "n_folds": 1,
                     "problem_type": "binary", "metafeatures": {}},
                    {"id": "r", "metric": "rmse", "n_folds": 1,
                     "problem_type": "regression", "metafeatures": {}},
                ],
                "frameworks": [{"id": "f", "mode": "local", "version_label": ""}],
            }
        )
        for task, score in (("a", 0.8), ("r", 1.5)):
            store.append(
                JobRecord(
                    framework_id="f", task_id=task, fold=0, constraint_id="c",
                    status="ok", wall_time_s=1.0, score=score,
                    metric="auc" if task == "a" else "rmse",
                )
            )
        sm = build_score_matrix(store, metric="rmse")
        assert sm.tasks == ("r",)


class TestPareto:
    def test_spec_example(self):
        points = [(5, 0.9), (10, 0.5), (8, 0.45), (20, 0.4)]
        assert pareto_front(points) == [(5.0, 0.9), (10.0, 0.5), (20.0, 0.4)]

    def test_single_point(self):
        assert pareto_front([(3.0, 0.1)]) == [(3.0, 0.1)]

    def test_duplicate_appears_once(self):
        assert pareto_front([(3.0, 0.1), (3.0, 0.1)]) == [(3.0, 0.1)]

    def test_matches_brute_force_on_random_sets(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            pts = rng.random((int(rng.integers(1, 25)), 2))
            assert sorted(pareto_front(pts)) == pareto_brute(pts)

    def test_front_internal_non_dominance(self):
        rng = np.random.default_rng(8)
        pts = rng.random((40, 2))
        front = pareto_front(pts)
        for p in front:
            for q in front:
                if p != q:
                    assert not (q[0] >= p[0] and q[1] >= p[1])
        for p in map(tuple, pts):
            if tuple(p) not in front:
                assert any(q[0] >= p[0] and q[1] >= p[1] for q in front)
