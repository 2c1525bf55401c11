"""Report tables, CD geometry, error charts, and bundle determinism."""

from __future__ import annotations

import numpy as np
import pytest

from tabbench.ranks import CdResult
from tabbench.report import (
    ReportConfig,
    bundle_report,
    cd_groups,
    render_budget_violin,
    render_cd_svg,
    render_error_stacks,
    results_table,
)
from tabbench.store import JobRecord, ResultsStore


def make_store(n_folds=4, with_inference=False, seed=0):
    """Synthetic store: 2 tasks x n_folds x 3 frameworks, some failures."""
    rng = np.random.default_rng(seed)
    tasks = [
        {
            "id": "t-bin", "problem_type": "binary", "metric": "auc",
            "n_folds": n_folds,
            "metafeatures": {
                "n_instances": 100, "n_features": 4, "missing_ratio": 0.0,
                "n_classes": 2, "minority_class_ratio": 0.4,
                "categorical_ratio": 0.0,
            },
        },
        {
            "id": "t-reg", "problem_type": "regression", "metric": "rmse",
            "n_folds": n_folds,
            "metafeatures": {
                "n_instances": 220, "n_features": 7, "missing_ratio": 0.1,
                "n_classes": 0, "minority_class_ratio": 1.0,
                "categorical_ratio": 0.25,
            },
        },
    ]
    store = ResultsStore(
        metadata={
            "suite_id": "synthetic",
            "constraint": {
                "id": "1h8c", "max_runtime_s": 3600, "cores": 8,
                "memory_mb": 32768, "disk_gb": None, "leniency_s": 3600,
            },
            "seed": seed,
            "stratified": True,
            "tool_version": "test",
            "created_at": "2000-01-01T00:00:00+00:00",
            "frameworks": [
                {"id": "constpred", "mode": "local", "version_label": "builtin"},
                {"id": "alpha", "mode": "local", "version_label": "1"},
                {"id": "beta", "mode": "local", "version_label": "2"},
            ],
            "tasks": tasks,
        }
    )
    base = {"constpred": 0.5, "alpha": 0.9, "beta": 0.75}
    for task in tasks:
        for fold in range(n_folds):
            for fw, center in base.items():
                if fw == "beta" and fold == 0 and task["id"] == "t-bin":
                    store.append(
                        JobRecord(
                            framework_id=fw, task_id=task["id"], fold=fold,
                            constraint_id="1h8c", status="memory",
                            wall_time_s=123.0, metric=task["metric"],
                            log_excerpt="MemoryError",
                        )
                    )
                    continue
                if task["metric"] == "auc":
                    score = center + rng.normal(0, 0.01)
                else:
                    score = (1.2 - center) * 10 + rng.normal(0, 0.05)
                inference = None
                if with_inference and fw != "constpred":
                    rate = {"alpha": 50.0, "beta": 4000.0}[fw]
                    inference = {
                        "file_10k": {
                            "repetitions": 10, "median_s": 10000 / rate,
                            "rows": 10000, "rows_per_second": rate,
                            "harness_wall_s": 1.0, "self_reported_total_s": 1.0,
                        }
                    }
                store.append(
                    JobRecord(
                        framework_id=fw, task_id=task["id"], fold=fold,
                        constraint_id="1h8c", status="ok",
                        wall_time_s=100.0 + fold,
                        training_duration_s=1800.0 + 100 * fold,
                        predict_duration_s=1.0,
                        score=float(score), metric=task["metric"],
                        inference=inference,
                    )
                )
    return store


class TestResultsTable:
    def test_complete_aggregation_format(self):
        store = make_store()
        csv_text = results_table(store)
        alpha_bin = next(
            line for line in csv_text.splitlines()
            if line.startswith("alpha,t-bin")
        )
        display = alpha_bin.split(",")[-1]
        assert "±" in display and "(" not in display

    def test_missing_fold_count_annotated(self):
        store = make_store()
        csv_text = results_table(store)
        beta_bin = next(
            line for line in csv_text.splitlines() if line.startswith("beta,t-bin")
        )
        assert beta_bin.endswith("(1)")

    def test_all_failed_renders_dash(self):
        store = make_store()
        # wipe alpha's regression scores
        for key in list(store.records):
            r = store.records[key]
            if r.framework_id == "alpha" and r.task_id == "t-reg":
                del store.records[key]
                store.records[key] = JobRecord(
                    framework_id=r.framework_id, task_id=r.task_id, fold=r.fold,
                    constraint_id=r.constraint_id, status="implementation",
                    wall_time_s=1.0, metric=r.metric, log_excerpt="x",
                )
        line = next(
            line for line in results_table(store).splitlines()
            if line.startswith("alpha,t-reg")
        )
        assert line.endswith(",-")

    def test_aggregates_recomputable_from_store(self):
        store = make_store()
        csv_lines = results_table(store).splitlines()[1:]
        for line in csv_lines:
            fw, task, _metric, mean, std, missing, _display = line.split(",")
            scores = [
                r.score for r in store.records.values()
                if r.framework_id == fw and r.task_id == task and r.score is not None
            ]
            if not scores:
                assert mean == ""
                continue
            assert float(mean) == pytest.approx(np.mean(scores), abs=1e-12)


def cd_result(ranks, cd, frameworks=None):
    k = len(ranks)
    frameworks = frameworks or tuple(f"f{i}" for i in range(k))
    return CdResult(
        frameworks=tuple(frameworks),
        avg_ranks=tuple(ranks),
        per_task_ranks=((tuple(ranks)),),
        friedman_chi2=1.0,
        friedman_pvalue=0.5,
        critical_difference=cd,
        alpha=0.05,
    )


class TestCdDiagram:
    def test_connector_spans_close_pair_only(self):
        groups = cd_groups(cd_result([1.2, 1.8, 3.0], 1.0))
        assert groups == [(0, 1)]

    def test_all_within_cd_single_connector(self):
        groups = cd_groups(cd_result([1.2, 1.5, 1.8], 1.0))
        assert groups == [(0, 1, 2)]

    def test_two_frameworks(self):
        assert cd_groups(cd_result([1.0, 2.0], 1.5)) == [(0, 1)]
        assert cd_groups(cd_result([1.0, 2.0], 0.5)) == []

    def test_groups_are_maximal_runs(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            k = int(rng.integers(2, 8))
            ranks = sorted(rng.uniform(1, k, k))
            cd = float(rng.uniform(0.1, k))
            result = cd_result(ranks, cd)
            groups = cd_groups(result)
            for group in groups:
                spread = max(ranks[i] for i in group) - min(ranks[i] for i in group)
                assert spread < cd
            # every adjacent non-different pair is covered by some group
            for i in range(k):
                for j in range(i + 1, k):
                    if abs(ranks[j] - ranks[i]) < cd:
                        assert any(i in g and j in g for g in groups)

    def test_svg_contains_axis_and_cd_bar(self):
        svg = render_cd_svg(cd_result([1.2, 1.8, 3.0], 1.0, ("aa", "bb", "cc")))
        assert svg.startswith("<svg")
        assert "CD = 1.0000" in svg
        assert "aa (1.20)" in svg
        assert "bb (1.80)" in svg


class TestErrorCharts:
    def test_stack_counts_match_store(self):
        store = make_store()
        svg = render_error_stacks(store)
        assert "1 err" in svg  # beta's single memory failure
        assert "0 err" in svg

    def test_budget_guides_present(self):
        store = make_store()
        svg = render_budget_violin(store)
        assert "budget" in svg and "leniency end" in svg
        assert 'stroke="#d62728"' in svg

    def test_empty_store_renders_axes(self):
        store = ResultsStore(
            metadata={
                "suite_id": "empty",
                "constraint": {"id": "c", "max_runtime_s": 100, "leniency_s": 10},
                "frameworks": [], "tasks": [],
            }
        )
        svg = render_error_stacks(store)
        assert svg.startswith("<svg")


class TestBundle:
    def test_bundle_has_artifacts_and_is_deterministic(self, tmp_path):
        store = make_store()
        config1 = ReportConfig(out_dir=tmp_path / "r1", bt_permutations=49)
        config2 = ReportConfig(out_dir=tmp_path / "r2", bt_permutations=49)
        b1 = bundle_report(store, config1)
        b2 = bundle_report(store, config2)
        assert len(b1.artifacts) >= 6
        assert "index.html" in b1.artifacts
        assert b1.artifacts == b2.artifacts
        for name in b1.artifacts:
            assert (tmp_path / "r1" / name).read_bytes() == (
                tmp_path / "r2" / name
            ).read_bytes()

    def test_pareto_absent_without_inference(self, tmp_path):
        store = make_store(with_inference=False)
        bundle = bundle_report(store, ReportConfig(out_dir=tmp_path / "r",
                                                   bt_permutations=49))
        assert "pareto.svg" not in bundle.artifacts
        assert any("Pareto" in n for n in bundle.notices)

    def test_pareto_present_with_inference(self, tmp_path):
        store = make_store(with_inference=True)
        bundle = bundle_report(store, ReportConfig(out_dir=tmp_path / "r",
                                                   bt_permutations=49))
        assert "pareto.svg" in bundle.artifacts

    def test_single_framework_filter_omits_cd(self, tmp_path):
        store = make_store()
        config = ReportConfig(
            out_dir=tmp_path / "r", frameworks=["alpha"], bt_permutations=49
        )
        bundle = bundle_report(store, config)
        assert "cd.svg" not in bundle.artifacts
        assert any("CD diagram omitted" in n for n in bundle.notices)
