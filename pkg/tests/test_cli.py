"""CLI surface: run / report / validate exit codes and outputs."""

from __future__ import annotations

import pytest

from tabbench.cli import main
from tabbench.store import load


@pytest.fixture
def config_dir(toy_suite_dir):
    (toy_suite_dir / "constraints.yaml").write_text(
        "1m2c:\n"
        "  max_runtime_s: 60\n"
        "  cores: 2\n"
        "  leniency_s: 20\n",
        encoding="utf-8",
    )
    (toy_suite_dir / "frameworks.yaml").write_text(
        "constpred:\n"
        "  adapter_cmd: ['builtin:constant-predictor']\n"
        "  version_label: builtin\n"
        "mock-accurate:\n"
        "  adapter_cmd: ['{python}', '-m', 'tabbench.mock_adapter', 'accurate']\n"
        "mock-crashy:\n"
        "  adapter_cmd: ['{python}', '-m', 'tabbench.mock_adapter', 'crashy']\n",
        encoding="utf-8",
    )
    return toy_suite_dir


class TestRun:
    def test_builtin_baseline_end_to_end(self, config_dir, tmp_path, capsys):
        code = main([
            "run", "constpred", str(config_dir / "suite.yaml"), "1m2c",
            "-o", str(tmp_path / "out"),
        ])
        assert code == 0
        store = load(tmp_path / "out" / "results.ndjson")
        assert len(store.records) == 3 * 10  # 3 tasks x 10 folds
        assert all(r.status == "ok" for r in store.records.values())
        assert "ok: 30" in capsys.readouterr().out

    def test_crashy_failures_are_records_not_faults(self, config_dir, tmp_path):
        code = main([
            "run", "mock-crashy", str(config_dir / "suite.yaml"), "1m2c",
            "-o", str(tmp_path / "out"), "-p", "4",
        ])
        assert code == 0
        store = load(tmp_path / "out" / "results.ndjson")
        assert len(store.records) == 30
        assert {r.status for r in store.records.values()} == {"implementation"}

    def test_accumulating_two_frameworks_in_one_store(self, config_dir, tmp_path):
        out = str(tmp_path / "out")
        assert main(["run", "constpred", str(config_dir / "suite.yaml"), "1m2c",
                     "-o", out]) == 0
        assert main(["run", "mock-accurate", str(config_dir / "suite.yaml"), "1m2c",
                     "-o", out, "-p", "4"]) == 0
        store = load(tmp_path / "out" / "results.ndjson")
        assert len(store.records) == 60
        assert {k[0] for k in store.records} == {"constpred", "mock-accurate"}

    def test_unknown_constraint_usage_error(self, config_dir, tmp_path, capsys):
        code = main([
            "run", "constpred", str(config_dir / "suite.yaml"), "nope",
            "-o", str(tmp_path / "out"),
        ])
        assert code == 2
        assert "unknown constraint" in capsys.readouterr().err

    def test_missing_positional_exits_2(self, config_dir):
        with pytest.raises(SystemExit) as exc:
            main(["run", "constpred", str(config_dir / "suite.yaml")])
        assert exc.value.code == 2

    def test_comma_separated_framework_list(self, config_dir, tmp_path):
        code = main([
            "run", "constpred,mock-accurate", str(config_dir / "suite.yaml"),
            "1m2c", "-o", str(tmp_path / "out"), "-p", "4",
        ])
        assert code == 0
        store = load(tmp_path / "out" / "results.ndjson")
        assert len(store.records) == 60

    def test_run_config_extends_error_patterns(self, config_dir, tmp_path):
        # crashy raises RuntimeError: classify as data via a custom pattern
        (config_dir / "run.yaml").write_text(
            "errors:\n  data_patterns:\n    - 'pipeline optimization failure'\n",
            encoding="utf-8",
        )
        code = main([
            "run", "mock-crashy", str(config_dir / "suite.yaml"), "1m2c",
            "-o", str(tmp_path / "out"), "-p", "4",
            "--run-config", str(config_dir / "run.yaml"),
        ])
        assert code == 0
        store = load(tmp_path / "out" / "results.ndjson")
        assert {r.status for r in store.records.values()} == {"data"}


class TestReport:
    @pytest.fixture
    def store_path(self, config_dir, tmp_path):
        out = tmp_path / "out"
        main(["run", "constpred,mock-accurate", str(config_dir / "suite.yaml"),
              "1m2c", "-o", str(out), "-p", "4"])
        return out / "results.ndjson"

    def test_full_bundle(self, store_path, tmp_path, capsys):
        code = main([
            "report", str(store_path), "-o", str(tmp_path / "rep"),
            "--bt-seed", "1",
        ])
        assert code == 0
        assert (tmp_path / "rep" / "index.html").exists()
        assert (tmp_path / "rep" / "results.csv").exists()

    def test_single_framework_filter_notices_cd(self, store_path, tmp_path, capsys):
        code = main([
            "report", str(store_path), "-o", str(tmp_path / "rep"),
            "--frameworks", "constpred",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "CD diagram omitted" in out
        assert not (tmp_path / "rep" / "cd.svg").exists()

    def test_bad_store_path_exits_1(self, tmp_path):
        code = main(["report", str(tmp_path / "ghost.ndjson"), "-o", str(tmp_path)])
        assert code == 1


class TestValidate:
    def test_plan_summary(self, config_dir, capsys):
        code = main(["validate", str(config_dir / "suite.yaml")])
        assert code == 0
        out = capsys.readouterr().out
        assert "90 jobs" in out  # 3 tasks x 10 folds x 3 frameworks

    def test_invalid_suite_exits_1(self, config_dir, capsys):
        bad = config_dir / "bad.yaml"
        bad.write_text("id: x\ntasks:\n  - id: t\n", encoding="utf-8")
        code = main(["validate", str(bad)])
        assert code == 1
        assert "error:" in capsys.readouterr().err
