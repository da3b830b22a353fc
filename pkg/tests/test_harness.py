import csv
import json
import os

import numpy as np
import pytest

from greedycd.cli import main, parse_config_file, parse_synthetic
from greedycd.data_io import DiagQuadratic, RandomSvm, SynthSpec
from greedycd.harness import (CSV_HEADER, ExperimentConfig, RunSpec,
                              adaptivity_report, emit_plot_csv,
                              run_experiment)


def small_lasso_cfg(tmp_path, runs=None, **kw):
    runs = runs or [RunSpec("gs-s"), RunSpec("uniform", rule="uniform")]
    defaults = dict(problem="lasso",
                    data=SynthSpec(DiagQuadratic((4.0, 2.0, 1.0)), seed=1),
                    runs=runs, lam=0.05, max_iters=150, tol=0.0,
                    out=str(tmp_path / "exp"))
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestRunExperiment:
    def test_writes_csv_and_json(self, tmp_path):
        cfg = small_lasso_cfg(tmp_path)
        summary = run_experiment(cfg)
        assert os.path.exists(cfg.out + ".csv")
        assert os.path.exists(cfg.out + ".json")
        assert summary["f_star"] is not None
        assert set(summary["runs"]) == {"gs-s", "uniform"}

    def test_csv_header_golden(self, tmp_path):
        cfg = small_lasso_cfg(tmp_path)
        run_experiment(cfg)
        with open(cfg.out + ".csv") as fh:
            header = fh.readline().strip().split(",")
        assert header == ["run", "iter", "wall_ns", "f_value",
                          "suboptimality", "nnz", "step_kind", "coord",
                          "theta", "gap", "test_accuracy", "fell_back"]

    def test_suboptimality_nonneg_and_monotone(self, tmp_path):
        cfg = small_lasso_cfg(tmp_path)
        summary = run_experiment(cfg)
        for name in summary["runs"]:
            sub = [r["suboptimality"] for r in summary["rows"]
                   if r["run"] == name]
            assert all(x >= 0 for x in sub)
            assert all(b <= a + 1e-12 for a, b in zip(sub, sub[1:]))

    def test_deterministic_rerun(self, tmp_path):
        cfg = small_lasso_cfg(tmp_path)
        r1 = run_experiment(cfg)
        r2 = run_experiment(cfg)
        strip = lambda rows: [{k: v for k, v in row.items()
                               if k != "wall_ns"} for row in rows]
        assert strip(r1["rows"]) == strip(r2["rows"])

    def test_svm_rows_report_nonneg_gap(self, tmp_path):
        cfg = ExperimentConfig(
            problem="svm", data=SynthSpec(RandomSvm(20, 5, 0.4), seed=2),
            runs=[RunSpec("gs-s")], lam=1.0, max_iters=100, tol=1e-10,
            out=str(tmp_path / "svm"))
        summary = run_experiment(cfg)
        gaps = [r["gap"] for r in summary["rows"]]
        assert gaps and all(g is not None and g >= -1e-10 for g in gaps)

    def test_failing_run_does_not_abort_siblings(self, tmp_path):
        cfg = small_lasso_cfg(
            tmp_path, runs=[RunSpec("ok"),
                            RunSpec("broken", rule="no-such-rule")])
        summary = run_experiment(cfg)
        assert "ok" in summary["runs"]
        assert "broken" in summary["errors"]

    def test_parallel_matches_serial(self, tmp_path):
        cfg1 = small_lasso_cfg(tmp_path, workers=1)
        cfg2 = small_lasso_cfg(tmp_path, workers=2)
        strip = lambda rows: [{k: v for k, v in row.items()
                               if k != "wall_ns"} for row in rows]
        assert strip(run_experiment(cfg1)["rows"]) == \
            strip(run_experiment(cfg2)["rows"])

    def test_empty_runs_rejected(self, tmp_path):
        cfg = ExperimentConfig(
            problem="lasso",
            data=SynthSpec(DiagQuadratic((1.0,)), seed=0), runs=[])
        with pytest.raises(ValueError):
            cfg.validate()

    def test_test_split_accuracy_reported(self, tmp_path):
        cfg = ExperimentConfig(
            problem="svm", data=SynthSpec(RandomSvm(40, 5, 0.5), seed=4),
            runs=[RunSpec("gs-s")], lam=1.0, max_iters=300, tol=1e-8,
            test_split=0.25, out=str(tmp_path / "acc"))
        summary = run_experiment(cfg)
        accs = [r["test_accuracy"] for r in summary["rows"]
                if r["test_accuracy"] is not None]
        assert len(accs) == 1 and 0.5 <= accs[0] <= 1.0


class TestAdaptivityReport:
    def test_four_way_series_invariants(self, tmp_path):
        cfg = small_lasso_cfg(
            tmp_path,
            runs=[RunSpec("lsh", engine="smips", backend="lsh",
                          lsh_bits=4, lsh_tables=6)],
            max_iters=80, tol=1e-9)
        report = adaptivity_report(cfg)
        assert report["rows"]
        for row in report["rows"]:
            assert row["exact_mask"] <= row["exact_all"] + 1e-12
            assert row["lsh_mask"] <= row["exact_mask"] + 1e-12
        assert os.path.exists(cfg.out + "_adaptivity.csv")

    def test_requires_one_lsh_run(self, tmp_path):
        cfg = small_lasso_cfg(tmp_path)
        with pytest.raises(ValueError):
            adaptivity_report(cfg)


class TestPlotCsv:
    def _rows(self, n, run="r1"):
        return [{"run": run, "iter": i, "wall_ns": 1000,
                 "suboptimality": 10.0 / (i + 1)} for i in range(n)]

    def test_small_series_kept_whole(self):
        text = emit_plot_csv(self._rows(10))
        lines = text.strip().splitlines()
        assert lines[0] == "r1_iter,r1_suboptimality"
        assert len(lines) == 11

    def test_zero_floored(self):
        rows = self._rows(3)
        rows[-1]["suboptimality"] = 0.0
        text = emit_plot_csv(rows)
        assert "1e-16" in text

    def test_downsampling_keeps_endpoints(self):
        text = emit_plot_csv(self._rows(5000))
        lines = text.strip().splitlines()[1:]
        assert len(lines) <= 2000
        assert lines[0].startswith("0,")
        assert lines[-1].startswith("4999,")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            emit_plot_csv([])

    def test_wall_axis(self):
        text = emit_plot_csv(self._rows(4), x_axis="wall")
        assert text.splitlines()[0] == "r1_wall,r1_suboptimality"


class TestCli:
    def test_success_exit_zero(self, tmp_path, capsys):
        code = main(["--problem", "lasso", "--synthetic", "diag:4,2,1",
                     "--lambda", "0.05", "--max-iters", "100",
                     "--out", str(tmp_path / "run")])
        assert code == 0
        assert os.path.exists(str(tmp_path / "run") + ".csv")

    def test_config_error_exit_one(self, capsys):
        assert main(["--problem", "lasso"]) == 1
        assert main(["--problem", "lasso", "--synthetic", "bogus:1"]) == 1

    def test_run_failure_exit_two(self, tmp_path, capsys):
        # the inner-product engine rejects elastic net, failing the run
        code = main(["--problem", "elasticnet", "--synthetic", "diag:4,2,1",
                     "--engine", "smips", "--max-iters", "10",
                     "--out", str(tmp_path / "fail")])
        assert code == 2

    def test_config_file_with_overrides(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("problem = lasso\n"
                       "synthetic = diag:4,2,1  # instance\n"
                       "lambda = 0.05\n"
                       "max-iters = 50\n")
        code = main([str(cfg), "--max-iters", "20",
                     "--out", str(tmp_path / "c")])
        assert code == 0
        rows = list(csv.DictReader(open(str(tmp_path / "c") + ".csv")))
        assert max(int(r["iter"]) for r in rows) <= 19

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("no-such-key = 1\n")
        assert main([str(cfg)]) == 1

    def test_multi_rule_comparison(self, tmp_path, capsys):
        code = main(["--problem", "lasso", "--synthetic", "diag:4,2,1",
                     "--rule", "gs-s,uniform", "--max-iters", "50",
                     "--out", str(tmp_path / "multi")])
        assert code == 0
        rows = list(csv.DictReader(open(str(tmp_path / "multi") + ".csv")))
        assert {r["run"] for r in rows} == {"gs-s", "uniform"}

    def test_adaptivity_flag(self, tmp_path, capsys):
        code = main(["--problem", "lasso", "--synthetic", "diag:4,2,1",
                     "--engine", "smips", "--backend", "lsh",
                     "--lsh-bits", "4", "--lsh-tables", "4",
                     "--max-iters", "40", "--adaptivity",
                     "--out", str(tmp_path / "adapt")])
        assert code == 0
        assert os.path.exists(str(tmp_path / "adapt") + "_adaptivity.csv")

    def test_parse_synthetic_specs(self):
        spec = parse_synthetic("diag:1,2,4", seed=3)
        assert spec.kind.spectrum == (1.0, 2.0, 4.0)
        spec = parse_synthetic("correlated:n=100,d=20", seed=3)
        assert spec.kind.n == 100 and spec.kind.d == 20
        spec = parse_synthetic("svm:n=50,d=10,margin=0.5", seed=3)
        assert spec.kind.margin == 0.5
        with pytest.raises(ValueError):
            parse_synthetic("mystery:1", seed=0)

    def test_parse_config_file(self, tmp_path):
        f = tmp_path / "a.cfg"
        f.write_text("# comment\nproblem = svm\n\ntol = 1e-6\n")
        assert parse_config_file(str(f)) == {"problem": "svm", "tol": "1e-6"}
        f.write_text("problem svm\n")
        with pytest.raises(ValueError):
            parse_config_file(str(f))
