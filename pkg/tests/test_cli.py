"""Command-line interface: argument handling, config files, exit codes."""

import json

import numpy as np
import pytest

import perturbcs.harness as harness_mod
from perturbcs import (
    ROLE_ENSEMBLE,
    ROLE_NOISE,
    ROLE_PERTURBATION,
    ROLE_SIGNAL,
    compute_drip,
    compute_ric,
    drip_threshold,
    gen_gaussian_ensemble,
    gen_noise,
    gen_perturbation,
    gen_signal,
    sparse_bound_constants,
)
from perturbcs.cli import main
from perturbcs.harness import DoaRunResult, SweepResult, import_results, run_sweep
from perturbcs.serialization import parse_report


def _report(capsys):
    return parse_report(capsys.readouterr().out)


SOLVE_ARGS = [
    "solve", "--n", "8", "--m", "6", "--k", "1", "--r", "0.1",
    "--epsilon", "0.1", "--trials", "2", "--strategies", "oracle,aa",
    "--seed", "1",
]


class TestParsing:
    def test_help_exits_zero(self):
        assert main(["--help"]) == 0

    def test_no_arguments_fails(self):
        assert main([]) == 1

    def test_unknown_command_fails(self):
        assert main(["transmogrify"]) == 1

    def test_bad_choice_fails(self):
        assert main(["ric", "--mode", "psychic"]) == 1


class TestGen:
    def test_instance_satisfies_measurement_model(self, capsys, tmp_path):
        out = tmp_path / "inst.npz"
        code = main([
            "gen", "--n", "10", "--m", "6", "--k", "2", "--r", "0.2",
            "--epsilon", "0.3", "--seed", "5", "--out", str(out),
        ])
        assert code == 0
        data = np.load(out)
        phi = data["A"] + data["B"] * data["beta_o"][np.newaxis, :]
        assert np.allclose(data["y"], phi @ data["x_o"] + data["e"],
                           atol=1e-12)
        assert data["k"] == 2
        assert data["epsilon"] == 0.3
        fields = _report(capsys)
        assert fields["path"] == str(out)
        assert fields["eps_mult"] == pytest.approx(
            np.linalg.norm(data["B"] @ (data["beta_o"] * data["x_o"]))
        )

    def test_arrays_match_seeded_generators(self, tmp_path):
        out = tmp_path / "inst.npz"
        main([
            "gen", "--n", "10", "--m", "6", "--k", "2", "--r", "0.2",
            "--epsilon", "0.3", "--seed", "5", "--out", str(out),
        ])
        data = np.load(out)
        ens = gen_gaussian_ensemble(6, 10, 0.2, (5, 0, ROLE_ENSEMBLE))
        assert np.array_equal(data["A"], ens.A)
        assert np.array_equal(data["B"], ens.B)
        assert np.array_equal(
            data["x_o"], gen_signal(10, 2, "unit-spikes", (5, 0, ROLE_SIGNAL))
        )
        assert np.array_equal(
            data["beta_o"], gen_perturbation(10, 0.2, (5, 0, ROLE_PERTURBATION))
        )
        assert np.array_equal(
            data["e"], gen_noise(6, 0.3, (5, 0, ROLE_NOISE))
        )

    def test_default_output_lands_in_cwd(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert main(["gen", "--n", "8", "--m", "5", "--k", "1"]) == 0
        assert (tmp_path / "instance.npz").exists()


class TestSolve:
    def test_report_matches_direct_run(self, capsys):
        assert main(SOLVE_ARGS) == 0
        fields = _report(capsys)
        cfg = harness_mod.ExperimentConfig(
            n=8, m=6, k=1, r=0.1, epsilon=0.1, trials=2, master_seed=1,
            strategies=("oracle", "aa"),
        )
        records = [harness_mod.run_trial(cfg, i) for i in range(2)]
        expected = np.mean([r.outcomes["oracle"].signal_err for r in records])
        assert fields["oracle.mean_signal_err"] == pytest.approx(expected)
        assert fields["failure_rate"] == 0.0

    def test_config_file_equals_flags(self, capsys, tmp_path):
        main(SOLVE_ARGS)
        flag_out = capsys.readouterr().out
        cfg_path = tmp_path / "solve.json"
        cfg_path.write_text(json.dumps({
            "n": 8, "m": 6, "k": 1, "r": 0.1, "epsilon": 0.1, "trials": 2,
            "strategies": "oracle,aa", "seed": 1,
        }), encoding="utf-8")
        assert main(["solve", "--config", str(cfg_path)]) == 0
        assert capsys.readouterr().out == flag_out

    def test_flag_overrides_config(self, capsys, tmp_path):
        cfg_path = tmp_path / "solve.json"
        cfg_path.write_text(json.dumps({
            "n": 8, "m": 6, "k": 1, "r": 0.1, "epsilon": 0.1, "trials": 1,
            "strategies": "oracle", "seed": 1,
        }), encoding="utf-8")
        assert main(["solve", "--config", str(cfg_path),
                     "--epsilon", "0.4"]) == 0
        assert _report(capsys)["epsilon"] == 0.4

    def test_unknown_config_key_fails(self, capsys, tmp_path):
        cfg_path = tmp_path / "solve.json"
        cfg_path.write_text(json.dumps({"n": 8, "bogus": 1}),
                            encoding="utf-8")
        assert main(["solve", "--config", str(cfg_path)]) == 1
        assert "unknown config keys" in capsys.readouterr().err

    def test_invalid_json_fails(self, capsys, tmp_path):
        cfg_path = tmp_path / "broken.json"
        cfg_path.write_text("{not json", encoding="utf-8")
        assert main(["solve", "--config", str(cfg_path)]) == 1
        assert "not valid JSON" in capsys.readouterr().err

    def test_missing_config_fails(self, capsys, tmp_path):
        assert main(["solve", "--config",
                     str(tmp_path / "absent.json")]) == 1
        assert "cannot read config" in capsys.readouterr().err

    def test_failures_drive_exit_code(self, capsys, monkeypatch):
        original = harness_mod._run_strategy

        def sabotage(name, *args):
            if name == "aa":
                raise RuntimeError("boom")
            return original(name, *args)

        monkeypatch.setattr(harness_mod, "_run_strategy", sabotage)
        assert main(SOLVE_ARGS) == 2
        assert _report(capsys)["failure_rate"] == 0.5
        assert main(SOLVE_ARGS + ["--fail-threshold", "0.6"]) == 0

    def test_report_file_written(self, capsys, tmp_path):
        out = tmp_path / "solve.txt"
        assert main(SOLVE_ARGS + ["--out", str(out)]) == 0
        stdout_fields = _report(capsys)
        file_fields = parse_report(out.read_text(encoding="utf-8"))
        assert file_fields == stdout_fields


class TestRic:
    def test_matches_direct_computation(self, capsys):
        assert main(["ric", "--m", "6", "--n", "8", "--k", "2",
                     "--seed", "3"]) == 0
        fields = _report(capsys)
        ens = gen_gaussian_ensemble(6, 8, 0.0, (3, 0, ROLE_ENSEMBLE))
        report = compute_ric(ens.A, 2)
        assert fields["delta"] == report.delta
        assert fields["enumerated_supports"] == report.enumerated_supports
        assert fields["exact"] is True

    def test_sampled_mode(self, capsys):
        assert main(["ric", "--m", "6", "--n", "8", "--k", "2",
                     "--mode", "sampled", "--sample-trials", "5"]) == 0
        fields = _report(capsys)
        assert fields["exact"] is False
        assert fields["enumerated_supports"] == 5

    def test_budget_violation_fails(self, capsys):
        assert main(["ric", "--m", "6", "--n", "8", "--k", "2",
                     "--budget", "1"]) == 1
        assert "error:" in capsys.readouterr().err


class TestDrip:
    def test_matches_direct_computation(self, capsys):
        assert main(["drip", "--m", "6", "--n", "8", "--k", "2",
                     "--r", "0.2", "--seed", "3"]) == 0
        fields = _report(capsys)
        ens = gen_gaussian_ensemble(6, 8, 0.2, (3, 0, ROLE_ENSEMBLE))
        report = compute_drip(ens, 2)
        assert fields["delta_bar"] == report.delta_bar
        assert fields["threshold"] == drip_threshold(0.2)
        assert fields["condition_met"] == (
            report.delta_bar < drip_threshold(0.2)
        )


class TestBounds:
    def test_sparse_constants(self, capsys):
        assert main(["bounds", "--kind", "sparse", "--delta-bar", "0.2",
                     "--r", "0.1", "--psi-norm", "2.0"]) == 0
        fields = _report(capsys)
        report = sparse_bound_constants(0.2, 0.1, 2.0)
        assert fields["C"] == report.C
        assert fields["C_p"] == report.C_p
        assert fields["condition_met"] is True
        assert "max_radius" in fields

    def test_missing_required_flag(self, capsys):
        assert main(["bounds", "--kind", "sparse", "--delta-bar", "0.2",
                     "--r", "0.1"]) == 1
        assert "requires --psi-norm" in capsys.readouterr().err

    def test_baseline_kind(self, capsys):
        assert main(["bounds", "--kind", "baseline", "--delta", "0.1",
                     "--eps-ratio", "0.05"]) == 0
        fields = _report(capsys)
        assert "C_ptb" in fields
        assert "C0_std" in fields

    def test_compressible_requires_k(self, capsys):
        assert main(["bounds", "--kind", "compressible",
                     "--delta-bar", "0.2", "--r", "0.1",
                     "--psi-norm", "2.0"]) == 1
        assert "requires --k" in capsys.readouterr().err

    def test_bad_kind_via_config(self, capsys, tmp_path):
        cfg_path = tmp_path / "bounds.json"
        cfg_path.write_text(json.dumps({"kind": "junk"}), encoding="utf-8")
        assert main(["bounds", "--config", str(cfg_path)]) == 1
        assert "kind must be" in capsys.readouterr().err


class TestDoaCommand:
    def test_summary_and_export(self, capsys, tmp_path):
        out = tmp_path / "doa.csv"
        code = main(["doa", "--m", "16", "--n", "30", "--trials", "2",
                     "--seed", "5", "--out", str(out)])
        assert code == 0
        fields = _report(capsys)
        assert fields["kind"] == "doa"
        assert fields["trials"] == 2
        assert 0.0 <= fields["within_grid_cell_rate"] <= 1.0
        back = import_results(str(out))
        assert isinstance(back, DoaRunResult)
        assert back.trials == 2


class TestSweepCommand:
    SWEEP_ARGS = [
        "sweep", "--n", "8", "--m", "6", "--k", "1", "--r", "0.1",
        "--trials", "2", "--strategies", "oracle,aa",
        "--sweep-param", "epsilon", "--sweep-values", "0.1,0.3",
        "--seed", "1",
    ]

    def test_export_matches_direct_run(self, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(self.SWEEP_ARGS + ["--out", str(out)]) == 0
        back = import_results(str(out))
        assert isinstance(back, SweepResult)
        cfg = harness_mod.ExperimentConfig(
            n=8, m=6, k=1, r=0.1, epsilon=0.5, trials=2, master_seed=1,
            strategies=("oracle", "aa"), sweep_param="epsilon",
            sweep_values=(0.1, 0.3),
        )
        direct = run_sweep(cfg)
        for key, agg in direct.table.items():
            assert back.table[key].mean_signal_err == agg.mean_signal_err

    def test_needs_axis_or_preset(self, capsys):
        assert main(["sweep", "--n", "8", "--m", "6", "--k", "1"]) == 1
        assert "--preset or both" in capsys.readouterr().err

    def test_failures_drive_exit_code(self, capsys, monkeypatch):
        original = harness_mod._run_strategy

        def sabotage(name, *args):
            if name == "aa":
                raise RuntimeError("boom")
            return original(name, *args)

        monkeypatch.setattr(harness_mod, "_run_strategy", sabotage)
        assert main(self.SWEEP_ARGS) == 2

    def test_plot_pipeline(self, capsys, tmp_path):
        csv_path = tmp_path / "sweep.csv"
        svg_path = tmp_path / "sweep.svg"
        assert main(self.SWEEP_ARGS + ["--out", str(csv_path)]) == 0
        assert main(["plot", "--data", str(csv_path),
                     "--out", str(svg_path)]) == 0
        assert "oracle" in svg_path.read_text(encoding="utf-8")

    def test_plot_requires_data_and_out(self, capsys, tmp_path):
        assert main(["plot", "--out", str(tmp_path / "x.svg")]) == 1
        assert "requires --data" in capsys.readouterr().err
        assert main(["plot", "--data", str(tmp_path / "x.csv")]) == 1
        assert "requires --out" in capsys.readouterr().err
