"""Config validation (fail-closed) and CLI behaviour: determinism, outputs,
exit codes, manifests."""
import json
import math
from pathlib import Path

import numpy as np
import pytest

from qlsim.cli import main
from qlsim.config import Config, parse_mode_list, parse_zeeman_target, trap_from_config
from qlsim.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="test.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestConfigValidation:
    def test_unknown_section_rejected(self, tmp_path):
        path = write(tmp_path, "[nonsense]\nx = 1\n")
        with pytest.raises(ConfigError, match="unknown config section"):
            Config.load(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = write(tmp_path, "[trap]\naxial_freq_hz = 8e5\ntypo_key = 3\n")
        with pytest.raises(ConfigError, match="unknown key"):
            Config.load(path)

    def test_bad_float_rejected(self, tmp_path):
        path = write(tmp_path, "[trap]\naxial_freq_hz = banana\n")
        with pytest.raises(ConfigError, match="cannot parse"):
            Config.load(path)

    def test_bad_bool_rejected(self, tmp_path):
        path = write(tmp_path, "[protocol]\ndouble_mapping = maybe\n")
        with pytest.raises(ConfigError):
            Config.load(path)

    def test_level_sections_accepted(self, tmp_path):
        path = write(tmp_path, "[levels.Al+.1S0]\ng_factor = -0.0008\n")
        cfg = Config.load(path)
        assert cfg.get("levels.Al+.1S0", "g_factor") == pytest.approx(-0.0008)

    def test_trap_override(self, tmp_path):
        path = write(tmp_path, "[trap]\naxial_freq_hz = 900e3\n")
        trap = trap_from_config(Config.load(path))
        assert trap.axial_freq_hz == pytest.approx(900e3)

    def test_mode_list_parse(self):
        modes = parse_mode_list("888e3:0.06:0.3, 1.596e6:0.04:0.1")
        assert modes[0] == (888e3, 0.06, 0.3)
        with pytest.raises(ConfigError):
            parse_mode_list("888e3:0.06")

    def test_zeeman_target_parse(self):
        assert parse_zeeman_target("+5/2") == 2.5
        assert parse_zeeman_target("-5/2") == -2.5
        with pytest.raises(ConfigError):
            parse_zeeman_target("3/2")

    def test_resolved_hash_stability(self, tmp_path):
        path = write(tmp_path, "[trap]\naxial_freq_hz = 900e3\n")
        a = Config.load(path).resolved_hash({"seed": 0})
        b = Config.load(path).resolved_hash({"seed": 0})
        c = Config.load(path).resolved_hash({"seed": 1})
        assert a == b != c


class TestCliCore:
    def test_no_subcommand_is_usage_error(self, capsys):
        assert main([]) == 1

    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_bad_config_exit_2(self, tmp_path, capsys):
        bad = write(tmp_path, "[nonsense]\nx = 1\n")
        code = main(["modes", "--config", str(bad), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_numerical_failure_exit_3(self, tmp_path, capsys):
        unstable = write(
            tmp_path,
            "[trap]\nradial_freq_x_hz = 900e3\nradial_freq_y_hz = 400e3\n"
            "dc_radial_asymmetry_hz = 500e3\n",
        )
        code = main(["modes", "--config", str(unstable), "--out", str(tmp_path / "o")])
        assert code == 3

    def test_modes_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert main(["modes", "--out", str(out)]) == 0
        text = (out / "modes.csv").read_text().splitlines()
        assert text[0] == "label,freq_hz,b1,b2,heating_rate,nbar"
        body = "\n".join(text)
        assert "axial-in-phase" in body and "axial-out-of-phase" in body
        freqs = {ln.split(",")[0]: float(ln.split(",")[1]) for ln in text[1:]}
        assert freqs["axial-in-phase"] == pytest.approx(888e3, rel=0.01)
        assert freqs["axial-out-of-phase"] == pytest.approx(1.596e6, rel=0.01)
        manifest = json.loads((out / "MANIFEST-modes.json").read_text())
        assert manifest["seed"] == 0 and manifest["tool_version"]

    def test_budget_reference_result(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "budget", "--table", str(CONFIGS / "shift_table.csv"),
            "--f0", "1122842857334711", "--out", str(out),
        ])
        assert code == 0
        result = json.loads((out / "budget_result.json").read_text())
        assert result["f_final_hz"] == 1122842857334736
        assert result["uncertainty_hz"] == pytest.approx(93.0, abs=1.0)

    def test_chain_default_and_config(self, tmp_path):
        out = tmp_path / "out"
        assert main(["chain", "--out", str(out)]) == 0
        res = json.loads((out / "chain_result.json").read_text())
        assert res["result_millihertz"] == 1122842857334736000
        assert main(["chain", "--config", str(CONFIGS / "chain.cfg"), "--out", str(out)]) == 0
        res = json.loads((out / "chain_result.json").read_text())
        assert res["result_millihertz"] == 1122842857334736000

    def test_ramsey_detuning_determinism(self, tmp_path):
        cfg = write(
            tmp_path,
            "[ramsey]\nscan = detuning\nt_pulse_s = 20e-6\nt_wait_s = 100e-6\n"
            "start = -5e3\nstop = 5e3\nn_points = 11\n",
        )
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["ramsey", "--config", str(cfg), "--seed", "0", "--out", str(out_a)]) == 0
        assert main(["ramsey", "--config", str(cfg), "--seed", "0", "--out", str(out_b)]) == 0
        assert (out_a / "ramsey_detuning.csv").read_bytes() == (
            out_b / "ramsey_detuning.csv"
        ).read_bytes()

    def test_qls_batch_determinism_and_summary(self, tmp_path):
        cfg = write(tmp_path, "[qls-batch]\nexcitation_probability = 0.5\nn_shots = 400\n")
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main([
                "qls-batch", "--config", str(cfg), "--seed", "7", "--out", str(out),
            ]) == 0
        assert (out_a / "shots.csv").read_bytes() == (out_b / "shots.csv").read_bytes()
        summary = json.loads((out_a / "batch_summary.json").read_text())
        assert summary["n_shots"] == 400
        assert abs(summary["p_hat"] - 0.5) < 4 * summary["sigma_qpn"]

    def test_pump_output(self, tmp_path):
        out = tmp_path / "out"
        assert main(["pump", "--out", str(out)]) == 0
        lines = (out / "pump.csv").read_text().splitlines()
        assert lines[0] == "repetition,target_population,ground_total,excited_total"
        first = float(lines[1].split(",")[1])
        last = float(lines[-1].split(",")[1])
        assert last > first

    def test_compare_insufficient_data_exit_4(self, tmp_path):
        cfg = write(tmp_path, "[compare]\nduration_s = 300\n")
        assert main(["compare", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4

    def test_compare_synthetic(self, tmp_path):
        out = tmp_path / "out"
        assert main([
            "compare", "--config", str(CONFIGS / "compare.cfg"), "--out", str(out),
        ]) == 0
        res = json.loads((out / "compare_result.json").read_text())
        assert res["mean_diff_hz"] == pytest.approx(1.3, abs=0.2)

    def test_fit_synthetic_pipeline(self, tmp_path):
        out = tmp_path / "out"
        assert main([
            "fit", "--config", str(CONFIGS / "fit_synthetic.cfg"), "--out", str(out),
        ]) == 0
        res = json.loads((out / "fit_result.json").read_text())
        assert res["f0_sigma_hz"] == pytest.approx(36.0, rel=0.05)
        assert res["g_factor"] == pytest.approx(0.428132, abs=1e-5)
        lines = (out / "fit_residuals.csv").read_text().splitlines()
        assert lines[0].startswith("set_id,s_pm,b_gauss,residual_hz,sigma_hz")
        assert len(lines) == 19

    def test_fit_campaign_csv(self, tmp_path):
        from qlsim.metrology import synth_campaign
        from qlsim.output import write_csv

        rng = np.random.default_rng(8)
        sets = synth_campaign(rng)
        campaign = tmp_path / "campaign.csv"
        write_csv(
            campaign,
            ["set_id", "s_pm", "ramsey_wait_us", "al_detuning_hz", "al_sigma_hz", "b_gauss"],
            [
                (s.set_id, s.s_pm, s.ramsey_wait_s * 1e6, s.al_detuning_hz,
                 s.al_sigma_hz, s.b_gauss)
                for s in sets
            ],
        )
        out = tmp_path / "out"
        assert main(["fit", "--campaign", str(campaign), "--out", str(out)]) == 0
        res = json.loads((out / "fit_result.json").read_text())
        assert res["slope_hz_per_gauss"] == pytest.approx(2.100056e6, rel=1e-4)

    def test_ramsey_dependence_pipeline(self, tmp_path):
        out = tmp_path / "out"
        assert main([
            "test-ramsey-dependence", "--config", str(CONFIGS / "fit_synthetic.cfg"),
            "--out", str(out),
        ]) == 0
        res = json.loads((out / "ramsey_dependence.json").read_text())
        assert 0.0 <= res["p_value"] <= 1.0
        assert res["n_sets"] == 18

    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
        assert "qlsim" in capsys.readouterr().out


class TestCliScans:
    def test_spectrum_small_grid(self, tmp_path):
        cfg = write(
            tmp_path,
            "[spectrum]\nprobe_duration_s = 400e-6\nprobe_rabi_hz = 1200\n"
            "grid_start_hz = 850e3\ngrid_stop_hz = 930e3\ngrid_step_hz = 4e3\n"
            "modes = 888e3:0.06:0.3\n",
        )
        out = tmp_path / "out"
        assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "spectrum.csv").read_text().splitlines()
        assert lines[0] == "detuning_hz,excitation_probability"
        rows = [ln.split(",") for ln in lines[1:]]
        peak = max(rows, key=lambda r: float(r[1]))
        assert float(peak[0]) == pytest.approx(888e3, abs=4e3)

    def test_spectrum_solved_modes(self, tmp_path):
        cfg = write(
            tmp_path,
            "[spectrum]\nprobe_duration_s = 300e-6\nprobe_rabi_hz = 1500\n"
            "grid_start_hz = 860e3\ngrid_stop_hz = 915e3\ngrid_step_hz = 5e3\n"
            "use_solved_modes = true\n",
        )
        out = tmp_path / "out"
        assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "spectrum.csv").read_text().splitlines()
        rows = [ln.split(",") for ln in lines[1:]]
        peak = max(rows, key=lambda r: float(r[1]))
        assert float(peak[0]) == pytest.approx(888e3, abs=5e3)

    def test_rabi_sideband_scenario(self, tmp_path):
        out = tmp_path / "out"
        assert main([
            "rabi", "--config", str(CONFIGS / "fig_rabi_sideband.cfg"), "--out", str(out),
        ]) == 0
        lines = (out / "rabi.csv").read_text().splitlines()
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        near_15us = data[np.abs(data[:, 0] - 15e-6) < 0.6e-6]
        assert near_15us[:, 1].max() >= 0.90

    def test_ramsey_contrast_scenario(self, tmp_path):
        out = tmp_path / "out"
        assert main([
            "ramsey", "--config", str(CONFIGS / "fig_ramsey_contrast.cfg"), "--out", str(out),
        ]) == 0
        lines = (out / "ramsey_contrast.csv").read_text().splitlines()
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        tau = -1.0 / np.polyfit(data[:, 0], np.log(data[:, 1]), 1)[0]
        assert tau == pytest.approx(598e-6, rel=0.02)

    def test_clock_scan_scenario(self, tmp_path):
        cfg = write(
            tmp_path,
            "[clock-scan]\nprobe_duration_s = 1e-3\ngrid_start_hz = -1.6e3\n"
            "grid_stop_hz = 1.6e3\ngrid_step_hz = 200\nn_experiments = 300\n"
            "[protocol]\ndouble_mapping = true\n",
        )
        out = tmp_path / "out"
        assert main(["clock-scan", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
        res = json.loads((out / "clock_scan.json").read_text())
        assert 700.0 <= res["fwhm_hz"] <= 1100.0

    def test_level_override_changes_g(self, tmp_path):
        cfg = write(
            tmp_path,
            "[fit]\nsynthesize = true\n[levels.Al+.1S0]\ng_factor = 0.0\n",
        )
        out = tmp_path / "out"
        assert main(["fit", "--config", str(cfg), "--seed", "1", "--out", str(out)]) == 0
        res = json.loads((out / "fit_result.json").read_text())
        # with g_ground = 0 the recovered g shifts by (5/7) g_ground_default
        assert res["g_factor"] == pytest.approx(0.428132 + (5 / 7) * 0.00079248, abs=5e-5)

    def test_plots_flag(self, tmp_path):
        pytest.importorskip("matplotlib")
        out = tmp_path / "out"
        assert main(["modes", "--plots", "--out", str(out)]) == 0
        assert (out / "modes.svg").exists()
