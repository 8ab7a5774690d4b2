"""Scenario runner: one subcommand per reproducible experiment.

Every subcommand reads the shared config format, runs deterministically under
a fixed seed, writes its primary CSV (plus a JSON summary where useful) and a
MANIFEST recording the resolved-config hash, seed, and tool version.  Exit
codes: 0 ok, 1 usage, 2 config error, 3 numerical failure, 4 insufficient
data.
"""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .atomic import SCHEMES
from .config import (
    Config,
    ion_pair_from_config,
    noise_from_config,
    parse_anchor,
    parse_chain_nodes,
    parse_mode_list,
    protocol_from_config,
    trap_from_config,
)
from .constants import CITED, CONSTANTS
from .dynamics import (
    ModeCoupling,
    NoiseModel,
    Pulse,
    RamseyPair,
    evolve,
    fwhm,
    ground_state,
    rabi_curve,
    ramsey_scan,
    spectrum_scan,
    thermal_state,
)
from .errors import ConfigError, InsufficientDataError, NumericalError, QlsimError
from .metrology import (
    ErrorBudget,
    HypothesisTest,
    duration_split_difference,
    error_budget_apply,
    fit_zeeman_line,
    frequency_chain_eval,
    chain_result_millihertz,
    comparison_histogram,
    hypothesis_test,
    load_budget_csv,
    load_campaign_csv,
    synth_campaign,
    synth_lab_series,
)
from .output import write_csv, write_json, write_manifest
from .protocol import (
    ProbeSpec,
    ProtocolConfig,
    PumpState,
    clock_state_change_rate,
    optical_pump,
    probe_excitation,
    run_batch,
)
from .trap import lamb_dicke, solve_crystal

_TWO_PI = 2.0 * math.pi


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qlsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qlsim {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    def common(p):
        p.add_argument("--config", type=Path, default=None, help="INI config file")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--plots", action="store_true", help="also write SVG plots")
        p.add_argument("--format", choices=("csv",), default="csv")

    p = sub.add_parser("modes", help="two-ion normal-mode table")
    common(p)
    p = sub.add_parser("spectrum", help="carrier/sideband absorption spectrum")
    common(p)
    p = sub.add_parser("rabi", help="Rabi flop on carrier or sideband")
    common(p)
    p = sub.add_parser("ramsey", help="Ramsey fringe / phase / contrast scans")
    common(p)
    p.add_argument("--scan", choices=("detuning", "phase", "wait"), default=None)
    p = sub.add_parser("pump", help="Zeeman optical-pumping population flow")
    common(p)
    p = sub.add_parser("qls-batch", help="batched protocol shots with projection noise")
    common(p)
    p.add_argument("--shots", type=int, default=None)
    p = sub.add_parser("clock-scan", help="clock-line scan via double-mapping readout")
    common(p)
    p.add_argument("--shots", type=int, default=None, help="experiments per point")
    p = sub.add_parser("fit", help="frequency vs signed-field line fit and g-factor")
    common(p)
    p.add_argument("--campaign", type=Path, default=None, help="campaign CSV")
    p = sub.add_parser("test-ramsey-dependence", help="duration-split hypothesis test")
    common(p)
    p.add_argument("--campaign", type=Path, default=None, help="campaign CSV")
    p = sub.add_parser("budget", help="systematic-shift budget application")
    common(p)
    p.add_argument("--table", type=Path, required=True, help="shift table CSV")
    p.add_argument("--f0", type=int, required=True, help="uncorrected frequency, Hz")
    p = sub.add_parser("compare", help="two-laboratory difference histogram")
    common(p)
    p.add_argument("--series-a", type=Path, default=None)
    p.add_argument("--series-b", type=Path, default=None)
    p = sub.add_parser("chain", help="exact frequency-chain arithmetic")
    common(p)
    p.add_argument("--anchor", type=str, default=None, help="override anchor frequency, Hz")
    return parser


def _load(args) -> Config:
    return Config.load(args.config) if args.config else Config.empty()


def _finish(args, cfg: Config, name: str) -> None:
    write_manifest(args.out, name, cfg.resolved_hash({"seed": args.seed}), args.seed)


def _maybe_plot(args, fn):
    if not args.plots:
        return
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fn(plt)


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_modes(args, cfg: Config) -> int:
    trap = trap_from_config(cfg)
    pair = ion_pair_from_config(cfg)
    sol = solve_crystal(trap, pair)
    rows = [
        (m.label, m.frequency_hz, m.eigenvector[0], m.eigenvector[1], m.heating_rate,
         m.mean_phonon_number)
        for m in sol.modes
    ]
    write_csv(args.out / "modes.csv", ["label", "freq_hz", "b1", "b2", "heating_rate", "nbar"], rows)
    write_json(
        args.out / "modes.json",
        {
            "separation_m": sol.separation_m,
            "equilibrium_m": list(sol.equilibrium_m),
            "axial_field_gradient_v_m2": sol.axial_field_gradient_v_m2,
        },
    )

    def plot(plt):
        fig, ax = plt.subplots(figsize=(6, 3))
        freqs = [m.frequency_hz / 1e6 for m in sol.modes]
        ax.stem(freqs, [1.0] * len(freqs))
        for m in sol.modes:
            ax.annotate(m.label, (m.frequency_hz / 1e6, 1.0), rotation=90, fontsize=7)
        ax.set_xlabel("mode frequency (MHz)")
        ax.set_yticks([])
        fig.tight_layout()
        fig.savefig(args.out / "modes.svg")

    _maybe_plot(args, plot)
    return 0


def _spectrum_modes(cfg: Config, trap, pair):
    body = cfg.section("spectrum")
    if "modes" in body:
        return [ModeCoupling(f, eta, nbar) for f, eta, nbar in parse_mode_list(str(body["modes"]))]
    sol = solve_crystal(trap, pair)
    wavelength = body.get("wavelength_nm", 729.0)
    cosine = body.get("projection_cosine", 1.0 / math.sqrt(3.0))
    out = []
    for m in sol.modes:
        eta = abs(lamb_dicke(m, 0, wavelength, cosine))
        out.append(ModeCoupling(m.frequency_hz, eta, m.mean_phonon_number, m.label))
    return out


def _cmd_spectrum(args, cfg: Config) -> int:
    body = cfg.section("spectrum")
    trap = trap_from_config(cfg)
    pair = ion_pair_from_config(cfg)
    modes = _spectrum_modes(cfg, trap, pair)
    duration = body.get("probe_duration_s", 500e-6)
    rabi_hz = body.get("probe_rabi_hz", 0.5 / duration / 2.0)  # pi area by default
    start = body.get("grid_start_hz", -2.3e6)
    stop = body.get("grid_stop_hz", 2.3e6)
    step = body.get("grid_step_hz", 4e3)
    window = body.get("window_hz", None)
    noise = noise_from_config(cfg)
    grid_hz = np.arange(start, stop + step / 2, step)
    if "modes" not in body:
        # zoomed scans keep only the auto-derived modes the grid can see
        win = window if window is not None else 25.0 / duration
        modes = [
            m for m in modes
            if min(abs(start - s * m.frequency_hz) for s in (1, -1)) <= win
            or min(abs(stop - s * m.frequency_hz) for s in (1, -1)) <= win
            or any(start <= s * m.frequency_hz <= stop for s in (1, -1))
        ]
    probe = Pulse(rabi_freq=_TWO_PI * rabi_hz, duration=duration)
    curve = spectrum_scan(probe, _TWO_PI * grid_hz, modes, noise, window_hz=window)
    write_csv(
        args.out / "spectrum.csv",
        ["detuning_hz", "excitation_probability"],
        zip(grid_hz.tolist(), curve.tolist()),
    )

    def plot(plt):
        fig, ax = plt.subplots(figsize=(7, 3))
        ax.plot(grid_hz / 1e6, curve, lw=0.8)
        ax.set_xlabel("probe detuning (MHz)")
        ax.set_ylabel("excitation probability")
        fig.tight_layout()
        fig.savefig(args.out / "spectrum.svg")

    _maybe_plot(args, plot)
    return 0


def _cmd_rabi(args, cfg: Config) -> int:
    body = cfg.section("rabi")
    sideband = body.get("sideband_order", 1)
    eta = body.get("lamb_dicke", 0.1)
    rabi_hz = body.get("rabi_freq_hz", 1.0 / (2.0 * eta * 15e-6) if sideband else 125e3)
    duration_max = body.get("duration_max_s", 60e-6)
    n_points = body.get("n_points", 121)
    nbar = body.get("nbar", 0.05)
    detuning = _TWO_PI * body.get("detuning_hz", 0.0)
    noise = noise_from_config(cfg)
    durations = np.linspace(0.0, duration_max, n_points)
    template = Pulse(
        rabi_freq=_TWO_PI * rabi_hz,
        duration=duration_max,
        detuning=detuning,
        sideband_order=sideband,
        lamb_dicke=eta if sideband else 0.0,
    )
    state0 = thermal_state(nbar) if sideband else thermal_state(nbar, 0 if nbar == 0 else None)
    curve = rabi_curve(template, durations, state0, noise)
    write_csv(
        args.out / "rabi.csv",
        ["duration_s", "excitation_probability"],
        zip(durations.tolist(), curve.tolist()),
    )

    def plot(plt):
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.plot(durations * 1e6, curve, ".-", ms=3)
        ax.set_xlabel("pulse duration (us)")
        ax.set_ylabel("excitation probability")
        fig.tight_layout()
        fig.savefig(args.out / "rabi.svg")

    _maybe_plot(args, plot)
    return 0


def _cmd_ramsey(args, cfg: Config) -> int:
    body = cfg.section("ramsey")
    scan = args.scan or str(body.get("scan", "detuning"))
    t_pulse = body.get("t_pulse_s", 50e-6)
    t_wait = body.get("t_wait_s", 200e-6)
    stark = _TWO_PI * body.get("stark_shift_hz", 0.0)
    noise = noise_from_config(cfg)
    contrast_scale = body.get("contrast_scale", 1.0)
    baseline = body.get("baseline", 0.0)
    pair = RamseyPair(t_pulse, t_wait, stark_shift=stark)
    state0 = ground_state(0)

    if scan == "detuning":
        start = body.get("start", -12e3)
        stop = body.get("stop", 12e3)
        n = body.get("n_points", 161)
        xs = np.linspace(start, stop, n)
        ys = ramsey_scan(pair, "detuning", _TWO_PI * xs, state0, noise)
        header = ["detuning_hz", "excitation_probability"]
        fname = "ramsey_detuning.csv"
    elif scan == "phase":
        start = body.get("start", -math.pi)
        stop = body.get("stop", math.pi)
        n = body.get("n_points", 81)
        det = _TWO_PI * body.get("detuning_hz", 0.0)
        xs = np.linspace(start, stop, n)
        ys = ramsey_scan(pair, "phase", xs, state0, noise, detuning=det)
        header = ["phase_rad", "excitation_probability"]
        fname = "ramsey_phase.csv"
    elif scan == "wait":
        start = body.get("start", 50e-6)
        stop = body.get("stop", 600e-6)
        n = body.get("n_points", 23)
        xs = np.linspace(start, stop, n)
        ys = ramsey_scan(pair, "wait", xs, state0, noise)
        header = ["wait_s", "contrast"]
        fname = "ramsey_contrast.csv"
    else:
        raise ConfigError(f"unknown ramsey scan {scan!r}")

    ys = baseline + contrast_scale * ys
    write_csv(args.out / fname, header, zip(xs.tolist(), ys.tolist()))

    def plot(plt):
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.plot(xs, ys, ".-", ms=3)
        ax.set_xlabel(header[0])
        ax.set_ylabel(header[1])
        fig.tight_layout()
        fig.savefig(args.out / fname.replace(".csv", ".svg"))

    _maybe_plot(args, plot)
    return 0


def _cmd_pump(args, cfg: Config) -> int:
    proto = protocol_from_config(cfg)
    initial = str(cfg.get("pump", "initial", "uniform"))
    if initial == "uniform":
        state = PumpState.uniform_ground()
    elif initial.startswith("pure:"):
        state = PumpState.pure_ground(float(Fraction(initial.split(":", 1)[1])))
    else:
        raise ConfigError(f"[pump] initial must be 'uniform' or 'pure:<m>', not {initial!r}")
    target = proto.target_zeeman_state
    rows = [(0, state.ground_population(target), state.ground.sum(), state.excited.sum())]
    from dataclasses import replace as dc_replace

    one_rep = dc_replace(proto, pump_repetitions=1)
    for rep in range(1, proto.pump_repetitions + 1):
        state = optical_pump(state, one_rep)
        rows.append((rep, state.ground_population(target), state.ground.sum(), state.excited.sum()))
    write_csv(
        args.out / "pump.csv",
        ["repetition", "target_population", "ground_total", "excited_total"],
        rows,
    )

    def plot(plt):
        fig, ax = plt.subplots(figsize=(5, 3))
        reps = [r[0] for r in rows]
        ax.plot(reps, [r[1] for r in rows], "o-")
        ax.set_xlabel("pump repetition")
        ax.set_ylabel("target-state population")
        fig.tight_layout()
        fig.savefig(args.out / "pump.svg")

    _maybe_plot(args, plot)
    return 0


def _batch_probe(cfg: Config) -> ProbeSpec | float:
    body = cfg.section("qls-batch")
    kind = str(body.get("probe", "single"))
    if "excitation_probability" in body:
        return float(body["excitation_probability"])
    if kind == "single":
        area_pi = body.get("pulse_area_pi", 1.0)
        duration = 4e-6
        omega = area_pi * math.pi / duration
        return ProbeSpec.single_pulse(
            Pulse(omega, duration, detuning=_TWO_PI * body.get("detuning_hz", 0.0))
        )
    if kind == "ramsey":
        pair = RamseyPair(body.get("t_pulse_s", 50e-6), body.get("t_wait_s", 200e-6))
        return ProbeSpec.ramsey_probe(
            pair, _TWO_PI * body.get("detuning_hz", 0.0), body.get("phase2", 0.0)
        )
    raise ConfigError(f"[qls-batch] probe must be 'single' or 'ramsey', not {kind!r}")


def _cmd_qls_batch(args, cfg: Config) -> int:
    proto = protocol_from_config(cfg)
    noise = noise_from_config(cfg)
    n_shots = args.shots or cfg.get("qls-batch", "n_shots", 1000)
    probe = _batch_probe(cfg)
    batch = run_batch(proto, probe, int(n_shots), args.seed, noise, keep_records=True)
    write_csv(
        args.out / "shots.csv",
        ["shot_index", "outcome"],
        [(rec.rng_stream_id, rec.outcome) for rec in batch.records],
    )
    write_json(
        args.out / "batch_summary.json",
        {
            "n_shots": batch.n_shots,
            "counts": batch.counts,
            "p_hat": batch.p_hat,
            "sigma_qpn": batch.sigma_qpn,
            "seed": batch.seed,
            "config_sha256": cfg.resolved_hash({"seed": args.seed}),
        },
    )
    return 0


def _cmd_clock_scan(args, cfg: Config) -> int:
    body = cfg.section("clock-scan")
    proto = protocol_from_config(cfg)
    if not proto.double_mapping:
        from dataclasses import replace as dc_replace

        proto = dc_replace(proto, double_mapping=True)
    duration = body.get("probe_duration_s", 1e-3)
    start = body.get("grid_start_hz", -2.5e3)
    stop = body.get("grid_stop_hz", 2.5e3)
    step = body.get("grid_step_hz", 50.0)
    n_exp = int(args.shots or body.get("n_experiments", 400))
    noise = noise_from_config(cfg)
    grid = np.arange(start, stop + step / 2, step)
    omega = math.pi / duration  # pi pulse on resonance
    p_curve = []
    change_curve = []
    for i, det in enumerate(grid):
        pulse = Pulse(omega, duration, detuning=_TWO_PI * det)
        p = evolve(ground_state(0), [pulse], noise).excited_population()
        p_curve.append(p)
        change_curve.append(
            clock_state_change_rate(proto, p, n_exp, args.seed + 7919 * i)
        )
    write_csv(
        args.out / "clock_scan.csv",
        ["detuning_hz", "state_change_probability", "excitation_probability"],
        zip(grid.tolist(), change_curve, p_curve),
    )
    try:
        width = fwhm(grid, np.array(change_curve))
    except NumericalError:
        width = float("nan")
    write_json(
        args.out / "clock_scan.json",
        {"fwhm_hz": width, "probe_duration_s": duration, "n_experiments": n_exp},
    )

    def plot(plt):
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.plot(grid / 1e3, change_curve, "o-", ms=3)
        ax.set_xlabel("detuning (kHz)")
        ax.set_ylabel("state-change probability")
        fig.tight_layout()
        fig.savefig(args.out / "clock_scan.svg")

    _maybe_plot(args, plot)
    return 0


_DEFAULT_ANCHOR = 1_122_842_857_334_000


def _campaign_sets(args, cfg: Config):
    body = cfg.section("fit")
    anchor = int(body.get("anchor_hz", _DEFAULT_ANCHOR))
    if args.campaign is not None:
        sets = load_campaign_csv(
            args.campaign,
            sigma_convention=str(body.get("sigma_convention", "mean")),
            n_measurements=int(body.get("n_measurements_per_set", 50)),
        )
        return sets, anchor
    rng = np.random.Generator(np.random.Philox(key=args.seed))
    sets = synth_campaign(
        rng,
        n_sets=int(body.get("n_sets", 18)),
        f0_offset_hz=body.get("f0_offset_hz", 711.0),
        slope_hz_per_gauss=body.get("slope_hz_per_gauss", 2.100056e6),
        b_nominal_gauss=body.get("b_gauss", 4.0),
        point_sigma_hz=body.get("point_sigma_hz", 36.0 * math.sqrt(18.0)),
    )
    return sets, anchor


def _cmd_fit(args, cfg: Config) -> int:
    from .config import schemes_from_config

    sets, anchor = _campaign_sets(args, cfg)
    fit = fit_zeeman_line(sets, anchor)
    g_ground = schemes_from_config(cfg)["Al+"].level("1S0").g_factor
    g, g_sigma = fit.g_factor(g_ground)
    write_csv(
        args.out / "fit_residuals.csv",
        ["set_id", "s_pm", "b_gauss", "residual_hz", "sigma_hz", "ramsey_wait_us", "comb_lock"],
        [
            (s.set_id, s.s_pm, s.b_gauss, r, sig, s.ramsey_wait_s * 1e6, s.comb_lock_mode)
            for s, r, sig in zip(sets, fit.residuals_hz, fit.point_sigmas_hz)
        ],
    )
    write_json(
        args.out / "fit_result.json",
        {
            "anchor_hz": fit.anchor_hz,
            "f0_offset_hz": fit.f0_offset_hz,
            "f0_hz": fit.f0_hz,
            "f0_sigma_hz": fit.f0_sigma_hz,
            "slope_hz_per_gauss": fit.slope_hz_per_gauss,
            "slope_sigma_hz_per_gauss": fit.slope_sigma_hz_per_gauss,
            "g_factor": g,
            "g_sigma": g_sigma,
            "chi2": fit.chi2,
            "dof": fit.dof,
        },
    )

    def plot(plt):
        fig, ax = plt.subplots(figsize=(6, 3))
        ids = [s.set_id for s in sets]
        ax.errorbar(ids, fit.residuals_hz, yerr=fit.point_sigmas_hz, fmt="o", ms=4)
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_xlabel("measurement set")
        ax.set_ylabel("fit residual (Hz)")
        fig.tight_layout()
        fig.savefig(args.out / "fit_residuals.svg")

    _maybe_plot(args, plot)
    return 0


def _cmd_test_ramsey_dependence(args, cfg: Config) -> int:
    sets, anchor = _campaign_sets(args, cfg)
    fit = fit_zeeman_line(sets, anchor)
    delta = duration_split_difference(sets, fit)
    sigma_r = cfg.get("test-ramsey-dependence", "sigma_r_hz", None)
    if sigma_r is None:
        sigma_r = float(np.std(fit.residuals_hz, ddof=2))
    test = hypothesis_test(delta, len(sets), float(sigma_r))
    write_json(
        args.out / "ramsey_dependence.json",
        {
            "delta_hz": delta,
            "sigma_r_hz": float(sigma_r),
            "sigma_hz": test.sigma_hz,
            "p_value": test.p_value,
            "n_sets": len(sets),
        },
    )
    return 0


def _cmd_budget(args, cfg: Config) -> int:
    rows = load_budget_csv(args.table)
    budget = ErrorBudget.with_ratio_from(rows, float(args.f0))
    result = error_budget_apply(budget, float(args.f0))
    if cfg.get("budget", "ratio_from_corrected", False):
        budget = ErrorBudget.with_ratio_from(rows, result.f_corrected_hz)
        result = error_budget_apply(budget, float(args.f0))
    ratio = budget.frequency_ratio
    write_csv(
        args.out / "budget.csv",
        ["label", "ion", "shift_hz", "uncertainty_hz", "scaled_uncertainty_hz", "is_bound"],
        [
            (
                r.label,
                r.ion,
                r.shift_hz,
                r.uncertainty_hz,
                r.uncertainty_hz * (ratio if r.ion == "Ca" else 1.0),
                int(r.is_bound),
            )
            for r in rows
        ],
    )
    write_json(
        args.out / "budget_result.json",
        {
            "f0_raw_hz": args.f0,
            "correction_hz": result.correction_hz,
            "f_final_hz": result.f_corrected_int_hz,
            "uncertainty_hz": result.total_uncertainty_hz,
            "frequency_ratio": ratio,
            "reference_frequency_hz": budget.reference_frequency_hz,
            "g_factor": cfg.get("budget", "g_factor", None),
            "g_sigma": cfg.get("budget", "g_sigma", None),
        },
    )
    return 0


def _cmd_compare(args, cfg: Config) -> int:
    body = cfg.section("compare")
    bin_s = body.get("bin_s", 60.0)
    if args.series_a is not None and args.series_b is not None:
        from .output import read_csv

        def load_series(path):
            rows = read_csv(path, ["time_s", "value_hz"])
            return np.array([[float(r["time_s"]), float(r["value_hz"])] for r in rows])

        series_a = load_series(args.series_a)
        series_b = load_series(args.series_b)
    elif args.series_a is None and args.series_b is None:
        rng_a = np.random.Generator(np.random.Philox(key=args.seed, counter=1 << 192))
        rng_b = np.random.Generator(np.random.Philox(key=args.seed, counter=2 << 192))
        duration = body.get("duration_s", 5 * 3600.0)
        sigma = body.get("per_bin_sigma_hz", 1.5)
        offset = body.get("offset_hz", 1.3)
        series_a = synth_lab_series(rng_a, duration, per_bin_sigma_hz=sigma,
                                    bin_s=bin_s, offset_hz=offset)
        series_b = synth_lab_series(rng_b, duration, per_bin_sigma_hz=sigma,
                                    bin_s=bin_s, offset_hz=0.0)
    else:
        raise ConfigError("give both --series-a and --series-b, or neither")

    result = comparison_histogram(series_a, series_b, bin_s)
    write_csv(
        args.out / "compare_histogram.csv",
        ["bin_center_hz", "count"],
        zip(result.bin_centers_hz, result.bin_counts),
    )
    write_json(
        args.out / "compare_result.json",
        {
            "mean_diff_hz": result.mean_diff_hz,
            "mean_diff_sigma_hz": result.mean_diff_sigma_hz,
            "gaussian_width_hz": result.gaussian_width_hz,
            "gaussian_width_sigma_hz": result.gaussian_width_sigma_hz,
            "n_bins": result.n_bins,
            "sample_mean_hz": result.sample_mean_hz,
        },
    )

    def plot(plt):
        fig, ax = plt.subplots(figsize=(5, 3))
        ax.bar(result.bin_centers_hz, result.bin_counts,
               width=0.9 * (result.bin_centers_hz[1] - result.bin_centers_hz[0]))
        ax.set_xlabel("frequency difference (Hz)")
        ax.set_ylabel("one-minute bins")
        fig.tight_layout()
        fig.savefig(args.out / "compare_histogram.svg")

    _maybe_plot(args, plot)
    return 0


def _cmd_chain(args, cfg: Config) -> int:
    body = cfg.section("chain")
    if not body:
        # default: frequency quadrupling of the sub-harmonic probe laser
        from .metrology import FrequencyChainNode

        nodes = [FrequencyChainNode("quadrupler", Fraction(4), Fraction(0))]
        anchor = parse_anchor(args.anchor, 280_710_714_333_684)
    else:
        nodes = parse_chain_nodes(body)
        anchor = parse_anchor(args.anchor or body.get("anchor_hz"), 0)
    value = frequency_chain_eval(nodes, anchor)
    mhz = chain_result_millihertz(value)
    write_json(
        args.out / "chain_result.json",
        {
            "anchor_hz": str(anchor),
            "result_hz_exact": str(value),
            "result_millihertz": mhz,
            "result_hz": mhz / 1000.0,
            "nodes": [f"{n.label}: a={n.a}, b={n.b}" for n in nodes],
        },
    )
    return 0


_HANDLERS = {
    "modes": _cmd_modes,
    "spectrum": _cmd_spectrum,
    "rabi": _cmd_rabi,
    "ramsey": _cmd_ramsey,
    "pump": _cmd_pump,
    "qls-batch": _cmd_qls_batch,
    "clock-scan": _cmd_clock_scan,
    "fit": _cmd_fit,
    "test-ramsey-dependence": _cmd_test_ramsey_dependence,
    "budget": _cmd_budget,
    "compare": _cmd_compare,
    "chain": _cmd_chain,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _load(args)
        args.out.mkdir(parents=True, exist_ok=True)
        code = _HANDLERS[args.command](args, cfg)
        _finish(args, cfg, args.command)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except QlsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
