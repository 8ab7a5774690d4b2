"""Estimation and statistics for the measurement campaign.

Phase-scan detuning/contrast estimation, magnetic field and drift extraction
from a Zeeman pair, the weighted straight-line fit of frequency versus signed
field, the Ramsey-duration hypothesis test, error-budget combination,
exact frequency-chain arithmetic, and two-series comparison histograms.

Conventions: "shift" rows are (perturbed - unperturbed) of the respective
transition; the correction is -sum(Al shifts) + sum(Ca shifts) * ratio, and
frequencies are carried as float64 offsets from an integer anchor so sub-Hz
resolution survives at optical magnitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import curve_fit

from .atomic import g_factor_from_splitting
from .constants import CONSTANTS, CITED, PhysicalConstants
from .errors import (
    ConfigError,
    DegenerateContrastError,
    DegenerateFitError,
    DomainError,
    FringeInconsistencyError,
    InsufficientDataError,
    PrecisionError,
    SignConventionError,
)

_TWO_PI = 2.0 * math.pi
SCAN_PHASES = (0.0, math.pi / 2, -math.pi / 2, math.pi)


# ---------------------------------------------------------------------------
# Ramsey phase sets


@dataclass(frozen=True)
class RamseyPhaseSet:
    """Counts (n_excited, n_total) at the four scan phases 0, +pi/2, -pi/2, pi."""

    counts: dict
    t_pulse_s: float
    t_wait_s: float

    def __post_init__(self):
        if set(self.counts) != set(SCAN_PHASES):
            raise DomainError("phase set must contain exactly the phases 0, +pi/2, -pi/2, pi")
        for phase, (n_exc, n_tot) in self.counts.items():
            if not 0 <= n_exc <= n_tot or n_tot <= 0:
                raise DomainError(f"invalid counts {n_exc}/{n_tot} at phase {phase}")

    def probability(self, phase: float) -> float:
        n_exc, n_tot = self.counts[phase]
        return n_exc / n_tot

    def binomial_sigma(self, phase: float) -> float:
        p = self.probability(phase)
        _, n_tot = self.counts[phase]
        return math.sqrt(p * (1.0 - p) / n_tot)

    @property
    def t_effective_s(self) -> float:
        """Free evolution time plus the square-pulse correction 4 t_p / pi."""
        return self.t_wait_s + 4.0 * self.t_pulse_s / math.pi


@dataclass(frozen=True)
class DetuningEstimate:
    detuning_hz: float
    detuning_sigma_hz: float
    contrast: float
    contrast_sigma: float


def estimate_detuning_contrast(
    phase_set: RamseyPhaseSet, use_pulse_correction: bool = True
) -> DetuningEstimate:
    """Laser-ion detuning and fringe contrast from a four-phase scan.

    C = p(0) - p(pi);  delta = asin((p(-pi/2) - p(+pi/2)) / C) / (2 pi T_eff).
    Binomial errors propagated to first order.  Raises
    DegenerateContrastError for C <= 0 and FringeInconsistencyError when the
    asin argument leaves [-1, 1].
    """
    p0 = phase_set.probability(0.0)
    ppi = phase_set.probability(math.pi)
    p_plus = phase_set.probability(math.pi / 2)
    p_minus = phase_set.probability(-math.pi / 2)
    contrast = p0 - ppi
    if contrast <= 0:
        raise DegenerateContrastError(f"contrast {contrast:.4f} <= 0")
    diff = p_minus - p_plus
    u = diff / contrast
    if abs(u) > 1.0:
        raise FringeInconsistencyError(f"asin argument {u:.4f} outside [-1, 1]")

    t_eff = phase_set.t_effective_s if use_pulse_correction else phase_set.t_wait_s
    detuning = math.asin(u) / (_TWO_PI * t_eff)

    s0 = phase_set.binomial_sigma(0.0)
    spi = phase_set.binomial_sigma(math.pi)
    sp = phase_set.binomial_sigma(math.pi / 2)
    sm = phase_set.binomial_sigma(-math.pi / 2)
    sigma_c = math.hypot(s0, spi)
    sigma_diff = math.hypot(sp, sm)
    root = math.sqrt(max(1.0 - u * u, 1e-12))
    d_ddiff = 1.0 / (contrast * root * _TWO_PI * t_eff)
    d_dc = -u / (contrast * root * _TWO_PI * t_eff)
    sigma_det = math.hypot(d_ddiff * sigma_diff, d_dc * sigma_c)
    return DetuningEstimate(detuning, sigma_det, contrast, sigma_c)


def synth_phase_counts(
    detuning_hz: float,
    contrast: float,
    t_pulse_s: float,
    t_wait_s: float,
    n_per_phase: int,
    rng: np.random.Generator,
    midpoint: float = 0.5,
) -> RamseyPhaseSet:
    """Binomially sampled phase set from the fringe model
    P(phi) = midpoint + (C/2) cos(phi + 2 pi delta T_eff)."""
    t_eff = t_wait_s + 4.0 * t_pulse_s / math.pi
    counts = {}
    for phase in SCAN_PHASES:
        p = midpoint + 0.5 * contrast * math.cos(phase + _TWO_PI * detuning_hz * t_eff)
        p = min(max(p, 0.0), 1.0)
        counts[phase] = (int(rng.binomial(n_per_phase, p)), n_per_phase)
    return RamseyPhaseSet(counts, t_pulse_s, t_wait_s)


# ---------------------------------------------------------------------------
# Field and drift from the Zeeman pair


@dataclass(frozen=True)
class FieldDriftEstimate:
    b_gauss: float
    b_sigma_gauss: float
    drift_hz: float
    drift_sigma_hz: float


def zeeman_pair_splitting_per_gauss(
    g_upper: float | None = None,
    g_lower: float | None = None,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Hz/G of the m=+-1/2 -> m=+-3/2 pair splitting: 2 (1.5 g_u - 0.5 g_l) mu_B/h."""
    gu = CITED["g_Ca_D52"].value if g_upper is None else g_upper
    gl = CITED["g_Ca_S12"].value if g_lower is None else g_lower
    return 2.0 * (1.5 * gu - 0.5 * gl) * constants.bohr_magneton_over_h


def field_and_drift_from_pair(
    f_plus_hz: float,
    f_minus_hz: float,
    sigma_plus_hz: float = 0.0,
    sigma_minus_hz: float = 0.0,
    g_upper: float | None = None,
    g_lower: float | None = None,
    constants: PhysicalConstants = CONSTANTS,
) -> FieldDriftEstimate:
    """Common-mode laser drift and magnetic field from two opposite Zeeman lines.

    drift = (f+ + f-)/2;  B = (f+ - f-) / splitting-per-gauss.  The field is
    immune to common-mode shifts, the drift to differential ones.
    """
    if not (math.isfinite(f_plus_hz) and math.isfinite(f_minus_hz)):
        raise DomainError("pair detunings must be finite")
    drift = 0.5 * (f_plus_hz + f_minus_hz)
    per_gauss = zeeman_pair_splitting_per_gauss(g_upper, g_lower, constants)
    b = (f_plus_hz - f_minus_hz) / per_gauss
    if b <= 0:
        raise SignConventionError(
            f"inferred B = {b:.3e} G <= 0; check the f_plus/f_minus assignment"
        )
    sig = math.hypot(sigma_plus_hz, sigma_minus_hz)
    return FieldDriftEstimate(b, sig / per_gauss, drift, 0.5 * sig)


# ---------------------------------------------------------------------------
# Straight-line fit of frequency versus signed field


@dataclass(frozen=True)
class MeasurementSet:
    """One campaign set: the probed stretched line plus the Ca reference pair."""

    set_id: int
    s_pm: int                      # +1 or -1: which stretched transition
    ramsey_wait_s: float           # 100e-6 or 200e-6 in the campaign
    al_detuning_hz: float          # relative to the anchor frequency
    al_sigma_hz: float
    b_gauss: float
    b_sigma_gauss: float = 0.0
    ca_plus_hz: float | None = None
    ca_minus_hz: float | None = None
    comb_lock_mode: str = "729-locked"   # or "quartz"
    timestamp_s: float = 0.0

    def __post_init__(self):
        if self.s_pm not in (-1, +1):
            raise DomainError("s_pm must be +1 or -1")
        if self.al_sigma_hz <= 0:
            raise DomainError("al_sigma_hz must be > 0")
        if self.b_gauss <= 0:
            raise DomainError("b_gauss must be > 0")

    @property
    def signed_field(self) -> float:
        return self.s_pm * self.b_gauss


@dataclass(frozen=True)
class ZeemanFit:
    f0_offset_hz: float          # intercept relative to the anchor
    f0_sigma_hz: float
    slope_hz_per_gauss: float
    slope_sigma_hz_per_gauss: float
    anchor_hz: int
    residuals_hz: tuple[float, ...]
    point_sigmas_hz: tuple[float, ...]
    chi2: float
    dof: int

    @property
    def f0_hz(self) -> float:
        return self.anchor_hz + self.f0_offset_hz

    def g_factor(self, g_ground: float) -> tuple[float, float]:
        g = g_factor_from_splitting(self.slope_hz_per_gauss, g_ground)
        sigma = (2.0 / 7.0) * self.slope_sigma_hz_per_gauss / CONSTANTS.bohr_magneton_over_h
        return g, sigma


def _wls_line(x: np.ndarray, y: np.ndarray, sigma: np.ndarray):
    w = 1.0 / sigma**2
    s = w.sum()
    sx = (w * x).sum()
    sy = (w * y).sum()
    sxx = (w * x * x).sum()
    sxy = (w * x * y).sum()
    delta = s * sxx - sx * sx
    scale = s * (x.max() - x.min()) ** 2 if x.size else 0.0
    if delta <= 1e-12 * max(scale, 1e-300) or x.max() == x.min():
        raise DegenerateFitError("all abscissae coincide; line fit is rank deficient")
    intercept = (sxx * sy - sx * sxy) / delta
    slope = (s * sxy - sx * sy) / delta
    return intercept, slope, math.sqrt(sxx / delta), math.sqrt(s / delta)


def fit_zeeman_line(
    sets: list[MeasurementSet], anchor_hz: int, fold_field_uncertainty: bool = True
) -> ZeemanFit:
    """Weighted least squares of measured frequency versus x = s+- B.

    x is treated as exact; any per-set field uncertainty is folded into the
    effective y uncertainty through the fitted slope (two passes).  Residuals
    reproduce the campaign's per-set structure.
    """
    if len(sets) < 2:
        raise InsufficientDataError("need at least two measurement sets")
    x = np.array([s.signed_field for s in sets])
    y = np.array([s.al_detuning_hz for s in sets])
    sigma = np.array([s.al_sigma_hz for s in sets])
    b_sig = np.array([s.b_sigma_gauss for s in sets])

    intercept, slope, s_int, s_slope = _wls_line(x, y, sigma)
    if fold_field_uncertainty and np.any(b_sig > 0):
        eff = np.sqrt(sigma**2 + (slope * b_sig) ** 2)
        intercept, slope, s_int, s_slope = _wls_line(x, y, eff)
        sigma = eff

    resid = y - (intercept + slope * x)
    chi2 = float(((resid / sigma) ** 2).sum())
    return ZeemanFit(
        float(intercept),
        float(s_int),
        float(slope),
        float(s_slope),
        int(anchor_hz),
        tuple(float(r) for r in resid),
        tuple(float(s) for s in sigma),
        chi2,
        len(sets) - 2,
    )


def synth_campaign(
    rng: np.random.Generator,
    n_sets: int = 18,
    f0_offset_hz: float = 0.0,
    slope_hz_per_gauss: float = 2.100056e6,
    b_nominal_gauss: float = 4.0,
    b_jitter_gauss: float = 2e-4,
    b_sigma_gauss: float = 1e-6,
    point_sigma_hz: float = 36.0 * math.sqrt(18.0),
    anchor_hz: int = 0,
) -> list[MeasurementSet]:
    """A synthetic campaign shaped like the real one: both stretched lines,
    alternating Ramsey waits, per-set field jitter, Gaussian point noise."""
    per_gauss = zeeman_pair_splitting_per_gauss()
    sets = []
    for i in range(n_sets):
        s_pm = +1 if i % 2 == 0 else -1
        wait = 100e-6 if (i // 2) % 2 == 0 else 200e-6
        b = b_nominal_gauss + rng.normal(0.0, b_jitter_gauss)
        y = f0_offset_hz + slope_hz_per_gauss * s_pm * b + rng.normal(0.0, point_sigma_hz)
        half_split = 0.5 * per_gauss * b
        drift = rng.normal(0.0, 2.0)
        sets.append(
            MeasurementSet(
                set_id=i + 1,
                s_pm=s_pm,
                ramsey_wait_s=wait,
                al_detuning_hz=y,
                al_sigma_hz=point_sigma_hz,
                b_gauss=b,
                b_sigma_gauss=b_sigma_gauss,
                ca_plus_hz=drift + half_split,
                ca_minus_hz=drift - half_split,
                comb_lock_mode="quartz" if i < 8 else "729-locked",
                timestamp_s=600.0 * i,
            )
        )
    return sets


# ---------------------------------------------------------------------------
# Ramsey-duration hypothesis test


@dataclass(frozen=True)
class HypothesisTest:
    sigma_hz: float
    p_value: float


def hypothesis_test(delta_hz: float, n_sets: int, sigma_r_hz: float) -> HypothesisTest:
    """Probability of a duration-split difference >= |delta| under the null.

    sigma = sqrt(4/N) sigma_r;  p = 1 - erf(|delta| / (sqrt(2) sigma)).
    """
    if n_sets < 2 or n_sets % 2:
        raise DomainError("N must be even and >= 2")
    if sigma_r_hz <= 0:
        raise DomainError("sigma_r must be > 0")
    sigma = math.sqrt(4.0 / n_sets) * sigma_r_hz
    p = math.erfc(abs(delta_hz) / (math.sqrt(2.0) * sigma))
    return HypothesisTest(sigma, p)


def duration_split_difference(sets: list[MeasurementSet], fit: ZeemanFit) -> float:
    """Mean fit residual of the long-wait sets minus the short-wait sets."""
    waits = sorted({s.ramsey_wait_s for s in sets})
    if len(waits) != 2:
        raise InsufficientDataError("need exactly two Ramsey durations to compare")
    long_r = [r for s, r in zip(sets, fit.residuals_hz) if s.ramsey_wait_s == waits[1]]
    short_r = [r for s, r in zip(sets, fit.residuals_hz) if s.ramsey_wait_s == waits[0]]
    if not long_r or not short_r:
        raise InsufficientDataError("one duration group is empty")
    return float(np.mean(long_r) - np.mean(short_r))


# ---------------------------------------------------------------------------
# Error budget


@dataclass(frozen=True)
class BudgetRow:
    label: str
    ion: str                     # "Ca" or "Al"
    shift_hz: float
    uncertainty_hz: float
    is_bound: bool = False       # bound rows carry no correction, only uncertainty

    def __post_init__(self):
        if self.ion not in ("Ca", "Al"):
            raise ConfigError(f"budget row {self.label!r}: ion must be Ca or Al")
        if self.uncertainty_hz < 0:
            raise ConfigError(f"budget row {self.label!r}: uncertainty must be >= 0")
        if self.is_bound and self.shift_hz != 0.0:
            raise ConfigError(f"bound row {self.label!r} must have zero shift")


@dataclass(frozen=True)
class ErrorBudget:
    rows: tuple[BudgetRow, ...]
    frequency_ratio: float | None = None      # nu_Al / nu_Ca
    reference_frequency_hz: float = CITED["nu_Ca_reference"].value

    def __post_init__(self):
        if self.frequency_ratio is not None and self.frequency_ratio <= 0:
            raise ConfigError("frequency ratio must be > 0")
        if self.reference_frequency_hz <= 0:
            raise ConfigError("reference frequency must be > 0")

    @staticmethod
    def with_ratio_from(rows, al_frequency_hz: float) -> "ErrorBudget":
        ref = CITED["nu_Ca_reference"].value
        return ErrorBudget(tuple(rows), al_frequency_hz / ref, ref)


@dataclass(frozen=True)
class BudgetResult:
    correction_hz: float
    f_corrected_hz: float
    f_corrected_int_hz: int
    total_uncertainty_hz: float


def error_budget_apply(budget: ErrorBudget, f0_measured_hz: float) -> BudgetResult:
    """Corrected frequency and combined uncertainty.

    correction = -sum(Al shifts) + sum(Ca shifts) * (nu_Al/nu_Ca); the total
    uncertainty is the quadrature of all rows with Ca rows scaled by the same
    ratio.  An empty budget returns (0, f0, 0).
    """
    if not budget.rows:
        return BudgetResult(0.0, f0_measured_hz, round(f0_measured_hz), 0.0)
    if budget.frequency_ratio is None:
        raise ConfigError("frequency ratio is not set; use ErrorBudget.with_ratio_from")
    ratio = budget.frequency_ratio
    correction = 0.0
    var = 0.0
    for row in budget.rows:
        scale = ratio if row.ion == "Ca" else 1.0
        if not row.is_bound:
            correction += row.shift_hz * scale if row.ion == "Ca" else -row.shift_hz
        var += (row.uncertainty_hz * scale) ** 2
    f_corr = f0_measured_hz + correction
    return BudgetResult(correction, f_corr, round(f_corr), math.sqrt(var))


def ac_zeeman_g_bound(
    mimic_field_gauss: float = 4e-6, bias_field_gauss: float = 4.0
) -> float:
    """Fractional g-factor error bound from an rf-induced effective field that
    mimics a dc field of the given size.  Reported as a bound, never applied
    as a correction."""
    if bias_field_gauss <= 0:
        raise DomainError("bias field must be > 0")
    return abs(mimic_field_gauss) / bias_field_gauss


# ---------------------------------------------------------------------------
# Frequency-chain arithmetic (exact)


@dataclass(frozen=True)
class FrequencyChainNode:
    """One affine link: nu_out = a * nu_in + b, a rational, b exact Hz."""

    label: str
    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        if self.a == 0:
            raise ConfigError(f"chain node {self.label!r}: a must be nonzero")


_MAX_DIGITS = 60  # guard against runaway exact representations


def frequency_chain_eval(nodes: list[FrequencyChainNode], anchor_hz) -> Fraction:
    """Compose the chain left to right on exact rational frequencies."""
    if not nodes:
        raise ConfigError("frequency chain is empty")
    value = Fraction(anchor_hz)
    for node in nodes:
        value = node.a * value + node.b
        if max(value.numerator.bit_length(), value.denominator.bit_length()) > _MAX_DIGITS * 4:
            raise PrecisionError(f"scaled representation overflow after node {node.label!r}")
    return value


def chain_result_millihertz(value: Fraction) -> int:
    """Exact mHz integer for a chain result; raises if finer than mHz."""
    scaled = value * 1000
    if scaled.denominator != 1:
        raise PrecisionError("chain result is not representable at mHz resolution")
    return int(scaled)


# ---------------------------------------------------------------------------
# Two-laboratory comparison


@dataclass(frozen=True)
class ComparisonResult:
    mean_diff_hz: float
    mean_diff_sigma_hz: float
    gaussian_width_hz: float
    gaussian_width_sigma_hz: float
    n_bins: int
    bin_centers_hz: tuple[float, ...]
    bin_counts: tuple[int, ...]
    sample_mean_hz: float


def _gauss(x, amp, mu, sigma):
    return amp * np.exp(-0.5 * ((x - mu) / sigma) ** 2)


def comparison_histogram(
    series_a: np.ndarray,
    series_b: np.ndarray,
    bin_s: float = 60.0,
    hist_bin_hz: float | None = None,
) -> ComparisonResult:
    """Bin two (t, value) series into common time intervals, difference them
    per bin, and fit a Gaussian to the histogram of differences.

    Least squares on bin counts with sqrt(n) weights.  The reported width is
    the Gaussian standard deviation.  Raises InsufficientDataError with fewer
    than 10 overlapping time bins.
    """
    if bin_s <= 0:
        raise DomainError("bin size must be > 0")
    a = np.asarray(series_a, dtype=float)
    b = np.asarray(series_b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != 2 or b.shape[1] != 2:
        raise DomainError("series must be (N, 2) arrays of (time_s, value_hz)")
    t_lo = max(a[:, 0].min(), b[:, 0].min())
    t_hi = min(a[:, 0].max(), b[:, 0].max())
    if t_hi <= t_lo:
        raise InsufficientDataError("time ranges do not overlap")
    edges = np.arange(t_lo, t_hi + bin_s, bin_s)

    diffs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        in_a = a[(a[:, 0] >= lo) & (a[:, 0] < hi), 1]
        in_b = b[(b[:, 0] >= lo) & (b[:, 0] < hi), 1]
        if in_a.size and in_b.size:
            diffs.append(in_a.mean() - in_b.mean())
    if len(diffs) < 10:
        raise InsufficientDataError(f"only {len(diffs)} overlapping bins; need >= 10")
    diffs = np.array(diffs)

    spread = float(diffs.std(ddof=1))
    if spread == 0.0:
        # degenerate: every bin difference identical; width limited by binning
        return ComparisonResult(
            float(diffs.mean()), 0.0, 0.0, 0.0, len(diffs),
            (float(diffs.mean()),), (len(diffs),), float(diffs.mean()),
        )
    if hist_bin_hz is None:
        hist_bin_hz = max(spread / 2.0, 1e-12)
    half_range = max(5 * spread, 5 * hist_bin_hz)
    lo = diffs.mean() - half_range
    hi = diffs.mean() + half_range
    n_hist = max(int(round((hi - lo) / hist_bin_hz)), 5)
    counts, hist_edges = np.histogram(diffs, bins=n_hist, range=(lo, hi))
    centers = 0.5 * (hist_edges[:-1] + hist_edges[1:])

    weights = np.sqrt(np.maximum(counts, 1.0))
    p0 = (counts.max(), float(diffs.mean()), max(spread, 0.5 * hist_bin_hz))
    popt, pcov = curve_fit(
        _gauss, centers, counts, p0=p0, sigma=weights, absolute_sigma=True, maxfev=10000
    )
    perr = np.sqrt(np.diag(pcov))
    return ComparisonResult(
        float(popt[1]),
        float(perr[1]),
        abs(float(popt[2])),
        float(perr[2]),
        len(diffs),
        tuple(float(c) for c in centers),
        tuple(int(c) for c in counts),
        float(diffs.mean()),
    )


def load_campaign_csv(
    path,
    sigma_convention: str = "mean",
    n_measurements: int = 50,
) -> list[MeasurementSet]:
    """MeasurementSet rows from CSV.

    Required columns: set_id, s_pm, ramsey_wait_us, al_detuning_hz,
    al_sigma_hz.  The field comes from b_gauss (+ optional b_sigma_gauss) or,
    when absent, from the ca_plus_hz/ca_minus_hz pair.  With
    sigma_convention="ensemble" the quoted sigma is the standard deviation of
    the per-set single measurements and is divided by sqrt(n_measurements).
    """
    from .output import read_csv

    if sigma_convention not in ("mean", "ensemble"):
        raise ConfigError("sigma_convention must be 'mean' or 'ensemble'")
    rows = read_csv(path, ["set_id", "s_pm", "ramsey_wait_us", "al_detuning_hz", "al_sigma_hz"])
    scale = 1.0 / math.sqrt(n_measurements) if sigma_convention == "ensemble" else 1.0
    sets = []
    for row in rows:
        sigma = float(row["al_sigma_hz"]) * scale
        fp = float(row["ca_plus_hz"]) if row.get("ca_plus_hz", "") else None
        fm = float(row["ca_minus_hz"]) if row.get("ca_minus_hz", "") else None
        if row.get("b_gauss", ""):
            b = float(row["b_gauss"])
            b_sigma = float(row.get("b_sigma_gauss", "") or 0.0)
        elif fp is not None and fm is not None:
            est = field_and_drift_from_pair(fp, fm)
            b, b_sigma = est.b_gauss, est.b_sigma_gauss
        else:
            raise ConfigError(f"set {row['set_id']}: need b_gauss or the Ca pair columns")
        sets.append(
            MeasurementSet(
                set_id=int(row["set_id"]),
                s_pm=int(row["s_pm"]),
                ramsey_wait_s=float(row["ramsey_wait_us"]) * 1e-6,
                al_detuning_hz=float(row["al_detuning_hz"]),
                al_sigma_hz=sigma,
                b_gauss=b,
                b_sigma_gauss=b_sigma,
                ca_plus_hz=fp,
                ca_minus_hz=fm,
                comb_lock_mode=row.get("comb_lock", "") or "729-locked",
                timestamp_s=float(row.get("timestamp_s", "") or 0.0),
            )
        )
    return sets


def load_budget_csv(path) -> tuple[BudgetRow, ...]:
    """Budget rows from CSV with columns label, ion, shift_hz, uncertainty_hz
    and optional is_bound (0/1)."""
    from .output import read_csv

    rows = read_csv(path, ["label", "ion", "shift_hz", "uncertainty_hz"])
    out = []
    for row in rows:
        out.append(
            BudgetRow(
                label=row["label"],
                ion=row["ion"],
                shift_hz=float(row["shift_hz"]),
                uncertainty_hz=float(row["uncertainty_hz"]),
                is_bound=bool(int(row.get("is_bound", "") or 0)),
            )
        )
    return tuple(out)


def synth_lab_series(
    rng: np.random.Generator,
    duration_s: float = 5 * 3600.0,
    sample_interval_s: float = 5.0,
    per_bin_sigma_hz: float = 1.5,
    bin_s: float = 60.0,
    offset_hz: float = 0.0,
    common_drift_amp_hz: float = 3.0,
) -> np.ndarray:
    """One lab's (t, value) series with shot noise at projection-noise level
    and a slow common-mode wander (reproducible across labs via the shared
    drift phase when the caller reuses it)."""
    t = np.arange(0.0, duration_s, sample_interval_s)
    per_sample = per_bin_sigma_hz * math.sqrt(bin_s / sample_interval_s)
    values = offset_hz + rng.normal(0.0, per_sample, t.size)
    values += common_drift_amp_hz * np.sin(_TWO_PI * t / duration_s * 1.7)
    return np.column_stack([t, values])
