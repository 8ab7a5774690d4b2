"""Two-ion crystal statics and normal modes.

Equilibrium positions, the six normal modes of a mixed-species linear
two-ion crystal, Lamb-Dicke factors, the static field gradient at the ion
sites, and companion-mass inference from the axial in-phase frequency.

Scaling model: the rf pseudopotential contributes a radial energy curvature
proportional to 1/m (single-ion radial frequency ~ 1/m at fixed voltage),
all dc curvatures are mass independent in energy terms, and the dc axial
curvature defocuses each radial direction by half its value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .constants import CONSTANTS, ION_MASS_U
from .errors import ConfigError, DomainError, InstabilityError, NumericalError, OutOfRangeError

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrapConfig:
    """Static trap description, referenced to a single ion of the logic species."""

    axial_freq_hz: float = 820e3
    radial_freq_x_hz: float = 1.356024e6
    radial_freq_y_hz: float = 1.174223e6
    dc_radial_asymmetry_hz: float = 1.356024e6 - 1.174223e6
    rf_drive_freq_hz: float = 32e6
    residual_modulation_index: float = 5e-3
    reference_mass_u: float = ION_MASS_U["Ca+"].value
    heating_rate_axial_in_phase: float = 70.0    # phonons/s
    heating_rate_axial_out_of_phase: float = 0.8
    heating_rate_radial: float = 10.0
    nbar_axial: float = 0.05
    nbar_radial: float = 0.3

    def __post_init__(self):
        for name in ("axial_freq_hz", "radial_freq_x_hz", "radial_freq_y_hz", "rf_drive_freq_hz"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"trap: {name} must be > 0")
        if not 0 <= self.residual_modulation_index <= 1e-2:
            raise ConfigError("trap: residual_modulation_index must lie in [0, 1e-2]")
        split = self.radial_freq_x_hz - self.radial_freq_y_hz
        if abs(split - self.dc_radial_asymmetry_hz) > 1.0:
            raise ConfigError(
                "trap: dc_radial_asymmetry_hz inconsistent with radial x - y "
                f"({self.dc_radial_asymmetry_hz:.3f} vs {split:.3f} Hz)"
            )
        if self.dc_radial_asymmetry_hz != 0 and self.radial_freq_x_hz == self.radial_freq_y_hz:
            raise ConfigError("trap: radial x and y must differ when asymmetry != 0")

    def with_radial_split(self, mean_radial_hz: float, asymmetry_hz: float) -> "TrapConfig":
        """Derived config with radial frequencies mean +- asymmetry/2."""
        return replace(
            self,
            radial_freq_x_hz=mean_radial_hz + asymmetry_hz / 2,
            radial_freq_y_hz=mean_radial_hz - asymmetry_hz / 2,
            dc_radial_asymmetry_hz=asymmetry_hz,
        )

    @property
    def axial_curvature_v_m2(self) -> float:
        """d^2(Phi)/dz^2 of the bare dc trap potential."""
        m = self.reference_mass_u * CONSTANTS.atomic_mass_unit
        return m * (_TWO_PI * self.axial_freq_hz) ** 2 / CONSTANTS.elementary_charge


@dataclass(frozen=True)
class IonPair:
    """Two singly charged ions; index 1 is the logic/reference species."""

    mass_1_u: float = ION_MASS_U["Ca+"].value
    mass_2_u: float = ION_MASS_U["Al+"].value

    def __post_init__(self):
        if self.mass_1_u <= 0 or self.mass_2_u <= 0:
            raise ConfigError("ion masses must be > 0")

    @property
    def masses_kg(self) -> tuple[float, float]:
        u = CONSTANTS.atomic_mass_unit
        return self.mass_1_u * u, self.mass_2_u * u


@dataclass(frozen=True)
class NormalMode:
    """One collective mode: frequency, mass-weighted eigenvector, thermal data."""

    label: str                       # e.g. "axial-in-phase", "radial-x-out-of-phase"
    frequency_hz: float
    eigenvector: tuple[float, float]  # mass-weighted, unit norm, (ion1, ion2)
    masses_u: tuple[float, float]
    heating_rate: float = 0.0        # phonons/s
    mean_phonon_number: float = 0.0

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ConfigError(f"mode {self.label}: frequency must be > 0")
        if self.mean_phonon_number < 0:
            raise ConfigError(f"mode {self.label}: nbar must be >= 0")
        norm = math.hypot(*self.eigenvector)
        if abs(norm - 1.0) > 1e-9:
            raise ConfigError(f"mode {self.label}: eigenvector not normalized")


@dataclass(frozen=True)
class CrystalSolution:
    equilibrium_m: tuple[float, float]   # axial positions, ion1 then ion2
    modes: tuple[NormalMode, ...]        # all six, sorted by frequency
    axial_field_gradient_v_m2: float     # total d^2(Phi)/dz^2 at either ion site
    separation_m: float

    def mode(self, label: str) -> NormalMode:
        for m in self.modes:
            if m.label == label:
                return m
        raise ConfigError(f"no mode labelled {label!r}")


def _axial_equilibrium(a_curv: float, q: float, k: float) -> tuple[float, float]:
    """Damped Newton iteration on the two-ion axial force balance.

    The closed form d = (2kq/A)^(1/3) exists; Newton cross-checks it and
    generalizes.  Converges to |force| < 1e-15 of the characteristic scale.
    """
    d0 = (2.0 * k * q / a_curv) ** (1.0 / 3.0)
    z = np.array([-0.6 * d0, 0.6 * d0])
    f_scale = q * a_curv * d0
    for _ in range(200):
        sep = z[1] - z[0]
        coul = k * q * q / sep**2
        force = np.array([-q * a_curv * z[0] - coul, -q * a_curv * z[1] + coul])
        if np.max(np.abs(force)) < 1e-15 * f_scale:
            return float(z[0]), float(z[1])
        # Jacobian of the force (negative Hessian of the potential)
        cc = 2.0 * k * q * q / sep**3
        jac = np.array([[-q * a_curv - cc, cc], [cc, -q * a_curv - cc]])
        step = np.linalg.solve(jac, -force)
        max_step = 0.2 * sep
        scale = min(1.0, max_step / max(np.max(np.abs(step)), 1e-300))
        z = z + scale * step
        if z[1] <= z[0]:  # never let the ions cross
            z = np.array([-0.5 * abs(z).max(), 0.5 * abs(z).max()])
    raise NumericalError("axial equilibrium iteration did not converge")


def _mode_pair(h11: float, h22: float, h12: float, axis: str) -> list[tuple[float, tuple[float, float], str]]:
    """Eigenpairs of one 2x2 mass-weighted Hessian block, with phase labels."""
    hmat = np.array([[h11, h12], [h12, h22]])
    evals, evecs = np.linalg.eigh(hmat)
    out = []
    for idx in range(2):
        lam = evals[idx]
        if lam <= 0:
            raise InstabilityError(axis)
        vec = evecs[:, idx]
        if vec[0] < 0:
            vec = -vec
        phase = "in-phase" if vec[0] * vec[1] > 0 else "out-of-phase"
        out.append((math.sqrt(lam) / _TWO_PI, (float(vec[0]), float(vec[1])), phase))
    return out


def solve_crystal(trap: TrapConfig, pair: IonPair) -> CrystalSolution:
    """Equilibrium and all six normal modes of the two-ion crystal.

    The equilibrium minimizes the axial harmonic + Coulomb potential; modes
    come from the eigendecomposition of the mass-weighted Hessian, block
    diagonal in (z, x, y).  Radial blocks use the 1/m pseudopotential
    scaling plus mass-independent dc curvatures.  Raises InstabilityError
    naming the offending direction if any curvature turns negative.
    """
    q = CONSTANTS.elementary_charge
    k = CONSTANTS.coulomb_constant
    m1, m2 = pair.masses_kg
    m_ref = trap.reference_mass_u * CONSTANTS.atomic_mass_unit
    if abs(m1 - m_ref) > 1e-6 * m_ref:
        # reference ion sets the trap curvatures; ion 1 must be that species
        raise ConfigError("ion 1 must be the trap's reference species")

    w_z1 = _TWO_PI * trap.axial_freq_hz
    a_curv = m_ref * w_z1**2 / q  # dc axial curvature, V/m^2

    z1, z2 = _axial_equilibrium(a_curv, q, k)
    sep = z2 - z1
    coul_curv = 2.0 * k * q / sep**3  # Coulomb potential curvature at either site

    # --- axial block: U = q A z^2/2 each + k q^2 / (z2 - z1)
    czz = q * a_curv + q * coul_curv
    cxc = -q * coul_curv
    axial = _mode_pair(czz / m1, czz / m2, cxc / math.sqrt(m1 * m2), "axial")

    # --- radial blocks
    # decompose the reference ion's radial confinement into rf + dc parts
    wx1 = (_TWO_PI * trap.radial_freq_x_hz) ** 2
    wy1 = (_TWO_PI * trap.radial_freq_y_hz) ** 2
    rf_part = 0.5 * (wx1 + wy1 + w_z1**2)      # omega_ps(ref)^2
    if rf_part <= 0:
        raise InstabilityError("radial", "rf pseudopotential curvature is not positive")
    blade = 0.5 * (wx1 - wy1)                   # +x/-y dc split, ref-ion omega^2 units
    ratio = m1 / m2

    radial = {}
    for axis, sign in (("x", +1.0), ("y", -1.0)):
        dc_ref = -0.5 * w_z1**2 + sign * blade  # dc part seen by the reference ion
        # energy curvatures: rf scales 1/m, dc mass independent, Coulomb -k q^2/d^3
        c1 = m1 * rf_part + m1 * dc_ref
        c2 = m1 * rf_part * ratio + m1 * dc_ref  # m2 (rf_part ratio^2) = m1 rf_part ratio
        ccoul = k * q * q / sep**3
        h11 = (c1 - ccoul) / m1
        h22 = (c2 - ccoul) / m2
        h12 = ccoul / math.sqrt(m1 * m2)
        radial[axis] = _mode_pair(h11, h22, h12, f"radial-{axis}")

    masses_u = (pair.mass_1_u, pair.mass_2_u)
    modes = []
    for freq, vec, phase in axial:
        rate = (
            trap.heating_rate_axial_in_phase
            if phase == "in-phase"
            else trap.heating_rate_axial_out_of_phase
        )
        modes.append(
            NormalMode(f"axial-{phase}", freq, vec, masses_u, rate, trap.nbar_axial)
        )
    for axis in ("x", "y"):
        for freq, vec, phase in radial[axis]:
            modes.append(
                NormalMode(
                    f"radial-{axis}-{phase}",
                    freq,
                    vec,
                    masses_u,
                    trap.heating_rate_radial,
                    trap.nbar_radial,
                )
            )
    modes.sort(key=lambda m: m.frequency_hz)

    gradient = a_curv + coul_curv  # trap quadrupole + neighbour-ion Coulomb term
    return CrystalSolution((z1, z2), tuple(modes), gradient, sep)


def axial_modes_closed_form(m1_u: float, m2_u: float, nu1_hz: float) -> tuple[float, float]:
    """(in-phase, out-of-phase) axial frequencies of the two-ion crystal.

    nu_{i,o} = nu1 sqrt((1+r) -+ sqrt((1-r)^2 + r)) with r = m1/m2 and nu1 the
    single-ion axial frequency of the ion with mass m1.
    """
    if m1_u <= 0 or m2_u <= 0 or nu1_hz <= 0:
        raise DomainError("masses and frequency must be > 0")
    r = m1_u / m2_u
    root = math.sqrt((1.0 - r) ** 2 + r)
    return nu1_hz * math.sqrt((1.0 + r) - root), nu1_hz * math.sqrt((1.0 + r) + root)


@dataclass(frozen=True)
class MassEstimate:
    mass_u: float
    nearest_integer_u: int
    sigma_u: float
    ambiguous: bool


def infer_companion_mass(
    measured_in_phase_hz: float,
    trap: TrapConfig,
    known_mass_u: float | None = None,
    freq_sigma_hz: float = 0.0,
    bracket_u: tuple[float, float] = (1.0, 300.0),
) -> MassEstimate:
    """Companion mass from a tickling measurement of the axial in-phase mode.

    Inverts :func:`axial_modes_closed_form` for m2 by bracketed root finding
    (the in-phase frequency decreases monotonically with companion mass).
    Reports the continuous mass, the nearest integer amu, the propagated
    1-sigma mass uncertainty, and whether a second integer mass lies within
    2 sigma of the root.
    """
    m1 = known_mass_u if known_mass_u is not None else trap.reference_mass_u
    nu1 = trap.axial_freq_hz

    def mismatch(m2):
        return axial_modes_closed_form(m1, m2, nu1)[0] - measured_in_phase_hz

    lo, hi = bracket_u
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo * f_hi > 0:
        raise OutOfRangeError(
            f"no companion mass in [{lo}, {hi}] u matches {measured_in_phase_hz} Hz"
        )
    mass = brentq(mismatch, lo, hi, xtol=1e-9, rtol=1e-12)

    # dnu/dm by central difference for the error propagation
    h = max(1e-6 * mass, 1e-9)
    dnu_dm = (mismatch(mass + h) - mismatch(mass - h)) / (2 * h)
    sigma = abs(freq_sigma_hz / dnu_dm) if freq_sigma_hz > 0 and dnu_dm != 0 else 0.0
    nearest = round(mass)
    second = nearest + (1 if mass > nearest else -1)
    ambiguous = sigma > 0 and abs(second - mass) < 2 * sigma
    return MassEstimate(mass, int(nearest), sigma, ambiguous)


def lamb_dicke(
    mode: NormalMode,
    ion_index: int,
    wavelength_nm: float,
    projection_cosine: float,
) -> float:
    """Lamb-Dicke factor of one ion for one mode.

    eta = (2 pi / lambda) cos(theta) b_i sqrt(hbar / (2 m_i omega)) with b_i
    the ion's mass-weighted eigenvector component.
    """
    if not -1.0 <= projection_cosine <= 1.0:
        raise DomainError("projection cosine must lie in [-1, 1]")
    if ion_index not in (0, 1):
        raise DomainError("ion_index must be 0 or 1")
    m_kg = mode.masses_u[ion_index] * CONSTANTS.atomic_mass_unit
    omega = _TWO_PI * mode.frequency_hz
    k_wave = _TWO_PI / (wavelength_nm * 1e-9)
    zpt = math.sqrt(CONSTANTS.hbar / (2.0 * m_kg * omega))
    return k_wave * projection_cosine * mode.eigenvector[ion_index] * zpt
