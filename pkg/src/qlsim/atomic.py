"""Level schemes and closed-form frequency-shift algebra.

Linear Zeeman shifts, the quadratic Zeeman shift from fine-structure mixing,
static electric-quadrupole shifts, and the g-factor <-> Zeeman-slope algebra
for the stretched transition pair.  Everything here is a pure function over
immutable value types.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import CONSTANTS, CITED, PhysicalConstants
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class Level:
    """One electronic (or hyperfine) level.

    ``angular_momentum`` is F where hyperfine structure is resolved and J
    otherwise.  ``lifetime_s`` is math.inf for ground states.  Exactly one of
    ``quadrupole_moment_ea02`` (m-resolved form) or
    ``reduced_quadrupole_ea02`` (stretched-state reduced-element form) may be
    set for levels with a quadrupole interaction.
    """

    label: str
    angular_momentum: float
    g_factor: float
    lifetime_s: float = math.inf
    quadrupole_moment_ea02: float | None = None
    reduced_quadrupole_ea02: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.g_factor):
            raise ConfigError(f"{self.label}: g-factor must be finite")
        if self.lifetime_s <= 0:
            raise ConfigError(f"{self.label}: lifetime must be > 0")
        if self.angular_momentum < 0 or (2 * self.angular_momentum) % 1:
            raise ConfigError(f"{self.label}: invalid angular momentum")
        if self.quadrupole_moment_ea02 is not None and self.reduced_quadrupole_ea02 is not None:
            raise ConfigError(f"{self.label}: give at most one quadrupole parameter")

    def valid_m(self, m: float) -> bool:
        f = self.angular_momentum
        return abs(m) <= f + 1e-12 and (f - m) % 1 < 1e-9


@dataclass(frozen=True)
class Transition:
    lower: str
    upper: str
    wavelength_nm: float
    kind: str  # dipole | quadrupole | intercombination | clock | magnetic-quadrupole


@dataclass(frozen=True)
class LevelScheme:
    species: str
    levels: dict[str, Level]
    transitions: tuple[Transition, ...]

    def __post_init__(self):
        for t in self.transitions:
            if t.lower not in self.levels or t.upper not in self.levels:
                raise ConfigError(
                    f"{self.species}: transition {t.lower}<->{t.upper} references unknown level"
                )

    def level(self, label: str) -> Level:
        try:
            return self.levels[label]
        except KeyError:
            raise ConfigError(f"{self.species}: no level {label!r}") from None


def _hyperfine_g(g_j: float, j: float, i: float, f: float) -> float:
    """Lande g_F neglecting the nuclear moment."""
    return g_j * (f * (f + 1) + j * (j + 1) - i * (i + 1)) / (2 * f * (f + 1))


def builtin_schemes() -> dict[str, LevelScheme]:
    """Default level data for the two species used throughout."""
    i_al = 2.5  # nuclear spin of the spectroscopy ion
    al = {
        "1S0": Level("1S0", 2.5, CITED["g_Al_1S0"].value),
        "3P0": Level("3P0", 2.5, -0.00197, lifetime_s=20.6),
        "3P1(F=5/2)": Level("3P1(F=5/2)", 2.5, _hyperfine_g(1.5, 1, i_al, 2.5), lifetime_s=299e-6),
        "3P1(F=7/2)": Level(
            "3P1(F=7/2)",
            3.5,
            CITED["g_Al_3P1_F72"].value,
            lifetime_s=299e-6,
            reduced_quadrupole_ea02=CITED["theta_red_Al_3P1"].value,
        ),
        "3P1(F=9/2)": Level("3P1(F=9/2)", 4.5, _hyperfine_g(1.5, 1, i_al, 4.5), lifetime_s=299e-6),
        "3P2": Level("3P2", 2.0, 1.5, lifetime_s=300.0),
    }
    ca = {
        "S1/2": Level("S1/2", 0.5, CITED["g_Ca_S12"].value),
        "P1/2": Level("P1/2", 0.5, 2.0 / 3.0, lifetime_s=7.1e-9),
        "P3/2": Level("P3/2", 1.5, 4.0 / 3.0, lifetime_s=6.9e-9),
        "D3/2": Level("D3/2", 1.5, 0.8, lifetime_s=1.20),
        "D5/2": Level(
            "D5/2",
            2.5,
            CITED["g_Ca_D52"].value,
            lifetime_s=1.168,
            quadrupole_moment_ea02=CITED["theta_Ca_D52"].value,
        ),
    }
    return {
        "Al+": LevelScheme(
            "Al+",
            al,
            (
                Transition("1S0", "3P1(F=7/2)", 267.0, "intercombination"),
                Transition("1S0", "3P0", 267.4, "clock"),
                Transition("1S0", "3P2", 266.1, "magnetic-quadrupole"),
            ),
        ),
        "Ca+": LevelScheme(
            "Ca+",
            ca,
            (
                Transition("S1/2", "P1/2", 397.0, "dipole"),
                Transition("S1/2", "D5/2", 729.0, "quadrupole"),
                Transition("D3/2", "P1/2", 866.0, "dipole"),
                Transition("D5/2", "P3/2", 854.0, "dipole"),
            ),
        ),
    }


SCHEMES = builtin_schemes()


# ---------------------------------------------------------------------------
# Linear Zeeman


def zeeman_shifted_frequency(
    f0_hz: float,
    g_upper: float,
    m_upper: float,
    g_lower: float,
    m_lower: float,
    b_gauss: float,
    constants: PhysicalConstants = CONSTANTS,
    upper_level: Level | None = None,
    lower_level: Level | None = None,
) -> float:
    """First-order Zeeman-shifted transition frequency in Hz.

    f = f0 + (mu_B/h) (g_u m_u - g_l m_l) B.  Pass the levels to have the
    magnetic quantum numbers range-checked against them.
    """
    if b_gauss < 0:
        raise DomainError("magnetic field must be >= 0")
    if upper_level is not None and not upper_level.valid_m(m_upper):
        raise DomainError(f"m={m_upper} invalid for {upper_level.label}")
    if lower_level is not None and not lower_level.valid_m(m_lower):
        raise DomainError(f"m={m_lower} invalid for {lower_level.label}")
    return f0_hz + constants.bohr_magneton_over_h * (g_upper * m_upper - g_lower * m_lower) * b_gauss


def stretched_pair_splitting(
    g_excited: float,
    g_ground: float,
    b_gauss: float,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """f(+) - f(-) of the two stretched 5/2<->7/2 transitions at field B."""
    plus = zeeman_shifted_frequency(0.0, g_excited, 3.5, g_ground, 2.5, b_gauss, constants)
    minus = zeeman_shifted_frequency(0.0, g_excited, -3.5, g_ground, -2.5, b_gauss, constants)
    return plus - minus


# ---------------------------------------------------------------------------
# Quadratic Zeeman (fine-structure mixing)


@dataclass(frozen=True)
class QuadraticZeemanParams:
    """Parameters of the B^2 shift of a level coupled to its fine-structure partner.

    ``mu_prime_over_muB`` rescales the effective magneton in the crossover
    field; 1.0 reproduces the mu' ~ mu_B approximation.
    """

    coupling_constant_zeta: float = CITED["zeta_fs_Al_3P"].value  # Hz
    j_prime: float = 2.0
    mu_prime_over_muB: float = 1.0

    def __post_init__(self):
        if self.coupling_constant_zeta <= 0:
            raise ConfigError("zeta must be > 0")
        if self.crossover_field_gauss() <= 0:
            raise ConfigError("crossover field must be > 0")

    def crossover_field_gauss(self, constants: PhysicalConstants = CONSTANTS) -> float:
        mu_prime = self.mu_prime_over_muB * constants.bohr_magneton_over_h
        return self.coupling_constant_zeta * self.j_prime / mu_prime


def quadratic_zeeman_shift(
    params: QuadraticZeemanParams, b_gauss: float, constants: PhysicalConstants = CONSTANTS
) -> float:
    """-1/2 zeta (B/B_fs)^2 in Hz; the pure-B^2 level shift."""
    if b_gauss < 0:
        raise DomainError("magnetic field must be >= 0")
    ratio = b_gauss / params.crossover_field_gauss(constants)
    return -0.5 * params.coupling_constant_zeta * ratio**2


def quadratic_zeeman_curvature(
    params: QuadraticZeemanParams, constants: PhysicalConstants = CONSTANTS
) -> float:
    """d^2 nu / dB^2 = -zeta / B_fs^2, in Hz/G^2."""
    return -params.coupling_constant_zeta / params.crossover_field_gauss(constants) ** 2


# ---------------------------------------------------------------------------
# Electric quadrupole


def quadrupole_shift(
    level: Level,
    m: float,
    field_gradient_v_m2: float,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Static electric-quadrupole shift of |level, m> in Hz.

    The field gradient is d^2(Phi)/dz^2 along the quantization axis (assumed
    parallel to the gradient's symmetry axis).  Levels carrying an m-resolved
    quadrupole moment Theta use

        dnu = (Theta/h) Phi_zz [J(J+1) - 3 m^2] / (2 J (2J-1)),

    levels carrying a reduced matrix element use the stretched-state form
    dnu = Phi_zz <Q2> / (2 sqrt(30) h), scaled to other |m| via the same
    3m^2 - F(F+1) dependence.  Either way the shift depends on m only
    through m^2.
    """
    if not math.isfinite(field_gradient_v_m2):
        raise DomainError("field gradient must be finite")
    if not level.valid_m(m):
        raise DomainError(f"m={m} invalid for {level.label}")
    f = level.angular_momentum
    if level.quadrupole_moment_ea02 is not None:
        theta = level.quadrupole_moment_ea02 * constants.e_a0_squared
        num = f * (f + 1) - 3 * m * m
        return theta / constants.planck_h * field_gradient_v_m2 * num / (2 * f * (2 * f - 1))
    if level.reduced_quadrupole_ea02 is not None:
        q_red = level.reduced_quadrupole_ea02 * constants.e_a0_squared
        stretched = field_gradient_v_m2 * q_red / (2 * math.sqrt(30.0) * constants.planck_h)
        # normalized so |m| = F reproduces the stretched value exactly
        return stretched * (3 * m * m - f * (f + 1)) / (f * (2 * f - 1))
    raise ConfigError(f"{level.label} carries no quadrupole parameter")


# ---------------------------------------------------------------------------
# g-factor algebra for the stretched pair


def g_factor_from_splitting(
    slope_hz_per_gauss: float, g_ground: float, constants: PhysicalConstants = CONSTANTS
) -> float:
    """Excited-state g from the stretched-pair Zeeman slope.

    Inverts slope = (mu_B/h) (7/2 g' - 5/2 g):  g' = (2/7)(slope h/mu_B + 5/2 g).
    """
    if slope_hz_per_gauss <= 0:
        raise DomainError("slope must be > 0")
    return (2.0 / 7.0) * (slope_hz_per_gauss / constants.bohr_magneton_over_h + 2.5 * g_ground)


def splitting_from_g(
    g_excited: float, g_ground: float, constants: PhysicalConstants = CONSTANTS
) -> float:
    """Zeeman slope (Hz/G) of one stretched transition; exact inverse of
    :func:`g_factor_from_splitting`."""
    return constants.bohr_magneton_over_h * (3.5 * g_excited - 2.5 * g_ground)
