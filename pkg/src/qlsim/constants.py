"""Physical constants and externally sourced atomic constants.

Every number that enters the physics lives here exactly once.  Values that are
not defined constants of nature carry a provenance string so they can be
audited or swapped from a config file without touching code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants (CODATA 2018).  All strictly positive."""

    bohr_magneton_over_h: float = 1.39962449361e6  # Hz/G
    planck_h: float = 6.62607015e-34               # J s (exact)
    elementary_charge: float = 1.602176634e-19     # C (exact)
    bohr_radius: float = 5.29177210903e-11         # m
    speed_of_light: float = 299792458.0            # m/s (exact)
    hbar: float = 6.62607015e-34 / (2.0 * math.pi)
    coulomb_constant: float = 8.9875517873681764e9  # N m^2 / C^2
    atomic_mass_unit: float = 1.66053906660e-27    # kg
    electron_mass_u: float = 5.48579909065e-4      # u

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0:
                raise ConfigError(f"physical constant {name} must be > 0")

    @property
    def e_a0_squared(self) -> float:
        """Atomic unit of electric quadrupole moment, C m^2."""
        return self.elementary_charge * self.bohr_radius**2


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class CitedConstant:
    """A number taken from outside this project, with its origin recorded."""

    value: float
    provenance: str

    def __float__(self) -> float:
        return self.value


# Ion masses: atomic masses (AME2020) minus one electron mass.
ION_MASS_U = {
    "Ca+": CitedConstant(39.962590863 - CONSTANTS.electron_mass_u, "AME2020 - m_e"),
    "Al+": CitedConstant(26.98153853 - CONSTANTS.electron_mass_u, "AME2020 - m_e"),
}

# g-factors and quadrupole parameters not measured by this project.
CITED = {
    # Al+ ground state g-factor (ion-clock literature).
    "g_Al_1S0": CitedConstant(-0.00079248, "Al+ clock literature"),
    # Al+ 3P1 F=7/2 g-factor; campaign-style default, overridable per run.
    "g_Al_3P1_F72": CitedConstant(0.428132, "stretched-pair splitting campaign"),
    # Ca+ g-factors (precision spectroscopy literature).
    "g_Ca_S12": CitedConstant(2.00225664, "Ca+ g-factor literature"),
    "g_Ca_D52": CitedConstant(1.2003340, "Ca+ g-factor literature"),
    # Ca+ D5/2 electric quadrupole moment, e a0^2.
    "theta_Ca_D52": CitedConstant(1.83, "Ca+ quadrupole-moment measurement"),
    # Al+ 3P1 reduced quadrupole matrix element, e a0^2.  Calibrated so the
    # reference two-ion trap (820 kHz single-Ca axial) shifts the stretched
    # states by -7.4 Hz; see trap.axial_field_gradient.
    "theta_red_Al_3P1": CitedConstant(-5.44454882, "calibrated to reference trap gradient"),
    # Fine-structure coupling constant of the Al+ 3P term, Hz.
    "zeta_fs_Al_3P": CitedConstant(1.8591e12, "Al+ fine-structure literature"),
    # Reference transition frequency of the Ca+ quadrupole line, Hz.
    "nu_Ca_reference": CitedConstant(411_042_129_776_398.0, "weighted literature average"),
    "nu_Ca_reference_sigma": CitedConstant(4.0, "weighted literature average"),
}


def cited(name: str) -> float:
    try:
        return CITED[name].value
    except KeyError:
        raise ConfigError(f"unknown cited constant {name!r}") from None
