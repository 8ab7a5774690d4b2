"""Shared structured-text (INI) configuration.

One file format serves every subcommand: per-topic sections ([trap], [noise],
[protocol], ...) plus per-subcommand scenario sections.  Unknown sections or
keys are hard errors so a typo cannot silently masquerade as physics.  Every
key is optional; defaults are the dataclass defaults.

Key schema (value types in parentheses):

  [constants]       bohr_magneton_over_h (float, Hz/G) ... any PhysicalConstants field
  [levels.<sp>.<label>]  g_factor (float); lifetime_s (float, 'inf' ok);
                    quadrupole_moment_ea02 (float); reduced_quadrupole_ea02 (float)
  [ions]            mass_1_u, mass_2_u (float)
  [trap]            axial_freq_hz, radial_freq_x_hz, radial_freq_y_hz,
                    dc_radial_asymmetry_hz, rf_drive_freq_hz,
                    residual_modulation_index, heating_rate_axial_in_phase,
                    heating_rate_axial_out_of_phase, heating_rate_radial,
                    nbar_axial, nbar_radial (float)
  [noise]           spontaneous_decay_rate_hz, laser_dephasing_rate_hz,
                    thermal_nbar, drift_rate_hz_per_s (float)
  [protocol]        pump_repetitions (int); pump_wait_s, excited_lifetime_s (float);
                    carrier_pi_fidelity, sideband_pi_fidelity, mapping_pi_fidelity,
                    detection_error (float); target_zeeman_state (+5/2 | -5/2);
                    nbar_in_phase, nbar_out_of_phase (float); double_mapping (bool)
  [rabi]            sideband_order (int); rabi_freq_hz, lamb_dicke, duration_max_s,
                    detuning_hz, nbar (float); n_points (int)
  [ramsey]          t_pulse_s, t_wait_s (float); scan (detuning|phase|wait);
                    start, stop (float); n_points (int); detuning_hz,
                    stark_shift_hz, contrast_scale, baseline (float)
  [spectrum]        probe_duration_s, probe_rabi_hz, grid_start_hz, grid_stop_hz,
                    grid_step_hz, window_hz (float); modes (freq:eta:nbar list)
                    use_solved_modes (bool); wavelength_nm, projection_cosine (float)
  [pump]            initial (uniform | pure:<m>)
  [qls-batch]       n_shots (int); probe (single|ramsey); excitation_probability,
                    pulse_area_pi, detuning_hz, t_pulse_s, t_wait_s, phase2 (float)
  [clock-scan]      probe_duration_s, grid_start_hz, grid_stop_hz, grid_step_hz (float);
                    n_experiments (int)
  [fit]             anchor_hz (int); sigma_convention (ensemble|mean);
                    n_measurements_per_set (int); synthesize (bool); n_sets (int);
                    point_sigma_hz, slope_hz_per_gauss, f0_offset_hz, b_gauss (float)
  [test-ramsey-dependence]  sigma_r_hz (float)
  [budget]          ratio_from_corrected (bool)
  [compare]         duration_s, bin_s, offset_hz, per_bin_sigma_hz (float)
  [chain]           anchor_hz (int or decimal); node<N> = label, a, b_hz
"""
from __future__ import annotations

import configparser
import hashlib
import math
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError

# converter tags
_F, _I, _B, _S = "float", "int", "bool", "str"

SCHEMA: dict[str, dict[str, str]] = {
    "constants": {
        "bohr_magneton_over_h": _F,
        "planck_h": _F,
        "elementary_charge": _F,
        "bohr_radius": _F,
        "speed_of_light": _F,
    },
    "ions": {"mass_1_u": _F, "mass_2_u": _F},
    "trap": {
        "axial_freq_hz": _F,
        "radial_freq_x_hz": _F,
        "radial_freq_y_hz": _F,
        "dc_radial_asymmetry_hz": _F,
        "rf_drive_freq_hz": _F,
        "residual_modulation_index": _F,
        "heating_rate_axial_in_phase": _F,
        "heating_rate_axial_out_of_phase": _F,
        "heating_rate_radial": _F,
        "nbar_axial": _F,
        "nbar_radial": _F,
    },
    "noise": {
        "spontaneous_decay_rate_hz": _F,
        "laser_dephasing_rate_hz": _F,
        "thermal_nbar": _F,
        "drift_rate_hz_per_s": _F,
    },
    "protocol": {
        "pump_repetitions": _I,
        "pump_wait_s": _F,
        "excited_lifetime_s": _F,
        "carrier_pi_fidelity": _F,
        "sideband_pi_fidelity": _F,
        "mapping_pi_fidelity": _F,
        "detection_error": _F,
        "target_zeeman_state": _S,
        "nbar_in_phase": _F,
        "nbar_out_of_phase": _F,
        "double_mapping": _B,
    },
    "modes": {},
    "rabi": {
        "sideband_order": _I,
        "rabi_freq_hz": _F,
        "lamb_dicke": _F,
        "duration_max_s": _F,
        "detuning_hz": _F,
        "nbar": _F,
        "n_points": _I,
    },
    "ramsey": {
        "t_pulse_s": _F,
        "t_wait_s": _F,
        "scan": _S,
        "start": _F,
        "stop": _F,
        "n_points": _I,
        "detuning_hz": _F,
        "stark_shift_hz": _F,
        "contrast_scale": _F,
        "baseline": _F,
    },
    "spectrum": {
        "probe_duration_s": _F,
        "probe_rabi_hz": _F,
        "grid_start_hz": _F,
        "grid_stop_hz": _F,
        "grid_step_hz": _F,
        "window_hz": _F,
        "modes": _S,
        "use_solved_modes": _B,
        "wavelength_nm": _F,
        "projection_cosine": _F,
    },
    "pump": {"initial": _S},
    "qls-batch": {
        "n_shots": _I,
        "probe": _S,
        "excitation_probability": _F,
        "pulse_area_pi": _F,
        "detuning_hz": _F,
        "t_pulse_s": _F,
        "t_wait_s": _F,
        "phase2": _F,
    },
    "clock-scan": {
        "probe_duration_s": _F,
        "grid_start_hz": _F,
        "grid_stop_hz": _F,
        "grid_step_hz": _F,
        "n_experiments": _I,
    },
    "fit": {
        "anchor_hz": _I,
        "sigma_convention": _S,
        "n_measurements_per_set": _I,
        "synthesize": _B,
        "n_sets": _I,
        "point_sigma_hz": _F,
        "slope_hz_per_gauss": _F,
        "f0_offset_hz": _F,
        "b_gauss": _F,
    },
    "test-ramsey-dependence": {"sigma_r_hz": _F},
    "budget": {"ratio_from_corrected": _B, "g_factor": _F, "g_sigma": _F},
    "compare": {
        "duration_s": _F,
        "bin_s": _F,
        "offset_hz": _F,
        "per_bin_sigma_hz": _F,
    },
    "chain": {"anchor_hz": _S},  # node<N> keys validated separately
}

_LEVEL_KEYS = {"g_factor": _F, "lifetime_s": _F,
               "quadrupole_moment_ea02": _F, "reduced_quadrupole_ea02": _F}


def _convert(kind: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind == _F:
            return float(raw)
        if kind == _I:
            return int(raw)
        if kind == _B:
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind}") from None


class Config:
    """Validated view of one INI file (or of nothing, for pure defaults)."""

    def __init__(self, sections: dict[str, dict[str, object]], source: str = "<defaults>"):
        self.sections = sections
        self.source = source

    @staticmethod
    def empty() -> "Config":
        return Config({})

    @staticmethod
    def load(path: str | Path) -> "Config":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keys are case sensitive
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc

        sections: dict[str, dict[str, object]] = {}
        for name in parser.sections():
            body: dict[str, object] = {}
            if name.startswith("levels."):
                parts = name.split(".")
                if len(parts) != 3:
                    raise ConfigError(f"[{name}]: expected levels.<species>.<label>")
                schema = _LEVEL_KEYS
            elif name in SCHEMA:
                schema = SCHEMA[name]
            else:
                raise ConfigError(f"unknown config section [{name}]")
            for key, raw in parser.items(name):
                if name == "chain" and key.startswith("node"):
                    body[key] = raw.strip()
                    continue
                if key not in schema:
                    raise ConfigError(f"unknown key {key!r} in section [{name}]")
                body[key] = _convert(schema[key], raw, f"[{name}] {key}")
            sections[name] = body
        return Config(sections, str(path))

    def section(self, name: str) -> dict[str, object]:
        return dict(self.sections.get(name, {}))

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def resolved_hash(self, extra: dict | None = None) -> str:
        """Deterministic digest of every resolved (section, key, value)."""
        h = hashlib.sha256()
        for sec in sorted(self.sections):
            for key in sorted(self.sections[sec]):
                h.update(f"{sec}\x1f{key}\x1f{self.sections[sec][key]!r}\n".encode())
        for key in sorted(extra or {}):
            h.update(f"@{key}\x1f{extra[key]!r}\n".encode())
        return h.hexdigest()


def parse_zeeman_target(raw: str) -> float:
    table = {"+5/2": 2.5, "5/2": 2.5, "-5/2": -2.5}
    if raw not in table:
        raise ConfigError(f"target_zeeman_state must be +5/2 or -5/2, not {raw!r}")
    return table[raw]


def parse_mode_list(raw: str) -> list[tuple[float, float, float]]:
    """'888e3:0.08:0.3, 1.596e6:0.05:0.3' -> [(freq_hz, eta, nbar), ...]."""
    out = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"mode entry {item!r} must be freq:eta:nbar")
        try:
            out.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError:
            raise ConfigError(f"cannot parse mode entry {item!r}") from None
    if not out:
        raise ConfigError("mode list is empty")
    return out


def parse_chain_nodes(section: dict[str, object]):
    """node<N> = label, a, b_hz  (a rational like 4 or 350/349; b decimal Hz)."""
    from .metrology import FrequencyChainNode

    keys = sorted((k for k in section if k.startswith("node")),
                  key=lambda k: int(k[4:]) if k[4:].isdigit() else 0)
    nodes = []
    for key in keys:
        raw = str(section[key])
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"chain {key}: expected 'label, a, b_hz', got {raw!r}")
        try:
            nodes.append(FrequencyChainNode(parts[0], Fraction(parts[1]), Fraction(parts[2])))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"chain {key}: cannot parse {raw!r}") from None
    if not nodes:
        raise ConfigError("[chain] defines no node<N> entries")
    return nodes


def parse_anchor(raw: str | None, default: int) -> Fraction:
    if raw is None:
        return Fraction(default)
    try:
        return Fraction(str(raw))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse anchor {raw!r}") from None


# ---------------------------------------------------------------------------
# Builders for the physics dataclasses


def constants_from_config(cfg: Config):
    from .constants import CONSTANTS, PhysicalConstants

    body = cfg.section("constants")
    if not body:
        return CONSTANTS
    from dataclasses import replace

    return replace(CONSTANTS, **body)


def schemes_from_config(cfg: Config):
    """Built-in level schemes with any [levels.<species>.<label>] overrides."""
    from dataclasses import replace

    from .atomic import builtin_schemes

    schemes = builtin_schemes()
    for name, body in cfg.sections.items():
        if not name.startswith("levels."):
            continue
        _, species, label = name.split(".")
        if species not in schemes:
            raise ConfigError(f"[{name}]: unknown species {species!r}")
        scheme = schemes[species]
        if label not in scheme.levels:
            raise ConfigError(f"[{name}]: unknown level {label!r} for {species}")
        fields = {k: v for k, v in body.items()}
        levels = dict(scheme.levels)
        levels[label] = replace(levels[label], **fields)
        schemes[species] = replace(scheme, levels=levels)
    return schemes


def trap_from_config(cfg: Config):
    from .trap import TrapConfig

    body = cfg.section("trap")
    if not body:
        return TrapConfig()
    base = TrapConfig()
    kwargs = {k: body.get(k, getattr(base, k)) for k in SCHEMA["trap"]}
    # keep the asymmetry consistent when only x/y were overridden
    if "dc_radial_asymmetry_hz" not in body and (
        "radial_freq_x_hz" in body or "radial_freq_y_hz" in body
    ):
        kwargs["dc_radial_asymmetry_hz"] = kwargs["radial_freq_x_hz"] - kwargs["radial_freq_y_hz"]
    return TrapConfig(**kwargs)


def ion_pair_from_config(cfg: Config):
    from .trap import IonPair

    body = cfg.section("ions")
    base = IonPair()
    return IonPair(
        mass_1_u=body.get("mass_1_u", base.mass_1_u),
        mass_2_u=body.get("mass_2_u", base.mass_2_u),
    )


def noise_from_config(cfg: Config):
    from .dynamics import NoiseModel

    body = cfg.section("noise")
    return NoiseModel(
        spontaneous_decay_rate=body.get("spontaneous_decay_rate_hz", 0.0),
        laser_dephasing_rate=body.get("laser_dephasing_rate_hz", 0.0),
        thermal_nbar=body.get("thermal_nbar", 0.0),
        drift_rate_hz_per_s=body.get("drift_rate_hz_per_s", 0.0),
    )


def protocol_from_config(cfg: Config):
    from .protocol import ProtocolConfig

    body = cfg.section("protocol")
    base = ProtocolConfig()
    nbar = {
        "axial-in-phase": body.get("nbar_in_phase", 0.05),
        "axial-out-of-phase": body.get("nbar_out_of_phase", 0.05),
    }
    return ProtocolConfig(
        pump_repetitions=body.get("pump_repetitions", base.pump_repetitions),
        pump_wait_s=body.get("pump_wait_s", base.pump_wait_s),
        excited_lifetime_s=body.get("excited_lifetime_s", base.excited_lifetime_s),
        carrier_pi_fidelity=body.get("carrier_pi_fidelity", base.carrier_pi_fidelity),
        sideband_pi_fidelity=body.get("sideband_pi_fidelity", base.sideband_pi_fidelity),
        mapping_pi_fidelity=body.get("mapping_pi_fidelity", base.mapping_pi_fidelity),
        detection_error=body.get("detection_error", base.detection_error),
        target_zeeman_state=parse_zeeman_target(str(body.get("target_zeeman_state", "+5/2"))),
        cooling_result_nbar=nbar,
        double_mapping=body.get("double_mapping", base.double_mapping),
    )
