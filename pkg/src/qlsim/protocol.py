"""Six-step quantum-logic readout protocol as a stochastic state machine.

Optical pumping over the ground/excited Zeeman manifolds, composition of the
probe / state-transfer / detection chain into binary shot records, batch
statistics with quantum projection noise, and the double-mapping variant used
for clock-line probing.

Pulse imperfections are modelled as independent outcome flips with the
configured success probabilities; slow drifts of motional temperature fold
into those fidelities rather than being simulated per shot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import NoiseModel, Pulse, QuantumState, RamseyPair, evolve, thermal_state
from .errors import ConfigError, DomainError

GROUND_F = 2.5
EXCITED_F = 3.5
_GROUND_M = [(-5 + 2 * i) / 2 for i in range(6)]    # -5/2 .. +5/2
_EXCITED_M = [(-7 + 2 * i) / 2 for i in range(8)]   # -7/2 .. +7/2


@dataclass(frozen=True)
class ProtocolConfig:
    pump_repetitions: int = 10
    pump_wait_s: float = 300e-6
    excited_lifetime_s: float = 299e-6
    carrier_pi_fidelity: float = 1.0
    sideband_pi_fidelity: float = 1.0
    mapping_pi_fidelity: float = 1.0
    detection_error: float = 0.0
    target_zeeman_state: float = 2.5     # +5/2 or -5/2
    cooling_result_nbar: dict = field(
        default_factory=lambda: {"axial-in-phase": 0.05, "axial-out-of-phase": 0.05}
    )
    double_mapping: bool = False

    def __post_init__(self):
        if self.pump_repetitions < 0:
            raise ConfigError("pump_repetitions must be >= 0")
        for name in (
            "carrier_pi_fidelity",
            "sideband_pi_fidelity",
            "mapping_pi_fidelity",
            "detection_error",
        ):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if abs(self.target_zeeman_state) != 2.5:
            raise ConfigError("target_zeeman_state must be +5/2 or -5/2")
        if any(v < 0 for v in self.cooling_result_nbar.values()):
            raise ConfigError("cooling nbar must be >= 0")
        if self.pump_wait_s <= 0 or self.excited_lifetime_s <= 0:
            raise ConfigError("pump_wait_s and excited_lifetime_s must be > 0")


# ---------------------------------------------------------------------------
# Optical pumping over the Zeeman manifolds


def cg_squared_to_stretched(m_ground: float, q: int) -> float:
    """|<F m; 1 q | F+1, m+q>|^2 for F = 5/2 (closed Racah form)."""
    j = GROUND_F
    m = m_ground
    if q == +1:
        return (j + m + 1) * (j + m + 2) / ((2 * j + 1) * (2 * j + 2))
    if q == 0:
        return (j - m + 1) * (j + m + 1) / ((2 * j + 1) * (j + 1))
    if q == -1:
        return (j - m + 1) * (j - m + 2) / ((2 * j + 1) * (2 * j + 2))
    raise DomainError("q must be -1, 0, or +1")


def decay_branching(m_excited: float) -> list[tuple[float, float]]:
    """[(m_ground, weight)] for dipole decay from |F'=7/2, m_excited>.

    Weights are squared Clebsch-Gordan coefficients; they sum to 1 for every
    excited sublevel by completeness.
    """
    out = []
    for q in (-1, 0, +1):
        m_g = m_excited - q
        if abs(m_g) <= GROUND_F + 1e-9:
            out.append((m_g, cg_squared_to_stretched(m_g, q)))
    return out


@dataclass
class PumpState:
    """Populations over the 6 ground and 8 excited Zeeman sublevels."""

    ground: np.ndarray = field(default_factory=lambda: np.zeros(6))
    excited: np.ndarray = field(default_factory=lambda: np.zeros(8))

    def __post_init__(self):
        self.ground = np.asarray(self.ground, dtype=float).copy()
        self.excited = np.asarray(self.excited, dtype=float).copy()
        if self.ground.shape != (6,) or self.excited.shape != (8,):
            raise DomainError("PumpState needs 6 ground and 8 excited populations")
        self.validate()

    def validate(self):
        if (self.ground < -1e-12).any() or (self.excited < -1e-12).any():
            raise DomainError("populations must be nonnegative")
        total = self.ground.sum() + self.excited.sum()
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"populations sum to {total}, not 1")
        return self

    @staticmethod
    def uniform_ground() -> "PumpState":
        return PumpState(np.full(6, 1.0 / 6.0), np.zeros(8))

    @staticmethod
    def pure_ground(m: float) -> "PumpState":
        g = np.zeros(6)
        g[_GROUND_M.index(m)] = 1.0
        return PumpState(g, np.zeros(8))

    def ground_population(self, m: float) -> float:
        return float(self.ground[_GROUND_M.index(m)])


def _decay_window(state: PumpState, dt: float, tau: float) -> PumpState:
    survive = math.exp(-dt / tau)
    ground = state.ground.copy()
    excited = state.excited * survive
    for idx, m_e in enumerate(_EXCITED_M):
        decayed = state.excited[idx] * (1.0 - survive)
        if decayed == 0.0:
            continue
        for m_g, weight in decay_branching(m_e):
            ground[_GROUND_M.index(m_g)] += decayed * weight
    return PumpState(ground, excited)


def optical_pump(state: PumpState, config: ProtocolConfig) -> PumpState:
    """Pump toward the target stretched ground state.

    Per repetition: five sequential pi pulses on the sigma transitions
    g(m) <-> e(m + s) (s = +1 toward +5/2, -1 toward -5/2), each followed by a
    decay window of ``pump_wait_s``.  Residual excited population is carried
    across pulses; a 300 us window empties only ~63% of the excited state.
    """
    s = 1 if config.target_zeeman_state > 0 else -1
    # drive every ground sublevel except the target, farthest first
    driven = sorted((m for m in _GROUND_M if m != config.target_zeeman_state),
                    key=lambda m: -abs(m - config.target_zeeman_state))
    out = state
    for _ in range(config.pump_repetitions):
        for m in driven:
            g_idx = _GROUND_M.index(m)
            e_idx = _EXCITED_M.index(m + s)
            ground = out.ground.copy()
            excited = out.excited.copy()
            ground[g_idx], excited[e_idx] = excited[e_idx], ground[g_idx]
            out = _decay_window(
                PumpState(ground, excited), config.pump_wait_s, config.excited_lifetime_s
            )
    return out


# ---------------------------------------------------------------------------
# Probe specification -> excitation probability


@dataclass(frozen=True)
class ProbeSpec:
    """The Al-probe part of one experiment (steps iv of the sequence).

    Either an explicit pulse list or a Ramsey pair; ``is_clock`` marks probes
    of the clock line, which require the double-mapping readout.
    """

    pulses: tuple[Pulse, ...] = ()
    ramsey: RamseyPair | None = None
    detuning: float = 0.0        # rad/s, used with ``ramsey``
    phase2: float = 0.0
    is_clock: bool = False

    @staticmethod
    def single_pulse(pulse: Pulse, is_clock: bool = False) -> "ProbeSpec":
        return ProbeSpec(pulses=(pulse,), is_clock=is_clock)

    @staticmethod
    def ramsey_probe(pair: RamseyPair, detuning: float, phase2: float) -> "ProbeSpec":
        return ProbeSpec(ramsey=pair, detuning=detuning, phase2=phase2)


def probe_excitation(
    spec: ProbeSpec, noise: NoiseModel = NoiseModel(), nbar: float = 0.0
) -> float:
    """Master-equation excitation probability for one probe specification."""
    state0 = thermal_state(nbar) if nbar > 0 else thermal_state(0.0, 0)
    if spec.ramsey is not None:
        seq = spec.ramsey.pulses(spec.detuning, spec.phase2)
    elif spec.pulses:
        seq = list(spec.pulses)
    else:
        raise ConfigError("probe spec carries neither pulses nor a Ramsey pair")
    return evolve(state0, seq, noise).excited_population()


# ---------------------------------------------------------------------------
# Shots


@dataclass(frozen=True)
class ShotRecord:
    outcome: str                     # "dark" (Al excited) or "bright"
    rng_stream_id: int
    step_trace: tuple[float, ...] | None = None


def shot_rng(seed: int, stream_id: int) -> np.random.Generator:
    """Counter-based stream: identical for a given (seed, stream_id) no matter
    how shots are scheduled."""
    return np.random.Generator(np.random.Philox(key=seed, counter=stream_id << 192))


def _mapped_readout(excited: bool, config: ProtocolConfig, rng) -> bool:
    """One pass of steps (v)-(vi): sideband transfer, mapping, shelving readout."""
    detected = excited
    for fidelity in (
        config.carrier_pi_fidelity,
        config.sideband_pi_fidelity,
        config.mapping_pi_fidelity,
    ):
        if rng.random() > fidelity:
            detected = not detected
    if rng.random() < config.detection_error:
        detected = not detected
    return detected


def run_shot(
    config: ProtocolConfig,
    probe: ProbeSpec | float,
    rng: np.random.Generator,
    stream_id: int = 0,
    noise: NoiseModel = NoiseModel(),
    keep_trace: bool = False,
) -> ShotRecord:
    """One full protocol cycle; returns the binary detection outcome.

    ``probe`` may be a precomputed excitation probability (fast path used by
    batches) or a ProbeSpec evaluated through the dynamics engine.  In the
    ideal limit (unit fidelities, zero detection error) P(dark) equals the
    probe excitation probability exactly.
    """
    if isinstance(probe, ProbeSpec):
        if probe.is_clock and not config.double_mapping:
            raise ConfigError("clock-line probing requires the double_mapping flag")
        p = probe_excitation(probe, noise)
    else:
        p = float(probe)
    if not 0.0 <= p <= 1.0:
        raise DomainError("excitation probability must lie in [0, 1]")

    excited = rng.random() < p
    detected = _mapped_readout(excited, config, rng)
    outcome = "dark" if detected else "bright"
    trace = (p, 1.0 if excited else 0.0, 1.0 if detected else 0.0) if keep_trace else None
    return ShotRecord(outcome, stream_id, trace)


@dataclass(frozen=True)
class BatchResult:
    n_shots: int
    counts: dict
    p_hat: float
    sigma_qpn: float
    seed: int
    records: tuple[ShotRecord, ...] = ()

    @property
    def n_excited(self) -> int:
        return self.counts.get("dark", 0)


def run_batch(
    config: ProtocolConfig,
    probe: ProbeSpec | float,
    n_shots: int,
    seed: int,
    noise: NoiseModel = NoiseModel(),
    keep_records: bool = False,
) -> BatchResult:
    """Aggregate ``n_shots`` independent shots.

    sigma_qpn = sqrt(p_hat (1 - p_hat) / n).  Each shot gets its own counter
    stream derived from (seed, shot index), so the result is bit-identical
    under any execution order.
    """
    if n_shots < 1:
        raise DomainError("n_shots must be >= 1")
    if isinstance(probe, ProbeSpec):
        p = probe_excitation(probe, noise)
    else:
        p = float(probe)
    counts = {"dark": 0, "bright": 0}
    records = []
    for i in range(n_shots):
        rec = run_shot(config, p, shot_rng(seed, i), stream_id=i)
        counts[rec.outcome] += 1
        if keep_records:
            records.append(rec)
    p_hat = counts["dark"] / n_shots
    sigma = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_shots)
    return BatchResult(n_shots, counts, p_hat, sigma, seed, tuple(records))


def ramsey_phase_counts(
    config: ProtocolConfig,
    pair: RamseyPair,
    detuning: float,
    n_per_phase: int,
    seed: int,
    noise: NoiseModel = NoiseModel(),
) -> dict[float, tuple[int, int]]:
    """Counts (n_excited, n_total) at the four scan phases 0, +pi/2, -pi/2, pi."""
    out = {}
    for k, phase in enumerate((0.0, math.pi / 2, -math.pi / 2, math.pi)):
        spec = ProbeSpec.ramsey_probe(pair, detuning, phase)
        batch = run_batch(config, spec, n_per_phase, seed + 1000003 * k, noise)
        out[phase] = (batch.n_excited, n_per_phase)
    return out


# ---------------------------------------------------------------------------
# Clock-line probing (double mapping, state-change observable)


@dataclass(frozen=True)
class ClockShot:
    record: ShotRecord
    now_excited: bool


def run_clock_shot(
    config: ProtocolConfig,
    flip_probability: float,
    rng: np.random.Generator,
    currently_excited: bool = False,
    stream_id: int = 0,
) -> ClockShot:
    """One clock-probe experiment with the transfer/readout pass run twice.

    The probe swaps the metastable population with probability
    ``flip_probability``; the readout declares "excited" only when both
    mapping passes agree, which suppresses single-pass false positives to
    O(error^2).
    """
    if not config.double_mapping:
        raise ConfigError("clock-line probing requires the double_mapping flag")
    if not 0.0 <= flip_probability <= 1.0:
        raise DomainError("flip probability must lie in [0, 1]")
    excited = (not currently_excited) if rng.random() < flip_probability else currently_excited
    first = _mapped_readout(excited, config, rng)
    second = _mapped_readout(excited, config, rng)
    detected = first and second
    outcome = "dark" if detected else "bright"
    return ClockShot(ShotRecord(outcome, stream_id), excited)


def clock_state_change_rate(
    config: ProtocolConfig,
    flip_probability: float,
    n_experiments: int,
    seed: int,
) -> float:
    """Fraction of consecutive experiment pairs whose readout changed."""
    if n_experiments < 2:
        raise DomainError("need at least two experiments")
    excited = False
    prev = None
    changes = 0
    for i in range(n_experiments):
        shot = run_clock_shot(config, flip_probability, shot_rng(seed, i),
                              currently_excited=excited, stream_id=i)
        excited = shot.now_excited
        reading = shot.record.outcome
        if prev is not None and reading != prev:
            changes += 1
        prev = reading
    return changes / (n_experiments - 1)
