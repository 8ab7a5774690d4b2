"""Crystal statics and normal modes, cross-checked against an independent
finite-difference Hessian oracle."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from qlsim.constants import CONSTANTS
from qlsim.errors import ConfigError, DomainError, InstabilityError, OutOfRangeError
from qlsim.trap import (
    IonPair,
    TrapConfig,
    axial_modes_closed_form,
    infer_companion_mass,
    lamb_dicke,
    solve_crystal,
)

Q = CONSTANTS.elementary_charge
K = CONSTANTS.coulomb_constant
U = CONSTANTS.atomic_mass_unit


def axial_modes_oracle(m1_u: float, m2_u: float, nu1_hz: float) -> tuple[float, float]:
    """Independent route: minimize the axial potential numerically, build the
    mass-weighted Hessian by finite-differencing the analytic forces, and
    diagonalize."""
    m1, m2 = m1_u * U, m2_u * U
    a_curv = m1 * (2 * math.pi * nu1_hz) ** 2 / Q
    d0 = (2 * K * Q / a_curv) ** (1 / 3)

    def potential(z):
        z1, z2 = z
        if z2 <= z1:
            return 1e12
        return 0.5 * Q * a_curv * (z1**2 + z2**2) + K * Q * Q / (z2 - z1)

    def forces(z):
        z1, z2 = z
        coul = K * Q * Q / (z2 - z1) ** 2
        return np.array([-Q * a_curv * z1 - coul, -Q * a_curv * z2 + coul])

    res = minimize(potential, [-0.7 * d0, 0.7 * d0], method="Nelder-Mead",
                   options={"xatol": 1e-16 * d0, "fatol": 1e-12 * potential([-d0 / 2, d0 / 2]),
                            "maxiter": 20000})
    z_eq = res.x

    h = 1e-7 * d0
    hess = np.zeros((2, 2))
    for j in range(2):
        zp = z_eq.copy(); zp[j] += h
        zm = z_eq.copy(); zm[j] -= h
        hess[:, j] = -(forces(zp) - forces(zm)) / (2 * h)
    hess = 0.5 * (hess + hess.T)
    minv = np.diag([1 / math.sqrt(m1), 1 / math.sqrt(m2)])
    w2 = np.linalg.eigvalsh(minv @ hess @ minv)
    freqs = np.sqrt(w2) / (2 * math.pi)
    return float(freqs[0]), float(freqs[1])


class TestAxialClosedForm:
    def test_equal_masses(self):
        nu_i, nu_o = axial_modes_closed_form(40.0, 40.0, 820e3)
        assert nu_i == pytest.approx(820e3, rel=1e-12)
        assert nu_o == pytest.approx(math.sqrt(3) * 820e3, rel=1e-12)

    def test_reference_crystal(self):
        nu_i, nu_o = axial_modes_closed_form(40.0, 27.0, 820e3)
        assert nu_i == pytest.approx(888e3, rel=0.01)
        assert nu_o == pytest.approx(1.596e6, rel=0.01)

    def test_mass_28_oracle(self):
        nu_i, _ = axial_modes_closed_form(40.0, 28.0, 820e3)
        assert nu_i == pytest.approx(882.7e3, rel=1e-3)
        oracle = axial_modes_oracle(40.0, 28.0, 820e3)
        assert nu_i == pytest.approx(oracle[0], rel=1e-6)

    @given(st.floats(10, 200), st.floats(10, 200), st.floats(1e5, 3e6))
    def test_trace_identity(self, m1, m2, nu1):
        nu_i, nu_o = axial_modes_closed_form(m1, m2, nu1)
        assert nu_i**2 + nu_o**2 == pytest.approx(2 * nu1**2 * (1 + m1 / m2), rel=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(10, 200), st.floats(10, 200))
    def test_against_numeric_oracle(self, m1, m2):
        got = axial_modes_closed_form(m1, m2, 820e3)
        want = axial_modes_oracle(m1, m2, 820e3)
        assert got[0] == pytest.approx(want[0], rel=1e-5)
        assert got[1] == pytest.approx(want[1], rel=1e-5)

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            axial_modes_closed_form(-1.0, 27.0, 820e3)


class TestSolveCrystal:
    def test_axial_matches_closed_form(self):
        trap, pair = TrapConfig(), IonPair()
        sol = solve_crystal(trap, pair)
        want = axial_modes_closed_form(pair.mass_1_u, pair.mass_2_u, trap.axial_freq_hz)
        assert sol.mode("axial-in-phase").frequency_hz == pytest.approx(want[0], rel=1e-9)
        assert sol.mode("axial-out-of-phase").frequency_hz == pytest.approx(want[1], rel=1e-9)

    def test_paper_axial_modes(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        assert sol.mode("axial-in-phase").frequency_hz == pytest.approx(888e3, rel=0.01)
        assert sol.mode("axial-out-of-phase").frequency_hz == pytest.approx(1.596e6, rel=0.01)

    def test_paper_radial_modes_within_10pc(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        targets = {
            "radial-y-out-of-phase": 0.9e6,
            "radial-x-out-of-phase": 1.1e6,
            "radial-y-in-phase": 1.9e6,
            "radial-x-in-phase": 2.1e6,
        }
        for label, want in targets.items():
            got = sol.mode(label).frequency_hz
            assert abs(got - want) / want < 0.10, (label, got, want)

    def test_six_modes_sorted(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        freqs = [m.frequency_hz for m in sol.modes]
        assert len(freqs) == 6
        assert freqs == sorted(freqs)

    def test_random_triples_match_closed_form(self):
        # radial confinement chosen strong enough that every mass ratio in the
        # sweep keeps all six modes stable
        rng = np.random.default_rng(7)
        for _ in range(60):
            m1 = rng.uniform(10, 200)
            m2 = rng.uniform(10, 200)
            nu1 = rng.uniform(1e5, 1e6)
            trap = TrapConfig(
                axial_freq_hz=nu1,
                radial_freq_x_hz=20e6,
                radial_freq_y_hz=19.9e6,
                dc_radial_asymmetry_hz=0.1e6,
                reference_mass_u=m1,
            )
            sol = solve_crystal(trap, IonPair(mass_1_u=m1, mass_2_u=m2))
            want = axial_modes_closed_form(m1, m2, nu1)
            assert sol.mode("axial-in-phase").frequency_hz == pytest.approx(want[0], rel=1e-9)
            assert sol.mode("axial-out-of-phase").frequency_hz == pytest.approx(want[1], rel=1e-9)

    def test_mass_weighted_orthonormality(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        for axis in ("axial", "radial-x", "radial-y"):
            vecs = np.array([m.eigenvector for m in sol.modes if m.label.startswith(axis)])
            gram = vecs @ vecs.T
            assert np.allclose(gram, np.eye(2), atol=1e-10)

    def test_label_swap_leaves_frequencies(self):
        # express the same physical trap with the other ion as reference:
        # axial scales as sqrt(m1/m2); radial rf part as (m1/m2)^2 and dc part
        # as m1/m2 in frequency-squared units
        pair = IonPair()
        swapped = IonPair(mass_1_u=pair.mass_2_u, mass_2_u=pair.mass_1_u)
        trap = TrapConfig()
        r = pair.mass_1_u / pair.mass_2_u
        nz2 = trap.axial_freq_hz**2
        p_rf = 0.5 * (trap.radial_freq_x_hz**2 + trap.radial_freq_y_hz**2 + nz2)
        dim_x = trap.radial_freq_x_hz**2 - p_rf
        dim_y = trap.radial_freq_y_hz**2 - p_rf
        rx = math.sqrt(p_rf * r**2 + dim_x * r)
        ry = math.sqrt(p_rf * r**2 + dim_y * r)
        trap_swapped = TrapConfig(
            axial_freq_hz=trap.axial_freq_hz * math.sqrt(r),
            radial_freq_x_hz=rx,
            radial_freq_y_hz=ry,
            dc_radial_asymmetry_hz=rx - ry,
            reference_mass_u=pair.mass_2_u,
        )
        a = solve_crystal(trap, pair)
        b = solve_crystal(trap_swapped, swapped)
        fa = sorted(m.frequency_hz for m in a.modes)
        fb = sorted(m.frequency_hz for m in b.modes)
        assert fa == pytest.approx(fb, rel=1e-9)
        va = a.mode("axial-in-phase").eigenvector
        vb = b.mode("axial-in-phase").eigenvector
        assert sorted(np.abs(va)) == pytest.approx(sorted(np.abs(vb)), rel=1e-9)
        assert abs(va[0]) == pytest.approx(abs(vb[1]), rel=1e-9)

    def test_equilibrium_force_balance(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        z1, z2 = sol.equilibrium_m
        a_curv = TrapConfig().axial_curvature_v_m2
        f1 = -Q * a_curv * z1 - K * Q * Q / (z2 - z1) ** 2
        scale = Q * a_curv * sol.separation_m
        assert abs(f1) / scale < 1e-12

    def test_gradient_is_twice_trap_curvature(self):
        # for equal charges the neighbour's Coulomb curvature equals the trap's
        trap = TrapConfig()
        sol = solve_crystal(trap, IonPair())
        assert sol.axial_field_gradient_v_m2 == pytest.approx(
            2.0 * trap.axial_curvature_v_m2, rel=1e-9
        )

    def test_instability_names_direction(self):
        trap = TrapConfig(
            radial_freq_x_hz=900e3,
            radial_freq_y_hz=400e3,
            dc_radial_asymmetry_hz=500e3,
        )
        with pytest.raises(InstabilityError) as err:
            solve_crystal(trap, IonPair())
        assert "radial-y" in str(err.value)

    def test_wrong_reference_mass_rejected(self):
        with pytest.raises(ConfigError):
            solve_crystal(TrapConfig(), IonPair(mass_1_u=26.98, mass_2_u=39.96))


class TestMassInference:
    def test_reference_888(self):
        est = infer_companion_mass(888e3, TrapConfig())
        assert est.mass_u == pytest.approx(27.0, abs=0.5)
        assert est.nearest_integer_u == 27

    def test_hydride_882_7(self):
        est = infer_companion_mass(882.7e3, TrapConfig())
        assert est.nearest_integer_u == 28

    def test_equal_mass_symmetry(self):
        trap = TrapConfig()
        est = infer_companion_mass(trap.axial_freq_hz, trap)
        assert est.mass_u == pytest.approx(trap.reference_mass_u, rel=1e-6)
        assert est.nearest_integer_u == 40

    @given(st.floats(5.0, 250.0))
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, m2):
        trap = TrapConfig()
        nu_i, _ = axial_modes_closed_form(trap.reference_mass_u, m2, trap.axial_freq_hz)
        est = infer_companion_mass(nu_i, trap)
        assert est.mass_u == pytest.approx(m2, rel=1e-6)

    def test_out_of_bracket(self):
        with pytest.raises(OutOfRangeError):
            infer_companion_mass(2.0e6, TrapConfig())

    def test_ambiguity_flag(self):
        trap = TrapConfig()
        nu_i, _ = axial_modes_closed_form(trap.reference_mass_u, 27.5, trap.axial_freq_hz)
        est = infer_companion_mass(nu_i, trap, freq_sigma_hz=2000.0)
        assert est.ambiguous


class TestLambDicke:
    def test_zero_projection(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        assert lamb_dicke(sol.modes[0], 0, 729.0, 0.0) == 0.0

    def test_inverse_sqrt_omega_scaling(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        mode = sol.mode("axial-in-phase")
        from dataclasses import replace

        doubled = replace(mode, frequency_hz=2 * mode.frequency_hz)
        assert lamb_dicke(mode, 0, 729.0, 1.0) == pytest.approx(
            math.sqrt(2) * lamb_dicke(doubled, 0, 729.0, 1.0), rel=1e-12
        )

    def test_dual_path_formula(self):
        # independent evaluation from the raw definition, eigenvector recomputed here
        trap, pair = TrapConfig(), IonPair()
        sol = solve_crystal(trap, pair)
        mode = sol.mode("axial-out-of-phase")
        m1, m2 = pair.masses_kg
        r = pair.mass_1_u / pair.mass_2_u
        h11, h22 = 2.0, 2.0 * r
        h12 = -math.sqrt(r)
        tr, det = h11 + h22, h11 * h22 - h12 * h12
        lam_hi = tr / 2 + math.sqrt((tr / 2) ** 2 - det)  # out-of-phase eigenvalue / omega1^2
        v = np.array([h12, lam_hi - h11])
        v = v / np.linalg.norm(v)
        omega = 2 * math.pi * trap.axial_freq_hz * math.sqrt(lam_hi)
        k_wave = 2 * math.pi / 267e-9
        want = k_wave * abs(v[1]) * math.sqrt(CONSTANTS.hbar / (2 * m2 * omega))
        got = abs(lamb_dicke(mode, 1, 267.0, 1.0))
        assert got == pytest.approx(want, rel=1e-9)

    def test_bad_inputs(self):
        sol = solve_crystal(TrapConfig(), IonPair())
        with pytest.raises(DomainError):
            lamb_dicke(sol.modes[0], 0, 729.0, 1.5)
        with pytest.raises(DomainError):
            lamb_dicke(sol.modes[0], 2, 729.0, 1.0)


class TestTrapConfigValidation:
    def test_modulation_index_bounds(self):
        with pytest.raises(ConfigError):
            TrapConfig(residual_modulation_index=0.02)

    def test_asymmetry_consistency(self):
        with pytest.raises(ConfigError):
            TrapConfig(dc_radial_asymmetry_hz=1e4)

    def test_with_radial_split(self):
        trap = TrapConfig().with_radial_split(1.5e6, 200e3)
        assert trap.radial_freq_x_hz == pytest.approx(1.6e6)
        assert trap.radial_freq_y_hz == pytest.approx(1.4e6)
