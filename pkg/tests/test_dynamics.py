import math

import numpy as np
import pytest

from ionwells import dynamics, model, qcore
from ionwells.constants import HBAR
from ionwells.dynamics import DecoherenceParams, IntegrationError


def rk4_swap(g, delta, t_end, steps=12000):
    """Fixed-step RK4 for the one-excitation pair, independent of the
    closed form: i da/dt = delta a - g b, i db/dt = -g a, a(0) = 1."""
    m = -1j * np.array([[delta, -g], [-g, 0.0]], dtype=complex)
    y = np.array([1.0 + 0j, 0.0 + 0j])
    h = t_end / steps
    for _ in range(steps):
        k1 = m @ y
        k2 = m @ (y + 0.5 * h * k1)
        k3 = m @ (y + 0.5 * h * k2)
        k4 = m @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


@pytest.mark.parametrize("delta_over_g", [0.0, 2.0, 5.0, 10.0])
def test_analytic_swap_against_rk4(delta_over_g):
    g = 1.0
    delta = delta_over_g * g
    for t_end in (0.7, 2.3, 5.0):
        y = rk4_swap(g, delta, t_end)
        amp = dynamics.analytic_swap(g, delta, t_end)
        assert abs(amp.alpha - y[0]) < 1e-9
        assert abs(amp.beta - y[1]) < 1e-9


def test_peak_transfer_values():
    # g^2 / (g^2 + delta^2/4) at the listed detunings
    expect = {0.0: 1.0, 2.0: 0.5, 5.0: 4.0 / 29.0, 10.0: 1.0 / 26.0}
    for r, p in expect.items():
        pmax, t_star = dynamics.max_swap_probability(1.0, r)
        assert pmax == pytest.approx(p, rel=1e-14)
        amp = dynamics.analytic_swap(1.0, r, t_star)
        assert amp.transfer_probability == pytest.approx(p, rel=1e-12)


def test_peak_sits_at_half_period():
    g, delta = 1.3e4, 7.5e3
    c = math.hypot(delta / 2.0, g)
    _, t_star = dynamics.max_swap_probability(g, delta)
    assert c * t_star == pytest.approx(math.pi / 2.0, rel=1e-14)


def test_normalization_property_sampled():
    rng = np.random.default_rng(421)
    for _ in range(300):
        g = 10.0 ** rng.uniform(2, 5)
        delta = g * rng.uniform(0.0, 12.0)
        c = math.hypot(delta / 2.0, g)
        t = rng.uniform(0.0, 1.0e3 / c)  # keep phase arguments well inside double range
        amp = dynamics.analytic_swap(g, delta, t)
        assert abs(abs(amp.alpha) ** 2 + abs(amp.beta) ** 2 - 1.0) < 1e-10


def test_analytic_swap_validation():
    with pytest.raises(ValueError):
        dynamics.analytic_swap(-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        dynamics.analytic_swap(1.0, math.inf, 1.0)


def test_swap_unitary_matches_analytic_on_resonance():
    for gt in (0.0, 0.3, math.pi / 2.0, 2.1):
        u = dynamics.swap_unitary(gt).matrix
        amp = dynamics.analytic_swap(1.0, 0.0, gt)
        assert u[0, 0] == pytest.approx(amp.alpha, abs=1e-12)
        assert u[1, 0] == pytest.approx(amp.beta, abs=1e-12)
        assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-14)


def test_propagate_unitary_and_group():
    derived = model.derive_couplings(
        model.TrapArrayParams(
            separation=40e-6,
            ions=(model.IonParams(mass=6.6422e-26, charge=1.6022e-19, trap_frequency=5.0e6),
                  model.IonParams(mass=6.6422e-26, charge=1.6022e-19, trap_frequency=5.1e6)),
        ),
        model.LaserParams(rabi_frequency=1e7, lamb_dicke=0.1,
                          laser_frequency=0.0, atomic_frequency=0.0),
    )
    space = model.two_mode_space(3)
    h = model.build_H_eff(derived, space)
    t1, t2 = 3.0e-5, 7.0e-5
    u1 = dynamics.propagate(h, t1).matrix
    u2 = dynamics.propagate(h, t2).matrix
    u12 = dynamics.propagate(h, t1 + t2).matrix
    assert np.linalg.norm(u1 @ u1.conj().T - np.eye(space.total_dim)) < 1e-12
    assert np.linalg.norm(u2 @ u1 - u12) < 1e-12


def test_propagate_matches_analytic_on_one_excitation():
    g = 1.1e4
    space = model.two_mode_space(2)
    eff = model.DerivedCouplings(K=0.0, xi1=0.0, xi2=0.0, g=g, delta_ex=0.0,
                                 delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=0.0)
    h = model.build_H_eff(eff, space)
    t = math.pi / (4.0 * g)
    u = dynamics.propagate(h, t).matrix
    start = qcore.basis_state(space, (0, 1)).amplitudes
    out = u @ start
    amp = dynamics.analytic_swap(g, 0.0, t)
    ket_01 = qcore.basis_state(space, (0, 1)).amplitudes
    ket_10 = qcore.basis_state(space, (1, 0)).amplitudes
    assert np.vdot(ket_01, out) == pytest.approx(amp.alpha, abs=1e-12)
    assert np.vdot(ket_10, out) == pytest.approx(amp.beta, abs=1e-12)


def test_integrate_tdse_static_agrees_with_propagate():
    g = 9.0e3
    space = model.two_mode_space(2)
    eff = model.DerivedCouplings(K=0.0, xi1=0.0, xi2=0.0, g=g, delta_ex=2e3,
                                 delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=2e3)
    h = model.build_H_eff(eff, space)
    psi0 = qcore.basis_state(space, (0, 1))
    t_end = 2.0e-4
    res = dynamics.integrate_tdse(lambda t: h, psi0, (0.0, t_end), tol=1e-12, n_points=5)
    expect = dynamics.propagate(h, t_end).matrix @ psi0.amplitudes
    overlap = abs(np.vdot(expect, res.states[-1].amplitudes))
    assert 1.0 - overlap < 1e-10
    assert res.norm_drift < 1e-10


def test_integrate_tdse_observable_tracking():
    g = 9.0e3
    space = model.two_mode_space(2)
    eff = model.DerivedCouplings(K=0.0, xi1=0.0, xi2=0.0, g=g, delta_ex=0.0,
                                 delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=0.0)
    h = model.build_H_eff(eff, space)
    psi0 = qcore.basis_state(space, (0, 1))
    n1 = qcore.embed(qcore.number(2), 0, space)
    t_end = math.pi / (2.0 * g)
    res = dynamics.integrate_tdse(lambda t: h, psi0, (0.0, t_end), tol=1e-11,
                                  observables={"n1": n1}, n_points=11)
    # full transfer by the half period
    assert res.observables["n1"][0] == pytest.approx(0.0, abs=1e-9)
    assert res.observables["n1"][-1] == pytest.approx(1.0, abs=1e-8)


def test_decoherence_params_validation():
    with pytest.raises(ValueError):
        DecoherenceParams(gamma_ex=-1.0)
    with pytest.raises(ValueError):
        DecoherenceParams(vibrational_channel="cooking")


def test_collapse_operators_shapes():
    space = model.two_ion_space(3)
    params = DecoherenceParams(gamma_ex=1e3, gamma_in=2e2)
    ops = dynamics.collapse_operators(params, space, mode_indices=(0, 1), spin_indices=(2,))
    assert len(ops) == 3  # a1, a2, sigma_z-type dephaser
    rates = sorted(r for _, r in ops)
    assert rates == [2e2, 1e3, 1e3]
    none = dynamics.collapse_operators(DecoherenceParams(), space, (0, 1), (2,))
    assert none == []


def test_lindblad_zero_rate_reduces_to_unitary():
    g = 1.1e4
    space = model.two_mode_space(2)
    eff = model.DerivedCouplings(K=0.0, xi1=0.0, xi2=0.0, g=g, delta_ex=0.0,
                                 delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=0.0)
    h = model.build_H_eff(eff, space)
    start = qcore.basis_state(space, (0, 1))
    rho0 = start.to_density_matrix()
    t_end = math.pi / (2.0 * g)
    res = dynamics.lindblad_evolve(h, [], rho0, (0.0, t_end), tol=1e-10, n_points=5)
    u = dynamics.propagate(h, t_end).matrix
    target = u @ start.amplitudes
    fid = (target.conj() @ res.states[-1].matrix @ target).real
    assert fid == pytest.approx(1.0, abs=1e-8)
    assert res.min_eigenvalue > -1e-10


def test_lindblad_equal_rate_damping_oracle():
    """Equal-rate amplitude damping on both modes leaves the one-excitation
    sector closed, and the overlap with the unitary outcome is exp(-gamma t)."""
    g, gamma = 1.1e4, 2.0e3
    space = model.two_mode_space(2)
    eff = model.DerivedCouplings(K=0.0, xi1=0.0, xi2=0.0, g=g, delta_ex=0.0,
                                 delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=0.0)
    h = model.build_H_eff(eff, space)
    params = DecoherenceParams(gamma_ex=gamma)
    cops = dynamics.collapse_operators(params, space, mode_indices=(0, 1))
    start = qcore.basis_state(space, (0, 1))
    rho0 = start.to_density_matrix()
    t_end = math.pi / (2.0 * g)
    res = dynamics.lindblad_evolve(h, cops, rho0, (0.0, t_end), tol=1e-11, n_points=9)
    for t, rho in zip(res.times, res.states):
        target = dynamics.propagate(h, t).matrix @ start.amplitudes
        fid = (target.conj() @ rho.matrix @ target).real
        assert fid == pytest.approx(math.exp(-gamma * t), abs=1e-8)


def test_lindblad_preserves_trace_and_positivity():
    g, gamma = 1.1e4, 5.0e3
    space = model.two_mode_space(3)
    eff = model.DerivedCouplings(K=0.0, xi1=0.0, xi2=0.0, g=g, delta_ex=0.0,
                                 delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=0.0)
    h = model.build_H_eff(eff, space)
    cops = dynamics.collapse_operators(DecoherenceParams(gamma_ex=gamma), space, (0, 1))
    rho0 = qcore.basis_state(space, (1, 1)).to_density_matrix()
    res = dynamics.lindblad_evolve(h, cops, rho0, (0.0, 2.0e-4), tol=1e-10, n_points=7)
    for rho in res.states:
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-8)
    assert res.min_eigenvalue > -1e-8


def test_effective_prediction_matches_rwa_integration():
    trap = model.TrapArrayParams(
        separation=40e-6,
        ions=(model.IonParams(mass=6.6422e-26, charge=1.6022e-19, trap_frequency=2e7 * math.pi),
              model.IonParams(mass=6.6422e-26, charge=1.6022e-19, trap_frequency=2.04e7 * math.pi)),
    )
    omega_a = 2 * math.pi * 4.111e14
    laser = model.LaserParams(rabi_frequency=1e7, lamb_dicke=0.1,
                              laser_frequency=omega_a, atomic_frequency=omega_a, phase=0.9)
    res = dynamics.effective_vs_full_error(trap, laser, terms=model.FRAME1_RWA_TERMS,
                                           tol=1e-11, n_points=21, n_fock=4)
    assert res.observables["infidelity"].max() < 1e-9


def test_effective_vs_full_reports_model_error():
    trap = model.TrapArrayParams(
        separation=40e-6,
        ions=(model.IonParams(mass=6.6422e-26, charge=1.6022e-19, trap_frequency=2e7 * math.pi),
              model.IonParams(mass=6.6422e-26, charge=1.6022e-19, trap_frequency=2.04e7 * math.pi)),
    )
    omega_a = 2 * math.pi * 4.111e14
    laser = model.LaserParams(rabi_frequency=1e7, lamb_dicke=0.1,
                              laser_frequency=omega_a, atomic_frequency=omega_a)
    res = dynamics.effective_vs_full_error(trap, laser, terms=model.FRAME1_FULL_TERMS,
                                           tol=1e-9, n_points=21, n_fock=4)
    peak = res.observables["infidelity"].max()
    # counter-rotating terms at these drive strengths are a visible but
    # small correction
    assert 1e-6 < peak < 0.2
