import math

import numpy as np
import pytest

from ionwells import dynamics, gates, qcore
from ionwells.dynamics import DecoherenceParams
from ionwells.qcore import DimensionError


def test_register_layout_and_indices():
    reg = gates.WellRegister(n_wells=3, fock_trunc=3)
    assert reg.space.total_dim == 6 ** 3
    assert reg.qubit_index(1) == 0
    assert reg.cm_index(1) == 1
    assert reg.qubit_index(3) == 4
    assert reg.qubit_indices == (0, 2, 4)
    assert reg.cm_indices == (1, 3, 5)
    with pytest.raises(DimensionError):
        reg.qubit_index(4)


def test_register_validation():
    with pytest.raises(ValueError):
        gates.WellRegister(n_wells=0)
    with pytest.raises(DimensionError):
        gates.WellRegister(n_wells=2, fock_trunc=1)
    with pytest.raises(DimensionError):
        gates.WellRegister(n_wells=10, fock_trunc=4)  # 8^10 blows the dense limit


def test_computational_state_occupations():
    reg = gates.WellRegister(2, 2)
    st = reg.computational_state(1, 0)
    amp = st.amplitudes.reshape(reg.space.dims)
    assert amp[1, 0, 0, 0] == 1.0


def test_v1_swaps_excitation_with_completion_phase():
    for n in (2, 3, 4):
        reg = gates.WellRegister(n, 2)
        v1 = gates.op_V1(n, reg)
        chi = np.exp(1j * (1 - n) * math.pi / 2.0)
        up0 = [0] * (2 * n)
        up0[reg.qubit_index(1)] = 1
        dn1 = [0] * (2 * n)
        dn1[reg.cm_index(1)] = 1
        ket_up0 = qcore.basis_state(reg.space, up0).amplitudes
        ket_dn1 = qcore.basis_state(reg.space, dn1).amplitudes
        out = v1.matrix @ ket_up0
        assert np.vdot(ket_dn1, out) == pytest.approx(chi, abs=1e-14)
        back = v1.matrix @ ket_dn1
        assert np.vdot(ket_up0, back) == pytest.approx(chi, abs=1e-14)


def test_v1_identity_on_ground_and_unitary():
    reg = gates.WellRegister(2, 3)
    v1 = gates.op_V1(2, reg)
    vac = reg.computational_state(0, 0).amplitudes
    assert np.allclose(v1.matrix @ vac, vac)
    assert np.allclose(v1.matrix @ v1.matrix.conj().T, np.eye(reg.space.total_dim))


def test_cm_swap_leaves_vacuum_and_moves_phonon_with_i():
    reg = gates.WellRegister(2, 3)
    u = gates.op_cm_swap(1, reg)
    vac = reg.computational_state(0, 0).amplitudes
    assert np.allclose(u.matrix @ vac, vac)
    occ1 = [0, 1, 0, 0]
    occ2 = [0, 0, 0, 1]
    ket1 = qcore.basis_state(reg.space, occ1).amplitudes
    ket2 = qcore.basis_state(reg.space, occ2).amplitudes
    out = u.matrix @ ket1
    assert np.vdot(ket2, out) == pytest.approx(1j, abs=1e-12)
    assert abs(np.vdot(ket1, out)) < 1e-12


def test_cm_swap_angle_additivity():
    reg = gates.WellRegister(2, 3)
    u1 = gates.op_cm_swap(1, reg, angle=0.4)
    u2 = gates.op_cm_swap(1, reg, angle=0.9)
    u12 = gates.op_cm_swap(1, reg, angle=1.3)
    assert np.allclose((u2 @ u1).matrix, u12.matrix, atol=1e-12)


def test_cm_swap_matches_exchange_generator():
    reg = gates.WellRegister(2, 3)
    g_cm = 3.5e4
    t = 1.1e-5
    h = gates.cm_exchange_hamiltonian(1, reg, g_cm)
    u_ref = dynamics.propagate(h, t).matrix
    u = gates.op_cm_swap(1, reg, angle=g_cm * t).matrix
    assert np.allclose(u, u_ref, atol=1e-12)


def test_transfer_chain_phase_per_hop():
    for n in (2, 3, 4):
        reg = gates.WellRegister(n, 2)
        m = gates.op_M("1->n", reg)
        occ_first = [0] * (2 * n)
        occ_first[reg.cm_index(1)] = 1
        occ_last = [0] * (2 * n)
        occ_last[reg.cm_index(n)] = 1
        ket_a = qcore.basis_state(reg.space, occ_first).amplitudes
        ket_b = qcore.basis_state(reg.space, occ_last).amplitudes
        out = gates.op_M("1->n", reg).matrix @ ket_a
        assert np.vdot(ket_b, out) == pytest.approx(1j ** (n - 1), abs=1e-12)
    with pytest.raises(ValueError):
        gates.op_M("sideways", gates.WellRegister(2, 2))


def test_sn_conditional_flip():
    reg = gates.WellRegister(2, 3)
    sn = gates.op_Sn(reg)
    assert np.allclose((sn @ sn).matrix, np.eye(reg.space.total_dim), atol=1e-14)
    # flips the last qubit only when its CM holds exactly one phonon
    with_phonon = qcore.basis_state(reg.space, (0, 0, 0, 1)).amplitudes
    flipped = qcore.basis_state(reg.space, (0, 0, 1, 1)).amplitudes
    assert np.vdot(flipped, sn.matrix @ with_phonon) == pytest.approx(1.0)
    no_phonon = qcore.basis_state(reg.space, (0, 0, 0, 0)).amplitudes
    assert np.allclose(sn.matrix @ no_phonon, no_phonon)
    two_phonons = qcore.basis_state(reg.space, (0, 0, 0, 2)).amplitudes
    assert np.allclose(sn.matrix @ two_phonons, two_phonons)


@pytest.mark.parametrize("n", [2, 3])
def test_compose_cnot_is_exact(n):
    reg = gates.WellRegister(n, 3)
    u = gates.compose_cnot(n, reg)
    block = gates.computational_projection(reg, u)
    target = gates.cnot_target().matrix
    assert gates.gate_fidelity(block, target) == pytest.approx(1.0, abs=1e-12)
    # global phase is +1 exactly, not just modulus one
    nz = np.abs(target) > 0.5
    assert np.allclose(block[nz] / target[nz], 1.0, atol=1e-12)
    assert gates.ancilla_reset_fidelity(reg, u) == pytest.approx(1.0, abs=1e-12)


def test_gate_fidelity_reference_points():
    target = gates.cnot_target().matrix
    assert gates.gate_fidelity(target, target) == pytest.approx(1.0)
    assert gates.gate_fidelity(np.eye(4), target) == pytest.approx(0.25)
    with pytest.raises(DimensionError):
        gates.gate_fidelity(np.eye(3), target)


def test_timing_budget_derives_hop_time():
    tb = gates.timing_budget(20, t_v=8e-6, t_s=50e-6, g_cm=3.5e4)
    assert tb.t_u == pytest.approx(math.pi / (2 * 3.5e4), rel=1e-15)
    assert tb.t_total == pytest.approx(2 * (8e-6 + 19 * tb.t_u) + 50e-6, rel=1e-15)
    explicit = gates.timing_budget(20, t_v=8e-6, t_u=45e-6, t_s=50e-6)
    assert explicit.t_total == 1.776e-3
    with pytest.raises(ValueError):
        gates.timing_budget(1, t_v=8e-6, t_u=45e-6, t_s=50e-6)
    with pytest.raises(ValueError):
        gates.timing_budget(3, t_v=8e-6)  # no t_u and no g_cm


def test_cnot_sequence_structure():
    n = 3
    seq = gates.cnot_sequence(n, g_cm=3.5e4, t_v=8e-6, t_s=50e-6)
    kinds = [op.kind for op in seq.ops]
    assert kinds == ["sideband-transfer", "cm-swap", "cm-swap", "cm-conditioned-not",
                     "cm-swap", "cm-swap", "sideband-transfer"]
    hop_wells = [op.wells for op in seq.ops if op.kind == "cm-swap"]
    assert hop_wells == [(1, 2), (2, 3), (2, 3), (1, 2)]
    tb = gates.timing_budget(n, t_v=8e-6, t_s=50e-6, g_cm=3.5e4)
    assert seq.total_duration == pytest.approx(tb.t_total, rel=1e-15)


def test_noisy_application_reduces_to_ideal_at_zero_rates():
    reg = gates.WellRegister(2, 2)
    seq = gates.cnot_sequence(2, g_cm=3.5e4, t_v=8e-6, t_s=50e-6)
    rho0 = reg.computational_state(1, 0).to_density_matrix()
    rho = gates.apply_sequence_noisy(reg, seq, DecoherenceParams(), rho0, tol=1e-10)
    ideal = reg.computational_state(1, 1).amplitudes
    fid = (ideal.conj() @ rho.matrix @ ideal).real
    assert fid == pytest.approx(1.0, abs=1e-8)


def test_noisy_cnot_report_orders_and_degrades():
    reg = gates.WellRegister(2, 2)
    quiet = gates.noisy_cnot_report(2, reg, DecoherenceParams(), 3.5e4, 8e-6, 50e-6)
    assert quiet["mean"] == pytest.approx(1.0, abs=1e-8)
    noisy = gates.noisy_cnot_report(
        2, reg, DecoherenceParams(gamma_ex=1e3, gamma_in=10.0), 3.5e4, 8e-6, 50e-6
    )
    assert set(noisy) == {"00", "01", "10", "11", "bell", "mean"}
    assert 0.5 < noisy["mean"] < 1.0
    # inputs that never excite the bus barely decay
    assert noisy["00"] > noisy["10"]


def test_dephasing_only_shows_up_on_superpositions():
    reg = gates.WellRegister(2, 2)
    rep = gates.noisy_cnot_report(
        2, reg, DecoherenceParams(gamma_in=2e2), 3.5e4, 8e-6, 50e-6
    )
    basis_mean = rep["mean"]
    assert basis_mean > 0.999  # basis inputs are eigenstates of the dephaser
    assert rep["bell"] < basis_mean - 1e-3
