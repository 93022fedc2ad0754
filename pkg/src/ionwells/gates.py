"""CNOT between the first and last of a chain of separately trapped ions.

The register models n wells, each holding one ion: a qubit (internal
state) plus the centre-of-mass vibration of that well, truncated to a
few Fock levels.  The protocol writes the control qubit onto its local
CM phonon, walks the phonon down the chain through nearest-neighbour
exchange pulses, flips the target conditioned on the phonon, and
retraces its steps:

    C = V1 . M_{n,1} . S_n . M_{1,n} . V1      (rightmost acts first)

V1 is a phase-completed sideband pi-pulse on well 1 exchanging
|up, 0_cm> and |down, 1_cm>; each hop of M is a resonant half-period of
the exchange coupling, contributing exp(+i pi/2 sigma_x) on the
one-phonon pair, i.e. a factor i per hop; S_n swaps |1_cm, down> with
|1_cm, up> on the last well.  Both transfer directions together give
i^{2(n-1)} = (-1)^{n-1}, so V1 carries the completion phase
chi = (1-n) pi/2 on both of its matrix elements, which makes the
composite equal CNOT with overall phase exactly +1.

All operators here are exact dense unitaries; pulse shaping, off-resonant
leakage and detunings are out of scope (the dynamics module quantifies
those for the two-well exchange).  Decoherence during the protocol can
be bolted on per pulse via ``apply_sequence_noisy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import HBAR
from . import qcore
from .qcore import CompositeSpace, DensityMatrix, DimensionError, Operator, PureState
from . import dynamics

GATE_KINDS = ("sideband-transfer", "cm-swap", "cm-conditioned-not")

# Dense matrices above this total dimension are rejected outright.
REGISTER_DIM_LIMIT = 2 ** 16


@dataclass(frozen=True)
class WellRegister:
    """n wells, each one qubit + one truncated CM mode.

    Factor order is (q1, cm1, q2, cm2, ..., qn, cmn); well numbering is
    1-based in every public method.  Qubit basis order is (|down>, |up>).
    """

    n_wells: int
    fock_trunc: int = 3
    space: CompositeSpace = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_wells < 1:
            raise ValueError(f"n_wells must be >= 1, got {self.n_wells}")
        if self.fock_trunc < 2:
            raise DimensionError(
                f"fock_trunc must be >= 2 to hold the travelling phonon, got {self.fock_trunc}"
            )
        total = (2 * self.fock_trunc) ** self.n_wells
        if total > REGISTER_DIM_LIMIT:
            raise DimensionError(
                f"register dimension {total} exceeds the dense limit {REGISTER_DIM_LIMIT}"
            )
        subs = []
        for j in range(1, self.n_wells + 1):
            subs.append(qcore.two_level(f"q{j}"))
            subs.append(qcore.mode(self.fock_trunc, f"cm{j}"))
        object.__setattr__(self, "space", CompositeSpace(tuple(subs)))

    def qubit_index(self, well: int) -> int:
        self._check_well(well)
        return 2 * (well - 1)

    def cm_index(self, well: int) -> int:
        self._check_well(well)
        return 2 * (well - 1) + 1

    @property
    def cm_indices(self) -> tuple[int, ...]:
        return tuple(2 * j + 1 for j in range(self.n_wells))

    @property
    def qubit_indices(self) -> tuple[int, ...]:
        return tuple(2 * j for j in range(self.n_wells))

    def _check_well(self, well: int):
        if not 1 <= well <= self.n_wells:
            raise DimensionError(f"well {well} out of range 1..{self.n_wells}")

    def computational_state(self, control: int, target: int) -> PureState:
        """|control>_q1 |target>_qn, every CM mode and spectator qubit in |0>."""
        occ = [0] * (2 * self.n_wells)
        occ[self.qubit_index(1)] = int(control)
        occ[self.qubit_index(self.n_wells)] = int(target)
        return qcore.basis_state(self.space, occ)


@dataclass(frozen=True)
class GateOp:
    """One pulse of the protocol, with its bookkeeping.

    kind is one of GATE_KINDS; wells lists the 1-based wells it touches;
    angle is the pulse area (pi/2 for an exchange hop, pi for the
    sideband and conditional pulses); phase is any extra phase the pulse
    imprints; duration is wall-clock seconds.
    """

    kind: str
    wells: tuple[int, ...]
    angle: float
    phase: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if not 0 <= self.angle < 2 * math.pi:
            raise ValueError(f"angle must lie in [0, 2 pi), got {self.angle!r}")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True)
class GateSequence:
    """Pulses in application order (ops[0] acts first)."""

    ops: tuple[GateOp, ...]
    g_cm: float

    def __post_init__(self):
        if not isinstance(self.ops, tuple):
            object.__setattr__(self, "ops", tuple(self.ops))
        if self.g_cm <= 0:
            raise ValueError("g_cm must be positive")

    @property
    def total_duration(self) -> float:
        return sum(op.duration for op in self.ops)


@dataclass(frozen=True)
class TimingBudget:
    """Wall-clock budget of the full protocol on an n-well chain."""

    n_wells: int
    t_v: float
    t_u: float
    t_s: float

    @property
    def t_total(self) -> float:
        return 2.0 * (self.t_v + (self.n_wells - 1) * self.t_u) + self.t_s


def timing_budget(
    n: int,
    t_v: float,
    t_u: Optional[float] = None,
    t_s: float = 0.0,
    *,
    g_cm: Optional[float] = None,
) -> TimingBudget:
    """Assemble the protocol timing; t_u may be derived as pi / (2 g_cm).

    t_total = 2 [t_v + (n - 1) t_u] + t_s: two sideband pulses, the
    phonon's round trip of 2(n-1) hops, one conditional pulse.
    """
    if n < 2:
        raise ValueError(f"protocol needs n >= 2 wells, got {n}")
    if t_u is None:
        if g_cm is None or g_cm <= 0:
            raise ValueError("provide t_u directly or a positive g_cm to derive it")
        t_u = math.pi / (2.0 * g_cm)
    for name, v in (("t_v", t_v), ("t_u", t_u), ("t_s", t_s)):
        if v <= 0 or not math.isfinite(v):
            raise ValueError(f"{name} must be positive and finite, got {v!r}")
    return TimingBudget(n_wells=n, t_v=t_v, t_u=t_u, t_s=t_s)


# ---------------------------------------------------------------------------
# Pulse unitaries


def op_V1(n: int, register: WellRegister) -> Operator:
    """Sideband pulse on well 1: |up, 0_cm> <-> e^{i chi} |down, 1_cm>.

    chi = (1 - n) pi / 2 cancels the i^{2(n-1)} picked up by the phonon's
    round trip on an n-well chain.  Identity on every other basis state
    (higher CM levels are never populated by the protocol).
    """
    if n != register.n_wells:
        raise ValueError(f"n = {n} does not match register.n_wells = {register.n_wells}")
    trunc = register.fock_trunc
    chi = (1 - n) * math.pi / 2.0
    local = np.eye(2 * trunc, dtype=np.complex128)
    i_up0 = 1 * trunc + 0
    i_dn1 = 0 * trunc + 1
    local[i_up0, i_up0] = 0.0
    local[i_dn1, i_dn1] = 0.0
    local[i_dn1, i_up0] = np.exp(1j * chi)
    local[i_up0, i_dn1] = np.exp(1j * chi)
    pair_space = CompositeSpace((qcore.two_level(), qcore.mode(trunc)))
    op = Operator(pair_space, local)
    return qcore.embed_multi(op, (register.qubit_index(1), register.cm_index(1)), register.space)


def cm_exchange_hamiltonian(j: int, register: WellRegister, g_cm: float) -> Operator:
    """H = -hbar g_cm (a_j a_{j+1}^dag + a_j^dag a_{j+1}) on the CM modes of wells j, j+1."""
    register._check_well(j)
    register._check_well(j + 1)
    a_j = qcore.embed(qcore.annihilation(register.fock_trunc), register.cm_index(j), register.space)
    a_k = qcore.embed(qcore.annihilation(register.fock_trunc), register.cm_index(j + 1), register.space)
    return (-HBAR * g_cm) * (a_j @ a_k.dagger() + a_j.dagger() @ a_k)


def op_cm_swap(j: int, register: WellRegister, angle: float = math.pi / 2.0) -> Operator:
    """exp[+i angle (a_j a_{j+1}^dag + a_j^dag a_{j+1})] between wells j and j+1.

    angle = g_cm t; a half swap (pi/2) moves one phonon from well j to
    well j+1 with a factor i.  Exactly the identity on the joint vacuum.
    """
    register._check_well(j)
    register._check_well(j + 1)
    trunc = register.fock_trunc
    a = qcore.annihilation(trunc).matrix
    pair_dim = trunc * trunc
    gen = np.kron(a, a.conj().T)
    gen = gen + gen.conj().T
    w, v = np.linalg.eigh(gen)
    local = (v * np.exp(1j * angle * w)) @ v.conj().T
    pair_space = CompositeSpace((qcore.mode(trunc), qcore.mode(trunc)))
    op = Operator(pair_space, local.reshape(pair_dim, pair_dim))
    return qcore.embed_multi(op, (register.cm_index(j), register.cm_index(j + 1)), register.space)


def op_M(direction: str, register: WellRegister) -> Operator:
    """Phonon transfer chain: "1->n" hops well by well down, "n->1" back up.

    Composition of half swaps; each hop contributes a factor i on the
    single-phonon subspace, i^{n-1} per direction in total.
    """
    n = register.n_wells
    if n < 2:
        raise ValueError("transfer needs at least two wells")
    if direction == "1->n":
        hops = range(1, n)
    elif direction == "n->1":
        hops = range(n - 1, 0, -1)
    else:
        raise ValueError(f"direction must be '1->n' or 'n->1', got {direction!r}")
    total = None
    for j in hops:
        u = op_cm_swap(j, register)
        total = u if total is None else u @ total
    return total


def op_Sn(register: WellRegister) -> Operator:
    """Conditional flip on the last well: |1_cm, down> <-> |1_cm, up>, else identity."""
    n = register.n_wells
    trunc = register.fock_trunc
    local = np.eye(2 * trunc, dtype=np.complex128)
    i_dn1 = 0 * trunc + 1
    i_up1 = 1 * trunc + 1
    local[i_dn1, i_dn1] = 0.0
    local[i_up1, i_up1] = 0.0
    local[i_up1, i_dn1] = 1.0
    local[i_dn1, i_up1] = 1.0
    pair_space = CompositeSpace((qcore.two_level(), qcore.mode(trunc)))
    op = Operator(pair_space, local)
    return qcore.embed_multi(op, (register.qubit_index(n), register.cm_index(n)), register.space)


def compose_cnot(n: int, register: WellRegister) -> Operator:
    """The full protocol unitary V1 M_{n,1} S_n M_{1,n} V1."""
    if n != register.n_wells:
        raise ValueError(f"n = {n} does not match register.n_wells = {register.n_wells}")
    if n < 2:
        raise ValueError("CNOT protocol needs n >= 2")
    v1 = op_V1(n, register)
    u = v1
    u = op_M("1->n", register) @ u
    u = op_Sn(register) @ u
    u = op_M("n->1", register) @ u
    u = v1 @ u
    return u


def cnot_sequence(n: int, g_cm: float, t_v: float, t_s: float) -> GateSequence:
    """The protocol as timed pulses, in application order."""
    budget = timing_budget(n, t_v, None, t_s, g_cm=g_cm)
    chi = ((1 - n) * math.pi / 2.0) % (2.0 * math.pi)
    v1 = GateOp("sideband-transfer", (1,), math.pi, chi, t_v)
    sn = GateOp("cm-conditioned-not", (n,), math.pi, 0.0, t_s)
    ops = [v1]
    for j in range(1, n):
        ops.append(GateOp("cm-swap", (j, j + 1), math.pi / 2.0, 0.0, budget.t_u))
    ops.append(sn)
    for j in range(n - 1, 0, -1):
        ops.append(GateOp("cm-swap", (j, j + 1), math.pi / 2.0, 0.0, budget.t_u))
    ops.append(v1)
    return GateSequence(ops=tuple(ops), g_cm=g_cm)


# ---------------------------------------------------------------------------
# Verification helpers


def cnot_target() -> Operator:
    """Ideal CNOT on (control, target), basis order (dd, du, ud, uu)."""
    space = CompositeSpace((qcore.two_level("control"), qcore.two_level("target")))
    m = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ],
        dtype=np.complex128,
    )
    return Operator(space, m)


def computational_projection(register: WellRegister, u: Operator) -> np.ndarray:
    """4x4 block of ``u`` on the computational inputs/outputs.

    Rows and columns run over (control, target) in the order
    (00, 01, 10, 11), with all CM modes in vacuum and spectator qubits
    down on both sides.
    """
    if not u.space.compatible(register.space):
        raise qcore.SpaceMismatchError("operator does not act on this register")
    idx = []
    for c in (0, 1):
        for t in (0, 1):
            st = register.computational_state(c, t)
            idx.append(int(np.argmax(np.abs(st.amplitudes))))
    return u.matrix[np.ix_(idx, idx)].copy()


def gate_fidelity(actual: np.ndarray, target: np.ndarray) -> float:
    """|tr(T^dag A) / d|^2, the phase-insensitive overlap of two gate blocks."""
    a = np.asarray(actual, dtype=np.complex128)
    t = np.asarray(target, dtype=np.complex128)
    if a.shape != t.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"gate blocks must be equal square matrices, got {a.shape} and {t.shape}")
    d = a.shape[0]
    return float(abs(np.trace(t.conj().T @ a) / d) ** 2)


def ancilla_reset_fidelity(register: WellRegister, u: Operator) -> float:
    """Worst-case fidelity of the post-gate CM register with its joint vacuum.

    The protocol must hand every phonon back: for each computational
    input the reduced state of all CM modes is compared against vacuum
    and the minimum over inputs is returned.
    """
    if not u.space.compatible(register.space):
        raise qcore.SpaceMismatchError("operator does not act on this register")
    keep = register.cm_indices
    vac_dim = register.fock_trunc ** register.n_wells
    worst = 1.0
    for c in (0, 1):
        for t in (0, 1):
            st = register.computational_state(c, t)
            out = PureState(register.space, u.matrix @ st.amplitudes)
            reduced = qcore.partial_trace(out.to_density_matrix(), keep)
            worst = min(worst, float(np.real(reduced.matrix[0, 0])))
    return worst


# ---------------------------------------------------------------------------
# Decoherence during the protocol


def _ideal_output(register: WellRegister, control: int, target: int) -> PureState:
    return register.computational_state(control, (target + control) % 2)


def apply_sequence_noisy(
    register: WellRegister,
    sequence: GateSequence,
    decoherence: dynamics.DecoherenceParams,
    rho0: DensityMatrix,
    *,
    tol: float = 1e-8,
) -> DensityMatrix:
    """Run the pulse sequence with Lindblad decoherence switched on.

    Exchange hops evolve under their real generator for their stated
    duration; the single-well pulses (sideband, conditional flip) are
    modelled as instantaneous unitaries followed by idle decoherence for
    the pulse duration, since their internal dynamics is not part of
    this model.  Collapse channels: gamma_ex on every CM mode, gamma_in
    on every qubit.
    """
    collapse = dynamics.collapse_operators(
        decoherence, register.space, register.cm_indices, register.qubit_indices
    )
    zero_h = Operator(register.space, np.zeros((register.space.total_dim,) * 2))
    rho = rho0
    for op in sequence.ops:
        if op.kind == "cm-swap":
            h = cm_exchange_hamiltonian(op.wells[0], register, sequence.g_cm)
            res = dynamics.lindblad_evolve(
                h, collapse, rho, (0.0, op.duration), tol=tol, n_points=2
            )
            rho = res.states[-1]
            continue
        if op.kind == "sideband-transfer":
            u = op_V1(register.n_wells, register)
        else:
            u = op_Sn(register)
        kicked = u.matrix @ rho.matrix @ u.matrix.conj().T
        rho = DensityMatrix(register.space, kicked,
                            trace_atol=rho.trace_atol, herm_atol=rho.herm_atol,
                            eig_atol=rho.eig_atol)
        if collapse and op.duration > 0:
            res = dynamics.lindblad_evolve(
                zero_h, collapse, rho, (0.0, op.duration), tol=tol, n_points=2
            )
            rho = res.states[-1]
    return rho


def noisy_cnot_report(
    n: int,
    register: WellRegister,
    decoherence: dynamics.DecoherenceParams,
    g_cm: float,
    t_v: float,
    t_s: float,
    *,
    include_bell: bool = True,
    tol: float = 1e-8,
) -> dict[str, float]:
    """Output-state fidelity per computational input under decoherence.

    Returns {"00": F, "01": F, "10": F, "11": F, ("bell": F,) "mean": F};
    the bell entry drives the control through a superposition so that
    qubit dephasing shows up, which the basis inputs cannot detect.
    "mean" averages the four computational inputs only.
    """
    if n != register.n_wells:
        raise ValueError(f"n = {n} does not match register.n_wells = {register.n_wells}")
    seq = cnot_sequence(n, g_cm, t_v, t_s)
    report: dict[str, float] = {}
    fids = []
    for c in (0, 1):
        for t in (0, 1):
            rho0 = register.computational_state(c, t).to_density_matrix()
            rho = apply_sequence_noisy(register, seq, decoherence, rho0, tol=tol)
            tgt = _ideal_output(register, c, t)
            f = float(np.real(np.vdot(tgt.amplitudes, rho.matrix @ tgt.amplitudes)))
            report[f"{c}{t}"] = f
            fids.append(f)
    report["mean"] = float(np.mean(fids))
    if include_bell:
        plus = register.computational_state(0, 0).amplitudes + register.computational_state(1, 0).amplitudes
        rho0 = PureState(register.space, plus).to_density_matrix()
        rho = apply_sequence_noisy(register, seq, decoherence, rho0, tol=tol)
        bell = register.computational_state(0, 0).amplitudes + register.computational_state(1, 1).amplitudes
        bell_state = PureState(register.space, bell)
        report["bell"] = float(np.real(np.vdot(bell_state.amplitudes, rho.matrix @ bell_state.amplitudes)))
    return report
