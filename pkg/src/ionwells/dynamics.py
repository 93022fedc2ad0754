"""Time evolution: closed-form phonon swap, dense propagators, ODE integration.

The closed-form solution describes the one-excitation sector of the
detuned exchange Hamiltonian H = hbar Delta n2 - hbar g (a1 a2^dag +
a1^dag a2): starting from |0>_1 |1>_2 the amplitudes on |0,1> and |1,0>
are

    alpha(t) = (1/2 - Delta/4c) e^{+i(c - Delta/2) t}
             + (1/2 + Delta/4c) e^{-i(c + Delta/2) t}
    beta(t)  = (g/c) e^{i(pi - Delta t)/2} sin(c t),   c = sqrt((Delta/2)^2 + g^2)

so the transfer probability |beta|^2 = (g/c)^2 sin^2(ct) peaks at
ct = (2m+1) pi/2 with height g^2 / (g^2 + Delta^2/4).

Numerical propagation is dense and deliberately boring: constant
Hamiltonians are exponentiated through their eigendecomposition (exactly
unitary up to rounding, satisfies the group property by construction),
time-dependent problems go through scipy's DOP853 with tight tolerances.
The integrators never renormalize; norm / trace drift is recorded on the
result as a diagnostic and checked by callers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .constants import HBAR
from . import qcore
from .qcore import CompositeSpace, DensityMatrix, Operator, PureState
from . import model
from .model import DerivedCouplings, LaserParams, TrapArrayParams


class IntegrationError(RuntimeError):
    """The ODE integrator failed to converge or violated its drift budget."""


# ---------------------------------------------------------------------------
# Closed-form swap


@dataclass(frozen=True)
class SwapAmplitudes:
    """Amplitudes on |0,1> and |1,0> at time t, plus the Rabi-type rate c."""

    alpha: complex
    beta: complex
    c: float

    @property
    def transfer_probability(self) -> float:
        return abs(self.beta) ** 2


def analytic_swap(g: float, delta: float, t: float) -> SwapAmplitudes:
    """Closed-form one-excitation amplitudes at time t.

    g must be positive; delta and t may be anything finite.  Checks
    |alpha|^2 + |beta|^2 = 1 to 1e-10 before returning.
    """
    if not (g > 0 and math.isfinite(g)):
        raise ValueError(f"g must be positive, got {g!r}")
    if not (math.isfinite(delta) and math.isfinite(t)):
        raise ValueError("delta and t must be finite")
    c = math.hypot(delta / 2.0, g)
    alpha = (0.5 - delta / (4.0 * c)) * cmath.exp(1j * (c - delta / 2.0) * t) + (
        0.5 + delta / (4.0 * c)
    ) * cmath.exp(-1j * (c + delta / 2.0) * t)
    beta = (g / c) * cmath.exp(1j * (math.pi - delta * t) / 2.0) * math.sin(c * t)
    total = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(total - 1.0) > 1e-10:
        raise FloatingPointError(f"swap amplitudes lost normalization: {total!r}")
    return SwapAmplitudes(alpha=alpha, beta=beta, c=c)


def max_swap_probability(g: float, delta: float) -> tuple[float, float]:
    """(max_t |beta|^2, earliest t achieving it) = (g^2/c^2, pi/(2c))."""
    if not (g > 0 and math.isfinite(g)):
        raise ValueError(f"g must be positive, got {g!r}")
    c = math.hypot(delta / 2.0, g)
    return (g / c) ** 2, math.pi / (2.0 * c)


SWAP_SUBSPACE = CompositeSpace((qcore.SubsystemSpec(qcore.KIND_TWO_LEVEL, 2, "one-excitation {|0,1>, |1,0>}"),))


def swap_unitary(gt: float) -> Operator:
    """Resonant (Delta = 0) propagator on the one-excitation subspace.

    In the ordered basis (|0,1>, |1,0>):
        U = [[cos gt, i sin gt], [i sin gt, cos gt]]
    which is exp(+i gt sigma_x), the exchange generator restricted to
    this block.  gt = pi/2 swaps the phonon up to a phase of i.
    """
    cg, sg = math.cos(gt), math.sin(gt)
    m = np.array([[cg, 1j * sg], [1j * sg, cg]], dtype=np.complex128)
    return Operator(SWAP_SUBSPACE, m)


# ---------------------------------------------------------------------------
# Propagators


def propagate(h: Operator, t: float, *, hbar: float = HBAR) -> Operator:
    """exp(-i H t / hbar) for a constant Hermitian H, via eigendecomposition."""
    if not h.is_hermitian(atol=1e-10):
        raise ValueError("propagate requires a Hermitian Hamiltonian")
    w, v = np.linalg.eigh(0.5 * (h.matrix + h.matrix.conj().T))
    u = (v * np.exp(-1j * w * t / hbar)) @ v.conj().T
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if defect > 1e-10:
        raise FloatingPointError(f"propagator unitarity defect {defect:g}")
    return Operator(h.space, u)


# ---------------------------------------------------------------------------
# ODE integration


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    """Trajectory on a uniform output grid.

    states holds PureState / DensityMatrix snapshots (normalized on
    construction; the raw integrator drift is what norm_drift reports).
    observables maps the caller's labels to real-valued series evaluated
    on the raw integrator output.  min_eigenvalue is only populated for
    density-matrix evolutions.
    """

    times: np.ndarray
    states: tuple
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    norm_drift: float = 0.0
    min_eigenvalue: Optional[float] = None


def _expect_vec(op: Operator, y: np.ndarray) -> float:
    return float(np.real(np.vdot(y, op.matrix @ y)))


def _expect_mat(op: Operator, rho: np.ndarray) -> float:
    return float(np.real(np.trace(op.matrix @ rho)))


def integrate_tdse(
    h_of_t: Callable[[float], Operator],
    psi0: PureState,
    t_span: tuple[float, float],
    *,
    tol: float = 1e-9,
    n_points: int = 201,
    observables: Optional[dict[str, Operator]] = None,
    hbar: float = HBAR,
    store_states: bool = True,
) -> EvolutionResult:
    """Integrate i hbar dpsi/dt = H(t) psi with DOP853.

    The state is never renormalized during stepping; the worst-case
    deviation of the norm from 1 across the output grid is reported as
    norm_drift and must stay below 10 * tol or the run is rejected.
    """
    h0 = h_of_t(t_span[0])
    if not h0.is_hermitian(atol=1e-10):
        raise ValueError("H(t0) is not Hermitian")
    dim = h0.space.total_dim
    if psi0.space.total_dim != dim or not psi0.space.compatible(h0.space):
        raise qcore.SpaceMismatchError("initial state does not live on the Hamiltonian's space")
    times = np.linspace(t_span[0], t_span[1], n_points)
    scale = -1j / hbar

    def rhs(t, y):
        return scale * (h_of_t(t).matrix @ y)

    sol = solve_ivp(
        rhs,
        t_span,
        psi0.amplitudes.astype(np.complex128),
        method="DOP853",
        t_eval=times,
        rtol=tol,
        atol=tol * 1e-3,
    )
    if not sol.success:
        raise IntegrationError(f"TDSE integration failed: {sol.message}")
    ys = sol.y.T  # (n_points, dim)
    norms = np.linalg.norm(ys, axis=1)
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > 10.0 * tol:
        raise IntegrationError(
            f"norm drift {drift:g} exceeds 10 * tol = {10 * tol:g}; tighten tol"
        )
    obs = {}
    if observables:
        for name, op in observables.items():
            obs[name] = np.array([_expect_vec(op, y) for y in ys])
    states = tuple(PureState(h0.space, y) for y in ys) if store_states else ()
    return EvolutionResult(times=times, states=states, observables=obs, norm_drift=drift)


@dataclass(frozen=True)
class DecoherenceParams:
    """Rates (rad/s) and channel shapes for the two decoherence paths.

    gamma_ex damps the vibrational modes, gamma_in acts on the internal
    state.  Channels: "amplitude-damping" uses the lowering operator,
    "dephasing" the corresponding population operator (n for a mode,
    sigma_z / 2 for a qubit).
    """

    gamma_ex: float = 0.0
    gamma_in: float = 0.0
    vibrational_channel: str = "amplitude-damping"
    internal_channel: str = "dephasing"

    def __post_init__(self):
        if self.gamma_ex < 0 or self.gamma_in < 0:
            raise ValueError("decoherence rates must be >= 0")
        for ch in (self.vibrational_channel, self.internal_channel):
            if ch not in ("amplitude-damping", "dephasing"):
                raise ValueError(f"unknown channel {ch!r}")


def collapse_operators(
    params: DecoherenceParams,
    space: CompositeSpace,
    mode_indices: Sequence[int],
    spin_indices: Sequence[int] = (),
) -> list[tuple[Operator, float]]:
    """Embedded collapse operators with their rates, zero-rate entries dropped."""
    out: list[tuple[Operator, float]] = []
    if params.gamma_ex > 0:
        for idx in mode_indices:
            dim = space.subsystems[idx].dim
            a = qcore.embed(qcore.annihilation(dim), idx, space)
            if params.vibrational_channel == "amplitude-damping":
                out.append((a, params.gamma_ex))
            else:
                out.append((a.dagger() @ a, params.gamma_ex))
    if params.gamma_in > 0:
        for idx in spin_indices:
            if params.internal_channel == "amplitude-damping":
                out.append((qcore.embed(qcore.pauli("minus"), idx, space), params.gamma_in))
            else:
                out.append((0.5 * qcore.embed(qcore.pauli("z"), idx, space), params.gamma_in))
    return out


def lindblad_evolve(
    h: Operator,
    collapse: Iterable[tuple[Operator, float]],
    rho0: DensityMatrix,
    t_span: tuple[float, float],
    *,
    tol: float = 1e-9,
    n_points: int = 201,
    observables: Optional[dict[str, Operator]] = None,
    hbar: float = HBAR,
    store_states: bool = True,
) -> EvolutionResult:
    """Integrate drho/dt = -i/hbar [H, rho] + sum_k gamma_k D[L_k] rho.

    D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L) / 2.  Trace drift
    is held to 10 * tol like the unitary integrator; the most negative
    eigenvalue seen across the output grid is recorded (small negative
    values of order the tolerance are expected and not an error).
    """
    if not h.is_hermitian(atol=1e-10):
        raise ValueError("lindblad_evolve requires a Hermitian Hamiltonian")
    dim = h.space.total_dim
    if rho0.space.total_dim != dim or not rho0.space.compatible(h.space):
        raise qcore.SpaceMismatchError("initial state does not live on the Hamiltonian's space")
    ls = []
    for op, rate in collapse:
        if rate < 0:
            raise ValueError("collapse rates must be >= 0")
        if rate == 0:
            continue
        if not op.space.compatible(h.space):
            raise qcore.SpaceMismatchError("collapse operator space mismatch")
        l_m = op.matrix
        ls.append((l_m, l_m.conj().T @ l_m, rate))
    hm = h.matrix
    times = np.linspace(t_span[0], t_span[1], n_points)

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        drho = (-1j / hbar) * (hm @ rho - rho @ hm)
        for l_m, ldl, rate in ls:
            drho += rate * (l_m @ rho @ l_m.conj().T - 0.5 * (ldl @ rho + rho @ ldl))
        return drho.reshape(-1)

    sol = solve_ivp(
        rhs,
        t_span,
        rho0.matrix.reshape(-1).astype(np.complex128),
        method="DOP853",
        t_eval=times,
        rtol=tol,
        atol=tol * 1e-3,
    )
    if not sol.success:
        raise IntegrationError(f"Lindblad integration failed: {sol.message}")
    rhos = sol.y.T.reshape(len(times), dim, dim)
    traces = np.array([np.real(np.trace(r)) for r in rhos])
    drift = float(np.max(np.abs(traces - 1.0)))
    if drift > 10.0 * tol:
        raise IntegrationError(
            f"trace drift {drift:g} exceeds 10 * tol = {10 * tol:g}; tighten tol"
        )
    min_eig = float(min(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() for r in rhos))
    obs = {}
    if observables:
        for name, op in observables.items():
            obs[name] = np.array([_expect_mat(op, r) for r in rhos])
    states: tuple = ()
    if store_states:
        loose = max(qcore.TRACE_ATOL, 100.0 * tol)
        states = tuple(
            DensityMatrix(
                h.space,
                0.5 * (r + r.conj().T),
                trace_atol=loose,
                herm_atol=max(qcore.HERMITIAN_ATOL, 100.0 * tol),
                eig_atol=loose,
            )
            for r in rhos
        )
    return EvolutionResult(
        times=times, states=states, observables=obs, norm_drift=drift, min_eigenvalue=min_eig
    )


# ---------------------------------------------------------------------------
# Effective model vs full frame-1 model


def effective_prediction_frame1(
    derived: DerivedCouplings,
    laser: LaserParams,
    space: CompositeSpace,
    chi0_modes: PureState,
    times: np.ndarray,
    mode_indices: tuple[int, int] = model.TWO_ION_MODE_INDICES,
    spin_index: int = model.TWO_ION_SPIN_INDEX,
    *,
    hbar: float = HBAR,
) -> list[np.ndarray]:
    """Frame-1 state the effective model predicts, on the full (modes + spin) space.

    Starting from |phi> x chi0 with F|phi> = +|phi>, the rotating-wave
    evolution in the nu_j frame is

        psi(t) = e^{+i t delta_ex n2} e^{-i Omega_tilde t} |phi> x (e^{-i H_eff t/hbar} chi0)

    (the phase factors restore what the nu1-frame / carrier-frame
    transformations absorbed).  Returns raw amplitude vectors, one per
    requested time, ordered like ``space``.
    """
    mode_space = CompositeSpace(tuple(space.subsystems[i] for i in mode_indices))
    h_eff = model.build_H_eff(derived, mode_space, (0, 1))
    w, v = np.linalg.eigh(h_eff.matrix)
    chi0 = chi0_modes.amplitudes
    dim2 = space.subsystems[mode_indices[1]].dim
    n2_diag = np.real(np.diag(qcore.embed(qcore.number(dim2), 1, mode_space).matrix))
    phi = model.phi_state(laser.phase).amplitudes
    out = []
    for t in times:
        chi_t = (v * np.exp(-1j * w * t / hbar)) @ (v.conj().T @ chi0)
        chi_t = np.exp(1j * derived.delta_ex * t * n2_diag) * chi_t
        chi_t = np.exp(-1j * derived.omega_tilde * t) * chi_t
        out.append(_weave_modes_and_spin(space, mode_indices, spin_index, chi_t, phi))
    return out


def _weave_modes_and_spin(
    space: CompositeSpace,
    mode_indices: tuple[int, int],
    spin_index: int,
    chi: np.ndarray,
    phi: np.ndarray,
) -> np.ndarray:
    """Tensor a joint two-mode vector with a spin vector into ``space`` order."""
    if mode_indices != (0, 1) or spin_index != 2 or space.n_subsystems != 3:
        raise qcore.SpaceMismatchError(
            "effective prediction supports the (mode1, mode2, spin) layout only"
        )
    return np.kron(chi, phi)


def effective_vs_full_error(
    trap: TrapArrayParams,
    laser: LaserParams,
    *,
    n_fock: int = 5,
    t_span: Optional[tuple[float, float]] = None,
    n_points: int = 101,
    tol: float = 1e-9,
    terms: FrozenSet[str] = model.FRAME1_FULL_TERMS,
    initial_occupations: tuple[int, int] = (0, 1),
) -> EvolutionResult:
    """Infidelity of the effective-model prediction against the frame-1 model.

    Integrates the full nu_j-frame generator (with the requested term
    set) from |n1, n2> x |phi> and compares, pointwise on the output
    grid, with effective_prediction_frame1.  The returned observables
    carry "infidelity" = 1 - |<psi_pred|psi_full>|^2 and
    "transfer" = population of the swapped Fock state in the full run.
    Default time span is one exchange period pi / c of the closed-form
    solution.
    """
    derived = model.derive_couplings(trap, laser)
    space = model.two_ion_space(n_fock, include_spin=True)
    mode_space = model.two_mode_space(n_fock)
    if t_span is None:
        c = math.hypot(derived.delta / 2.0, derived.g)
        t_span = (0.0, math.pi / c)
    chi0 = qcore.basis_state(mode_space, initial_occupations)
    phi = model.phi_state(laser.phase)
    psi0 = qcore.product_state(
        space,
        [_one_hot(n_fock, initial_occupations[0]),
         _one_hot(n_fock, initial_occupations[1]),
         phi.amplitudes],
    )
    h_full = model.build_H_frame1(trap, laser, space, terms=terms)
    swapped = (initial_occupations[1], initial_occupations[0])
    res = integrate_tdse(h_full, psi0, t_span, tol=tol, n_points=n_points, store_states=True)
    preds = effective_prediction_frame1(derived, laser, space, chi0, res.times)
    infid = np.empty(len(res.times))
    transfer = np.empty(len(res.times))
    dims = space.dims
    for k, (st, pred) in enumerate(zip(res.states, preds)):
        ov = np.vdot(pred, st.amplitudes)
        infid[k] = max(0.0, 1.0 - abs(ov) ** 2)
        amp = st.amplitudes.reshape(dims)
        transfer[k] = float(np.sum(np.abs(amp[swapped[0], swapped[1], :]) ** 2))
    obs = dict(res.observables)
    obs["infidelity"] = infid
    obs["transfer"] = transfer
    return EvolutionResult(
        times=res.times,
        states=res.states,
        observables=obs,
        norm_drift=res.norm_drift,
        min_eigenvalue=None,
    )


def _one_hot(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v
