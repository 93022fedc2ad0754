"""Two ions in separated harmonic wells, Coulomb-coupled, one laser-driven.

The physical setup: two singly charged ions sit in their own potential
wells a fixed distance ``d`` apart, and the Coulomb interaction expanded
to second order in the small oscillation amplitudes couples their
vibrational modes.  A classical travelling-wave laser addresses the
internal transition of the second ion and, through the Lamb-Dicke
coupling, dresses that ion's vibration.  Tuning the effective Rabi
frequency against the trap-frequency difference switches the
phonon-exchange coupling between the wells on and off.

Layout conventions used by every builder here:

* frequencies are angular (rad/s), Hamiltonian matrices are in Joules;
* ion 1 / mode 1 is the undriven well, ion 2 / mode 2 carries the laser;
* composite spaces order factors (mode1, mode2[, spin]) unless the
  caller says otherwise via ``mode_indices`` / ``spin_index``;
* the internal basis is (|g>, |e>) so sigma_z = diag(-1, +1).

Frames.  ``frame_u1`` rotates the internal state at the laser frequency
and each mode at its own trap frequency nu_j; in that frame the
phonon-exchange term oscillates at delta_ex = nu2 - nu1 and the full
time-dependent generator is produced by ``build_H_frame1``.  The static
Hamiltonians ``build_H_rot1`` / ``build_H_rot2`` instead use the frame
where both modes rotate at nu1 (they differ from the nu_j frame by the
extra rotation exp(-i t delta_ex n2)), which is where the textbook
resonance condition Omega = delta_ex reads off directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, FrozenSet

import numpy as np

from .constants import EPSILON_0, HBAR
from . import qcore
from .qcore import CompositeSpace, Operator, PureState, SpaceMismatchError

TWO_ION_MODE_INDICES = (0, 1)
TWO_ION_SPIN_INDEX = 2

# Term labels understood by build_H_frame1.  "Full" keeps everything the
# second-order Coulomb expansion and the second-order Lamb-Dicke laser
# produce, except the linear displacement terms: those only shift the
# equilibrium positions (exactly, for a harmonic well) and are absorbed
# into the coordinate origin by default.
FRAME1_TERM_NAMES = frozenset(
    {
        "displacement",  # linear Coulomb terms, rotate at nu_j
        "mode-shift",  # static a_j a_j^dag renormalization of nu_j
        "two-phonon",  # a_j^2 terms, rotate at 2 nu_j
        "pair-creation",  # a1 a2 term, rotates at nu1 + nu2
        "sideband",  # first-order Lamb-Dicke laser term, rotates at nu2
        "laser-two-phonon",  # second-order Lamb-Dicke terms at 2 nu2
    }
)
FRAME1_FULL_TERMS: FrozenSet[str] = frozenset(
    {"mode-shift", "two-phonon", "pair-creation", "sideband", "laser-two-phonon"}
)
# Keep only the co-rotating pieces: with these the nu_j-frame generator
# coincides term by term with the rotating-wave Hamiltonian, which is
# what the closed-form swap solution integrates.
FRAME1_RWA_TERMS: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class IonParams:
    """One trapped ion: mass (kg), charge (C), well frequency (rad/s)."""

    mass: float
    charge: float
    trap_frequency: float

    def __post_init__(self):
        for name in ("mass", "charge", "trap_frequency"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"IonParams.{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class TrapArrayParams:
    """Separated wells: inter-well distance and the ions they hold."""

    separation: float
    ions: tuple[IonParams, ...]
    epsilon0: float = EPSILON_0
    hbar: float = HBAR

    def __post_init__(self):
        if not isinstance(self.ions, tuple):
            object.__setattr__(self, "ions", tuple(self.ions))
        if not (self.separation > 0 and math.isfinite(self.separation)):
            raise ValueError(f"separation must be positive, got {self.separation!r}")
        if len(self.ions) < 2:
            raise ValueError("need at least two ions")


@dataclass(frozen=True)
class LaserParams:
    """Travelling-wave drive on the internal transition of ion 2.

    rabi_frequency is the bare Rabi frequency Omega_0 (rad/s),
    lamb_dicke the dimensionless eta, phase the optical phase phi_l.
    """

    rabi_frequency: float
    lamb_dicke: float
    laser_frequency: float
    atomic_frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if not (self.rabi_frequency >= 0 and math.isfinite(self.rabi_frequency)):
            raise ValueError("rabi_frequency must be >= 0")
        if not (0 <= self.lamb_dicke < 1):
            raise ValueError(f"lamb_dicke must be in [0, 1), got {self.lamb_dicke!r}")
        if self.laser_frequency < 0 or self.atomic_frequency < 0:
            raise ValueError("laser/atomic frequencies must be >= 0")

    @property
    def delta_in(self) -> float:
        """Internal detuning omega_a - omega_l (rad/s)."""
        return self.atomic_frequency - self.laser_frequency


@dataclass(frozen=True)
class DerivedCouplings:
    """Quantities derived from trap + laser parameters.

    K          Coulomb energy scale q1 q2 / (4 pi eps0 d), Joules
    xi1, xi2   ground-state widths sqrt(hbar / 2 M_j nu_j), metres
    g          phonon-exchange rate 2 K xi1 xi2 / (hbar d^2), rad/s
    delta_ex   external detuning nu2 - nu1, rad/s
    delta_in   internal detuning omega_a - omega_l, rad/s
    omega      laser-induced shift Omega = Omega_0 eta^2, rad/s
    omega_tilde  carrier rate Omega_0 (1 - eta^2 / 2), rad/s
    delta      switch detuning delta_ex - omega, rad/s
    """

    K: float
    xi1: float
    xi2: float
    g: float
    delta_ex: float
    delta_in: float
    omega: float
    omega_tilde: float
    delta: float


def derive_couplings(
    trap: TrapArrayParams,
    laser: LaserParams,
    *,
    omega_tilde_convention: str = "rabi-scaled",
) -> DerivedCouplings:
    """Fold trap and laser parameters into the coupling constants.

    omega_tilde_convention selects how the carrier rate is reported:
    "rabi-scaled" (default) gives Omega_0 (1 - eta^2/2) in rad/s;
    "unscaled" gives the bare dimensionless expansion factor 1 - eta^2/2,
    useful only for inspecting the second-order reduction itself.
    """
    ion1, ion2 = trap.ions[0], trap.ions[1]
    d = trap.separation
    K = ion1.charge * ion2.charge / (4.0 * math.pi * trap.epsilon0 * d)
    xi1 = math.sqrt(trap.hbar / (2.0 * ion1.mass * ion1.trap_frequency))
    xi2 = math.sqrt(trap.hbar / (2.0 * ion2.mass * ion2.trap_frequency))
    g = 2.0 * K * xi1 * xi2 / (trap.hbar * d * d)
    delta_ex = ion2.trap_frequency - ion1.trap_frequency
    eta = laser.lamb_dicke
    omega = laser.rabi_frequency * eta * eta
    if omega_tilde_convention == "rabi-scaled":
        omega_tilde = laser.rabi_frequency * (1.0 - eta * eta / 2.0)
    elif omega_tilde_convention == "unscaled":
        omega_tilde = 1.0 - eta * eta / 2.0
    else:
        raise ValueError(f"unknown omega_tilde_convention {omega_tilde_convention!r}")
    return DerivedCouplings(
        K=K,
        xi1=xi1,
        xi2=xi2,
        g=g,
        delta_ex=delta_ex,
        delta_in=laser.delta_in,
        omega=omega,
        omega_tilde=omega_tilde,
        delta=delta_ex - omega,
    )


def coulomb_mode_shifts(trap: TrapArrayParams) -> tuple[float, ...]:
    """Static per-mode frequency shifts 2 K xi_j^2 / (hbar d^2) in rad/s.

    These come from the Hermitian a_j a_j^dag parts of the quadratic
    Coulomb terms; they renormalize each nu_j and therefore shift
    delta_ex by (shift2 - shift1).
    """
    d = trap.separation
    out = []
    for j in (0, 1):
        ion = trap.ions[j]
        K = trap.ions[0].charge * trap.ions[1].charge / (4.0 * math.pi * trap.epsilon0 * d)
        xi = math.sqrt(trap.hbar / (2.0 * ion.mass * ion.trap_frequency))
        out.append(2.0 * K * xi * xi / (trap.hbar * d * d))
    return tuple(out)


# ---------------------------------------------------------------------------
# Spaces


def two_ion_space(n_fock: int = 5, include_spin: bool = True) -> CompositeSpace:
    """(mode1, mode2, spin) with the driven ion's qubit last."""
    subs = [qcore.mode(n_fock, "mode1"), qcore.mode(n_fock, "mode2")]
    if include_spin:
        subs.append(qcore.two_level("spin"))
    return CompositeSpace(tuple(subs))


def two_mode_space(n_fock: int = 5) -> CompositeSpace:
    return two_ion_space(n_fock, include_spin=False)


def _mode_ops(space: CompositeSpace, index: int):
    dim = space.subsystems[index].dim
    if space.subsystems[index].kind != qcore.KIND_MODE:
        raise SpaceMismatchError(f"subsystem {index} is not a bosonic mode")
    a = qcore.embed(qcore.annihilation(dim), index, space)
    return a, a.dagger()


def _spin_ops(space: CompositeSpace, index: int):
    if space.subsystems[index].kind != qcore.KIND_TWO_LEVEL:
        raise SpaceMismatchError(f"subsystem {index} is not a two-level system")
    sz = qcore.embed(qcore.pauli("z"), index, space)
    sp = qcore.embed(qcore.pauli("plus"), index, space)
    sm = qcore.embed(qcore.pauli("minus"), index, space)
    return sz, sp, sm


# ---------------------------------------------------------------------------
# Static lab-frame pieces


def build_V_ii(
    trap: TrapArrayParams,
    space: CompositeSpace,
    mode_indices: tuple[int, int] = TWO_ION_MODE_INDICES,
    include_displacement: bool = True,
) -> Operator:
    """Coulomb interaction expanded to second order in x_j / d.

    V = K [ -(xi1/d) a1 + (xi2/d) a2
            + (xi1/d)^2 (a1^2 + a1 a1^dag) + (xi2/d)^2 (a2^2 + a2 a2^dag)
            - 2 (xi1 xi2 / d^2) (a1 a2 + a1 a2^dag) ] + H.c.

    The constant monopole K itself only offsets the energy zero and is
    dropped.  With include_displacement=False the two linear terms are
    omitted (their exact effect on a harmonic well is a static shift of
    the equilibrium position).
    """
    dummy_laser = LaserParams(0.0, 0.0, 0.0, 0.0)
    der = derive_couplings(trap, dummy_laser)
    d = trap.separation
    a1, ad1 = _mode_ops(space, mode_indices[0])
    a2, ad2 = _mode_ops(space, mode_indices[1])
    r1 = der.xi1 / d
    r2 = der.xi2 / d
    half = (
        r1 * r1 * (a1 @ a1 + a1 @ ad1)
        + r2 * r2 * (a2 @ a2 + a2 @ ad2)
        - 2.0 * r1 * r2 * (a1 @ a2 + a1 @ ad2)
    )
    if include_displacement:
        half = half + (-r1) * a1 + r2 * a2
    half = der.K * half
    return half + half.dagger()


def build_H_ex(
    trap: TrapArrayParams,
    space: CompositeSpace,
    mode_indices: tuple[int, int] = TWO_ION_MODE_INDICES,
    include_coulomb: bool = True,
    include_displacement: bool = True,
) -> Operator:
    """Vibrational Hamiltonian sum_j hbar nu_j (n_j + 1/2) plus the Coulomb term."""
    h = None
    for j, idx in enumerate(mode_indices):
        a, ad = _mode_ops(space, idx)
        nu = trap.ions[j].trap_frequency
        term = trap.hbar * nu * (ad @ a + 0.5 * qcore.identity(space))
        h = term if h is None else h + term
    if include_coulomb:
        h = h + build_V_ii(trap, space, mode_indices, include_displacement)
    return h


def _ld_kick_exact(eta: float, dim: int) -> np.ndarray:
    """exp(i eta (a + a^dag)) on a truncated mode, unitary by construction."""
    x = qcore.annihilation(dim).matrix
    x = x + x.conj().T
    w, v = np.linalg.eigh(eta * x)
    return (v * np.exp(1j * w)) @ v.conj().T


def _ld_kick_second_order(eta: float, dim: int) -> np.ndarray:
    """1 + i eta (a + a^dag) - eta^2 (a + a^dag)^2 / 2."""
    x = qcore.annihilation(dim).matrix
    x = x + x.conj().T
    return np.eye(dim) + 1j * eta * x - 0.5 * eta * eta * (x @ x)


def _build_H_laser(
    laser: LaserParams,
    space: CompositeSpace,
    mode_index: int,
    spin_index: int,
    kick: np.ndarray,
) -> Callable[[float], Operator]:
    sz, sp, _ = _spin_ops(space, spin_index)
    kick_op = qcore.embed(Operator(CompositeSpace((space.subsystems[mode_index],)), kick),
                          mode_index, space)
    static = (HBAR * laser.atomic_frequency / 2.0) * sz
    raising = HBAR * laser.rabi_frequency * (sp @ kick_op)
    st = static.matrix
    rm = raising.matrix

    def h_of_t(t: float) -> Operator:
        ph = np.exp(-1j * (laser.laser_frequency * t + laser.phase))
        m = rm * ph
        return Operator(space, st + m + m.conj().T)

    return h_of_t


def build_H_laser_exact(
    laser: LaserParams,
    space: CompositeSpace,
    mode_index: int = 1,
    spin_index: int = TWO_ION_SPIN_INDEX,
) -> Callable[[float], Operator]:
    """Lab-frame laser Hamiltonian with the full Lamb-Dicke kick operator.

    H(t) = (hbar omega_a / 2) sigma_z
         + hbar Omega_0 [ sigma_+ e^{i eta (a2 + a2^dag)} e^{-i(omega_l t + phi_l)} + H.c. ]

    The co-rotating form above already drops the term oscillating at
    omega_l + omega_a (relative weight Omega_0 / omega_a ~ 1e-9 for the
    default parameters); keeping it would force integration steps on the
    optical period, which nothing downstream resolves or needs.
    """
    dim = space.subsystems[mode_index].dim
    return _build_H_laser(laser, space, mode_index, spin_index,
                          _ld_kick_exact(laser.lamb_dicke, dim))


def build_H_laser_ld2(
    laser: LaserParams,
    space: CompositeSpace,
    mode_index: int = 1,
    spin_index: int = TWO_ION_SPIN_INDEX,
) -> Callable[[float], Operator]:
    """Same as build_H_laser_exact with the kick truncated at second order in eta."""
    dim = space.subsystems[mode_index].dim
    return _build_H_laser(laser, space, mode_index, spin_index,
                          _ld_kick_second_order(laser.lamb_dicke, dim))


def ld_operator_gap(eta: float, *, rabi_frequency: float = 1.0, n_fock: int = 12,
                    hbar: float = HBAR) -> float:
    """Spectral-norm gap between the exact and second-order laser couplings.

    Equals hbar Omega_0 sigma_max(exp(i eta x) - [1 + i eta x - eta^2 x^2/2]),
    which is independent of the optical phase, and scales as eta^3 for
    small eta.  n_fock sets the mode truncation the norm is taken on.
    """
    diff = _ld_kick_exact(eta, n_fock) - _ld_kick_second_order(eta, n_fock)
    return hbar * rabi_frequency * float(np.linalg.norm(diff, 2))


# ---------------------------------------------------------------------------
# Internal-state helpers


def f_operator(phi_l: float = 0.0) -> Operator:
    """F = e^{-i phi_l} sigma_+ + e^{i phi_l} sigma_-  (squares to the identity)."""
    m = np.zeros((2, 2), dtype=np.complex128)
    m[1, 0] = np.exp(-1j * phi_l)
    m[0, 1] = np.exp(1j * phi_l)
    return Operator(CompositeSpace((qcore.two_level(),)), m)


def phi_state(phi_l: float = 0.0) -> PureState:
    """The +1 eigenstate (|g> + e^{-i phi_l}|e>) / sqrt(2) of f_operator(phi_l)."""
    vec = np.array([1.0, np.exp(-1j * phi_l)], dtype=np.complex128)
    return PureState(CompositeSpace((qcore.two_level(),)), vec)


# ---------------------------------------------------------------------------
# Frames and rotating-frame Hamiltonians


def frame_u1(
    trap: TrapArrayParams,
    laser: LaserParams,
    space: CompositeSpace,
    t: float,
    mode_indices: tuple[int, int] = TWO_ION_MODE_INDICES,
    spin_index: int = TWO_ION_SPIN_INDEX,
) -> Operator:
    """U1(t) = exp[-i t (omega_l sigma_z / 2 + sum_j nu_j n_j)].

    Interaction picture with respect to the bare internal splitting at
    the laser frequency and each mode at its own well frequency.  The
    zero-point halves are left out of the generator; they would only
    contribute a global phase.  A state transforms as
    psi_frame = U1(t)^dag psi_lab and the generator in this frame is
    U1^dag (H_lab - H0) U1, which build_H_frame1 assembles analytically.
    """
    sz, _, _ = _spin_ops(space, spin_index)
    diag = (laser.laser_frequency / 2.0) * np.real(np.diag(sz.matrix))
    for j, idx in enumerate(mode_indices):
        a, ad = _mode_ops(space, idx)
        diag += trap.ions[j].trap_frequency * np.real(np.diag((ad @ a).matrix))
    return Operator(space, np.diag(np.exp(-1j * t * diag)))


def build_H_rot1(
    derived: DerivedCouplings,
    laser: LaserParams,
    space: CompositeSpace,
    mode_indices: tuple[int, int] = TWO_ION_MODE_INDICES,
    spin_index: int = TWO_ION_SPIN_INDEX,
) -> Operator:
    """Static rotating-wave Hamiltonian with both modes referred to nu1.

    H' = (hbar delta_in / 2) sigma_z + hbar (delta_ex - Omega F) n2
       + hbar Omega_tilde F - hbar g (a1 a2^dag + a1^dag a2)

    This is the nu1-frame counterpart of build_H_frame1(terms=RWA): the
    two frames differ by exp(-i t delta_ex n2), which turns the
    oscillating phonon-exchange term into the static one above and adds
    the hbar delta_ex n2 offset.
    """
    a1, ad1 = _mode_ops(space, mode_indices[0])
    a2, ad2 = _mode_ops(space, mode_indices[1])
    sz, _, _ = _spin_ops(space, spin_index)
    f = qcore.embed(f_operator(laser.phase), spin_index, space)
    n2 = ad2 @ a2
    h = (HBAR * derived.delta_in / 2.0) * sz
    h = h + HBAR * derived.delta_ex * n2
    h = h - HBAR * derived.omega * (f @ n2)
    h = h + HBAR * derived.omega_tilde * f
    h = h - HBAR * derived.g * (a1 @ ad2 + ad1 @ a2)
    return h


def frame_u2(
    derived: DerivedCouplings,
    laser: LaserParams,
    space: CompositeSpace,
    t: float,
    spin_index: int = TWO_ION_SPIN_INDEX,
) -> Operator:
    """U2(t) = exp(-i t Omega_tilde F), the carrier rotation."""
    f = qcore.embed(f_operator(laser.phase), spin_index, space)
    w, v = np.linalg.eigh(f.matrix)
    return Operator(space, (v * np.exp(-1j * derived.omega_tilde * t * w)) @ v.conj().T)


def build_H_rot2(
    derived: DerivedCouplings,
    laser: LaserParams,
    space: CompositeSpace,
    mode_indices: tuple[int, int] = TWO_ION_MODE_INDICES,
    spin_index: int = TWO_ION_SPIN_INDEX,
) -> Operator:
    """After the carrier rotation U2:  H'' = hbar (delta_ex - Omega F) n2 - hbar g (exchange).

    Valid on resonance of the internal transition only; a nonzero
    delta_in does not commute with F and would make this frame
    time-dependent, so it is rejected.
    """
    if derived.delta_in != 0.0:
        raise ValueError(
            f"build_H_rot2 requires delta_in == 0, got {derived.delta_in!r}"
        )
    a1, ad1 = _mode_ops(space, mode_indices[0])
    a2, ad2 = _mode_ops(space, mode_indices[1])
    f = qcore.embed(f_operator(laser.phase), spin_index, space)
    n2 = ad2 @ a2
    h = HBAR * derived.delta_ex * n2
    h = h - HBAR * derived.omega * (f @ n2)
    h = h - HBAR * derived.g * (a1 @ ad2 + ad1 @ a2)
    return h


def build_H_eff(
    derived: DerivedCouplings,
    space: CompositeSpace,
    mode_indices: tuple[int, int] = TWO_ION_MODE_INDICES,
) -> Operator:
    """Effective two-mode Hamiltonian on the F = +1 internal sector.

    H_eff = hbar Delta n2 - hbar g (a1 a2^dag + a1^dag a2),
    Delta = delta_ex - Omega.  Conserves total phonon number; on the
    one-excitation subspace it reduces to a detuned two-level exchange.
    """
    a1, ad1 = _mode_ops(space, mode_indices[0])
    a2, ad2 = _mode_ops(space, mode_indices[1])
    n2 = ad2 @ a2
    return HBAR * derived.delta * n2 - HBAR * derived.g * (a1 @ ad2 + ad1 @ a2)


def build_H_frame1(
    trap: TrapArrayParams,
    laser: LaserParams,
    space: CompositeSpace,
    mode_indices: tuple[int, int] = TWO_ION_MODE_INDICES,
    spin_index: int = TWO_ION_SPIN_INDEX,
    terms: FrozenSet[str] = FRAME1_FULL_TERMS,
) -> Callable[[float], Operator]:
    """Time-dependent generator in the nu_j rotating frame (see frame_u1).

    Assembles, per term class, a static block plus rotating pairs
    A e^{-i w t} + A^dag e^{+i w t}:

    static        (hbar delta_in/2) sigma_z + hbar Omega_0 F
                  - (hbar Omega_0 eta^2/2) F (a2 a2^dag + a2^dag a2)
    always        -hbar g a1 a2^dag at w = -delta_ex  (phonon exchange)
    mode-shift    2 K (xi_j/d)^2 a_j a_j^dag, static
    two-phonon    K (xi_j/d)^2 a_j^2 at w = 2 nu_j
    pair-creation -hbar g a1 a2 at w = nu1 + nu2
    displacement  -/+ K (xi_j/d) a_j at w = nu_j
    sideband      i hbar Omega_0 eta sigma_+ e^{-i phi_l} (a2, a2^dag) at w = +/- nu2
    laser-two-phonon  -(hbar Omega_0 eta^2/2) sigma_+ e^{-i phi_l} (a2^2, a2^dag 2)
                      at w = +/- 2 nu2

    ``terms`` selects which oscillating/static corrections beyond the
    rotating-wave set are kept; the exchange term and the static laser
    terms are always present.  The laser enters at second Lamb-Dicke
    order, matching build_H_laser_ld2.
    """
    unknown = set(terms) - FRAME1_TERM_NAMES
    if unknown:
        raise ValueError(f"unknown frame-1 terms: {sorted(unknown)}")
    derived = derive_couplings(trap, laser)
    nu1 = trap.ions[0].trap_frequency
    nu2 = trap.ions[1].trap_frequency
    d = trap.separation
    r1 = derived.xi1 / d
    r2 = derived.xi2 / d
    eta = laser.lamb_dicke

    a1, ad1 = _mode_ops(space, mode_indices[0])
    a2, ad2 = _mode_ops(space, mode_indices[1])
    sz, sp, _ = _spin_ops(space, spin_index)
    f = qcore.embed(f_operator(laser.phase), spin_index, space)
    sp_l = np.exp(-1j * laser.phase) * sp  # sigma_+ e^{-i phi_l}

    # Truncated-product convention throughout: a2 @ ad2 + ad2 @ a2 rather
    # than the analytic 2 n2 + 1, so that this builder agrees entry by
    # entry with the frame-transformed lab operators on the same cut.
    # The two differ only on the top Fock level.
    x2_static = a2 @ ad2 + ad2 @ a2
    static = (HBAR * derived.delta_in / 2.0) * sz
    static = static + HBAR * laser.rabi_frequency * f
    static = static - (0.5 * HBAR * laser.rabi_frequency * eta * eta) * (f @ x2_static)
    if "mode-shift" in terms:
        static = static + 2.0 * derived.K * (
            r1 * r1 * (a1 @ ad1) + r2 * r2 * (a2 @ ad2)
        )

    # (amplitude operator A, rotation frequency w): contributes A e^{-iwt} + H.c.
    pairs: list[tuple[Operator, float]] = [
        ((-HBAR * derived.g) * (a1 @ ad2), -derived.delta_ex),
    ]
    if "pair-creation" in terms:
        pairs.append(((-HBAR * derived.g) * (a1 @ a2), nu1 + nu2))
    if "two-phonon" in terms:
        pairs.append((derived.K * r1 * r1 * (a1 @ a1), 2.0 * nu1))
        pairs.append((derived.K * r2 * r2 * (a2 @ a2), 2.0 * nu2))
    if "displacement" in terms:
        pairs.append(((-derived.K * r1) * a1, nu1))
        pairs.append(((derived.K * r2) * a2, nu2))
    if "sideband" in terms:
        amp = 1j * HBAR * laser.rabi_frequency * eta
        pairs.append((amp * (sp_l @ a2), nu2))
        pairs.append((amp * (sp_l @ ad2), -nu2))
    if "laser-two-phonon" in terms:
        amp = -0.5 * HBAR * laser.rabi_frequency * eta * eta
        pairs.append((amp * (sp_l @ (a2 @ a2)), 2.0 * nu2))
        pairs.append((amp * (sp_l @ (ad2 @ ad2)), -2.0 * nu2))

    static_m = static.matrix
    pair_ms = [(p.matrix, w) for p, w in pairs]

    def h_of_t(t: float) -> Operator:
        m = static_m.copy()
        for amp_m, w in pair_ms:
            rot = amp_m * np.exp(-1j * w * t)
            m += rot + rot.conj().T
        return Operator(space, m)

    return h_of_t
