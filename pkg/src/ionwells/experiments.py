"""Canned numerical experiments: sweeps, feasibility numbers, convergence.

Each experiment returns a small result record (columns + metadata for
sweeps) that the CLI serializes; nothing here touches the filesystem.
The default physical scenario is a pair of Ca-40 ions in wells 40 um
apart at nu = 5.0 / 5.1 MHz (angular), driven at Lamb-Dicke 0.1 with the
bare Rabi frequency 1e7 rad/s that puts the induced shift on resonance
with the well detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence

import numpy as np

from .constants import C_LIGHT, E_CHARGE, M_CA40_ION, CA40_QUBIT_WAVELENGTH
from . import qcore
from .qcore import Operator
from . import model
from .model import DerivedCouplings, IonParams, LaserParams, TrapArrayParams
from . import dynamics
from .dynamics import DecoherenceParams


def default_trap(
    *,
    separation: float = 40e-6,
    nu1: float = 5.0e6,
    nu2: float = 5.1e6,
    mass: float = M_CA40_ION,
    charge: float = E_CHARGE,
) -> TrapArrayParams:
    """Two identical-species ions in wells of slightly different stiffness."""
    return TrapArrayParams(
        separation=separation,
        ions=(
            IonParams(mass=mass, charge=charge, trap_frequency=nu1),
            IonParams(mass=mass, charge=charge, trap_frequency=nu2),
        ),
    )


def default_laser(
    *,
    rabi_frequency: float = 1.0e7,
    lamb_dicke: float = 0.1,
    wavelength: float = CA40_QUBIT_WAVELENGTH,
    detuning_in: float = 0.0,
    phase: float = 0.0,
) -> LaserParams:
    omega_l = 2.0 * math.pi * C_LIGHT / wavelength
    return LaserParams(
        rabi_frequency=rabi_frequency,
        lamb_dicke=lamb_dicke,
        laser_frequency=omega_l,
        atomic_frequency=omega_l + detuning_in,
        phase=phase,
    )


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Columnar sweep output: equal-length arrays plus scalar metadata."""

    name: str
    columns: dict[str, np.ndarray]
    metadata: dict

    def __post_init__(self):
        lengths = {k: len(v) for k, v in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"ragged sweep columns: {lengths}")


# ---------------------------------------------------------------------------
# Transfer-probability sweep


def transfer_probability_sweep(
    delta_over_g: Sequence[float] = (0.0, 2.0, 5.0, 10.0),
    *,
    gt_max: float = 10.0,
    points: int = 1001,
    fock_trunc: int = 2,
    tol: float = 1e-9,
) -> SweepResult:
    """Transfer probability |beta(t)|^2 vs gt, closed form and integrated.

    Works in units g = 1 so the detuning ratios are exact inputs.  For
    each ratio r the closed-form probability (g/c)^2 sin^2(ct) is
    tabulated next to a direct integration of the effective Hamiltonian
    from |0, 1>, giving peak heights g^2 / (g^2 + Delta^2/4) =
    1 / (1 + r^2/4) at ct = pi/2.
    """
    if points < 2:
        raise ValueError("points must be >= 2")
    gts = np.linspace(0.0, gt_max, points)
    space = model.two_mode_space(fock_trunc)
    start = qcore.basis_state(space, (0, 1))
    target = qcore.basis_state(space, (1, 0))
    proj = Operator(space, np.outer(target.amplitudes, target.amplitudes.conj()))
    columns: dict[str, np.ndarray] = {"gt": gts}
    peak_meta = {}
    for r in delta_over_g:
        label = f"{r:g}"
        analytic = np.array(
            [dynamics.analytic_swap(1.0, r, t).transfer_probability for t in gts]
        )
        derived = DerivedCouplings(
            K=0.0, xi1=0.0, xi2=0.0, g=1.0, delta_ex=float(r),
            delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=float(r),
        )
        h = model.build_H_eff(derived, space, (0, 1))
        res = dynamics.integrate_tdse(
            h_of_t=lambda t, _h=h: _h,
            psi0=start,
            t_span=(0.0, gt_max),
            tol=tol,
            n_points=points,
            observables={"p": proj},
            store_states=False,
        )
        columns[f"beta_sq_analytic_{label}"] = analytic
        columns[f"beta_sq_numeric_{label}"] = res.observables["p"]
        pk, t_pk = dynamics.max_swap_probability(1.0, r)
        peak_meta[f"peak_analytic_{label}"] = pk
        peak_meta[f"max_abs_disagreement_{label}"] = float(
            np.max(np.abs(analytic - res.observables["p"]))
        )
    meta = {
        "experiment": "swap-transfer-sweep",
        "gt_max": gt_max,
        "points": points,
        "fock_trunc": fock_trunc,
        "tol": tol,
        "delta_over_g": ",".join(f"{r:g}" for r in delta_over_g),
    }
    meta.update(peak_meta)
    return SweepResult(name="sweep", columns=columns, metadata=meta)


# ---------------------------------------------------------------------------
# Feasibility


@dataclass(frozen=True)
class FeasibilityReport:
    """Laboratory-facing numbers for the switchable coupling.

    required_rabi is the bare Rabi frequency that tunes the induced
    shift onto the well detuning (Omega_0 = delta_ex / eta^2); the power
    estimate scales the reference point quadratically in that ratio.
    ld_parameter is eta sqrt(n_max + 1), flagged against ld_threshold.
    """

    couplings: DerivedCouplings
    eta: float
    required_rabi: float
    required_power_w: float
    reference_rabi: float
    reference_power_w: float
    swap_time: float
    g_over_gamma_ex: float
    g_over_gamma_in: float
    ld_parameter: float
    ld_threshold: float
    ld_regime_ok: bool

    def as_dict(self) -> dict:
        out = asdict(self)
        out["couplings"] = asdict(self.couplings)
        return out


def feasibility_report(
    trap: TrapArrayParams,
    laser: LaserParams,
    decoherence: DecoherenceParams = DecoherenceParams(gamma_ex=1e3, gamma_in=1.0),
    *,
    reference_power_w: float = 0.140,
    reference_rabi: float = 1.5e6,
    n_max: int = 1,
    ld_threshold: float = 0.3,
) -> FeasibilityReport:
    der = model.derive_couplings(trap, laser)
    eta = laser.lamb_dicke
    if eta <= 0:
        raise ValueError("feasibility needs a nonzero Lamb-Dicke parameter")
    required_rabi = der.delta_ex / (eta * eta)
    required_power = reference_power_w * (required_rabi / reference_rabi) ** 2
    ld_param = eta * math.sqrt(n_max + 1.0)
    return FeasibilityReport(
        couplings=der,
        eta=eta,
        required_rabi=required_rabi,
        required_power_w=required_power,
        reference_rabi=reference_rabi,
        reference_power_w=reference_power_w,
        swap_time=math.pi / (2.0 * der.g),
        g_over_gamma_ex=der.g / decoherence.gamma_ex if decoherence.gamma_ex > 0 else math.inf,
        g_over_gamma_in=der.g / decoherence.gamma_in if decoherence.gamma_in > 0 else math.inf,
        ld_parameter=ld_param,
        ld_threshold=ld_threshold,
        ld_regime_ok=ld_param < ld_threshold,
    )


# ---------------------------------------------------------------------------
# Rotating-wave / Lamb-Dicke error sweep


def rwa_error_sweep(
    eta_grid: Optional[Sequence[float]] = None,
    trap: Optional[TrapArrayParams] = None,
    *,
    rabi_frequency: float = 1.0e7,
    n_fock: int = 4,
    points: int = 41,
    tol: float = 1e-9,
    terms=model.FRAME1_FULL_TERMS,
) -> SweepResult:
    """Error of the effective model vs eta, at fixed bare Rabi frequency.

    Two columns quantify two different approximations: ld_gap is the
    operator-norm distance between the exact and second-order Lamb-Dicke
    couplings (relative to hbar Omega_0, slope eta^3); peak_infidelity
    is the worst pointwise infidelity of the effective-model prediction
    against the full frame-1 integration over one resonant swap window
    t in [0, pi/(2g)].  Omega_0 is held fixed across the grid, so the
    induced shift Omega = Omega_0 eta^2 walks off resonance away from
    the design point; that detuning is part of what the effective model
    (which tracks it exactly) predicts, while sideband leakage
    ~ (Omega_0 eta / nu_2)^2 grows with eta and dominates the residual.

    Log-log slopes of both columns over the grid are reported in the
    metadata.
    """
    if eta_grid is None:
        eta_grid = np.geomspace(0.01, 0.2, 8)
    eta_grid = np.asarray(list(eta_grid), dtype=float)
    if np.any(eta_grid <= 0):
        raise ValueError("eta grid must be positive")
    if trap is None:
        trap = default_trap()
    ld = np.empty(len(eta_grid))
    peak = np.empty(len(eta_grid))
    final = np.empty(len(eta_grid))
    g = model.derive_couplings(trap, default_laser(rabi_frequency=rabi_frequency)).g
    t_end = math.pi / (2.0 * g)
    for i, eta in enumerate(eta_grid):
        laser = default_laser(rabi_frequency=rabi_frequency, lamb_dicke=float(eta))
        ld[i] = model.ld_operator_gap(float(eta), rabi_frequency=1.0, hbar=1.0)
        res = dynamics.effective_vs_full_error(
            trap, laser, n_fock=n_fock, t_span=(0.0, t_end),
            n_points=points, tol=tol, terms=terms,
        )
        infid = res.observables["infidelity"]
        peak[i] = float(np.max(infid))
        final[i] = float(infid[-1])
    meta = {
        "experiment": "rwa-error-sweep",
        "rabi_frequency": rabi_frequency,
        "n_fock": n_fock,
        "points": points,
        "tol": tol,
        "t_end": t_end,
        "slope_ld_gap": _loglog_slope(eta_grid, ld),
        "slope_peak_infidelity": _loglog_slope(eta_grid, peak),
    }
    return SweepResult(
        name="rwa",
        columns={
            "eta": eta_grid,
            "ld_gap": ld,
            "peak_infidelity": peak,
            "final_infidelity": final,
        },
        metadata=meta,
    )


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    mask = (np.asarray(x) > 0) & (np.asarray(y) > 0)
    if np.count_nonzero(mask) < 2:
        return float("nan")
    return float(np.polyfit(np.log(np.asarray(x)[mask]), np.log(np.asarray(y)[mask]), 1)[0])


# ---------------------------------------------------------------------------
# Decoherence sweep


def decoherence_sweep(
    gamma_grid: Sequence[float],
    *,
    g: float = 1.1e4,
    delta: float = 0.0,
    t: Optional[float] = None,
    fock_trunc: int = 2,
    tol: float = 1e-8,
) -> SweepResult:
    """Swap fidelity under equal-rate damping of both modes, vs gamma.

    Evolves |0,1> under the effective Hamiltonian with amplitude damping
    at rate gamma on each mode, to t = pi/(2c) (the swap time) unless
    given, and reports the overlap with the decoherence-free outcome.
    For this channel the overlap is exactly exp(-gamma t), tabulated
    alongside as fidelity_analytic.
    """
    gammas = np.asarray(list(gamma_grid), dtype=float)
    if np.any(gammas < 0):
        raise ValueError("gamma grid must be >= 0")
    c = math.hypot(delta / 2.0, g)
    if t is None:
        t = math.pi / (2.0 * c)
    space = model.two_mode_space(fock_trunc)
    derived = DerivedCouplings(
        K=0.0, xi1=0.0, xi2=0.0, g=g, delta_ex=delta,
        delta_in=0.0, omega=0.0, omega_tilde=0.0, delta=delta,
    )
    h = model.build_H_eff(derived, space, (0, 1))
    start = qcore.basis_state(space, (0, 1))
    u = dynamics.propagate(h, t)
    ideal = u.matrix @ start.amplitudes
    fid = np.empty(len(gammas))
    for i, gamma in enumerate(gammas):
        collapse = dynamics.collapse_operators(
            DecoherenceParams(gamma_ex=float(gamma)), space, (0, 1)
        )
        res = dynamics.lindblad_evolve(
            h, collapse, start.to_density_matrix(), (0.0, t),
            tol=tol, n_points=2, store_states=False,
            observables={"f": Operator(space, np.outer(ideal, ideal.conj()))},
        )
        fid[i] = res.observables["f"][-1]
    meta = {
        "experiment": "decoherence-sweep",
        "g": g,
        "delta": delta,
        "t": t,
        "fock_trunc": fock_trunc,
        "tol": tol,
    }
    return SweepResult(
        name="decohere",
        columns={
            "gamma": gammas,
            "fidelity": fid,
            "fidelity_analytic": np.exp(-gammas * t),
        },
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# Truncation convergence


@dataclass(frozen=True)
class ConvergenceReport:
    """Max pointwise differences of a scenario's observables between
    consecutive truncations; passed iff all fall below the threshold."""

    scenario: str
    truncations: tuple[int, ...]
    max_diffs: tuple[float, ...]
    threshold: float
    passed: bool


def convergence_check(
    scenario: str,
    truncations: Sequence[int] = (2, 3, 5),
    *,
    threshold: Optional[float] = None,
    **kwargs,
) -> ConvergenceReport:
    """Re-run a scenario across Fock truncations and difference the results.

    Scenarios: "swap-sweep" (numeric transfer probabilities of
    transfer_probability_sweep), "cnot" (computational block + reset fidelity of the
    composed gate; kwargs: n), "full-model" (peak infidelity of
    effective_vs_full_error; kwargs: trap, laser).  Protocol scenarios
    default to threshold 1e-8; "full-model" to 1e-6, since the leaked
    population itself depends on the cut.
    """
    truncs = tuple(int(x) for x in truncations)
    if len(truncs) < 2 or sorted(truncs) != list(truncs):
        raise ValueError("truncations must be an increasing sequence of at least two values")
    if scenario == "swap-sweep":
        threshold = 1e-8 if threshold is None else threshold
        vectors = []
        for tr in truncs:
            # single-excitation dynamics never reach the cut, so the residual
            # is integrator noise; run tight enough to sit well under threshold
            res = transfer_probability_sweep(points=kwargs.get("points", 201), fock_trunc=tr,
                                             tol=kwargs.get("tol", 1e-12))
            vectors.append(np.concatenate([
                v for k, v in res.columns.items() if k.startswith("beta_sq_numeric_")
            ]))
    elif scenario == "cnot":
        from . import gates  # local import keeps module load light

        threshold = 1e-8 if threshold is None else threshold
        n = int(kwargs.get("n", 2))
        vectors = []
        for tr in truncs:
            reg = gates.WellRegister(n, tr)
            u = gates.compose_cnot(n, reg)
            block = gates.computational_projection(reg, u)
            reset = gates.ancilla_reset_fidelity(reg, u)
            vectors.append(np.concatenate([
                block.real.reshape(-1), block.imag.reshape(-1), [reset]
            ]))
    elif scenario == "full-model":
        threshold = 1e-6 if threshold is None else threshold
        trap = kwargs.get("trap") or default_trap()
        laser = kwargs.get("laser") or default_laser()
        vectors = []
        for tr in truncs:
            res = dynamics.effective_vs_full_error(
                trap, laser, n_fock=tr,
                n_points=kwargs.get("points", 41), tol=kwargs.get("tol", 1e-9),
            )
            vectors.append(np.array([float(np.max(res.observables["infidelity"]))]))
    else:
        raise ValueError(f"unknown convergence scenario {scenario!r}")
    diffs = tuple(
        float(np.max(np.abs(vectors[i + 1] - vectors[i]))) for i in range(len(vectors) - 1)
    )
    return ConvergenceReport(
        scenario=scenario,
        truncations=truncs,
        max_diffs=diffs,
        threshold=float(threshold),
        passed=all(d < threshold for d in diffs),
    )
