"""Dense linear algebra for registers of truncated bosonic modes and qubits.

Everything is a plain numpy array under the hood.  A ``CompositeSpace``
records the tensor-factor layout (factor 0 is the leftmost Kronecker
factor), ``Operator`` / ``PureState`` / ``DensityMatrix`` wrap arrays
together with the space they act on, and module functions provide the
usual constructions: ladder operators, Pauli operators, embeddings,
partial trace, fidelity.

Conventions
-----------
* Two-level factors are ordered (|g>, |e>), i.e. index 0 is the ground
  state, and ``pauli("z")`` is diag(-1, +1).
* Truncated modes keep Fock states |0> .. |dim-1>; the annihilation
  operator is exact on the kept block and the pair (a, a_dagger) only
  satisfies the canonical commutator up to the corner defect, which is
  a feature callers must budget for (convergence checks live upstream).
* All array payloads are copied on construction and frozen read-only.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

KIND_MODE = "bosonic-mode"
KIND_TWO_LEVEL = "two-level"

# Default validation tolerances.  Hermiticity is checked relative to the
# largest matrix entry so SI-scaled Hamiltonians (~1e-34 J) are treated
# the same as dimensionless ones.
HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-10
EIGVAL_ATOL = 1e-10
NORM_ATOL = 1e-12


class DimensionError(ValueError):
    """Array shape or truncation inconsistent with the declared space."""


class SpaceMismatchError(ValueError):
    """Operands live on incompatible composite spaces."""


class StateValidationError(ValueError):
    """A state failed its normalization / positivity contract."""


@dataclass(frozen=True)
class SubsystemSpec:
    """One tensor factor: a truncated mode or a two-level system."""

    kind: str
    dim: int
    label: str = ""

    def __post_init__(self):
        if self.kind not in (KIND_MODE, KIND_TWO_LEVEL):
            raise ValueError(f"unknown subsystem kind {self.kind!r}")
        if self.dim < 2:
            raise DimensionError(f"subsystem dim must be >= 2, got {self.dim}")
        if self.kind == KIND_TWO_LEVEL and self.dim != 2:
            raise DimensionError("two-level subsystem must have dim == 2")


def mode(dim: int, label: str = "") -> SubsystemSpec:
    return SubsystemSpec(KIND_MODE, dim, label)


def two_level(label: str = "") -> SubsystemSpec:
    return SubsystemSpec(KIND_TWO_LEVEL, 2, label)


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tuple of subsystems; factor 0 is leftmost in the Kronecker product."""

    subsystems: tuple[SubsystemSpec, ...]

    def __post_init__(self):
        if not isinstance(self.subsystems, tuple):
            object.__setattr__(self, "subsystems", tuple(self.subsystems))
        if len(self.subsystems) == 0:
            raise DimensionError("composite space needs at least one subsystem")

    @property
    def n_subsystems(self) -> int:
        return len(self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def total_dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def compatible(self, other: "CompositeSpace") -> bool:
        """Same factor kinds and dims, ignoring labels."""
        if self.n_subsystems != other.n_subsystems:
            return False
        return all(
            a.kind == b.kind and a.dim == b.dim
            for a, b in zip(self.subsystems, other.subsystems)
        )

    def index_of(self, label: str) -> int:
        for i, s in enumerate(self.subsystems):
            if s.label == label:
                return i
        raise KeyError(f"no subsystem labelled {label!r}")


def _require_same_space(a, b):
    if not a.space.compatible(b.space):
        raise SpaceMismatchError(
            f"space mismatch: {a.space.dims} vs {b.space.dims}"
        )


def _frozen_array(values, shape, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, order="C", copy=True)
    if arr.shape != shape:
        raise DimensionError(f"{what} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValueError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """A linear operator on a composite space.  Not necessarily Hermitian."""

    space: CompositeSpace
    matrix: np.ndarray

    def __post_init__(self):
        d = self.space.total_dim
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, (d, d), "operator matrix"))

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        scale = max(float(np.max(np.abs(self.matrix))), 1e-300)
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) <= atol * scale

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def __add__(self, other: "Operator") -> "Operator":
        _require_same_space(self, other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_space(self, other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        _require_same_space(self, other)
        return Operator(self.space, self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector.  Construction normalizes; a (near-)zero
    input vector is rejected rather than silently rescaled to garbage."""

    space: CompositeSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        d = self.space.total_dim
        vec = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if vec.shape != (d,):
            raise DimensionError(f"state vector has shape {vec.shape}, expected ({d},)")
        if not np.all(np.isfinite(vec.view(np.float64))):
            raise StateValidationError("state vector contains non-finite entries")
        nrm = float(np.linalg.norm(vec))
        if nrm < NORM_ATOL:
            raise StateValidationError(f"state vector norm {nrm:g} is too small to normalize")
        vec /= nrm
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    def overlap(self, other: "PureState") -> complex:
        _require_same_space(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite (within tolerances) matrix.

    Tolerances are constructor arguments so evolution code can wrap
    integrator output whose trace/positivity drift is bounded by the
    integration tolerance rather than by the strict defaults.
    """

    space: CompositeSpace
    matrix: np.ndarray
    trace_atol: float = field(default=TRACE_ATOL, compare=False)
    herm_atol: float = field(default=HERMITIAN_ATOL, compare=False)
    eig_atol: float = field(default=EIGVAL_ATOL, compare=False)

    def __post_init__(self):
        d = self.space.total_dim
        arr = _frozen_array(self.matrix, (d, d), "density matrix")
        object.__setattr__(self, "matrix", arr)
        tr = complex(np.trace(arr))
        if abs(tr - 1.0) > self.trace_atol:
            raise StateValidationError(f"density matrix trace {tr} is not 1 within {self.trace_atol:g}")
        scale = max(float(np.max(np.abs(arr))), 1e-300)
        if float(np.max(np.abs(arr - arr.conj().T))) > self.herm_atol * scale:
            raise StateValidationError("density matrix is not Hermitian within tolerance")
        w = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
        if float(w.min()) < -self.eig_atol:
            raise StateValidationError(f"density matrix has eigenvalue {w.min():g} < -{self.eig_atol:g}")

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


State = Union[PureState, DensityMatrix]


# ---------------------------------------------------------------------------
# Constructors


def identity(space: CompositeSpace) -> Operator:
    return Operator(space, np.eye(space.total_dim))


def annihilation(dim: int) -> Operator:
    """Truncated-mode annihilation operator on its own single-mode space."""
    sp = CompositeSpace((mode(dim),))
    m = np.zeros((dim, dim), dtype=np.complex128)
    ns = np.arange(1, dim)
    m[ns - 1, ns] = np.sqrt(ns)
    return Operator(sp, m)


def creation(dim: int) -> Operator:
    return annihilation(dim).dagger()


def number(dim: int) -> Operator:
    sp = CompositeSpace((mode(dim),))
    return Operator(sp, np.diag(np.arange(dim, dtype=np.complex128)))


_PAULI_MATRICES = {
    "z": np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=np.complex128),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    "y": np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=np.complex128),
    # plus = |e><g| raises, minus lowers; basis order (|g>, |e>)
    "plus": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128),
    "minus": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128),
}


def pauli(which: str) -> Operator:
    """Pauli / ladder operator on a single two-level space.

    ``which`` is one of "x", "y", "z", "plus", "minus".  With basis order
    (|g>, |e>), sigma_z = diag(-1, +1) and sigma_plus |g> = |e>.
    """
    try:
        m = _PAULI_MATRICES[which]
    except KeyError:
        raise ValueError(f"unknown Pauli label {which!r}") from None
    return Operator(CompositeSpace((two_level(),)), m)


def embed(op: Operator, index: int, space: CompositeSpace) -> Operator:
    """Embed a single-subsystem operator at position ``index`` of ``space``."""
    if op.space.n_subsystems != 1:
        raise SpaceMismatchError("embed expects an operator on a single subsystem")
    if not 0 <= index < space.n_subsystems:
        raise DimensionError(f"subsystem index {index} out of range")
    target = space.subsystems[index]
    local = op.space.subsystems[0]
    if (local.kind, local.dim) != (target.kind, target.dim):
        raise SpaceMismatchError(
            f"operator acts on {local.kind}(dim {local.dim}) but slot {index} "
            f"is {target.kind}(dim {target.dim})"
        )
    m = np.eye(1, dtype=np.complex128)
    for i, sub in enumerate(space.subsystems):
        m = np.kron(m, op.matrix if i == index else np.eye(sub.dim))
    return Operator(space, m)


def tensor(a: Operator, b: Operator) -> Operator:
    sp = CompositeSpace(a.space.subsystems + b.space.subsystems)
    return Operator(sp, np.kron(a.matrix, b.matrix))


def embed_multi(op: Operator, indices: Sequence[int], space: CompositeSpace) -> Operator:
    """Embed an operator on several (possibly non-adjacent) factors.

    ``op`` acts on the factors named by ``indices``, in that order; the
    result acts as the identity everywhere else.  Generalizes ``embed``.
    """
    idx = [int(i) for i in indices]
    n = space.n_subsystems
    if len(set(idx)) != len(idx):
        raise DimensionError(f"repeated subsystem indices {idx}")
    if any(not 0 <= i < n for i in idx):
        raise DimensionError(f"subsystem indices {idx} out of range")
    if op.space.n_subsystems != len(idx):
        raise SpaceMismatchError(
            f"operator has {op.space.n_subsystems} factors but {len(idx)} slots were given"
        )
    for local, i in zip(op.space.subsystems, idx):
        target = space.subsystems[i]
        if (local.kind, local.dim) != (target.kind, target.dim):
            raise SpaceMismatchError(
                f"operator factor {local.kind}(dim {local.dim}) does not match "
                f"slot {i} {target.kind}(dim {target.dim})"
            )
    others = [k for k in range(n) if k not in idx]
    order = idx + others  # factor order of the kron'd matrix below
    rest_dim = 1
    for k in others:
        rest_dim *= space.subsystems[k].dim
    m = np.kron(op.matrix, np.eye(rest_dim))
    perm_dims = tuple(space.subsystems[k].dim for k in order)
    tensor_form = m.reshape(perm_dims + perm_dims)
    inv = np.argsort(order)
    axes = list(inv) + [n + int(i) for i in inv]
    d = space.total_dim
    return Operator(space, tensor_form.transpose(axes).reshape(d, d))


def basis_state(space: CompositeSpace, occupations: Sequence[int]) -> PureState:
    """Product basis state |occupations[0], occupations[1], ...>."""
    occ = tuple(int(n) for n in occupations)
    if len(occ) != space.n_subsystems:
        raise DimensionError(
            f"got {len(occ)} occupation numbers for {space.n_subsystems} subsystems"
        )
    idx = 0
    for n, sub in zip(occ, space.subsystems):
        if not 0 <= n < sub.dim:
            raise DimensionError(f"occupation {n} out of range for dim {sub.dim}")
        idx = idx * sub.dim + n
    vec = np.zeros(space.total_dim, dtype=np.complex128)
    vec[idx] = 1.0
    return PureState(space, vec)


def product_state(space: CompositeSpace, factors: Sequence[np.ndarray]) -> PureState:
    """Kronecker product of one amplitude vector per subsystem."""
    if len(factors) != space.n_subsystems:
        raise DimensionError(
            f"got {len(factors)} factors for {space.n_subsystems} subsystems"
        )
    vec = np.ones(1, dtype=np.complex128)
    for f, sub in zip(factors, space.subsystems):
        f = np.asarray(f, dtype=np.complex128).reshape(-1)
        if f.shape != (sub.dim,):
            raise DimensionError(f"factor shape {f.shape} does not match dim {sub.dim}")
        vec = np.kron(vec, f)
    return PureState(space, vec)


# ---------------------------------------------------------------------------
# Algebra


def matmul(a: Operator, b: Operator) -> Operator:
    return a @ b


def add(a: Operator, b: Operator) -> Operator:
    return a + b


def scale(c, a: Operator) -> Operator:
    return a * c


def dagger(a: Operator) -> Operator:
    return a.dagger()


def commutator(a: Operator, b: Operator) -> Operator:
    _require_same_space(a, b)
    return Operator(a.space, a.matrix @ b.matrix - b.matrix @ a.matrix)


def expectation(op: Operator, state: State) -> complex:
    """<psi|O|psi> for pure states, tr(O rho) for density matrices."""
    if isinstance(state, PureState):
        if not op.space.compatible(state.space):
            raise SpaceMismatchError("operator and state spaces differ")
        return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    if isinstance(state, DensityMatrix):
        if not op.space.compatible(state.space):
            raise SpaceMismatchError("operator and state spaces differ")
        return complex(np.trace(op.matrix @ state.matrix))
    raise TypeError(f"unsupported state type {type(state).__name__}")


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep`` (order-preserving)."""
    keep = sorted(set(int(k) for k in keep))
    n = rho.space.n_subsystems
    if not keep:
        raise DimensionError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"keep indices {keep} out of range for {n} subsystems")
    dims = rho.space.dims
    if 2 * n > len(string.ascii_letters):
        raise DimensionError("too many subsystems for partial trace")
    row = list(string.ascii_letters[:n])
    col = list(string.ascii_letters[n:2 * n])
    for k in range(n):
        if k not in keep:
            col[k] = row[k]
    out = "".join(row[k] for k in keep) + "".join(string.ascii_letters[n + k] for k in keep)
    sub = "".join(row) + "".join(col) + "->" + out
    tensor_form = rho.matrix.reshape(dims + dims)
    reduced = np.einsum(sub, tensor_form)
    kept_dim = 1
    for k in keep:
        kept_dim *= dims[k]
    reduced = reduced.reshape(kept_dim, kept_dim)
    sub_space = CompositeSpace(tuple(rho.space.subsystems[k] for k in keep))
    return DensityMatrix(sub_space, reduced,
                         trace_atol=rho.trace_atol, herm_atol=rho.herm_atol,
                         eig_atol=rho.eig_atol)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: State, b: State) -> float:
    """Uhlmann fidelity F in [0, 1]; F = |<a|b>|^2 for two pure states."""
    _require_same_space(a, b)
    if isinstance(a, PureState) and isinstance(b, PureState):
        val = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    elif isinstance(a, PureState):
        val = float(np.real(np.vdot(a.amplitudes, b.matrix @ a.amplitudes)))
    elif isinstance(b, PureState):
        val = float(np.real(np.vdot(b.amplitudes, a.matrix @ b.amplitudes)))
    else:
        sq = _psd_sqrt(a.matrix)
        w = np.linalg.eigvalsh(sq @ b.matrix @ sq)
        val = float(np.sum(np.sqrt(np.clip(w, 0.0, None)))) ** 2
    return float(min(max(val, 0.0), 1.0))
