"""Dense operator primitives.

Hermitian matrices with validated construction, spectral calculus, full-rank
states with cached fractional powers, and superoperators in the column-stacking
vectorization (an action f -> A f B has matrix kron(B.T, A)).

Everything here is dense numpy at desk scale (Hilbert dimension <= 64).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    NonHermitianInput,
    NonLinearAction,
)

HERMITICITY_TOL = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a square matrix."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionMismatch(f"cannot reshape length-{v.size} vector to square matrix")
    return v.reshape((dim, dim), order="F")


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def hermiticity_defect(a: np.ndarray) -> float:
    """Max entrywise deviation from A = A-dagger, relative to the largest entry."""
    a = np.asarray(a)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    return float(np.abs(a - a.conj().T).max(initial=0.0)) / scale


def require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate Hermiticity within ``tol`` (relative) and return the symmetrized copy."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NonHermitianInput(f"hermiticity defect {defect:.3e} exceeds tolerance {tol:.1e}")
    return 0.5 * (a + a.conj().T)


def as_matrix(op) -> np.ndarray:
    """Coerce a wrapper type or array-like to a complex ndarray."""
    if isinstance(op, (HermitianOperator, FullRankState)):
        return op.entries
    if isinstance(op, Superoperator):
        return op.matrix
    return np.asarray(op, dtype=complex)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input, the sum of |eigenvalues|."""
    a = np.asarray(a)
    if hermiticity_defect(a) <= 1e-10:
        return float(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T))).sum())
    return float(np.linalg.svd(a, compute_uv=False).sum())


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def random_psd(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g @ g.conj().T) / dim


@dataclass(frozen=True)
class HermitianOperator:
    """A validated Hermitian matrix.

    Construction checks the relative hermiticity defect against 1e-12 and then
    stores the symmetrized matrix (A + A-dagger)/2 with write access disabled.
    """

    entries: np.ndarray

    def __post_init__(self):
        sym = require_hermitian(self.entries)
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and a unitary of eigenvectors for a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, phi: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """V diag(phi(e)) V-dagger without domain checking; see matrix_function."""
        v = self.eigenvectors
        return (v * phi(self.eigenvalues)) @ v.conj().T


def spectral_decompose(op, tol: float = HERMITICITY_TOL) -> SpectralDecomposition:
    """Eigendecompose a Hermitian operator.

    Raises NonHermitianInput when the input fails the relative hermiticity
    check.  Eigenvalues come back ascending; eigenvectors are the columns of a
    unitary, deterministic for a given input matrix.
    """
    mat = require_hermitian(as_matrix(op), tol)
    eigenvalues, eigenvectors = np.linalg.eigh(mat)
    return SpectralDecomposition(eigenvalues, eigenvectors)


def matrix_function(op, phi: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a Hermitian operator through its spectrum.

    ``op`` may be a matrix, a HermitianOperator, or a ready SpectralDecomposition.
    phi must evaluate finite on every eigenvalue; a caller opting into the
    0*log(0) = 0 convention passes a phi that implements the cutoff itself.
    """
    s = op if isinstance(op, SpectralDecomposition) else spectral_decompose(op)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.asarray(phi(s.eigenvalues), dtype=complex)
    if not np.all(np.isfinite(values)):
        bad = s.eigenvalues[~np.isfinite(values)]
        raise DomainError(f"function not finite on eigenvalues {bad}")
    v = s.eigenvectors
    return (v * values) @ v.conj().T


@dataclass(frozen=True)
class FullRankState:
    """A faithful (full-rank, trace-one) density matrix with cached matrix powers.

    power(r) returns sigma^r from the cached eigendecomposition; repeated
    requests for the same exponent (the +-1, +-1/2, +-1/4, +-1/8, 1/(2p)
    family) hit the cache.
    """

    entries: np.ndarray
    spectral: SpectralDecomposition = field(repr=False)
    _powers: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_matrix(cls, mat, trace_tol: float = 1e-12) -> "FullRankState":
        sym = require_hermitian(as_matrix(mat))
        tr = float(np.trace(sym).real)
        if abs(tr - 1.0) > trace_tol:
            raise DomainError(f"trace {tr!r} is not 1 within {trace_tol:.1e}")
        s = spectral_decompose(sym)
        if s.eigenvalues.min() <= 0.0:
            raise DomainError(
                f"state is not full rank: min eigenvalue {s.eigenvalues.min():.3e}"
            )
        sym.setflags(write=False)
        return cls(sym, s)

    @classmethod
    def normalized(cls, mat) -> "FullRankState":
        """Normalize a positive-definite matrix by its trace and wrap it."""
        sym = require_hermitian(as_matrix(mat))
        tr = float(np.trace(sym).real)
        if tr <= 0.0:
            raise DomainError("matrix has non-positive trace")
        return cls.from_matrix(sym / tr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def power(self, r: float) -> np.ndarray:
        key = float(r)
        cached = self._powers.get(key)
        if cached is None:
            cached = self.spectral.apply(lambda e: e**key)
            cached.setflags(write=False)
            self._powers[key] = cached
        return cached

    @property
    def log_matrix(self) -> np.ndarray:
        cached = self._powers.get("log")
        if cached is None:
            cached = self.spectral.apply(np.log)
            cached.setflags(write=False)
            self._powers["log"] = cached
        return cached

    @property
    def inv_norm(self) -> float:
        """Operator norm of sigma^-1, i.e. one over the smallest eigenvalue."""
        return 1.0 / float(self.spectral.eigenvalues.min())

    def __array__(self, dtype=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class Superoperator:
    """A linear map on d x d matrices, stored as its d^2 x d^2 vectorized matrix."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        d2 = self.dim * self.dim
        if self.matrix.shape != (d2, d2):
            raise DimensionMismatch(
                f"superoperator matrix shape {self.matrix.shape} does not match dim {self.dim}"
            )
        self.matrix.setflags(write=False)

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(dim, np.eye(dim * dim, dtype=complex))

    @classmethod
    def from_left_right(cls, a: np.ndarray, b: np.ndarray) -> "Superoperator":
        """The map f -> a f b."""
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        return cls(a.shape[0], np.kron(b.T, a))

    def apply(self, f) -> np.ndarray:
        return unvec(self.matrix @ vec(as_matrix(f)), self.dim)

    def compose(self, other: "Superoperator") -> "Superoperator":
        if self.dim != other.dim:
            raise DimensionMismatch("cannot compose superoperators of different dims")
        return Superoperator(self.dim, self.matrix @ other.matrix)

    def adjoint(self) -> "Superoperator":
        """Hilbert-Schmidt adjoint (the Schroedinger-picture counterpart)."""
        return Superoperator(self.dim, self.matrix.conj().T)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if self.dim != other.dim:
            raise DimensionMismatch("cannot add superoperators of different dims")
        return Superoperator(self.dim, self.matrix + other.matrix)

    def __mul__(self, scalar) -> "Superoperator":
        return Superoperator(self.dim, self.matrix * scalar)

    __rmul__ = __mul__


def superop_from_action(
    action: Callable[[np.ndarray], np.ndarray],
    dim: int,
    *,
    check_linearity: bool = True,
    linearity_tol: float = 1e-10,
    rng: np.random.Generator | None = None,
) -> Superoperator:
    """Sample a matrix action on the standard basis and assemble its superoperator.

    The action is probed for linearity on random Hermitian pairs with random
    complex coefficients; a relative residual above ``linearity_tol`` raises
    NonLinearAction.
    """
    d2 = dim * dim
    m = np.empty((d2, d2), dtype=complex)
    basis = np.eye(d2)
    for k in range(d2):
        m[:, k] = vec(action(unvec(basis[:, k], dim)))
    if check_linearity:
        rng = rng if rng is not None else np.random.default_rng(7)
        for _ in range(2):
            f = random_hermitian(dim, rng)
            g = random_hermitian(dim, rng)
            a = complex(rng.standard_normal(), rng.standard_normal())
            b = complex(rng.standard_normal(), rng.standard_normal())
            lhs = action(a * f + b * g)
            rhs = a * action(f) + b * action(g)
            scale = max(1.0, frobenius(rhs))
            if frobenius(lhs - rhs) / scale > linearity_tol:
                raise NonLinearAction("action failed the random linearity probe")
        direct = action(unvec(basis[:, 0], dim))
        rebuilt = unvec(m @ basis[:, 0], dim)
        if frobenius(direct - rebuilt) > linearity_tol * max(1.0, frobenius(direct)):
            raise NonLinearAction("sampled matrix does not reproduce the action")
    return Superoperator(dim, m)


def embed(local, site: int, dims: Sequence[int]) -> np.ndarray:
    """Lift a single-site operator to a tensor-product register.

    ``dims`` lists the local dimension of every site; the operator lands at
    ``site`` with identities elsewhere.  Site indices follow kron order (site 0
    is the most significant factor).
    """
    local = as_matrix(local)
    n = len(dims)
    if not 0 <= site < n:
        raise IndexError(f"site {site} out of range for {n} sites")
    if local.shape != (dims[site], dims[site]):
        raise DimensionMismatch(
            f"local operator shape {local.shape} does not fit site dim {dims[site]}"
        )
    left = int(np.prod(dims[:site], initial=1))
    right = int(np.prod(dims[site + 1 :], initial=1))
    return np.kron(np.kron(np.eye(left), local), np.eye(right))
