"""Weighted non-commutative L_p functionals for a fixed full-rank reference state.

The p-norm of f is tr[|sigma^(1/2p) f sigma^(1/2p)|^p]^(1/p); the inner product
places sigma^(1/2) on both sides of the pairing.  The entropy functional, the
Dirichlet form, the quartic form Q, and a multistart search for 2->q operator
norms all live here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceWarning,
    DomainError,
    InvalidExponent,
    NegativeInput,
    NotUnital,
)
from .operators import (
    FullRankState,
    Superoperator,
    as_matrix,
    frobenius,
    hermiticity_defect,
    vec,
)

XLOGX_CUTOFF = 1e-14


@dataclass(frozen=True)
class WeightedContext:
    """Bundles the reference state sigma whose powers weight every functional."""

    sigma: FullRankState

    @classmethod
    def from_state(cls, mat) -> "WeightedContext":
        return cls(FullRankState.from_matrix(mat))

    @property
    def dim(self) -> int:
        return self.sigma.dim


@dataclass(frozen=True)
class QFormResult:
    value: complex
    magnitude: float


@dataclass(frozen=True)
class TwoToQNorm:
    """Outcome of the multistart 2->q norm search.

    ``value`` is the best ratio found (a certified lower bound on the true
    norm); ``upper`` is the analytic ceiling sigma_min^(-1/4) available at
    q = 4 for 2-norm contractions, None otherwise.
    """

    value: float
    upper: float | None
    converged: bool
    restarts: int


def lp_norm(ctx: WeightedContext, f, p: float) -> float:
    """Weighted p-norm; works for Hermitian f and, via singular values, any f."""
    if p < 1.0:
        raise InvalidExponent(f"p = {p} is below 1")
    fm = as_matrix(f)
    if not np.isfinite(fm).all():
        raise DomainError("operator has non-finite entries")
    w = ctx.sigma.power(1.0 / (2.0 * p))
    a = w @ fm @ w
    s = np.linalg.svd(a, compute_uv=False)
    m = float(s.max(initial=0.0))
    if m == 0.0:
        return 0.0
    return m * float(np.sum((s / m) ** p)) ** (1.0 / p)


def weighted_inner(ctx: WeightedContext, f, g):
    """KMS pairing tr[sigma^(1/2) f-dagger sigma^(1/2) g].

    Returns a float for Hermitian arguments (the pairing is then real and
    symmetric), otherwise the complex value.
    """
    fm = as_matrix(f)
    gm = as_matrix(g)
    half = ctx.sigma.power(0.5)
    value = complex(np.trace(half @ fm.conj().T @ half @ gm))
    if hermiticity_defect(fm) <= 1e-10 and hermiticity_defect(gm) <= 1e-10:
        return float(value.real)
    return value


def dirichlet_form(ctx: WeightedContext, generator: Superoperator, f) -> float:
    """Energy -<f, L(f)>_sigma of a unital generator.

    Raises NotUnital when L(identity) is not zero within 1e-10 (relative to the
    generator's own scale).
    """
    d = generator.dim
    residual = frobenius(generator.apply(np.eye(d)))
    if residual > 1e-10 * max(1.0, frobenius(generator.matrix)):
        raise NotUnital(f"generator moves the identity by {residual:.3e}")
    fm = as_matrix(f)
    value = weighted_inner(ctx, fm, generator.apply(fm))
    return -float(np.real(value))


def ent_functional(ctx: WeightedContext, f) -> float:
    """L_2 relative entropy of a positive semidefinite f.

    Three terms: tr[A^2 log A] with A = sigma^(1/4) f sigma^(1/4), minus half
    tr[A^2 log sigma], minus half |f|_2^2 log |f|_2^2.  Eigenvalues of A below
    1e-14 fall under the x log x -> 0 convention.  In the commuting case this
    equals one half of the classical entropy of f^2.
    """
    fm = as_matrix(f)
    eigs_f = np.linalg.eigvalsh(0.5 * (fm + fm.conj().T))
    if eigs_f.min(initial=0.0) < -1e-12:
        raise NegativeInput(f"f has eigenvalue {eigs_f.min():.3e} below -1e-12")
    quarter = ctx.sigma.power(0.25)
    a = quarter @ fm @ quarter
    a = 0.5 * (a + a.conj().T)
    avals, avecs = np.linalg.eigh(a)
    safe = avals > XLOGX_CUTOFF
    term1 = float(np.sum(avals[safe] ** 2 * np.log(avals[safe])))
    a_sq = (avecs * avals**2) @ avecs.conj().T
    term2 = -0.5 * float(np.real(np.trace(a_sq @ ctx.sigma.log_matrix)))
    n2_sq = float(np.sum(avals**2))
    term3 = 0.0 if n2_sq <= XLOGX_CUTOFF else -0.5 * n2_sq * math.log(n2_sq)
    return term1 + term2 + term3


def q_form(ctx: WeightedContext, v1, v2, v3, v4) -> QFormResult:
    """Quartic form tr[s v1+ s v2 s v3+ s v4] with s = sigma^(1/4)."""
    s = ctx.sigma.power(0.25)
    m1, m2, m3, m4 = (as_matrix(v) for v in (v1, v2, v3, v4))
    value = complex(np.trace(s @ m1.conj().T @ s @ m2 @ s @ m3.conj().T @ s @ m4))
    return QFormResult(value=value, magnitude=abs(value))


def _unpack_hermitian(x: np.ndarray, dim: int) -> np.ndarray:
    h = np.zeros((dim, dim), dtype=complex)
    idx = dim
    h[np.diag_indices(dim)] = x[:dim]
    for i in range(dim):
        for j in range(i + 1, dim):
            h[i, j] = x[idx] + 1j * x[idx + 1]
            h[j, i] = x[idx] - 1j * x[idx + 1]
            idx += 2
    return h


def _pack_hermitian(h: np.ndarray) -> np.ndarray:
    dim = h.shape[0]
    x = np.empty(dim * dim)
    x[:dim] = np.real(np.diag(h))
    idx = dim
    for i in range(dim):
        for j in range(i + 1, dim):
            x[idx] = h[i, j].real
            x[idx + 1] = h[i, j].imag
            idx += 2
    return x


def norm_2_to_q(
    ctx: WeightedContext,
    transfer: Superoperator,
    q: float,
    *,
    restarts: int = 64,
    seed: int = 0,
    fd_step: float = 1e-6,
    max_iter: int = 150,
    tol: float = 1e-8,
) -> TwoToQNorm:
    """Maximize |T(f)|_q over Hermitian f with |f|_2 = 1 by projected ascent.

    Multistart finite-difference gradient ascent on the weighted 2-norm sphere;
    the best ratio over all restarts is reported.  The search not settling to
    ``tol`` on any restart emits ConvergenceWarning (non-fatal).
    """
    if q < 2.0:
        raise InvalidExponent(f"q = {q} is below 2")
    if q > 64.0:
        raise InvalidExponent(f"q = {q} exceeds the supported cap 64")
    dim = ctx.dim
    n_params = dim * dim
    rng = np.random.default_rng(seed)

    def objective(x: np.ndarray) -> float:
        f = _unpack_hermitian(x, dim)
        n2 = lp_norm(ctx, f, 2.0)
        if n2 < 1e-12:
            return 0.0
        return lp_norm(ctx, transfer.apply(f / n2), q)

    def normalize(x: np.ndarray) -> np.ndarray:
        n2 = lp_norm(ctx, _unpack_hermitian(x, dim), 2.0)
        return x if n2 < 1e-12 else x / n2

    # Deterministic starts: the identity and the projector on sigma's smallest
    # eigenvector (the usual extremal direction at q = 4), then random.
    starts = [
        _pack_hermitian(np.eye(dim, dtype=complex)),
        _pack_hermitian(
            np.outer(
                ctx.sigma.spectral.eigenvectors[:, 0],
                ctx.sigma.spectral.eigenvectors[:, 0].conj(),
            )
        ),
    ]
    while len(starts) < restarts:
        starts.append(rng.standard_normal(n_params))

    best = 0.0
    any_converged = False
    for x0 in starts:
        x = normalize(x0.astype(float))
        current = objective(x)
        converged = False
        for _ in range(max_iter):
            grad = np.empty(n_params)
            for i in range(n_params):
                xp = x.copy()
                xp[i] += fd_step
                xm = x.copy()
                xm[i] -= fd_step
                grad[i] = (objective(xp) - objective(xm)) / (2.0 * fd_step)
            gnorm = float(np.linalg.norm(grad))
            if gnorm < 1e-12:
                converged = True
                break
            step = 1.0 / max(1.0, gnorm)
            improved = False
            for _ in range(25):
                cand = normalize(x + step * grad)
                val = objective(cand)
                if val > current:
                    improved = val - current
                    x, current = cand, val
                    break
                step *= 0.5
            if not improved:
                converged = True
                break
            if improved < tol:
                converged = True
                break
        best = max(best, current)
        any_converged = any_converged or converged
    if not any_converged:
        warnings.warn(
            "2->q ascent hit the iteration cap on every restart", ConvergenceWarning
        )
    upper = ctx.sigma.inv_norm**0.25 if q == 4.0 else None
    return TwoToQNorm(value=best, upper=upper, converged=any_converged, restarts=len(starts))
