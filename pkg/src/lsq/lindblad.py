"""Lindblad generators in the Heisenberg picture and their semigroup analysis.

build_lindblad assembles i[H, f] + sum_i (L_i+ f L_i - {L_i+ L_i, f}/2) in the
column-stacking vectorization.  analyze extracts the fixed point, decides
reversibility through the weighted symmetrization, and reads off the spectral
gap.  evolve prefers the eigendecomposition route for reversible generators and
falls back to scaling-and-squaring Pade otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    DomainError,
    GibbsNotStationary,
    NotPrimitive,
)
from .operators import (
    FullRankState,
    Superoperator,
    as_matrix,
    frobenius,
    random_hermitian,
    require_hermitian,
    trace_norm,
    unvec,
    vec,
)

KERNEL_TOL = 1e-9
FULL_RANK_TOL = 1e-12
REVERSIBLE_TOL = 1e-10
STATIONARY_TOL = 1e-9


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian plus jump operators; all matrices d x d."""

    hamiltonian: np.ndarray
    lindblad_ops: tuple = ()

    @property
    def dim(self) -> int:
        return as_matrix(self.hamiltonian).shape[0]


@dataclass(frozen=True)
class SemigroupAnalysis:
    """Everything analyze() learns about a generator.

    The symmetrized eigendecomposition is cached privately so that evolve and
    decay_curve can exponentiate by rescaling eigenvalues.
    """

    generator: Superoperator
    fixed_point: FullRankState | None
    gap: float
    reversible: bool
    primitive: bool
    spectrum: np.ndarray
    _symm: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.generator.dim


def build_lindblad(spec: LindbladSpec) -> Superoperator:
    """Assemble the Heisenberg generator for a Hamiltonian and jump operators."""
    h = require_hermitian(as_matrix(spec.hamiltonian))
    d = h.shape[0]
    eye = np.eye(d)
    m = 1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op in spec.lindblad_ops:
        l = as_matrix(op)
        if l.shape != (d, d):
            raise DimensionMismatch(
                f"jump operator shape {l.shape} does not match Hamiltonian dim {d}"
            )
        ldl = l.conj().T @ l
        m += np.kron(l.T, l.conj().T) - 0.5 * (
            np.kron(eye, ldl) + np.kron(ldl.T, eye)
        )
    return Superoperator(d, m)


def lindblad_from_ops(hamiltonian, ops: Sequence) -> Superoperator:
    return build_lindblad(LindbladSpec(hamiltonian, tuple(ops)))


def depolarizing_generator(sigma: FullRankState) -> Superoperator:
    """The generator f -> tr[sigma f] 1 - f, reversible for any faithful sigma."""
    d = sigma.dim
    m = np.outer(vec(np.eye(d)), vec(sigma.entries).conj()) - np.eye(d * d)
    return Superoperator(d, m)


def kms_symmetrized(generator: Superoperator, sigma: FullRankState) -> np.ndarray:
    """Conjugate the generator by f -> sigma^(1/4) f sigma^(1/4).

    Detailed balance with respect to sigma is exactly Hermiticity of the result.
    """
    s4 = np.kron(sigma.power(0.25).T, sigma.power(0.25))
    s4inv = np.kron(sigma.power(-0.25).T, sigma.power(-0.25))
    return s4 @ generator.matrix @ s4inv


def check_detailed_balance(
    generator: Superoperator,
    sigma: FullRankState,
    *,
    samples: int = 8,
    seed: int = 11,
) -> float:
    """Exact asymmetry norm of the weighted symmetrization.

    Returns the operator norm of (symmetrized - symmetrized-dagger).  A random
    Hermitian-pair probe of <f, Lg> - <Lf, g> runs alongside as a smoke test;
    its samples are bounded by the exact norm for normalized inputs.
    """
    tilde = kms_symmetrized(generator, sigma)
    asym = tilde - tilde.conj().T
    exact = float(np.linalg.norm(asym, 2))
    rng = np.random.default_rng(seed)
    half = sigma.power(0.5)
    m = generator.matrix
    d = generator.dim
    for _ in range(samples):
        f = random_hermitian(d, rng)
        g = random_hermitian(d, rng)
        lg = unvec(m @ vec(g), d)
        lf = unvec(m @ vec(f), d)
        lhs = np.trace(half @ f @ half @ lg)
        rhs = np.trace(half @ lf @ half @ g)
        fn = np.sqrt(abs(np.trace(half @ f @ half @ f)))
        gn = np.sqrt(abs(np.trace(half @ g @ half @ g)))
        probe = abs(lhs - rhs) / max(fn * gn, 1e-30)
        if probe > exact + 1e-8 * max(1.0, exact):
            raise AssertionError(
                f"sampled asymmetry {probe:.3e} exceeds exact bound {exact:.3e}"
            )
    return exact


def _kernel_dimension(singular_values: np.ndarray) -> int:
    smax = float(singular_values.max(initial=0.0))
    return int(np.sum(singular_values <= KERNEL_TOL * max(1.0, smax)))


def analyze(
    generator: Superoperator,
    *,
    sigma: FullRankState | None = None,
    require_primitive: bool = True,
) -> SemigroupAnalysis:
    """Extract fixed point, gap, reversibility, and spectrum of a generator.

    The fixed point comes from the smallest singular vector of the
    Schroedinger-picture adjoint, re-Hermitized and trace-normalized.  A caller
    that already knows the stationary state (a thermal construction) passes it
    as ``sigma``; stationarity is then asserted instead of recomputed.

    Raises NotPrimitive when the kernel is degenerate or the stationary state
    is rank-deficient, unless ``require_primitive`` is False, in which case the
    analysis carries primitive=False.
    """
    m = generator.matrix
    d = generator.dim
    ms = m.conj().T
    u, s, vh = np.linalg.svd(ms)
    kernel_dim = _kernel_dimension(s)
    primitive = kernel_dim == 1

    fixed: FullRankState | None = None
    if sigma is not None:
        residual = float(np.linalg.norm(ms @ vec(sigma.entries)))
        if residual > STATIONARY_TOL:
            raise GibbsNotStationary(
                f"provided state has stationarity residual {residual:.3e}"
            )
        fixed = sigma
    else:
        candidate = unvec(vh[-1].conj(), d)
        candidate = 0.5 * (candidate + candidate.conj().T)
        tr = float(np.trace(candidate).real)
        if abs(tr) < 1e-8:
            primitive = False
        else:
            candidate = candidate / tr
            eig_min = float(np.linalg.eigvalsh(candidate).min())
            if eig_min <= FULL_RANK_TOL:
                primitive = False
            else:
                fixed = FullRankState.from_matrix(candidate)

    if not primitive and require_primitive:
        raise NotPrimitive(
            f"kernel dimension {kernel_dim}, stationary state "
            + ("rank-deficient" if kernel_dim == 1 else "not unique")
        )

    reversible = False
    symm_cache = None
    gap = float("nan")
    spectrum = np.linalg.eigvals(m)
    if fixed is not None:
        tilde = kms_symmetrized(generator, fixed)
        asym = float(np.linalg.norm(tilde - tilde.conj().T, 2))
        reversible = asym <= REVERSIBLE_TOL * max(1.0, float(np.linalg.norm(tilde, 2)))
        if reversible:
            tilde_h = 0.5 * (tilde + tilde.conj().T)
            evals, evecs = np.linalg.eigh(tilde_h)
            spectrum = evals.astype(complex)
            s4 = np.kron(fixed.power(0.25).T, fixed.power(0.25))
            s4inv = np.kron(fixed.power(-0.25).T, fixed.power(-0.25))
            symm_cache = (evals, evecs, s4, s4inv)
            scale = max(1.0, float(np.abs(evals).max()))
            nonzero = evals[evals < -KERNEL_TOL * scale]
            gap = -float(nonzero.max()) if nonzero.size else 0.0
        else:
            re = np.real(spectrum)
            scale = max(1.0, float(np.abs(spectrum).max()))
            nonzero = re[re < -KERNEL_TOL * scale]
            gap = -float(nonzero.max()) if nonzero.size else 0.0

    return SemigroupAnalysis(
        generator=generator,
        fixed_point=fixed,
        gap=gap,
        reversible=reversible,
        primitive=primitive,
        spectrum=spectrum,
        _symm=symm_cache,
    )


def _expm_cached(symm: tuple, t: float, adjoint: bool) -> np.ndarray:
    evals, evecs, s4, s4inv = symm
    core = (evecs * np.exp(t * evals)) @ evecs.conj().T
    if adjoint:
        return s4 @ core @ s4inv
    return s4inv @ core @ s4


def evolve(
    generator: Superoperator,
    t: float,
    *,
    analysis: SemigroupAnalysis | None = None,
) -> Superoperator:
    """The Heisenberg map T_t = exp(t L).

    With a reversible analysis in hand the exponential is an eigenvalue
    rescaling of the symmetrized generator; otherwise scipy's Pade
    scaling-and-squaring does the work.
    """
    if t < 0.0:
        raise DomainError(f"negative time {t}")
    if analysis is not None and analysis._symm is not None:
        return Superoperator(generator.dim, _expm_cached(analysis._symm, t, adjoint=False))
    return Superoperator(generator.dim, scipy.linalg.expm(t * generator.matrix))


def decay_curve(
    generator: Superoperator,
    rho0,
    times,
    *,
    analysis: SemigroupAnalysis | None = None,
) -> np.ndarray:
    """Trace-norm distance of the Schroedinger-evolved state from stationarity.

    Evolution runs through the Hilbert-Schmidt adjoint of the Heisenberg
    generator; distances are reported at each requested time.
    """
    rho = require_hermitian(as_matrix(rho0), tol=1e-10)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > 1e-10:
        raise DomainError(f"initial state trace {tr} is not 1")
    if analysis is None:
        analysis = analyze(generator)
    if analysis.fixed_point is None:
        raise NotPrimitive("decay_curve needs a stationary state")
    target = analysis.fixed_point.entries
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(times.size)
    ms = generator.matrix.conj().T
    v0 = vec(rho)
    for i, t in enumerate(times):
        if t < 0.0:
            raise DomainError(f"negative time {t}")
        if analysis._symm is not None:
            vt = _expm_cached(analysis._symm, float(t), adjoint=True) @ v0
        else:
            vt = scipy.linalg.expm(float(t) * ms) @ v0
        out[i] = trace_norm(unvec(vt, generator.dim) - target)
    return out


def mixing_bound_gap(sigma: FullRankState, gap: float, times) -> np.ndarray:
    """Spectral-gap mixing envelope sqrt(|sigma^-1|) exp(-t gap)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return np.sqrt(sigma.inv_norm) * np.exp(-gap * times)


def mixing_bound_lsi(sigma: FullRankState, alpha: float, times) -> np.ndarray:
    """Log-Sobolev mixing envelope sqrt(2 log |sigma^-1|) exp(-t alpha)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return np.sqrt(2.0 * np.log(sigma.inv_norm)) * np.exp(-alpha * times)
