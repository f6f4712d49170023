"""Thermal (Davies-type) generators from a Hamiltonian, couplings, and a bath.

The coupling operators are resolved into Bohr-frequency components S(omega)
collecting |k><m| with eps_k - eps_m = omega.  Under this labeling the operator
identity sigma S(omega) = exp(-beta omega) S(omega) sigma holds for the thermal
state, and the jump operator carrying rate G(omega) is S(omega)-dagger, so that
the operator lowering the system energy by omega > 0 carries the larger rate.
Stationarity of the thermal state is asserted, not assumed; a failure raises
GibbsNotStationary.  No Lamb-shift or Hamiltonian term is included: the
generator is purely dissipative and reversible for the weighted inner product.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegeneracyWarning, DimensionCap, DomainError, GibbsNotStationary
from .lindblad import LindbladSpec, SemigroupAnalysis, analyze, build_lindblad
from .operators import (
    FullRankState,
    Superoperator,
    as_matrix,
    frobenius,
    require_hermitian,
    spectral_decompose,
    vec,
)

MAX_DENSE_DIM = 64
KMS_RATE_TOL = 1e-10


@dataclass(frozen=True)
class BathSpectralDensity:
    """Evaluation rules omega -> G(omega) >= 0, one per coupling index.

    A single shared rule may be given; ``rule_for`` hands out the rule for a
    coupling index either way.  Rates must satisfy the KMS condition
    G(-omega) = exp(-beta omega) G(omega) at every probed frequency.
    """

    beta: float
    rules: tuple

    @classmethod
    def shared(cls, beta: float, rule: Callable[[float], float]) -> "BathSpectralDensity":
        return cls(beta=beta, rules=(rule,))

    def rule_for(self, index: int) -> Callable[[float], float]:
        if len(self.rules) == 1:
            return self.rules[0]
        return self.rules[index]

    def rate(self, index: int, omega: float) -> float:
        value = float(self.rule_for(index)(float(omega)))
        if value < 0.0:
            raise DomainError(f"negative bath rate G({omega}) = {value}")
        return value

    def kms_residual(self, index: int, omega: float) -> float:
        g_plus = self.rate(index, abs(omega))
        g_minus = self.rate(index, -abs(omega))
        expected = math.exp(-self.beta * abs(omega)) * g_plus
        return abs(g_minus - expected) / max(1.0, g_plus, g_minus)


def flat_bath(beta: float, gamma0: float = 1.0) -> BathSpectralDensity:
    """G(omega) = gamma0 for omega >= 0 and gamma0 exp(beta omega) below."""

    def rule(omega: float) -> float:
        return gamma0 if omega >= 0.0 else gamma0 * math.exp(beta * omega)

    return BathSpectralDensity.shared(beta, rule)


@dataclass(frozen=True)
class DaviesModel:
    hamiltonian: np.ndarray
    couplings: tuple
    bath: BathSpectralDensity
    bohr_tol: float | None = None

    @property
    def dim(self) -> int:
        return as_matrix(self.hamiltonian).shape[0]


@dataclass(frozen=True)
class BohrDecomposition:
    """Frequencies (ascending, symmetric about zero) and their components."""

    frequencies: np.ndarray
    components: tuple

    def component(self, omega: float, tol: float = 1e-9) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.frequencies - omega)))
        if abs(float(self.frequencies[idx]) - omega) > tol:
            raise KeyError(f"no Bohr frequency near {omega}")
        return self.components[idx]

    def completeness_residual(self, coupling) -> float:
        total = sum(self.components)
        return frobenius(total - as_matrix(coupling))

    def conjugation_residual(self) -> float:
        worst = 0.0
        for omega, comp in zip(self.frequencies, self.components):
            idx = int(np.argmin(np.abs(self.frequencies + omega)))
            worst = max(worst, frobenius(comp.conj().T - self.components[idx]))
        return worst


def _cluster_sorted(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values)
    sorted_vals = values[order]
    groups = []
    start = 0
    for i in range(1, sorted_vals.size + 1):
        if i == sorted_vals.size or sorted_vals[i] - sorted_vals[i - 1] > tol:
            groups.append(sorted_vals[start:i])
            start = i
    return groups


def bohr_decompose(hamiltonian, coupling, tol: float | None = None) -> BohrDecomposition:
    """Split a coupling into Bohr-frequency components of the Hamiltonian.

    Frequency differences are merged into clusters of width ``tol`` (default
    1e-9 times the spectral range); clusters closer than ten times the
    tolerance trigger DegeneracyWarning since the split is then delicate.
    """
    h = require_hermitian(as_matrix(hamiltonian))
    s = require_hermitian(as_matrix(coupling))
    decomp = spectral_decompose(h)
    eps = decomp.eigenvalues
    v = decomp.eigenvectors
    spread = float(eps.max() - eps.min()) if eps.size > 1 else 0.0
    if tol is None:
        tol = 1e-9 * max(1.0, spread)

    diffs = eps[:, None] - eps[None, :]
    groups = _cluster_sorted(diffs.ravel(), tol)
    reps = np.array([float(g.mean()) for g in groups])
    reps[np.abs(reps) <= tol] = 0.0
    if reps.size > 1:
        min_gap = float(np.diff(np.sort(reps)).min())
        if min_gap < 10.0 * tol:
            warnings.warn(
                f"Bohr clusters separated by {min_gap:.3e} < 10 x tolerance",
                DegeneracyWarning,
            )

    st = v.conj().T @ s @ v
    frequencies = []
    components = []
    for rep in np.sort(reps):
        mask = np.abs(diffs - rep) <= tol + 1e-15 * max(1.0, abs(rep))
        comp = np.where(mask, st, 0.0)
        if frobenius(comp) <= 1e-14 * max(1.0, frobenius(st)):
            continue
        frequencies.append(rep)
        components.append(v @ comp @ v.conj().T)
    return BohrDecomposition(np.array(frequencies), tuple(components))


def gibbs_state(hamiltonian, beta: float) -> FullRankState:
    """exp(-beta H) normalized by its trace, built through the spectrum of H."""
    decomp = spectral_decompose(as_matrix(hamiltonian))
    weights = np.exp(-beta * (decomp.eigenvalues - decomp.eigenvalues.min()))
    weights /= weights.sum()
    v = decomp.eigenvectors
    return FullRankState.from_matrix((v * weights) @ v.conj().T)


def commutant_dimension(operators: Sequence[np.ndarray]) -> int:
    """Dimension of {X : [X, A] = 0 for every A}, via a stacked nullspace."""
    mats = [as_matrix(a) for a in operators]
    d = mats[0].shape[0]
    eye = np.eye(d)
    blocks = [np.kron(eye, a) - np.kron(a.T, eye) for a in mats]
    stacked = np.vstack(blocks)
    s = np.linalg.svd(stacked, compute_uv=False)
    smax = float(s.max(initial=0.0))
    return int(np.sum(s <= 1e-10 * max(1.0, smax)))


def build_davies(model: DaviesModel) -> SemigroupAnalysis:
    """Assemble the thermal generator and analyze it.

    The thermal state is the analysis fixed point; its stationarity residual
    must come in at 1e-9 or better, otherwise GibbsNotStationary is raised.
    Uniqueness of the fixed point is decided by the commutant of the
    Hamiltonian together with the couplings; a nontrivial commutant only flags
    the analysis as not primitive.
    """
    h = require_hermitian(as_matrix(model.hamiltonian))
    d = h.shape[0]
    if d > MAX_DENSE_DIM:
        raise DimensionCap(f"dim {d} exceeds dense cap {MAX_DENSE_DIM}")
    beta = model.bath.beta
    sigma = gibbs_state(h, beta)

    jump_ops = []
    for idx, coupling in enumerate(model.couplings):
        decomp = bohr_decompose(h, coupling, model.bohr_tol)
        for omega, comp in zip(decomp.frequencies, decomp.components):
            residual = model.bath.kms_residual(idx, float(omega))
            if residual > KMS_RATE_TOL:
                raise DomainError(
                    f"bath rule {idx} violates the KMS condition at omega = {omega}: "
                    f"residual {residual:.3e}"
                )
            rate = model.bath.rate(idx, float(omega))
            if rate > 0.0:
                jump_ops.append(math.sqrt(rate) * comp.conj().T)

    generator = build_lindblad(LindbladSpec(np.zeros((d, d)), tuple(jump_ops)))
    residual = float(np.linalg.norm(generator.matrix.conj().T @ vec(sigma.entries)))
    if residual > 1e-9:
        raise GibbsNotStationary(
            f"thermal state stationarity residual {residual:.3e} exceeds 1e-9"
        )
    analysis = analyze(generator, sigma=sigma, require_primitive=False)
    primitive = commutant_dimension([h, *model.couplings]) == 1 and analysis.primitive
    if primitive != analysis.primitive:
        analysis = SemigroupAnalysis(
            generator=analysis.generator,
            fixed_point=analysis.fixed_point,
            gap=analysis.gap,
            reversible=analysis.reversible,
            primitive=primitive,
            spectrum=analysis.spectrum,
            _symm=analysis._symm,
        )
    return analysis


@dataclass(frozen=True)
class KmsReport:
    """Residuals of the bath and operator KMS relations, and the validated sign."""

    rate_residual: float
    minus_residual: float
    plus_residual: float
    validated_sign: str


def check_kms_relations(model: DaviesModel) -> KmsReport:
    """Report which sign convention the operator identity sigma S(omega) =
    exp(-+ beta omega) S(omega) sigma validates for this model.

    Under the eps_k - eps_m frequency labeling the minus sign is the one that
    holds; the report carries both residuals so a conflicting convention is
    visible rather than silent.
    """
    h = require_hermitian(as_matrix(model.hamiltonian))
    beta = model.bath.beta
    sigma = gibbs_state(h, beta).entries
    rate_residual = 0.0
    minus_residual = 0.0
    plus_residual = 0.0
    for idx, coupling in enumerate(model.couplings):
        decomp = bohr_decompose(h, coupling, model.bohr_tol)
        for omega, comp in zip(decomp.frequencies, decomp.components):
            rate_residual = max(rate_residual, model.bath.kms_residual(idx, float(omega)))
            scale = max(1.0, frobenius(comp))
            lhs = sigma @ comp
            minus_residual = max(
                minus_residual,
                frobenius(lhs - math.exp(-beta * float(omega)) * comp @ sigma) / scale,
            )
            plus_residual = max(
                plus_residual,
                frobenius(lhs - math.exp(beta * float(omega)) * comp @ sigma) / scale,
            )
    if minus_residual <= 1e-10 and plus_residual <= 1e-10:
        sign = "both"
    elif minus_residual <= 1e-10:
        sign = "minus"
    elif plus_residual <= 1e-10:
        sign = "plus"
    else:
        sign = "neither"
    return KmsReport(
        rate_residual=rate_residual,
        minus_residual=minus_residual,
        plus_residual=plus_residual,
        validated_sign=sign,
    )
