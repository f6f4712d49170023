"""Quasi-free fermionic thermal generators in canonical form.

Modes are realized on qubits through the Jordan-Wigner pairs
w_(2k) = Z..Z X I..I and w_(2k+1) = Z..Z Y I..I (zero-indexed mode k), with
annihilators d_k = (w_(2k) + i w_(2k+1))/2.  canonicalize() absorbs arbitrary
linear couplings into one decay rate per mode: distinct positive frequencies
read their rate off the diagonal rule, degenerate clusters diagonalize a
Hermitian rate matrix over the cluster's annihilators, and zero modes
diagonalize a real-symmetric rate matrix over their Majoranas, whose descending
eigenvalues are paired consecutively as (lambda-prime, lambda) onto the odd and
even Majorana slots.

The canonical generator is block-diagonal over an explicit operator basis
indexed by bit strings b of length 2N, each an exact eigen-operator with
eigenvalue mu(b) read off the per-mode rates.  The quartic-form support rule,
the per-block 4-norm ceilings, and the closed-form log-Sobolev bound for
uniform frequencies complete the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .davies import BathSpectralDensity, flat_bath, gibbs_state
from .errors import (
    BoundViolated,
    DimensionCap,
    DimensionMismatch,
    DomainError,
    EigenResidualExceeded,
    GibbsNotStationary,
    NegativeRate,
)
from .lindblad import LindbladSpec, SemigroupAnalysis, analyze, build_lindblad
from .lsi import BoundReport
from .operators import (
    FullRankState,
    Superoperator,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    frobenius,
    kron_all,
    vec,
)
from .weighted import WeightedContext, lp_norm, q_form

MAX_MODES = 3


def jordan_wigner(n_modes: int) -> list:
    """The 2 N Majorana matrices on N qubits, mode-major order."""
    if n_modes < 1:
        raise DomainError("need at least one mode")
    if n_modes > MAX_MODES:
        raise DimensionCap(f"{n_modes} modes exceed the superoperator cap {MAX_MODES}")
    majoranas = []
    for k in range(n_modes):
        for tail in (PAULI_X, PAULI_Y):
            factors = [PAULI_Z] * k + [tail] + [PAULI_I] * (n_modes - k - 1)
            majoranas.append(kron_all(factors))
    return majoranas


def anticommutation_defect(majoranas) -> float:
    """Max deviation of {w_i, w_j} from 2 delta_ij times the identity."""
    d = majoranas[0].shape[0]
    eye2 = 2.0 * np.eye(d)
    worst = 0.0
    for i, wi in enumerate(majoranas):
        for j, wj in enumerate(majoranas):
            anti = wi @ wj + wj @ wi
            target = eye2 if i == j else 0.0
            worst = max(worst, float(np.abs(anti - target).max()))
    return worst


@dataclass(frozen=True)
class FermionModel:
    """Frequencies nu_k >= 0 and coupling amplitudes s[alpha, k], one row per bath channel."""

    frequencies: tuple
    couplings: np.ndarray
    beta: float
    bath: BathSpectralDensity | None = None

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        if np.any(freqs < 0.0):
            raise DomainError("mode frequencies must be nonnegative")
        s = np.atleast_2d(np.asarray(self.couplings, dtype=complex))
        if s.shape[1] != freqs.size:
            raise DimensionMismatch(
                f"coupling columns {s.shape[1]} do not match {freqs.size} modes"
            )
        object.__setattr__(self, "frequencies", tuple(float(v) for v in freqs))
        object.__setattr__(self, "couplings", s)

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    def resolved_bath(self) -> BathSpectralDensity:
        return self.bath if self.bath is not None else flat_bath(self.beta)


def coupling_operators(model: FermionModel) -> list:
    """The Hermitian bath couplings sum_k (s[a,k] d_k + conj d_k+), one per channel."""
    jw = jordan_wigner(model.n_modes)
    ann = [(jw[2 * k] + 1j * jw[2 * k + 1]) / 2.0 for k in range(model.n_modes)]
    ops = []
    for row in model.couplings:
        op = sum(
            s * a + np.conj(s) * a.conj().T for s, a in zip(row, ann)
        )
        ops.append(op)
    return ops


def fermion_hamiltonian(model: FermionModel) -> np.ndarray:
    jw = jordan_wigner(model.n_modes)
    h = np.zeros_like(jw[0])
    for k, nu in enumerate(model.frequencies):
        d = (jw[2 * k] + 1j * jw[2 * k + 1]) / 2.0
        h = h + nu * (d.conj().T @ d)
    return h


@dataclass(frozen=True)
class CanonicalFermionGenerator:
    """One decay rate per mode (a pair for zero modes) over rotated Majoranas."""

    n_modes: int
    beta: float
    frequencies: tuple
    rates: tuple
    rates_prime: tuple
    majoranas: tuple
    generator: Superoperator
    sigma: FullRankState
    analysis: SemigroupAnalysis
    primitive: bool

    @property
    def mode_gaps(self) -> tuple:
        out = []
        for nu, lam in zip(self.frequencies, self.rates):
            out.append(lam * (1.0 + math.exp(-self.beta * nu)) / 2.0)
        return tuple(out)

    @property
    def gap_lower(self) -> float:
        """The structural gap min_k lambda_k (1 + exp(-beta nu_k))/2."""
        return min(self.mode_gaps)

    def annihilator(self, k: int) -> np.ndarray:
        return (self.majoranas[2 * k] + 1j * self.majoranas[2 * k + 1]) / 2.0

    def mode_decay(self, bits) -> float:
        """The eigenvalue mu(b) of the basis operator labeled by bits."""
        mu = 0.0
        for k in range(self.n_modes):
            b1, b2 = bits[2 * k], bits[2 * k + 1]
            nu = self.frequencies[k]
            if nu > 0.0:
                rate = self.rates[k] * (1.0 + math.exp(-self.beta * nu)) / 2.0
                mu -= rate * (b1 + b2)
            else:
                mu -= self.rates[k] * b1 + self.rates_prime[k] * b2
        return mu

    def gibbs_product_form(self) -> np.ndarray:
        """Product of per-mode factors exp(-i beta nu w1 w2 / 2)/(2 cosh(beta nu/2))."""
        d = self.majoranas[0].shape[0]
        out = np.eye(d, dtype=complex)
        for k, nu in enumerate(self.frequencies):
            w1w2 = self.majoranas[2 * k] @ self.majoranas[2 * k + 1]
            herm = 1j * w1w2
            evals, evecs = np.linalg.eigh(herm)
            factor = (evecs * np.exp(-0.5 * self.beta * nu * evals)) @ evecs.conj().T
            out = out @ factor / (2.0 * math.cosh(0.5 * self.beta * nu))
        return out


def _group_indices(values: np.ndarray, indices: list, tol: float) -> list:
    groups = []
    for idx in sorted(indices, key=lambda i: values[i]):
        if groups and values[idx] - values[groups[-1][-1]] <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def canonicalize(model: FermionModel) -> CanonicalFermionGenerator:
    """Rotate couplings into one independent dissipator per mode.

    Positive-frequency clusters diagonalize the Hermitian matrix
    chi[a, b] = sum_alpha G_alpha(xi) conj(s[alpha, a]) s[alpha, b] over the
    cluster; zero modes diagonalize the real-symmetric analogue over their
    Majorana coefficients (real parts on odd slots, imaginary on even), pairing
    descending eigenvalues consecutively.  An eigenvalue below -1e-12 raises
    NegativeRate; a vanishing rate leaves the generator well-defined but not
    primitive.  Canonical modes stay at their original positions.
    """
    n = model.n_modes
    if n > MAX_MODES:
        raise DimensionCap(f"{n} modes exceed the superoperator cap {MAX_MODES}")
    freqs = np.asarray(model.frequencies, dtype=float)
    s = model.couplings
    n_alpha = s.shape[0]
    bath = model.resolved_bath()
    beta = model.beta
    jw = jordan_wigner(n)
    ann = [(jw[2 * k] + 1j * jw[2 * k + 1]) / 2.0 for k in range(n)]

    tol = 1e-9 * max(1.0, float(freqs.max(initial=0.0)))
    zero = [k for k in range(n) if freqs[k] <= tol]
    positive = [k for k in range(n) if freqs[k] > tol]

    new_w: list = [None] * (2 * n)
    rates = [0.0] * n
    rates_prime: list = [None] * n
    nu_canonical = [0.0] * n

    for cluster in _group_indices(freqs, positive, tol):
        xi = float(freqs[cluster].mean())
        m = len(cluster)
        chi = np.zeros((m, m), dtype=complex)
        for alpha in range(n_alpha):
            g = bath.rate(alpha, xi)
            col = s[alpha, cluster]
            chi += g * np.outer(col.conj(), col)
        vals, u = np.linalg.eigh(chi)
        if float(vals.min()) < -1e-12:
            raise NegativeRate(f"cluster rate matrix eigenvalue {vals.min():.3e}")
        order = np.argsort(-vals, kind="stable")
        vals = np.clip(vals[order], 0.0, None)
        u = u[:, order]
        for a, slot in enumerate(cluster):
            d_new = sum(np.conj(u[k, a]) * ann[cluster[k]] for k in range(m))
            new_w[2 * slot] = d_new + d_new.conj().T
            new_w[2 * slot + 1] = 1j * (d_new.conj().T - d_new)
            rates[slot] = float(vals[a])
            nu_canonical[slot] = xi

    if zero:
        m = len(zero)
        coeff = np.empty((n_alpha, 2 * m))
        for alpha in range(n_alpha):
            for j, k in enumerate(zero):
                coeff[alpha, 2 * j] = s[alpha, k].real
                coeff[alpha, 2 * j + 1] = s[alpha, k].imag
        chi0 = np.zeros((2 * m, 2 * m))
        for alpha in range(n_alpha):
            chi0 += bath.rate(alpha, 0.0) * np.outer(coeff[alpha], coeff[alpha])
        vals, o = np.linalg.eigh(chi0)
        if float(vals.min()) < -1e-12:
            raise NegativeRate(f"zero-mode rate matrix eigenvalue {vals.min():.3e}")
        order = np.argsort(-vals, kind="stable")
        vals = np.clip(vals[order], 0.0, None)
        o = o[:, order]
        zero_majoranas = []
        for k in zero:
            zero_majoranas.extend([jw[2 * k], jw[2 * k + 1]])
        for j, slot in enumerate(zero):
            w_prime = sum(o[l, 2 * j] * zero_majoranas[l] for l in range(2 * m))
            w_plain = sum(o[l, 2 * j + 1] * zero_majoranas[l] for l in range(2 * m))
            new_w[2 * slot] = w_prime
            new_w[2 * slot + 1] = w_plain
            rates_prime[slot] = 2.0 * float(vals[2 * j])
            rates[slot] = 2.0 * float(vals[2 * j + 1])
            nu_canonical[slot] = 0.0

    defect = anticommutation_defect(new_w)
    if defect > 1e-12:
        raise EigenResidualExceeded(f"rotated Majoranas fail anticommutation: {defect:.3e}")

    jump_ops = []
    for k in range(n):
        nu = nu_canonical[k]
        lam = rates[k]
        if nu > 0.0:
            d_new = (new_w[2 * k] + 1j * new_w[2 * k + 1]) / 2.0
            if lam > 0.0:
                jump_ops.append(math.sqrt(lam) * d_new)
                jump_ops.append(math.sqrt(lam * math.exp(-beta * nu)) * d_new.conj().T)
        else:
            if lam > 0.0:
                jump_ops.append(math.sqrt(lam / 2.0) * new_w[2 * k + 1])
            if rates_prime[k] > 0.0:
                jump_ops.append(math.sqrt(rates_prime[k] / 2.0) * new_w[2 * k])

    dim = 2**n
    generator = build_lindblad(LindbladSpec(np.zeros((dim, dim)), tuple(jump_ops)))

    h = np.zeros((dim, dim), dtype=complex)
    for k in range(n):
        if nu_canonical[k] > 0.0:
            d_new = (new_w[2 * k] + 1j * new_w[2 * k + 1]) / 2.0
            h += nu_canonical[k] * (d_new.conj().T @ d_new)
    sigma = gibbs_state(h, beta)
    residual = float(np.linalg.norm(generator.matrix.conj().T @ vec(sigma.entries)))
    if residual > 1e-9:
        raise GibbsNotStationary(f"thermal stationarity residual {residual:.3e}")
    analysis = analyze(generator, sigma=sigma, require_primitive=False)
    all_rates_positive = all(r > 1e-12 for r in rates) and all(
        rp is None or rp > 1e-12 for rp in rates_prime
    )
    return CanonicalFermionGenerator(
        n_modes=n,
        beta=beta,
        frequencies=tuple(nu_canonical),
        rates=tuple(rates),
        rates_prime=tuple(rp if rp is not None else float("nan") for rp in rates_prime),
        majoranas=tuple(new_w),
        generator=generator,
        sigma=sigma,
        analysis=analysis,
        primitive=all_rates_positive and analysis.primitive,
    )


def majorana_decomposition_check(canonical: CanonicalFermionGenerator) -> float:
    """Residual between the annihilator form and the Majorana form per mode.

    For each positive-frequency mode, the dissipator pair
    lam (d+ f d - {d+ d, f}/2) + lam e^(-beta nu) (d f d+ - {d d+, f}/2)
    must equal its expansion
    lam (1 + e^(-beta nu))/4 (w1 f w1 + w2 f w2 - 2 f)
    + i lam (1 - e^(-beta nu))/4 (w1 f w2 - w2 f w1 - {w1 w2, f}).
    Returns the worst Frobenius mismatch over modes.
    """
    worst = 0.0
    dim = 2**canonical.n_modes
    eye = np.eye(dim)
    beta = canonical.beta
    for k in range(canonical.n_modes):
        nu = canonical.frequencies[k]
        if nu <= 0.0:
            continue
        lam = canonical.rates[k]
        d_new = canonical.annihilator(k)
        ops = (
            math.sqrt(lam) * d_new,
            math.sqrt(lam * math.exp(-beta * nu)) * d_new.conj().T,
        )
        direct = build_lindblad(LindbladSpec(np.zeros((dim, dim)), ops)).matrix

        w1 = canonical.majoranas[2 * k]
        w2 = canonical.majoranas[2 * k + 1]
        c_sym = lam * (1.0 + math.exp(-beta * nu)) / 4.0
        c_asym = lam * (1.0 - math.exp(-beta * nu)) / 4.0
        w1w2 = w1 @ w2
        expanded = c_sym * (
            np.kron(w1.T, w1) + np.kron(w2.T, w2) - 2.0 * np.eye(dim * dim)
        ) + 1j * c_asym * (
            np.kron(w2.T, w1)
            - np.kron(w1.T, w2)
            - np.kron(eye, w1w2)
            - np.kron(w1w2.T, eye)
        )
        worst = max(worst, frobenius(direct - expanded))
    return worst


@dataclass(frozen=True)
class ModeOperatorBasis:
    """Weighted-orthonormal eigen-operator basis indexed by 2N-bit strings.

    Per mode: identity, sqrt(cosh(beta nu/2)) w1, sqrt(cosh(beta nu/2)) w2, and
    w1 w2 exp(i nu beta w1 w2 / 2); a string of odd total weight multiplies
    every mode factor by w1 w2 to keep parity bookkeeping consistent.
    """

    strings: tuple
    operators: tuple

    def operator(self, bits) -> np.ndarray:
        return self.operators[self.strings.index(tuple(bits))]

    def block_strings(self, n: int) -> list:
        return [b for b in self.strings if sum(b) == n]


def _mode_factors(canonical: CanonicalFermionGenerator, k: int) -> dict:
    nu = canonical.frequencies[k]
    beta = canonical.beta
    w1 = canonical.majoranas[2 * k]
    w2 = canonical.majoranas[2 * k + 1]
    dim = w1.shape[0]
    scale = math.sqrt(math.cosh(0.5 * beta * nu))
    w1w2 = w1 @ w2
    herm = 1j * w1w2
    evals, evecs = np.linalg.eigh(herm)
    twist = (evecs * np.exp(0.5 * nu * beta * evals)) @ evecs.conj().T
    factors = {
        (0, 0): np.eye(dim, dtype=complex),
        (1, 0): scale * w1,
        (0, 1): scale * w2,
        (1, 1): w1w2 @ twist,
    }
    return factors, w1w2


def mode_basis(canonical: CanonicalFermionGenerator) -> ModeOperatorBasis:
    """All 2^(2N) basis operators, in lexicographic string order."""
    n = canonical.n_modes
    per_mode = []
    parity_fixers = []
    for k in range(n):
        factors, w1w2 = _mode_factors(canonical, k)
        per_mode.append(factors)
        parity_fixers.append(w1w2)
    strings = []
    operators = []
    for bits in iproduct((0, 1), repeat=2 * n):
        odd = sum(bits) % 2 == 1
        dim = canonical.majoranas[0].shape[0]
        op = np.eye(dim, dtype=complex)
        for k in range(n):
            factor = per_mode[k][(bits[2 * k], bits[2 * k + 1])]
            if odd:
                factor = parity_fixers[k] @ factor
            op = op @ factor
        strings.append(bits)
        operators.append(op)
    return ModeOperatorBasis(strings=tuple(strings), operators=tuple(operators))


def verify_block_structure(
    canonical: CanonicalFermionGenerator,
    basis: ModeOperatorBasis | None = None,
    *,
    residual_tol: float = 1e-10,
) -> dict:
    """Check every basis operator is an eigen-operator at its predicted rate.

    Returns {string: (mu, residual)}.  A residual above tolerance, or an
    eigenvalue above -|b| times the structural gap, raises.
    """
    if basis is None:
        basis = mode_basis(canonical)
    m = canonical.generator.matrix
    gap = canonical.gap_lower
    report = {}
    for bits, op in zip(basis.strings, basis.operators):
        mu = canonical.mode_decay(bits)
        v = vec(op)
        residual = float(np.linalg.norm(m @ v - mu * v)) / max(1.0, float(np.linalg.norm(v)))
        if residual > residual_tol:
            raise EigenResidualExceeded(
                f"string {bits}: residual {residual:.3e} exceeds {residual_tol:.1e}"
            )
        if mu > -gap * sum(bits) + 1e-9:
            raise BoundViolated(
                f"string {bits}: eigenvalue {mu!r} above -n Lambda = {-gap * sum(bits)!r}"
            )
        report[bits] = (mu, residual)
    return report


def _xor_supported(b1, b2, b3, b4) -> bool:
    x = tuple(a ^ b ^ c ^ d for a, b, c, d in zip(b1, b2, b3, b4))
    for k in range(len(x) // 2):
        if (x[2 * k], x[2 * k + 1]) not in ((0, 0), (1, 1)):
            return False
    return True


@dataclass(frozen=True)
class QCheckReport:
    max_magnitude: float
    ceiling: float
    argmax: tuple
    tuples_checked: int
    off_support_max: float


def fermion_q_bound_check(
    canonical: CanonicalFermionGenerator,
    n: int,
    basis: ModeOperatorBasis | None = None,
) -> QCheckReport:
    """Exhaustive quartic-form scan over all 4-tuples from block n.

    Verifies the support rule (the XOR of the four strings must pair to (0,0)
    or (1,1) on every mode, otherwise Q vanishes) and the ceiling
    exp(n beta nu_max).  Violations raise BoundViolated.
    """
    if basis is None:
        basis = mode_basis(canonical)
    ctx = WeightedContext(canonical.sigma)
    strings = basis.block_strings(n)
    nu_max = max(canonical.frequencies)
    ceiling = math.exp(n * canonical.beta * nu_max)
    worst = 0.0
    worst_tuple = None
    off_support = 0.0
    checked = 0
    for b1 in strings:
        for b2 in strings:
            for b3 in strings:
                for b4 in strings:
                    value = q_form(
                        ctx,
                        basis.operator(b1),
                        basis.operator(b2),
                        basis.operator(b3),
                        basis.operator(b4),
                    ).magnitude
                    checked += 1
                    if not _xor_supported(b1, b2, b3, b4):
                        off_support = max(off_support, value)
                        if value > 1e-12:
                            raise BoundViolated(
                                f"off-support tuple {(b1, b2, b3, b4)} gives |Q| = {value:.3e}"
                            )
                        continue
                    if value > worst:
                        worst = value
                        worst_tuple = (b1, b2, b3, b4)
                    if value > ceiling * (1.0 + 1e-10):
                        raise BoundViolated(
                            f"tuple {(b1, b2, b3, b4)}: |Q| = {value:.6g} over ceiling {ceiling:.6g}"
                        )
    return QCheckReport(
        max_magnitude=worst,
        ceiling=ceiling,
        argmax=worst_tuple,
        tuples_checked=checked,
        off_support_max=off_support,
    )


def fermion_block_norm_check(
    canonical: CanonicalFermionGenerator,
    n: int,
    *,
    samples: int = 500,
    seed: int = 0,
    basis: ModeOperatorBasis | None = None,
) -> float:
    """Max of |f|_4^4 / |f|_2^4 over random block-n elements, against 2^(8n) e^(n beta nu).

    Returns the largest observed ratio; exceeding the ceiling raises.
    """
    if basis is None:
        basis = mode_basis(canonical)
    ctx = WeightedContext(canonical.sigma)
    strings = basis.block_strings(n)
    ops = [basis.operator(b) for b in strings]
    nu_max = max(canonical.frequencies)
    ceiling = 2.0 ** (8 * n) * math.exp(n * canonical.beta * nu_max)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        coeffs = rng.standard_normal(len(ops)) + 1j * rng.standard_normal(len(ops))
        f = sum(c * op for c, op in zip(coeffs, ops))
        n2 = lp_norm(ctx, f, 2.0)
        if n2 < 1e-14:
            continue
        ratio = (lp_norm(ctx, f, 4.0) / n2) ** 4
        worst = max(worst, ratio)
        if ratio > ceiling * (1.0 + 1e-10):
            raise BoundViolated(
                f"block {n} sample ratio {ratio:.6g} exceeds ceiling {ceiling:.6g}"
            )
    return worst


def fermion_block_constant(beta: float, nu: float) -> float:
    """C = 4 exp(beta nu / 4), the uniform-frequency block-norm constant."""
    return 4.0 * math.exp(0.25 * beta * nu)


def bound_fermion_lsi(gap: float, nu: float, beta: float) -> BoundReport:
    """gap / (beta nu + 14) for uniform positive frequency nu."""
    if nu < 0.0 or beta < 0.0 or gap <= 0.0:
        raise DomainError("need nu >= 0, beta >= 0, gap > 0")
    value = gap / (beta * nu + 14.0)
    return BoundReport(
        name="fermion_lsi",
        inputs={"gap": gap, "nu": nu, "beta": beta},
        value=value,
        bracket=(value, gap),
        equation="Eq.137",
    )
