"""Built-in acceptance checks.

Ten independent criteria covering construction, functional identities, closed
bound arithmetic, variational brackets, hypercontractivity, block norms, the
quartic form, mixing against certified envelopes, the norm derivative at t = 0,
and size-independence of the product bound.  Each criterion reports one
pass/fail line; run_selftest drives them all and the test suite asserts each
one individually.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .davies import DaviesModel, build_davies, flat_bath
from .errors import LsqError
from .fermion import (
    FermionModel,
    bound_fermion_lsi,
    canonicalize,
    coupling_operators,
    fermion_block_constant,
    fermion_block_norm_check,
    fermion_hamiltonian,
    fermion_q_bound_check,
    mode_basis,
    verify_block_structure,
)
from .graphstate import (
    GraphModel,
    bound_graph_lsi,
    graph_davies,
    local_thermal_qubit,
    prep_time,
)
from .lindblad import (
    check_detailed_balance,
    decay_curve,
    evolve,
    mixing_bound_gap,
    mixing_bound_lsi,
)
from .lsi import (
    block_norm_bound,
    bound_general,
    bound_interpolation,
    estimate_lsi,
    verify_hypercontractivity,
)
from .operators import PAULI_X, PAULI_Z, random_psd, trace_norm, unvec, vec
from .product import (
    build_product,
    excitation_blocks,
    product_block_norm_constant,
)
from .weighted import (
    WeightedContext,
    dirichlet_form,
    ent_functional,
    lp_norm,
    norm_2_to_q,
    q_form,
)


@dataclass(frozen=True)
class SelftestParams:
    restarts: int = 24
    hc_samples: int = 200
    block_samples: int = 500
    bound_samples: int = 1000
    fd_samples: int = 50
    norm_restarts: int = 48
    seed: int = 7


FULL = SelftestParams()
FAST = SelftestParams(
    restarts=6,
    hc_samples=40,
    block_samples=60,
    bound_samples=200,
    fd_samples=10,
    norm_restarts=10,
)


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str


# ---------------------------------------------------------------- shared models


@lru_cache(maxsize=None)
def _qubit_davies(beta: float):
    return build_davies(DaviesModel(PAULI_Z, (PAULI_X,), flat_bath(beta)))


@lru_cache(maxsize=None)
def _thermal_factor():
    return local_thermal_qubit(1.0, 1.0)


@lru_cache(maxsize=None)
def _product(n: int):
    return build_product((_thermal_factor(),) * n)


@lru_cache(maxsize=None)
def _graph(n: int, beta: float):
    edges = tuple((i, i + 1) for i in range(n - 1))
    return GraphModel(n, edges, beta)


@lru_cache(maxsize=None)
def _fermion_single():
    return canonicalize(FermionModel(frequencies=(2.0,), couplings=[[1.0]], beta=1.0))


@lru_cache(maxsize=None)
def _fermion_pair():
    return canonicalize(
        FermionModel(frequencies=(2.0, 1.0), couplings=[[1.0, 0.4 + 0.2j]], beta=1.0)
    )


def _ctx(analysis) -> WeightedContext:
    return WeightedContext(analysis.fixed_point)


def _stationarity(analysis) -> float:
    return float(
        np.linalg.norm(
            analysis.generator.matrix.conj().T @ vec(analysis.fixed_point.entries)
        )
    )


# ------------------------------------------------------------------- criteria


def criterion_1(params: SelftestParams) -> CriterionResult:
    """Thermal constructions satisfy detailed balance and fix their Gibbs state."""
    name = "detailed balance and Gibbs stationarity"
    cases = []
    for beta in (0.5, 1.0, 2.0):
        cases.append((f"qubit beta={beta}", _qubit_davies(beta)))
    graph = _graph(3, 1.0)
    from .graphstate import graph_davies_direct

    cases.append(("graph path N=3", graph_davies_direct(graph)))
    pair = _fermion_pair()
    model = FermionModel(frequencies=(2.0, 1.0), couplings=[[1.0, 0.4 + 0.2j]], beta=1.0)
    davies_fermion = build_davies(
        DaviesModel(
            fermion_hamiltonian(model), tuple(coupling_operators(model)), flat_bath(1.0)
        )
    )
    cases.append(("fermion N=2 via thermal build", davies_fermion))
    cases.append(("fermion N=2 canonical", pair.analysis))
    cases.append(("product N=3", _product(3).analysis))

    worst_db = 0.0
    worst_stat = 0.0
    try:
        for label, analysis in cases:
            db = check_detailed_balance(analysis.generator, analysis.fixed_point)
            stat = _stationarity(analysis)
            worst_db = max(worst_db, db)
            worst_stat = max(worst_stat, stat)
    except LsqError as exc:
        return CriterionResult(1, name, False, f"{type(exc).__name__}: {exc}")
    passed = worst_db <= 1e-10 and worst_stat <= 1e-9
    detail = f"max asymmetry {worst_db:.2e} (tol 1e-10), max stationarity {worst_stat:.2e} (tol 1e-9)"
    return CriterionResult(1, name, passed, detail)


def criterion_2(params: SelftestParams) -> CriterionResult:
    """Every fermionic mode-basis operator is an exact eigen-operator."""
    name = "fermion eigen-structure at N in {1, 2}"
    worst = 0.0
    count = 0
    try:
        for canonical in (_fermion_single(), _fermion_pair()):
            report = verify_block_structure(canonical, residual_tol=1e-10)
            worst = max(worst, max(r for _, r in report.values()))
            count += len(report)
    except LsqError as exc:
        return CriterionResult(2, name, False, f"{type(exc).__name__}: {exc}")
    detail = f"{count} basis operators, max residual {worst:.2e} (tol 1e-10)"
    return CriterionResult(2, name, worst <= 1e-10, detail)


def criterion_3(params: SelftestParams) -> CriterionResult:
    """Closed-form bound values agree with independently coded arithmetic."""
    name = "bound arithmetic"
    rng = np.random.default_rng(params.seed + 3)
    worst = 0.0
    try:
        for _ in range(params.bound_samples):
            gap = float(rng.uniform(0.1, 10.0))
            t4 = float(rng.uniform(0.0, 5.0))
            m4 = float(rng.uniform(1.0 + 1e-6, 50.0))
            got = bound_interpolation(gap, 4.0, t4, m4).value
            expect = gap / (2.0 * (2.0 * gap * t4 + 2.0 * math.log(m4) + 1.0))
            worst = max(worst, abs(got - expect) / expect)

            inv_norm = float(rng.uniform(1.5, 1e4))
            general = bound_general(gap, inv_norm).value
            expect_general = gap / (math.log(inv_norm) + 2.0)
            via_interp = bound_interpolation(gap, 4.0, 0.0, inv_norm**0.25).value
            worst = max(worst, abs(general - expect_general) / expect_general)
            worst = max(worst, abs(general - via_interp) / expect_general)
    except LsqError as exc:
        return CriterionResult(3, name, False, f"{type(exc).__name__}: {exc}")

    graph_value = bound_graph_lsi(_graph(2, 1.0)).value
    graph_expect = (1.0 + math.exp(-2.0)) / (2.0 * math.log(math.exp(2.0) + 1.0) + 28.0)
    graph_err = abs(graph_value - graph_expect)

    fermion_value = bound_fermion_lsi(0.5, 2.0, 1.0).value
    fermion_err = abs(fermion_value - 0.03125)

    passed = worst <= 1e-12 and graph_err <= 1e-9 and fermion_err <= 1e-9
    detail = (
        f"{params.bound_samples} random inputs, worst rel err {worst:.2e}; "
        f"graph value {graph_value:.9f} (err {graph_err:.2e}), "
        f"fermion value {fermion_value:.9f} (err {fermion_err:.2e})"
    )
    return CriterionResult(3, name, passed, detail)


def _bracket_cases(params: SelftestParams):
    cases = []
    for beta in (0.5, 1.0, 2.0):
        analysis = _qubit_davies(beta)
        cases.append((f"qubit beta={beta}", analysis, None))
    product = _product(2)
    factor = _thermal_factor()
    from .product import bound_product_lsi

    cases.append(
        ("product N=2", product.analysis, bound_product_lsi(factor.gap, 2, 3))
    )
    graph_product = graph_davies(_graph(2, 1.0))
    cases.append(("graph N=2", graph_product.analysis, bound_graph_lsi(_graph(2, 1.0))))
    single = _fermion_single()
    cases.append(
        ("fermion N=1", single.analysis, bound_fermion_lsi(single.gap_lower, 2.0, 1.0))
    )
    return cases


@lru_cache(maxsize=None)
def _bracket_estimates(restarts: int, seed: int):
    out = {}
    for label, analysis, reference in _bracket_cases(FULL):
        estimate = estimate_lsi(
            _ctx(analysis),
            analysis.generator,
            restarts=restarts,
            seed=seed,
            reference=reference,
            analysis=analysis,
        )
        out[label] = (estimate, analysis.gap)
    return out


def criterion_4(params: SelftestParams) -> CriterionResult:
    """Certified lower bounds sit below the best variational witness ratio."""
    name = "bracket closure: alpha_lower <= alpha_hat <= gap"
    slack = 1e-6
    lines = []
    passed = True
    try:
        estimates = _bracket_estimates(params.restarts, params.seed)
    except LsqError as exc:
        return CriterionResult(4, name, False, f"{type(exc).__name__}: {exc}")
    for label, (estimate, gap) in estimates.items():
        ok = (
            estimate.alpha_lower <= estimate.alpha_upper + slack
            and estimate.alpha_upper <= gap + slack
        )
        passed = passed and ok
        lines.append(
            f"{label}: {estimate.alpha_lower:.4g} <= {estimate.alpha_upper:.4g} <= {gap:.4g}"
        )
    return CriterionResult(4, name, passed, "; ".join(lines))


def criterion_5(params: SelftestParams) -> CriterionResult:
    """Hypercontractivity holds along p(t) = 1 + e^(2 alpha t) at certified alpha."""
    name = "hypercontractivity at certified rates"
    times = (0.1, 0.5, 1.0, 5.0)
    cases = []
    qubit = _qubit_davies(1.0)
    cases.append(("qubit", qubit, bound_general(qubit.gap, qubit.fixed_point).value))
    graph_product = graph_davies(_graph(2, 1.0))
    cases.append(("graph N=2", graph_product.analysis, bound_graph_lsi(_graph(2, 1.0)).value))
    single = _fermion_single()
    cases.append(
        ("fermion N=1", single.analysis, bound_fermion_lsi(single.gap_lower, 2.0, 1.0).value)
    )
    product = _product(2)
    from .product import bound_product_lsi

    cases.append(
        ("product N=2", product.analysis, bound_product_lsi(_thermal_factor().gap, 2, 3).value)
    )
    worst = -math.inf
    try:
        for label, analysis, alpha in cases:
            violation = verify_hypercontractivity(
                _ctx(analysis),
                analysis.generator,
                alpha,
                times,
                samples=params.hc_samples,
                seed=params.seed + 5,
                analysis=analysis,
            )
            worst = max(worst, violation)
    except LsqError as exc:
        return CriterionResult(5, name, False, f"{type(exc).__name__}: {exc}")
    detail = (
        f"max violation {worst:.2e} over {len(cases)} models x {len(times)} times "
        f"x {params.hc_samples} states (tol 1e-9)"
    )
    return CriterionResult(5, name, worst <= 1e-9, detail)


def criterion_6(params: SelftestParams) -> CriterionResult:
    """Excitation-block 4-norms obey their constants; M4 = 2 dominates the 2->4 norm."""
    name = "block norm constants and M4 domination"
    rng = np.random.default_rng(params.seed + 6)
    lines = []
    passed = True
    try:
        product = _product(2)
        ctx = _ctx(product.analysis)
        c_product = product_block_norm_constant(2, 3)
        worst_margin = -math.inf
        for block in excitation_blocks(product):
            if block.excitations == 0:
                continue
            ops = [element.operator for element in block.elements]
            ceiling = c_product**block.excitations
            for _ in range(params.block_samples):
                coeffs = rng.standard_normal(len(ops)) + 1j * rng.standard_normal(len(ops))
                f = sum(c * op for c, op in zip(coeffs, ops))
                n2 = lp_norm(ctx, f, 2.0)
                if n2 < 1e-14:
                    continue
                margin = lp_norm(ctx, f, 4.0) / n2 - ceiling
                worst_margin = max(worst_margin, margin)
                passed = passed and margin <= 1e-10 * ceiling
        lines.append(f"product blocks: worst 4-norm margin {worst_margin:.2e}")

        pair = _fermion_pair()
        for n in range(1, 5):
            ratio = fermion_block_norm_check(
                pair, n, samples=params.block_samples, seed=params.seed + n
            )
            lines.append(f"fermion block {n}: max ratio {ratio:.3g}")

        for label, analysis, c_value in (
            ("product N=2", product.analysis, c_product),
            ("fermion N=1", _fermion_single().analysis, fermion_block_constant(1.0, 2.0)),
        ):
            gap = analysis.gap
            t4 = math.log(2.0 * c_value) / gap
            m4 = block_norm_bound(c_value, gap, t4)
            if abs(m4 - 2.0) > 1e-12:
                passed = False
                lines.append(f"{label}: M4 at t4 came out {m4!r}")
                continue
            transfer = evolve(analysis.generator, t4, analysis=analysis)
            measured = norm_2_to_q(
                _ctx(analysis),
                transfer,
                4.0,
                restarts=params.norm_restarts,
                seed=params.seed + 16,
            )
            ok = measured.value <= 2.0 + 1e-6
            passed = passed and ok
            lines.append(f"{label}: measured 2->4 norm {measured.value:.9f} <= 2 + 1e-6")
    except LsqError as exc:
        return CriterionResult(6, name, False, f"{type(exc).__name__}: {exc}")
    return CriterionResult(6, name, passed, "; ".join(lines))


def criterion_7(params: SelftestParams) -> CriterionResult:
    """Quartic form: closed value, support rule, ceiling, lone-site vanishing."""
    name = "quartic form structure"
    lines = []
    passed = True
    try:
        single = _fermion_single()
        basis = mode_basis(single)
        ctx = WeightedContext(single.sigma)
        f11 = basis.operator((1, 1))
        got = q_form(ctx, f11, f11, f11, f11).value
        x = 0.5 * single.beta * single.frequencies[0]
        expect = math.cosh(3.0 * x) / math.cosh(x)
        err = abs(got - expect)
        passed = passed and err <= 1e-10
        lines.append(f"cosh ratio err {err:.2e} (tol 1e-10)")

        pair = _fermion_pair()
        pair_basis = mode_basis(pair)
        for n in (1, 2):
            report = fermion_q_bound_check(pair, n, pair_basis)
            lines.append(
                f"block {n}: {report.tuples_checked} tuples, max |Q| {report.max_magnitude:.3g} "
                f"<= {report.ceiling:.3g}, off-support max {report.off_support_max:.1e}"
            )

        product = _product(2)
        ctx2 = _ctx(product.analysis)
        blocks = excitation_blocks(product)
        one_site = [e.operator for b in blocks if b.excitations == 1 for e in b.elements]
        two_site = [e.operator for b in blocks if b.excitations == 2 for e in b.elements]
        eye = np.eye(4)
        worst_lone = 0.0
        for f in one_site[:3]:
            worst_lone = max(worst_lone, q_form(ctx2, f, eye, eye, eye).magnitude)
            for g in two_site[:3]:
                worst_lone = max(worst_lone, q_form(ctx2, g, f, eye, eye).magnitude)
        passed = passed and worst_lone <= 1e-12
        lines.append(f"lone-site max |Q| {worst_lone:.2e} (tol 1e-12)")
    except LsqError as exc:
        return CriterionResult(7, name, False, f"{type(exc).__name__}: {exc}")
    return CriterionResult(7, name, passed, "; ".join(lines))


def criterion_8(params: SelftestParams) -> CriterionResult:
    """Three-qubit path graph reaches its target within the certified envelopes."""
    name = "graph preparation inside mixing envelopes"
    epsilon = 0.1
    n = 3
    try:
        prep = prep_time(n, epsilon)
        graph = _graph(n, prep.beta_required)
        product = graph_davies(graph)
        analysis = product.analysis
        alpha = bound_graph_lsi(graph).value
        dim = 2**n
        rho0 = np.eye(dim) / dim
        times = np.linspace(0.0, prep.t_epsilon, 25)
        distances = decay_curve(analysis.generator, rho0, times, analysis=analysis)
        eq9 = mixing_bound_gap(analysis.fixed_point, analysis.gap, times)
        eq10 = mixing_bound_lsi(analysis.fixed_point, alpha, times)
        margin9 = float(np.max(distances - eq9))
        margin10 = float(np.max(distances - eq10))

        propagator = scipy.linalg.expm(
            prep.t_epsilon * analysis.generator.matrix.conj().T
        )
        rho_final = unvec(propagator @ vec(rho0), dim)
        target = np.zeros((dim, dim))
        target[0, 0] = 1.0
        final_distance = trace_norm(rho_final - target)
        passed = margin9 <= 1e-9 and margin10 <= 1e-9 and final_distance <= epsilon
        detail = (
            f"beta {prep.beta_required:.4f}, t {prep.t_epsilon:.3f}; decay-over-gap-envelope "
            f"{margin9:.2e}, over-lsi-envelope {margin10:.2e}; final distance "
            f"{final_distance:.4f} <= {epsilon}"
        )
    except LsqError as exc:
        return CriterionResult(8, name, False, f"{type(exc).__name__}: {exc}")
    return CriterionResult(8, name, passed, detail)


def criterion_9(params: SelftestParams) -> CriterionResult:
    """d/dt |T_t f|_{p(t)} at t = 0 equals the entropy-Dirichlet expression."""
    name = "norm derivative identity at t = 0"
    analysis = _qubit_davies(1.0)
    ctx = _ctx(analysis)
    alpha = bound_general(analysis.gap, analysis.fixed_point).value
    m = analysis.generator.matrix
    rng = np.random.default_rng(params.seed + 9)
    h = 1e-5
    worst = 0.0
    try:
        for _ in range(params.fd_samples):
            f = random_psd(2, rng)
            f = f / lp_norm(ctx, f, 2.0)
            # d|f|_p/dp at p = 2 is Ent(f)/(2 |f|_2), so the chain rule puts
            # pdot(0)/2 = alpha on the entropy term for unit-norm f
            analytic = alpha * ent_functional(ctx, f) - dirichlet_form(
                ctx, analysis.generator, f
            )

            def norm_at(t: float) -> float:
                p = 1.0 + math.exp(2.0 * alpha * t)
                ft = unvec(scipy.linalg.expm(t * m) @ vec(f), 2)
                return lp_norm(ctx, ft, p)

            numeric = (norm_at(h) - norm_at(-h)) / (2.0 * h)
            worst = max(worst, abs(analytic - numeric) / max(1.0, abs(analytic)))
    except LsqError as exc:
        return CriterionResult(9, name, False, f"{type(exc).__name__}: {exc}")
    detail = (
        f"{params.fd_samples} states, worst relative error {worst:.2e} (tol 1e-4)"
    )
    return CriterionResult(9, name, worst <= 1e-4, detail)


def criterion_10(params: SelftestParams) -> CriterionResult:
    """The product bound ignores the number of factors and stays below alpha_hat."""
    name = "size-independent product bound"
    from .product import bound_product_lsi

    try:
        values = []
        for n in (1, 2, 3):
            product = _product(n)
            values.append(bound_product_lsi(min(f.gap for f in product.factors), 2, 3).value)
        spread = max(values) - min(values)
        estimates = _bracket_estimates(params.restarts, params.seed)
        alpha_hat = estimates["product N=2"][0].alpha_upper
        passed = spread <= 1e-12 and values[0] <= alpha_hat + 1e-6
        detail = (
            f"values {['%.9f' % v for v in values]}, spread {spread:.2e}; "
            f"alpha_hat(N=2) {alpha_hat:.6f} >= {values[0]:.6f}"
        )
    except LsqError as exc:
        return CriterionResult(10, name, False, f"{type(exc).__name__}: {exc}")
    return CriterionResult(10, name, passed, detail)


CRITERIA = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
)


def run_selftest(fast: bool = False, stream=None) -> bool:
    """Run all criteria, print one line each, return overall pass/fail."""
    params = FAST if fast else FULL
    all_passed = True
    for criterion in CRITERIA:
        result = criterion(params)
        all_passed = all_passed and result.passed
        if stream is not None:
            status = "PASS" if result.passed else "FAIL"
            stream.write(f"[{status}] criterion {result.index}: {result.name} -- {result.detail}\n")
            stream.flush()
    return all_passed
