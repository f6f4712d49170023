import math

import numpy as np
import pytest

from lsq.davies import BathSpectralDensity, DaviesModel, build_davies, flat_bath
from lsq.errors import DimensionCap, DimensionMismatch, DomainError
from lsq.fermion import (
    FermionModel,
    anticommutation_defect,
    bound_fermion_lsi,
    canonicalize,
    coupling_operators,
    fermion_block_constant,
    fermion_block_norm_check,
    fermion_hamiltonian,
    fermion_q_bound_check,
    jordan_wigner,
    majorana_decomposition_check,
    mode_basis,
    verify_block_structure,
)
from lsq.operators import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, frobenius
from lsq.weighted import WeightedContext, weighted_inner

SINGLE = FermionModel(frequencies=(1.5,), couplings=[[0.8]], beta=0.7)
PAIR = FermionModel(frequencies=(1.0, 2.0), couplings=[[0.6, 0.3j]], beta=0.5)
CLUSTER = FermionModel(
    frequencies=(1.0, 1.0), couplings=[[0.5, 0.5], [0.2j, -0.1]], beta=1.0
)
UNIFORM = FermionModel(
    frequencies=(2.0, 2.0), couplings=[[1.0, 0.0], [0.0, 1.0]], beta=0.4
)


def test_jordan_wigner_mode_major_order():
    jw = jordan_wigner(2)
    np.testing.assert_allclose(jw[0], np.kron(PAULI_X, PAULI_I))
    np.testing.assert_allclose(jw[1], np.kron(PAULI_Y, PAULI_I))
    np.testing.assert_allclose(jw[2], np.kron(PAULI_Z, PAULI_X))
    np.testing.assert_allclose(jw[3], np.kron(PAULI_Z, PAULI_Y))
    for n in (1, 2, 3):
        assert anticommutation_defect(jordan_wigner(n)) <= 1e-12
    with pytest.raises(DomainError):
        jordan_wigner(0)
    with pytest.raises(DimensionCap):
        jordan_wigner(4)


def test_fermion_hamiltonian_spectrum():
    jw = jordan_wigner(1)
    d = (jw[0] + 1j * jw[1]) / 2.0
    np.testing.assert_allclose(d, [[0.0, 1.0], [0.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(d.conj().T @ d, np.diag([0.0, 1.0]), atol=1e-15)
    h = fermion_hamiltonian(
        FermionModel(frequencies=(1.0, 2.0), couplings=[[1.0, 1.0]], beta=1.0)
    )
    np.testing.assert_allclose(
        np.sort(np.linalg.eigvalsh(h)), [0.0, 1.0, 2.0, 3.0], atol=1e-12
    )


def test_model_validation():
    with pytest.raises(DomainError):
        FermionModel(frequencies=(-1.0,), couplings=[[1.0]], beta=1.0)
    with pytest.raises(DimensionMismatch):
        FermionModel(frequencies=(1.0, 2.0), couplings=[[1.0]], beta=1.0)
    bath = SINGLE.resolved_bath()
    assert bath.rate(0, 1.5) == 1.0
    assert bath.rate(0, -1.5) == pytest.approx(math.exp(-0.7 * 1.5), rel=1e-13)


def test_coupling_operators_are_hermitian():
    for op in coupling_operators(PAIR):
        assert frobenius(op - op.conj().T) <= 1e-13


def test_single_mode_canonical_rates():
    canonical = canonicalize(SINGLE)
    # chi = G(1.5) |0.8|^2 with the flat bath
    assert canonical.rates == (pytest.approx(0.64, rel=1e-13),)
    lam = canonical.rates[0]
    want_gap = lam * (1.0 + math.exp(-0.7 * 1.5)) / 2.0
    assert canonical.mode_gaps[0] == pytest.approx(want_gap, rel=1e-13)
    assert canonical.gap_lower == pytest.approx(want_gap, rel=1e-13)
    assert canonical.analysis.gap == pytest.approx(want_gap, rel=1e-9)
    assert canonical.primitive
    z = 1.0 + math.exp(-0.7 * 1.5)
    np.testing.assert_allclose(
        canonical.sigma.entries,
        np.diag([1.0 / z, math.exp(-0.7 * 1.5) / z]),
        atol=1e-12,
    )


@pytest.mark.parametrize("model", [SINGLE, PAIR, CLUSTER], ids=["single", "pair", "cluster"])
def test_canonical_matches_direct_thermal_construction(model):
    canonical = canonicalize(model)
    direct = build_davies(
        DaviesModel(
            hamiltonian=fermion_hamiltonian(model),
            couplings=tuple(coupling_operators(model)),
            bath=flat_bath(model.beta),
        )
    )
    assert frobenius(canonical.generator.matrix - direct.generator.matrix) <= 1e-12
    assert frobenius(canonical.sigma.entries - direct.fixed_point.entries) <= 1e-12


def test_zero_mode_pairs_descending_rates():
    model = FermionModel(
        frequencies=(0.0,),
        couplings=[[math.sqrt(0.35)], [1j * math.sqrt(0.15)]],
        beta=1.0,
    )
    canonical = canonicalize(model)
    assert canonical.rates == (pytest.approx(0.3, rel=1e-13),)
    assert canonical.rates_prime == (pytest.approx(0.7, rel=1e-13),)
    assert canonical.primitive
    assert canonical.analysis.gap == pytest.approx(0.3, rel=1e-9)
    # the rotated Majoranas decay at their own rates
    w1, w2 = canonical.majoranas
    assert frobenius(canonical.generator.apply(w1) + 0.3 * w1) <= 1e-12
    assert frobenius(canonical.generator.apply(w2) + 0.7 * w2) <= 1e-12
    assert canonical.mode_decay((1, 0)) == pytest.approx(-0.3, rel=1e-13)
    assert canonical.mode_decay((0, 1)) == pytest.approx(-0.7, rel=1e-13)
    assert canonical.mode_decay((1, 1)) == pytest.approx(-1.0, rel=1e-13)
    np.testing.assert_allclose(canonical.sigma.entries, np.eye(2) / 2.0, atol=1e-12)


def test_zero_mode_single_channel_is_not_primitive():
    model = FermionModel(frequencies=(0.0,), couplings=[[1.0]], beta=1.0)
    canonical = canonicalize(model)
    assert canonical.rates == (0.0,)
    assert canonical.rates_prime == (pytest.approx(2.0, rel=1e-13),)
    assert not canonical.primitive


def test_gibbs_product_form_matches_sigma():
    canonical = canonicalize(PAIR)
    assert frobenius(canonical.gibbs_product_form() - canonical.sigma.entries) <= 1e-12


def test_majorana_decomposition_identity():
    assert majorana_decomposition_check(canonicalize(PAIR)) <= 1e-12
    assert majorana_decomposition_check(canonicalize(SINGLE)) <= 1e-12


def test_mode_basis_single_mode():
    canonical = canonicalize(SINGLE)
    basis = mode_basis(canonical)
    assert basis.strings == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert basis.block_strings(1) == [(0, 1), (1, 0)]
    np.testing.assert_allclose(basis.operator((0, 0)), np.eye(2), atol=1e-14)
    # odd-weight strings carry the w1 w2 parity prefix on every mode factor
    scale = math.sqrt(math.cosh(0.5 * 0.7 * 1.5))
    w1, w2 = canonical.majoranas
    np.testing.assert_allclose(
        basis.operator((1, 0)), w1 @ w2 @ (scale * w1), atol=1e-13
    )
    np.testing.assert_allclose(
        basis.operator((0, 1)), w1 @ w2 @ (scale * w2), atol=1e-13
    )
    # weighted-orthonormal, and the occupation-difference element is anti-Hermitian
    ctx = WeightedContext(canonical.sigma)
    for i, a in enumerate(basis.operators):
        for j, b in enumerate(basis.operators):
            want = 1.0 if i == j else 0.0
            assert weighted_inner(ctx, a, b) == pytest.approx(want, abs=1e-12)
    op11 = basis.operator((1, 1))
    assert np.abs(op11 + op11.conj().T).max() <= 1e-13


def test_block_structure_report():
    canonical = canonicalize(PAIR)
    report = verify_block_structure(canonical)
    assert len(report) == 16
    mu0, res0 = report[(0, 0, 0, 0)]
    assert mu0 == 0.0 and res0 <= 1e-10
    gaps = canonical.mode_gaps
    mu, _ = report[(1, 1, 0, 0)]
    assert mu == pytest.approx(-2.0 * gaps[0], rel=1e-12)
    mu, _ = report[(1, 0, 0, 1)]
    assert mu == pytest.approx(-gaps[0] - gaps[1], rel=1e-12)
    assert max(res for _, res in report.values()) <= 1e-10


def test_quartic_support_rule_single_mode():
    canonical = canonicalize(SINGLE)
    basis = mode_basis(canonical)
    report = fermion_q_bound_check(canonical, 1, basis)
    assert report.tuples_checked == 16
    assert report.off_support_max <= 1e-12
    assert report.max_magnitude <= report.ceiling * (1.0 + 1e-10)
    assert report.ceiling == pytest.approx(math.exp(0.7 * 1.5), rel=1e-13)
    # the doubly-excited element's quartic power has a closed form
    pair_report = fermion_q_bound_check(canonical, 2, basis)
    x = 0.5 * 0.7 * 1.5
    assert pair_report.tuples_checked == 1
    assert pair_report.max_magnitude == pytest.approx(
        math.cosh(3.0 * x) / math.cosh(x), rel=1e-12
    )


def test_quartic_and_block_norms_uniform_pair():
    canonical = canonicalize(UNIFORM)
    basis = mode_basis(canonical)
    report = fermion_q_bound_check(canonical, 1, basis)
    assert report.tuples_checked == 4**4
    assert report.off_support_max <= 1e-12
    assert report.max_magnitude <= report.ceiling * (1.0 + 1e-10)
    worst = fermion_block_norm_check(canonical, 1, samples=200, basis=basis)
    assert 0.0 < worst <= 2.0**8 * math.exp(0.4 * 2.0) * (1.0 + 1e-10)


def test_fermion_block_constant_frozen():
    value = fermion_block_constant(2.0, 1.0)
    assert value == pytest.approx(6.594885082800513, rel=1e-13)
    assert value == pytest.approx(4.0 * math.exp(0.5), rel=1e-13)


def test_bound_fermion_lsi():
    report = bound_fermion_lsi(0.5, 1.0, 2.0)
    assert report.value == 0.03125
    assert report.name == "fermion_lsi"
    assert report.equation == "Eq.137"
    assert report.bracket == (0.03125, 0.5)
    with pytest.raises(DomainError):
        bound_fermion_lsi(0.5, -1.0, 2.0)
    with pytest.raises(DomainError):
        bound_fermion_lsi(0.0, 1.0, 2.0)


def test_negative_bath_rate_rejected():
    bad = BathSpectralDensity.shared(1.0, lambda omega: -1.0)
    model = FermionModel(frequencies=(1.0,), couplings=[[1.0]], beta=1.0, bath=bad)
    with pytest.raises(DomainError):
        canonicalize(model)
