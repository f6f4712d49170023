import math

import numpy as np
import pytest

from lsq.errors import DimensionCap, NotPrimitive, NotReversible
from lsq.lindblad import (
    LindbladSpec,
    analyze,
    build_lindblad,
    depolarizing_generator,
)
from lsq.operators import (
    PAULI_X,
    FullRankState,
    Superoperator,
    kron_all,
)
from lsq.product import (
    bound_product_lsi,
    build_product,
    excitation_blocks,
    factor_eigenbasis,
    lift_superoperator,
    product_block_norm_constant,
)
from lsq.weighted import WeightedContext, weighted_inner

QUBIT_GAP = 0.5676676416183064


def test_lift_acts_on_one_site_only(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    local = Superoperator.from_left_right(a, b)
    f = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))

    lifted0 = lift_superoperator(local, 0, (2, 3))
    got = lifted0.apply(np.kron(f, g))
    np.testing.assert_allclose(got, np.kron(a @ f @ b, g), atol=1e-12)

    local3 = Superoperator.from_left_right(
        rng.normal(size=(3, 3)) + 0j, rng.normal(size=(3, 3)) + 0j
    )
    lifted1 = lift_superoperator(local3, 1, (2, 3))
    want = np.kron(f, local3.apply(g))
    np.testing.assert_allclose(lifted1.apply(np.kron(f, g)), want, atol=1e-12)


def test_lift_validates_site_and_dimension():
    local = Superoperator.identity(2)
    with pytest.raises(IndexError):
        lift_superoperator(local, 2, (2, 2))
    with pytest.raises(DimensionCap):
        lift_superoperator(local, 1, (2, 3))


def test_build_product_three_qubits(qubit_davies, rng):
    product = build_product([qubit_davies] * 3)
    assert product.n_sites == 3
    assert product.dims == (2, 2, 2)
    assert product.analysis.reversible
    assert product.analysis.primitive
    assert product.gap == pytest.approx(QUBIT_GAP, rel=1e-9)
    sigma1 = qubit_davies.fixed_point.entries
    np.testing.assert_allclose(
        product.sigma.entries, kron_all([sigma1] * 3), atol=1e-12
    )
    # the register generator is the sum of the three lifted local actions
    fs = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3)]
    local = [qubit_davies.generator.apply(f) for f in fs]
    want = (
        kron_all([local[0], fs[1], fs[2]])
        + kron_all([fs[0], local[1], fs[2]])
        + kron_all([fs[0], fs[1], local[2]])
    )
    got = product.generator.apply(kron_all(fs))
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_build_product_caps_register_size(qubit_davies):
    with pytest.raises(DimensionCap):
        build_product([qubit_davies] * 7)
    with pytest.raises(DimensionCap):
        build_product([])


def test_build_product_rejects_nonprimitive_factor():
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    damping = build_lindblad(LindbladSpec(np.zeros((2, 2)), (lower,)))
    factor = analyze(damping, require_primitive=False)
    assert not factor.primitive
    with pytest.raises(NotPrimitive):
        build_product([factor])


def test_build_product_rejects_irreversible_factor():
    sigma = FullRankState.from_matrix(np.eye(2) / 2.0)
    driven = depolarizing_generator(sigma) + build_lindblad(LindbladSpec(PAULI_X))
    factor = analyze(driven)
    assert factor.primitive
    assert not factor.reversible
    with pytest.raises(NotReversible):
        build_product([factor])


def test_factor_eigenbasis_structure(qubit_davies):
    basis = factor_eigenbasis(qubit_davies)
    assert len(basis.operators) == 4
    np.testing.assert_allclose(basis.operators[0], np.eye(2), atol=1e-12)
    assert basis.eigenvalues[0] == 0.0
    assert list(basis.eigenvalues) == sorted(basis.eigenvalues, reverse=True)
    assert basis.eigenvalues[1] == pytest.approx(-QUBIT_GAP, rel=1e-9)

    ctx = WeightedContext(qubit_davies.fixed_point)
    for i, phi_i in enumerate(basis.operators):
        for j, phi_j in enumerate(basis.operators):
            want = 1.0 if i == j else 0.0
            assert weighted_inner(ctx, phi_i, phi_j) == pytest.approx(
                want, abs=1e-10
            )
    for phi, rate in zip(basis.operators, basis.eigenvalues):
        residual = qubit_davies.generator.apply(phi) - rate * phi
        assert np.linalg.norm(residual) <= 1e-9


def test_excitation_blocks_two_qubits(qubit_davies):
    product = build_product([qubit_davies] * 2)
    blocks = excitation_blocks(product)
    assert [b.excitations for b in blocks] == [0, 1, 2]
    assert [b.size for b in blocks] == [1, 6, 9]
    assert sum(b.size for b in blocks) == 16

    zero = blocks[0].elements[0]
    np.testing.assert_allclose(zero.operator, np.eye(4), atol=1e-12)
    assert zero.eigenvalue == 0.0

    rates = factor_eigenbasis(qubit_davies).eigenvalues
    for element in blocks[2].elements:
        i, j = element.indices
        assert element.eigenvalue == pytest.approx(rates[i] + rates[j], rel=1e-12)
    for block in blocks[1:]:
        worst = max(e.eigenvalue for e in block.elements)
        assert worst <= -block.excitations * product.gap + 1e-9


def test_product_block_norm_constant_frozen():
    value = product_block_norm_constant(2, 3.0)
    assert value == pytest.approx(5.2642960518099695, rel=1e-13)
    assert value == pytest.approx(4.0 * 3.0**0.25, rel=1e-13)


def test_bound_product_lsi_frozen():
    report = bound_product_lsi(QUBIT_GAP, 2, 3.0)
    assert report.value == pytest.approx(0.03817227950869115, rel=1e-13)
    assert report.value == pytest.approx(QUBIT_GAP / (math.log(48.0) + 11.0), rel=1e-13)
    assert report.name == "product_lsi"
    assert report.equation == "Eq.38"
    assert report.bracket == (report.value, QUBIT_GAP)
