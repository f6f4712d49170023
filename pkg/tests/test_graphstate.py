import math

import numpy as np
import pytest

from lsq.davies import gibbs_state
from lsq.errors import DimensionCap, DomainError, InvalidEpsilon
from lsq.graphstate import (
    GraphModel,
    bound_graph_lsi,
    graph_consistency_residual,
    graph_davies,
    graph_davies_direct,
    graph_hamiltonian,
    graph_unitary,
    ground_overlap,
    local_thermal_qubit,
    parse_edge_list,
    prep_time,
    stabilizer,
)
from lsq.operators import PAULI_X, PAULI_Z, trace_norm

PATH2 = GraphModel(n_vertices=2, edges=((0, 1),), beta=1.0)


def test_graph_model_validation():
    with pytest.raises(DomainError):
        GraphModel(n_vertices=2, edges=((0, 0),), beta=1.0)
    with pytest.raises(DomainError):
        GraphModel(n_vertices=2, edges=((0, 2),), beta=1.0)
    with pytest.raises(DomainError):
        GraphModel(n_vertices=2, edges=(), beta=0.0)
    with pytest.raises(DomainError):
        GraphModel(n_vertices=2, edges=(), beta=1.0, g2=-1.0)
    with pytest.raises(DomainError):
        GraphModel(n_vertices=0, edges=(), beta=1.0)


def test_graph_model_normalizes_edges():
    g = GraphModel(n_vertices=3, edges=((1, 0), (0, 1), (2, 1)), beta=1.0)
    assert g.edges == ((0, 1), (1, 2))
    assert g.neighbors(1) == (0, 2)
    assert g.neighbors(0) == (1,)
    assert g.neighbors(2) == (1,)
    assert g.g_minus2 == pytest.approx(math.exp(-2.0), rel=1e-13)


def test_parse_edge_list():
    text = "0 1\n# a comment\n\n1 2  # trailing note\n"
    assert parse_edge_list(text) == ((0, 1), (1, 2))
    with pytest.raises(DomainError):
        parse_edge_list("0 1 2\n")


def test_stabilizer_oracles():
    np.testing.assert_allclose(stabilizer(PATH2, 0), np.kron(PAULI_X, PAULI_Z))
    np.testing.assert_allclose(stabilizer(PATH2, 1), np.kron(PAULI_Z, PAULI_X))
    single = GraphModel(n_vertices=1, edges=(), beta=1.0)
    np.testing.assert_allclose(graph_hamiltonian(single), PAULI_X)


def test_graph_unitary_produces_graph_state():
    u = graph_unitary(PATH2)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    state = u[:, 0]
    np.testing.assert_allclose(
        state, np.array([1.0, 1.0, 1.0, -1.0]) / 2.0, atol=1e-12
    )
    for j in range(2):
        np.testing.assert_allclose(stabilizer(PATH2, j) @ state, state, atol=1e-12)


def test_local_thermal_qubit():
    factor = local_thermal_qubit(1.0, 2.0)
    assert factor.reversible
    assert factor.primitive
    assert factor.gap == pytest.approx(0.5 * 2.0 * (1.0 + math.exp(-2.0)), rel=1e-9)
    weight = math.exp(2.0) / (math.exp(2.0) + 1.0)
    np.testing.assert_allclose(
        factor.fixed_point.entries, np.diag([weight, 1.0 - weight]), atol=1e-12
    )
    with pytest.raises(DomainError):
        local_thermal_qubit(0.0)


def test_direct_and_product_routes_agree():
    assert graph_consistency_residual(PATH2) <= 1e-9
    triangle = GraphModel(
        n_vertices=3, edges=((0, 1), (1, 2), (0, 2)), beta=0.7, g2=1.5
    )
    assert graph_consistency_residual(triangle) <= 1e-9


def test_direct_route_cools_to_graph_state_mixture():
    direct = graph_davies_direct(PATH2)
    u = graph_unitary(PATH2)
    state = u[:, 0]
    overlap = (state.conj() @ direct.fixed_point.entries @ state).real
    assert overlap == pytest.approx(ground_overlap(2, 1.0), rel=1e-10)


def test_bound_graph_lsi_frozen():
    report = bound_graph_lsi(PATH2)
    assert report.value == pytest.approx(0.035199986087219706, rel=1e-13)
    want = (1.0 + math.exp(-2.0)) / (2.0 * math.log(math.exp(2.0) + 1.0) + 28.0)
    assert report.value == pytest.approx(want, rel=1e-13)
    assert report.equation == "Eq.76"
    local_gap = 0.5 * (1.0 + math.exp(-2.0))
    assert report.bracket == (report.value, local_gap)
    # the bound depends only on beta and g2, never on the graph
    hexagon = GraphModel(
        n_vertices=6,
        edges=tuple((j, (j + 1) % 6) for j in range(6)),
        beta=1.0,
    )
    assert bound_graph_lsi(hexagon).value == report.value


def test_ground_overlap_matches_thermal_weight():
    assert ground_overlap(3, 2.0) == pytest.approx(0.9470060627537772, rel=1e-13)
    product = graph_davies(GraphModel(n_vertices=2, edges=((0, 1),), beta=2.0))
    assert product.sigma.entries[0, 0].real == pytest.approx(
        ground_overlap(2, 2.0), rel=1e-12
    )


def test_prep_time_frozen():
    report = prep_time(4, 0.1)
    assert report.beta_required == pytest.approx(2.5375869076169133, rel=1e-13)
    assert report.t_epsilon == pytest.approx(49.20516451194109, rel=1e-13)
    log_term = math.log(16.0 / 0.1)
    assert report.beta_required == pytest.approx(0.5 * log_term, rel=1e-13)
    want_t = log_term * math.log(32.0 * log_term / 0.01)
    assert report.t_epsilon == pytest.approx(want_t, rel=1e-13)
    # doubling g2 halves the run time but leaves beta alone
    fast = prep_time(4, 0.1, g2=2.0)
    assert fast.t_epsilon == pytest.approx(report.t_epsilon / 2.0, rel=1e-13)
    assert fast.beta_required == report.beta_required


def test_prep_time_validation():
    with pytest.raises(InvalidEpsilon):
        prep_time(2, 0.0)
    with pytest.raises(InvalidEpsilon):
        prep_time(2, 1.0)
    with pytest.raises(DomainError):
        prep_time(0, 0.1)
    with pytest.raises(DomainError):
        prep_time(2, 0.1, g2=0.0)


def test_prep_beta_reaches_half_epsilon():
    eps = 0.2
    report = prep_time(2, eps)
    hot = GraphModel(n_vertices=2, edges=((0, 1),), beta=report.beta_required)
    sigma = gibbs_state(-graph_hamiltonian(hot), report.beta_required)
    state = graph_unitary(hot)[:, 0]
    projector = np.outer(state, state.conj())
    assert 0.5 * trace_norm(sigma - projector) <= eps / 2.0


def test_vertex_cap():
    big = GraphModel(n_vertices=7, edges=(), beta=1.0)
    with pytest.raises(DimensionCap):
        stabilizer(big, 0)
    with pytest.raises(DimensionCap):
        graph_hamiltonian(big)
    with pytest.raises(DimensionCap):
        graph_davies(big)
