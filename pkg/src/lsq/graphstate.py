"""Thermal preparation of graph states.

A graph on N vertices fixes the stabilizer Hamiltonian H = sum_j X_j prod Z_k
(product over neighbors of j) whose top eigenspace is spanned by the graph
state.  The basis change U = (prod CZ_edges) (H_gate tensor N) maps each
stabilizer to a single-site Z, so cooling toward the graph state is, in the
rotated frame, a product of independent single-qubit amplitude-damping
channels.  Both routes to the generator live here: the product construction in
the rotated frame, and the thermal construction straight from the stabilizer
Hamiltonian with single-site Z couplings; they must agree under conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .davies import DaviesModel, build_davies, flat_bath
from .errors import (
    DimensionCap,
    DomainError,
    EigenResidualExceeded,
    InvalidEpsilon,
)
from .lindblad import LindbladSpec, SemigroupAnalysis, analyze, build_lindblad
from .lsi import BoundReport
from .operators import (
    FullRankState,
    PAULI_I,
    PAULI_X,
    PAULI_Z,
    embed,
    frobenius,
    kron_all,
)
from .product import ProductLiouvillian, build_product

MAX_GRAPH_VERTICES = 6
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


@dataclass(frozen=True)
class GraphModel:
    """Simple undirected graph with an inverse temperature and a base rate."""

    n_vertices: int
    edges: tuple
    beta: float
    g2: float = 1.0

    def __post_init__(self):
        if self.n_vertices < 1:
            raise DomainError("need at least one vertex")
        if self.beta <= 0.0:
            raise DomainError("inverse temperature must be positive")
        if self.g2 <= 0.0:
            raise DomainError("base rate g2 must be positive")
        seen = set()
        cleaned = []
        for edge in self.edges:
            u, v = int(edge[0]), int(edge[1])
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise DomainError(f"edge ({u}, {v}) outside vertex range")
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            cleaned.append(key)
        object.__setattr__(self, "edges", tuple(sorted(cleaned)))

    def neighbors(self, j: int) -> tuple:
        out = []
        for u, v in self.edges:
            if u == j:
                out.append(v)
            elif v == j:
                out.append(u)
        return tuple(sorted(out))

    @property
    def g_minus2(self) -> float:
        return self.g2 * math.exp(-2.0 * self.beta)


def parse_edge_list(text: str) -> tuple:
    """One 'u v' pair per line; blank lines and #-comments are skipped."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 2:
            raise DomainError(f"edge list line {lineno}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return tuple(edges)


def _check_vertex_cap(n: int) -> None:
    if n > MAX_GRAPH_VERTICES:
        raise DimensionCap(f"{n} vertices exceed the dense cap {MAX_GRAPH_VERTICES}")


def stabilizer(graph: GraphModel, j: int) -> np.ndarray:
    """X on vertex j, Z on each neighbor."""
    _check_vertex_cap(graph.n_vertices)
    factors = [PAULI_I] * graph.n_vertices
    factors[j] = PAULI_X
    for k in graph.neighbors(j):
        factors[k] = PAULI_Z
    return kron_all(factors)


def graph_hamiltonian(graph: GraphModel) -> np.ndarray:
    """Sum of the N commuting stabilizers; the graph state is its top state."""
    _check_vertex_cap(graph.n_vertices)
    total = np.zeros((2**graph.n_vertices,) * 2, dtype=complex)
    for j in range(graph.n_vertices):
        total += stabilizer(graph, j)
    return total


def graph_unitary(graph: GraphModel) -> np.ndarray:
    """U = (prod CZ over edges) (Hadamard on every site); U+ S_j U = Z_j."""
    n = graph.n_vertices
    _check_vertex_cap(n)
    dim = 2**n
    phases = np.ones(dim)
    for u, v in graph.edges:
        for idx in range(dim):
            bu = (idx >> (n - 1 - u)) & 1
            bv = (idx >> (n - 1 - v)) & 1
            if bu and bv:
                phases[idx] = -phases[idx]
    u_mat = phases[:, None] * kron_all([HADAMARD] * n)
    for j in range(n):
        target = embed(PAULI_Z, j, [2] * n)
        defect = frobenius(u_mat.conj().T @ stabilizer(graph, j) @ u_mat - target)
        if defect > 1e-12:
            raise EigenResidualExceeded(
                f"stabilizer {j} conjugation defect {defect:.3e}"
            )
    return u_mat


def local_thermal_qubit(beta: float, g2: float = 1.0) -> SemigroupAnalysis:
    """Single-qubit cooling factor: decay 1 -> 0 at rate g2, excitation at g2 e^(-2 beta)."""
    if beta <= 0.0 or g2 <= 0.0:
        raise DomainError("need beta > 0 and g2 > 0")
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    ops = (
        math.sqrt(g2) * lower,
        math.sqrt(g2 * math.exp(-2.0 * beta)) * lower.conj().T,
    )
    generator = build_lindblad(LindbladSpec(np.zeros((2, 2)), ops))
    weight = math.exp(2.0 * beta) / (math.exp(2.0 * beta) + 1.0)
    sigma = FullRankState.from_matrix(np.diag([weight, 1.0 - weight]))
    return analyze(generator, sigma=sigma)


def graph_davies(graph: GraphModel) -> ProductLiouvillian:
    """The rotated-frame generator: one thermal qubit factor per vertex."""
    factor = local_thermal_qubit(graph.beta, graph.g2)
    return build_product([factor] * graph.n_vertices)


def graph_davies_direct(graph: GraphModel) -> SemigroupAnalysis:
    """Thermal generator built from the stabilizer Hamiltonian with Z couplings.

    The cooling target is the graph state, the top eigenstate of the stabilizer
    sum, so the bath sees the negated Hamiltonian.
    """
    n = graph.n_vertices
    h = -graph_hamiltonian(graph)
    couplings = tuple(embed(PAULI_Z, j, [2] * n) for j in range(n))
    model = DaviesModel(
        hamiltonian=h,
        couplings=couplings,
        bath=flat_bath(graph.beta, graph.g2),
    )
    return build_davies(model)


def graph_consistency_residual(graph: GraphModel) -> float:
    """Frobenius gap between the conjugated direct generator and the product one.

    With W the superoperator of f -> U+ f U, the rotated-frame generator must
    equal W L_direct W^(-1) exactly; returns the Frobenius norm of the
    difference.
    """
    direct = graph_davies_direct(graph)
    product = graph_davies(graph)
    u_mat = graph_unitary(graph)
    w = np.kron(u_mat.T, u_mat.conj().T)
    w_inv = np.kron(u_mat.conj(), u_mat)
    rotated = w @ direct.generator.matrix @ w_inv
    return frobenius(rotated - product.generator.matrix)


def ground_overlap(n_vertices: int, beta: float) -> float:
    """Thermal-state weight on the target: (1 - 1/(e^(2 beta) + 1))^N."""
    return (1.0 - 1.0 / (math.exp(2.0 * beta) + 1.0)) ** n_vertices


def bound_graph_lsi(graph: GraphModel) -> BoundReport:
    """(g2 + g-2) / (2 log(e^(2 beta) + 1) + 28), independent of the graph."""
    g2 = graph.g2
    gm2 = graph.g_minus2
    value = (g2 + gm2) / (2.0 * math.log(math.exp(2.0 * graph.beta) + 1.0) + 28.0)
    local_gap = 0.5 * (g2 + gm2)
    return BoundReport(
        name="graph_lsi",
        inputs={"beta": graph.beta, "g2": g2, "g_minus2": gm2},
        value=value,
        bracket=(value, local_gap),
        equation="Eq.76",
    )


@dataclass(frozen=True)
class PrepReport:
    """Inverse temperature and run time that guarantee epsilon-close preparation."""

    n_vertices: int
    epsilon: float
    beta_required: float
    t_epsilon: float


def prep_time(n_vertices: int, epsilon: float, g2: float = 1.0) -> PrepReport:
    """Sufficient (beta, t) for trace distance epsilon to the graph state.

    beta = log(4 N / eps) / 2 makes the thermal state eps/2-close to the
    target, and t = log(4 N / eps) log(8 N log(4 N / eps) / eps^2) / g2 lets
    the semigroup reach eps/2 of the thermal state from any start.
    """
    if not (0.0 < epsilon < 1.0):
        raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
    if n_vertices < 1:
        raise DomainError("need at least one vertex")
    if g2 <= 0.0:
        raise DomainError("base rate g2 must be positive")
    log_term = math.log(4.0 * n_vertices / epsilon)
    beta = 0.5 * log_term
    t_eps = log_term * math.log(8.0 * n_vertices * log_term / epsilon**2) / g2
    return PrepReport(
        n_vertices=n_vertices,
        epsilon=epsilon,
        beta_required=beta,
        t_epsilon=t_eps,
    )
