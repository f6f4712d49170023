"""Log-Sobolev and hypercontractivity toolkit for finite quantum semigroups.

Construct reversible Lindblad generators (generic, thermal, graph-state,
fermionic), measure state-weighted L_p functionals, and evaluate or verify
mixing-time and log-Sobolev bounds at dense-matrix scale.
"""

from .errors import (
    BoundViolated,
    ConfigError,
    ConvergenceWarning,
    DegeneracyWarning,
    DegenerateWitness,
    DimensionCap,
    DimensionMismatch,
    DomainError,
    EigenResidualExceeded,
    GibbsNotStationary,
    InvalidEpsilon,
    InvalidExponent,
    LsqError,
    NegativeInput,
    NegativeRate,
    NonHermitianInput,
    NonLinearAction,
    NotPrimitive,
    NotReversible,
    NotUnital,
    SeriesDiverges,
    UnknownColumn,
)
from .operators import (
    FullRankState,
    HermitianOperator,
    SpectralDecomposition,
    Superoperator,
    dagger,
    embed,
    frobenius,
    hermiticity_defect,
    kron_all,
    matrix_function,
    random_hermitian,
    random_psd,
    require_hermitian,
    spectral_decompose,
    superop_from_action,
    trace_norm,
    unvec,
    vec,
)
from .weighted import (
    WeightedContext,
    dirichlet_form,
    ent_functional,
    lp_norm,
    norm_2_to_q,
    q_form,
    weighted_inner,
)
from .lindblad import (
    LindbladSpec,
    SemigroupAnalysis,
    analyze,
    build_lindblad,
    check_detailed_balance,
    decay_curve,
    depolarizing_generator,
    evolve,
    kms_symmetrized,
    lindblad_from_ops,
    mixing_bound_gap,
    mixing_bound_lsi,
)
from .davies import (
    BathSpectralDensity,
    BohrDecomposition,
    DaviesModel,
    KmsReport,
    bohr_decompose,
    build_davies,
    check_kms_relations,
    commutant_dimension,
    flat_bath,
    gibbs_state,
)
from .lsi import (
    BoundReport,
    LsiEstimate,
    block_norm_bound,
    bound_block_lsi,
    bound_general,
    bound_interpolation,
    estimate_lsi,
    verify_hypercontractivity,
)
from .product import (
    ExcitationBlock,
    FactorBasis,
    ProductLiouvillian,
    bound_product_lsi,
    build_product,
    excitation_blocks,
    factor_eigenbasis,
    lift_superoperator,
    product_block_norm_constant,
)
from .graphstate import (
    GraphModel,
    PrepReport,
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
from .fermion import (
    CanonicalFermionGenerator,
    FermionModel,
    ModeOperatorBasis,
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

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
