"""Best-proximity-point toolkit.

Given two point sets A and B in a shared metric backend and a map T
sending A into B, the library locates points x in A whose image is as
close to x as the geometry allows: d(x, Tx) equals the distance between
the sets.  The route is always the same reduction: pair off the
distance-attaining parts of A and B by an isometry, pull T back to a
self-map of A's proximal part, run a fixed-point iteration suited to the
declared map class, and lift the answer back.  A brute-force oracle and a
scenario-file CLI round out the package.
"""
from .errors import (
    BackendUnsupportedError,
    CertificationFailedError,
    HypothesisError,
    ImageOutsideB0Error,
    MetricAxiomError,
    NonFunctionalPairingError,
    NotPPropertyError,
    ProxpointError,
    ResolutionError,
    ScenarioError,
    SchemaError,
)
from .metric import (
    EuclideanSpace,
    FiniteSpace,
    IndexedSet,
    distance,
    distance_stats,
    verify_metric_axioms,
)
from .proximity import (
    ProximityIsometry,
    ProximityStructure,
    PPropertyVerdict,
    build_isometry,
    check_p_property,
    point_set_distance,
    proximal_sets,
    set_distance,
    verify_isometry,
)
from .maps import (
    CertificationReport,
    ComparisonFunction,
    MeirKeelerModulus,
    MultiValuedMap,
    SingleValuedMap,
    certify_map,
    certify_meir_keeler,
    certify_multivalued_contraction,
    certify_nonexpansive,
    certify_weakly_contractive,
    evaluate,
    hausdorff,
)
from .solvers import (
    CONVERGED_RESIDUAL,
    CONVERGED_STEP,
    MAX_ITERS,
    BestProximityResult,
    PreparedSolve,
    SelfMap,
    SolveOutcome,
    StoppingRule,
    best_proximity_solve,
    krasnoselskii_solve,
    multi_start_run,
    nadler_solve,
    picard_solve,
    prepare_solve,
    reduce_map,
    reduce_multi_map,
    seeded_starts,
    strided_starts,
)
from .oracle import (
    AgreementReport,
    OracleResult,
    brute_force_bpp,
    brute_force_fixed_points,
    cross_check,
    unique_minimizer,
)
from .scenario import (
    ScenarioDocument,
    Tolerances,
    load_scenario,
    parse_scenario,
    serialize_scenario,
)

__version__ = "0.1.0"
