"""Canonical heights on CM elliptic curves over Q and small abelian
extensions, with a fully explicit, machine-checkable lower-bound pipeline.

The package computes Neron-Tate heights two independent ways (a certified
doubling-limit evaluation and a sum of Neron local heights), enumerates
residue unit groups of imaginary quadratic orders with their scalar-gap
search, and assembles bound certificates that classify points as
consistent non-torsion or confirmed torsion against the explicit uniform
lower bound.
"""

from .intervals import (
    ComplexBall,
    PrecisionExhausted,
    RealInterval,
    format_midrad,
    refine_to_radius,
)
from .polynomials import IntPoly, RatPoly, resultant, squarefree_part
from .roots import isolate_complex_roots
from .numberfields import (
    AlgebraicNumber,
    FieldError,
    NFElement,
    NumberField,
    PlaceData,
    QQ,
    archimedean_places,
    embed,
    finite_valuation,
    make_field,
    minimal_polynomial,
    nf_arith,
    prime_splitting,
)
from .elliptic import (
    CMDescriptor,
    CurveError,
    CurvePoint,
    EllipticCurve,
    ReductionData,
    SingularModelError,
    cm_curve,
    cm_lookup,
    cm_sample_curves,
    curve_from_a_invariants,
    division_polynomial,
    point_add,
    rational_cm_j_invariants,
    reduction_over_Q,
    scalar_mul,
    torsion_test,
)
from .heights import (
    HeightResult,
    archimedean_floor_check,
    canonical_height_doubling,
    canonical_height_local_sum,
    parallelogram_residual,
    weil_height,
)
from .localheights import (
    DeskScopeError,
    LocalHeightValue,
    archimedean_local_height,
    finite_local_height,
)
from .galois import (
    CMOrder,
    GaloisError,
    HomothetySubgroup,
    ResidueUnitGroup,
    ScalarPair,
    gl2_embedding,
    homothety_subgroup,
    index_bound_audit,
    residue_unit_group,
    scalar_gap_search,
    subgroup_from_generators,
)
from .bounds import (
    BoundCertificate,
    BoundInputs,
    ChainReport,
    certify_point,
    compute_C1,
    construct_Q_check,
    inequality_chain_check,
    intermediate_bound,
    lemma_bound,
    main_bound,
    prime_window,
)
from .sampling import ExperimentConfig, run_sweep, sample_points

__version__ = "0.1.0"
