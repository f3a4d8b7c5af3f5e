"""Chern numbers of smooth projective varieties via homotopy continuation.

Given homogeneous generators of an ideal whose zero set is a smooth connected
variety Z (possibly together with finitely many extra points), the package
tracks total-degree homotopies for square systems drawn from the ideal,
measures the multiplicity of the residual zero-scheme, and solves the
resulting unimodular integer system for the degrees of the Chern classes
of Z.
"""

from .errors import (
    AssumptionViolationError,
    ChernumError,
    InputError,
    NumericalError,
    TrackingError,
)
from .polysys import (
    Polynomial,
    PolySystem,
    evaluate,
    jacobian,
    linear_form,
    monomials_of_degree,
    normalize_point,
    parse_system,
    projective_distance,
    random_dense_form,
    random_ideal_element,
    relative_residuals,
    serialize_system,
    unit_coefficients,
    variable,
)
from .tracker import (
    AffinePatch,
    HomotopyConfig,
    PathResult,
    PathStatus,
    RESOLVED_STATUSES,
    solve_square_system,
    total_degree_start,
    track_path,
)
from .zerodim import (
    ClassifyConfig,
    EndpointCluster,
    ISOLATED,
    JUNK,
    ON_Z,
    UNRESOLVED,
    classify_cluster,
    cluster_endpoints,
    macaulay_nullity,
    total_residual_multiplicity,
)
from .chern import (
    ChernResult,
    PipelineConfig,
    Relation,
    SquareRunAnalysis,
    algorithm_schedule,
    analyze_square_system,
    check_unimodular,
    chern_numbers,
    chern_numbers_with_analyses,
    coefficient_vector,
    det_integer,
    dimension_of_z,
    draw_square_system,
    elementary_symmetric,
    equivalence_of_z,
    linear_relation,
    linear_relation_with_analysis,
    solve_integer_system,
)
from . import corpus

__version__ = "0.1.0"
