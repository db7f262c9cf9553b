"""Dynamics of the solvable Baumslag-Solitar groups BS(1,n) on the circle and the 2-torus.

The package builds pairs of homeomorphism lifts (f, h) satisfying
h o f o h^-1 = f^n, estimates rotation numbers and rotation sets,
locates invariant circles and minimal sets, classifies the linear data
of torus actions exactly over the integers, and ships a catalog of
worked actions plus a numbered acceptance battery reproducing their
headline dynamics.
"""

from .gl2z import (
    IntMatrix2,
    AffineMapQ2,
    finite_order,
    conjugate_in_gl2z,
    bs_linear_compatible,
    affine_fixed_point,
)
from .circle import (
    CircleLift,
    RotationLift,
    ChartAffineLift,
    MobiusLift,
    FunctionLift,
    PiecewiseLift,
    GluedLift,
    DenjoyLift,
    RotationNumberEstimate,
    compose,
    rotation_number,
    denjoy_lift,
    chart_from_real,
    chart_to_real,
    circle_dist,
    wrap,
    parse_k_spec,
    load_lift_spec,
)
from .torus import (
    TorusLift,
    ProductTorusLift,
    LinearTorusLift,
    FunctionTorusLift,
    RotationVectorEstimate,
    RotationSetEstimate,
    compose2,
    rotation_vector,
    rotation_set,
    conjugate_rotation_set_check,
    bs_rotation_constraint,
    torus_dist,
    wrap2,
)
from .bsgroup import (
    Word,
    BSAction,
    FiniteOrbit,
    make_action,
    normalize,
    evaluate,
    relation_report,
    relation_residual,
    finite_bs_orbit,
)
from .catalog import (
    CATALOG,
    build_action,
    faithfulness_evidence,
    standard_line,
    standard_torus,
    product_action,
    periodic_circle_example,
    periodic_torus_example,
    perturbed_torus,
    morse_smale_example,
    nonfaithful_circle,
)
from .estimators import (
    CellSet,
    MinimalSetEstimate,
    DifferentialReport,
    fixed_cells,
    alpha_limit,
    bs_minimal_set,
    birkhoff_displacement,
    differential_at,
)
from .experiments import (
    InvariantCircleEstimate,
    TrichotomyReport,
    RotationPersistenceReport,
    GraphFoldError,
    NonConvergentError,
    find_invariant_circle,
    restricted_circle_map,
    classify_perturbed,
    persistent_fixed_point,
    rotation_set_persistence,
    near_identity_diffeo,
    conjugated_action,
)
from .acceptance import run_all

__version__ = "0.1.0"

__all__ = [
    "IntMatrix2", "AffineMapQ2", "finite_order", "conjugate_in_gl2z",
    "bs_linear_compatible", "affine_fixed_point",
    "CircleLift", "RotationLift", "ChartAffineLift", "MobiusLift",
    "FunctionLift", "PiecewiseLift", "GluedLift", "DenjoyLift",
    "RotationNumberEstimate", "compose", "rotation_number", "denjoy_lift",
    "chart_from_real", "chart_to_real", "circle_dist", "wrap",
    "parse_k_spec", "load_lift_spec",
    "TorusLift", "ProductTorusLift", "LinearTorusLift", "FunctionTorusLift",
    "RotationVectorEstimate", "RotationSetEstimate", "compose2",
    "rotation_vector", "rotation_set", "conjugate_rotation_set_check",
    "bs_rotation_constraint", "torus_dist", "wrap2",
    "Word", "BSAction", "FiniteOrbit", "make_action", "normalize",
    "evaluate", "relation_report", "relation_residual", "finite_bs_orbit",
    "CATALOG", "build_action", "faithfulness_evidence",
    "standard_line", "standard_torus", "product_action",
    "periodic_circle_example", "periodic_torus_example", "perturbed_torus",
    "morse_smale_example", "nonfaithful_circle",
    "CellSet", "MinimalSetEstimate", "DifferentialReport", "fixed_cells",
    "alpha_limit", "bs_minimal_set", "birkhoff_displacement",
    "differential_at",
    "InvariantCircleEstimate", "TrichotomyReport",
    "RotationPersistenceReport", "GraphFoldError", "NonConvergentError",
    "find_invariant_circle", "restricted_circle_map", "classify_perturbed",
    "persistent_fixed_point", "rotation_set_persistence",
    "near_identity_diffeo", "conjugated_action",
    "run_all",
]
