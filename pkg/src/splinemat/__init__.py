"""Matrix-form B-spline decomposition, cubic approximation, and batch
point projection/inversion on a deterministic CPU batch engine."""

__version__ = "0.1.0"

from ._accel import backend_name
from .core import (
    BezierSegment,
    BSplineCurve,
    CountMismatch,
    CubicApproxSegment,
    DegenerateSpan,
    DegreeOutOfRange,
    DepthExceeded,
    DomainError,
    EmptyDomain,
    GeometryError,
    KnotVector,
    NonMonotoneKnots,
    NoRoot,
    NotClamped,
    PointNotOnCurve,
    Poly,
    ProjectionResult,
    eval_bezier,
    global_to_local,
    local_to_global,
    validate_curve,
)
from .decompose import batched_decompose, decompose_to_bezier
from .distance import DistancePolys, distance_polys, monotonic_split, solve_quartic
from .oracle import (
    decompose_by_knot_insertion,
    eval_de_boor,
    eval_de_boor_many,
    oracle_project,
    oracle_project_batch,
)
from .project import (
    CandidateSet,
    ClipResult,
    NonParametricBezier,
    PieceCandidate,
    PreparedCurve,
    WorkPlan,
    clip,
    clip_root,
    eliminate,
    hull_x_intersections,
    invert_point,
    plan_work,
    prepare_curve,
    project_points,
    project_prepared,
    rebase,
    rebase_batch,
    reduce_min,
)
from .reduce_approx import (
    ReductionSolution,
    SubdivisionLevel,
    approximate_error_controlled,
    elevate_degree,
    measure_l1_error,
    reduce_to_cubic_g1,
    subdivide_and_modify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
