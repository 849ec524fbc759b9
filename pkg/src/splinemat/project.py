"""Batch point projection and inversion.

Pipeline per curve: decompose to Bezier, approximate by cubics once, then
per query split each cubic into monotone pieces, eliminate the pieces that
cannot hold a minimum, rebase the survivors' E to non-parametric Bezier
form, clip to the root, and reduce all candidates to the global best.

Every stored segment boundary point is added as a candidate for every
query.  This is a superset of the endpoint rule the elimination properties
require: seams between cubics are only C0, so the distance derivative can
jump sign across them and park the true minimum exactly on a seam that both
neighboring pieces correctly reject.  Seam candidates close that gap for
the price of one distance evaluation each.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._accel import backend_name
from .basis import power_to_bernstein_matrix, subdivision_matrices
from .core import (
    BSplineCurve,
    CubicApproxSegment,
    DomainError,
    NoRoot,
    Poly,
    PointNotOnCurve,
    ProjectionResult,
    as_readonly,
    eval_bezier,
)
from .decompose import decompose_to_bezier
from .distance import distance_polys, monotonic_split
from .reduce_approx import approximate_error_controlled


@dataclass(frozen=True, eq=False)
class NonParametricBezier:
    """Scalar function in Bernstein form: ordinates b_i at abscissae i/n."""

    ordinates: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ordinates", as_readonly(self.ordinates))

    @property
    def degree(self) -> int:
        return len(self.ordinates) - 1

    @property
    def e_start(self) -> float:
        return float(self.ordinates[0])

    @property
    def e_end(self) -> float:
        return float(self.ordinates[-1])

    def __call__(self, u: float) -> float:
        return float(_kernels._eval_ordinates(np.asarray(self.ordinates), float(u)))


@dataclass(frozen=True, eq=False)
class PieceCandidate:
    """A monotone piece bundled with its E ordinates."""

    segment: CubicApproxSegment
    ordinates: NonParametricBezier


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Endpoint candidates plus the monotone pieces elimination kept."""

    endpoints: tuple
    pieces: tuple


@dataclass(frozen=True)
class WorkPlan:
    """Even chunking of a flat unit stream across workers."""

    total_units: int
    workers: int
    units_per_worker: int


@dataclass(frozen=True, eq=False)
class ClipResult:
    root: float
    width: float
    iterations: int
    converged_at: int | None


@dataclass(frozen=True, eq=False)
class ProjectionStats:
    """Aggregated per-piece clipping statistics for a batch run."""

    pieces: int
    conv3_local: int
    conv3_source: int
    conv_final_local: int
    conv_final_source: int
    hull_misses: int


@dataclass(frozen=True, eq=False)
class PreparedCurve:
    """Per-curve arrays the batch kernel consumes; built once, read-only."""

    curve: BSplineCurve
    tolerance: float
    cubics: tuple
    seg_pts: np.ndarray
    seg_ta: np.ndarray
    seg_tb: np.ndarray
    seam_t: np.ndarray
    seam_pt: np.ndarray


def rebase(e: Poly) -> NonParametricBezier:
    """Power coefficients of E (degree <= 5) to non-parametric Bezier ordinates."""
    c = np.zeros(6)
    coeffs = e.coeffs if isinstance(e, Poly) else np.asarray(e, dtype=np.float64)
    if len(coeffs) > 6 and np.any(coeffs[6:] != 0.0):
        raise DomainError("rebase expects degree <= 5")
    c[: min(6, len(coeffs))] = coeffs[:6]
    return NonParametricBezier(power_to_bernstein_matrix(5) @ c)


def rebase_batch(coeff_block: np.ndarray) -> np.ndarray:
    """Rebase many coefficient rows in one matrix product."""
    block = np.asarray(coeff_block, dtype=np.float64)
    return block @ power_to_bernstein_matrix(5).T


def hull_x_intersections(bez: NonParametricBezier):
    """Abscissa range where the convex hull of the graph meets y=0, or None."""
    found, z1, z2 = _kernels._hull_cross(np.asarray(bez.ordinates))
    return (float(z1), float(z2)) if found else None


def clip(bez: NonParametricBezier, z1: float, z2: float) -> NonParametricBezier:
    """Restrict to [z1, z2] via S_L((z2-z1)/(1-z1)) @ S_R(z1), reparameterized."""
    if not 0.0 <= z1 <= z2 <= 1.0:
        raise DomainError(f"bad clip interval [{z1}, {z2}]")
    n = bez.degree
    b = np.asarray(bez.ordinates)
    if z1 >= 1.0:
        return NonParametricBezier(np.full(n + 1, b[-1]))
    _, SR = subdivision_matrices(z1, n)
    SL, _ = subdivision_matrices((z2 - z1) / (1.0 - z1), n)
    return NonParametricBezier(SL @ SR @ b)


def clip_root(bez: NonParametricBezier, tol: float = 1e-6,
              max_iterations: int = 8) -> ClipResult:
    """Drive the enclosure of the single root below tol by repeated clipping.

    Requires an eliminated piece: E(0) < 0 and E(1) >= 0 with E monotone, so
    the root is unique and no subdivision branch ever opens.  Raises NoRoot
    when the hull never crosses the axis, which means elimination upstream
    let a rootless piece through.
    """
    widths = np.empty(max_iterations)
    root, ok, used = _kernels._clip_root(np.asarray(bez.ordinates, dtype=np.float64),
                                         tol, max_iterations, widths)
    if not ok:
        raise NoRoot("convex hull never crosses the axis")
    conv = None
    for k in range(used):
        if widths[k] <= tol:
            conv = k + 1
            break
    return ClipResult(float(root), float(widths[used - 1]), used, conv)


def eliminate(pieces, start_candidate, end_candidate) -> CandidateSet:
    """Drop pieces that cannot contain a local minimum of the distance.

    A piece survives iff E(0) < 0 and E(0) * E(1) <= 0.  The two curve
    endpoint candidates are attached unconditionally, a branch-free superset
    of the conditional endpoint rule.
    """
    kept = tuple(pc for pc in pieces
                 if pc.ordinates.e_start < 0.0
                 and pc.ordinates.e_start * pc.ordinates.e_end <= 0.0)
    return CandidateSet((start_candidate, end_candidate), kept)


def reduce_min(query, candidates) -> ProjectionResult:
    """Order-independent minimum: smallest distance, ties within 1e-12 by t.

    Implemented as two passes (global min, then smallest parameter inside
    the tie band) so any candidate arrival order and any reduction tree give
    the identical result.
    """
    cands = list(candidates)
    if not cands:
        raise DomainError("reduce_min needs at least the endpoint candidates")
    dmin = min(d for _, _, d in cands)
    best = min((t, i) for i, (t, _, d) in enumerate(cands) if d <= dmin + 1e-12)[1]
    t, foot, dist = cands[best]
    return ProjectionResult(np.asarray(query, dtype=np.float64), float(t),
                            np.asarray(foot, dtype=np.float64), float(dist),
                            len(cands))


def plan_work(total_units: int, workers: int) -> WorkPlan:
    """K = ceil(total_units / workers); chunking never drops or repeats a unit."""
    if workers < 1:
        raise DomainError("workers must be >= 1")
    k = max(1, -(-total_units // workers))
    return WorkPlan(total_units, workers, k)


def prepare_curve(curve: BSplineCurve, tolerance: float = 1e-4,
                  batch_cap: int = 4096) -> PreparedCurve:
    """Decompose and approximate once; pack the cubics for the batch kernel."""
    segments = decompose_to_bezier(curve)
    cubics = approximate_error_controlled(segments, tolerance, batch_cap=batch_cap)
    s = len(cubics)
    d = curve.dimension
    seg_pts = np.empty((s, 4, d))
    seg_ta = np.empty(s)
    seg_tb = np.empty(s)
    for i, c in enumerate(cubics):
        seg_pts[i] = c.control_points
        seg_ta[i], seg_tb[i] = c.source_interval
    seam_t = np.empty(s + 1)
    seam_pt = np.empty((s + 1, d))
    seam_t[0] = seg_ta[0]
    seam_pt[0] = seg_pts[0, 0]
    seam_t[1:] = seg_tb
    seam_pt[1:] = seg_pts[:, 3, :]
    return PreparedCurve(curve, tolerance, tuple(cubics),
                         as_readonly(seg_pts), as_readonly(seg_ta),
                         as_readonly(seg_tb), as_readonly(seam_t),
                         as_readonly(seam_pt))


def project_prepared(prep: PreparedCurve, queries, workers: int | None = None,
                     clip_tol: float = 1e-6, max_iterations: int = 8,
                     with_stats: bool = False, soundness_samples: int = 0):
    """Run the batch kernel over the queries, chunked across worker threads.

    Returns (t, foot, distance, candidates) arrays, plus a ProjectionStats
    and the per-query dropped-piece minimum squared distance when asked.
    """
    queries = np.ascontiguousarray(np.atleast_2d(queries), dtype=np.float64)
    if queries.shape[1] != prep.curve.dimension:
        raise DomainError("query dimension does not match the curve")
    n = queries.shape[0]
    out_t = np.empty(n)
    out_foot = np.empty((n, queries.shape[1]))
    out_dist = np.empty(n)
    out_cand = np.empty(n, dtype=np.int64)
    out_stats = np.zeros((n, 6), dtype=np.int64)
    out_sound = np.empty(n)
    args = (prep.seg_pts, prep.seg_ta, prep.seg_tb, prep.seam_t, prep.seam_pt)
    kw = (clip_tol, max_iterations, soundness_samples)

    if workers is None:
        workers = 1
    plan = plan_work(n, workers)
    k = plan.units_per_worker
    if workers <= 1 or n <= k:
        _kernels._project_block(*args, queries, *kw, out_t, out_foot, out_dist,
                                out_cand, out_stats, out_sound)
    else:
        def run(lo):
            hi = min(lo + k, n)
            _kernels._project_block(*args, queries[lo:hi], *kw,
                                    out_t[lo:hi], out_foot[lo:hi],
                                    out_dist[lo:hi], out_cand[lo:hi],
                                    out_stats[lo:hi], out_sound[lo:hi])
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(0, n, k)))
    if int(out_stats[:, 5].sum()) > 0:
        raise NoRoot("hull never crossed on a surviving piece; elimination bug")
    if not with_stats:
        return out_t, out_foot, out_dist, out_cand
    totals = out_stats.sum(axis=0)
    stats = ProjectionStats(int(totals[0]), int(totals[1]), int(totals[2]),
                            int(totals[3]), int(totals[4]), int(totals[5]))
    return out_t, out_foot, out_dist, out_cand, stats, out_sound


def project_points(curve: BSplineCurve, queries, tolerance: float = 1e-4,
                   workers: int | None = None) -> list[ProjectionResult]:
    """Project every query onto the curve; distances are exact to the cubic
    approximants, hence within tolerance + clip precision of the true curve."""
    if not tolerance > 0.0:
        raise DomainError("tolerance must be positive")
    prep = prepare_curve(curve, tolerance)
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    t, foot, dist, cand = project_prepared(prep, queries, workers=workers)
    return [ProjectionResult(queries[i], float(t[i]), foot[i], float(dist[i]),
                             int(cand[i]))
            for i in range(len(queries))]


def invert_point(curve: BSplineCurve, q, tolerance: float = 1e-4) -> float:
    """Parameter of a point known to lie on the curve (degenerate projection)."""
    res = project_points(curve, [q], tolerance)[0]
    if res.distance > 10.0 * tolerance:
        raise PointNotOnCurve(
            f"projection distance {res.distance:.3e} exceeds 10 * {tolerance}")
    return res.t_star


def project_single_reference(prep: PreparedCurve, q) -> ProjectionResult:
    """Single-query projection assembled from the public ops.

    Used by tests as an independent route against the fused batch kernel:
    monotone split per cubic, rebase, eliminate, clip, reduce.
    """
    q = np.asarray(q, dtype=np.float64)
    dom_lo, dom_hi = prep.curve.domain
    start = (float(prep.seam_t[0]), prep.seam_pt[0])
    end = (float(prep.seam_t[-1]), prep.seam_pt[-1])
    pieces = []
    for cub in prep.cubics:
        for piece in monotonic_split(cub, q):
            polys = distance_polys(piece, q)
            pieces.append(PieceCandidate(piece, rebase(polys.e)))
    cset = eliminate(pieces, start, end)
    candidates = []
    for t, pt in cset.endpoints:
        candidates.append((t, pt, float(np.linalg.norm(q - pt))))
    for s in range(1, len(prep.seam_t) - 1):
        pt = prep.seam_pt[s]
        candidates.append((float(prep.seam_t[s]), pt, float(np.linalg.norm(q - pt))))
    for pc in cset.pieces:
        res = clip_root(pc.ordinates)
        ta, tb = pc.segment.source_interval
        foot = eval_bezier(pc.segment.control_points, res.root)
        candidates.append((ta + res.root * (tb - ta), foot,
                           float(np.linalg.norm(q - foot))))
    return reduce_min(q, candidates)


def engine_info() -> dict:
    """Which backend the kernels run on; handy for bench output."""
    return {"backend": backend_name()}
