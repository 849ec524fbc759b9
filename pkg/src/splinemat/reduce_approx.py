"""G1-constrained cubic reduction and error-controlled approximation.

The reducer solves the 2x2 stationarity system of the L2 objective built
from Gram-matrix rows, so the optimum costs a handful of dot products.  The
approximation loop then works level by level over a subdivision tree: every
failing cubic is split at its worst-error parameters and each child is
re-fitted to the matching slice of the original segment, with prefix-sum
slot allocation so passes are embarrassingly parallel.
"""

from dataclasses import dataclass

import numpy as np

from .basis import bernstein_design, gram_matrix, subdivision_matrices
from .core import (
    BezierSegment,
    CubicApproxSegment,
    DepthExceeded,
    DomainError,
    as_readonly,
    eval_bezier,
)


@dataclass(frozen=True, eq=False)
class ReductionSolution:
    """Optimal tangent magnitudes, the cubic they define, and its exact L2 error."""

    delta0: float
    delta1: float
    cubic: np.ndarray
    l2_error: float

    def __post_init__(self):
        object.__setattr__(self, "cubic", as_readonly(self.cubic))


@dataclass(frozen=True, eq=False)
class SubdivisionLevel:
    """Bookkeeping for one pass of the subdivision tree.

    compaction_keys lists the in-batch indices of segments that failed the
    tolerance; child_prefix_sum is their exclusive child-count scan with the
    total appended, so child k of failing segment j lands in slot
    child_prefix_sum[j] + k of the next level.
    """

    segments: tuple
    child_prefix_sum: np.ndarray
    compaction_keys: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "child_prefix_sum",
                           as_readonly(self.child_prefix_sum, dtype=np.int64))
        object.__setattr__(self, "compaction_keys",
                           as_readonly(self.compaction_keys, dtype=np.int64))


def _g1_cubic(Q: np.ndarray, d0: float, d1: float) -> np.ndarray:
    p = len(Q) - 1
    c = p / 3.0
    return np.array([Q[0],
                     Q[0] + c * (Q[1] - Q[0]) * d0,
                     Q[p] - c * (Q[p] - Q[p - 1]) * d1,
                     Q[p]])


def _l2_error(Q: np.ndarray, R: np.ndarray) -> float:
    p = len(Q) - 1
    Gpp = gram_matrix(p, p)
    Gp3 = gram_matrix(p, 3)
    G33 = gram_matrix(3, 3)
    eps = (np.einsum("id,ij,jd->", Q, Gpp, Q)
           - 2.0 * np.einsum("id,ij,jd->", Q, Gp3, R)
           + np.einsum("id,ij,jd->", R, G33, R))
    return max(float(eps), 0.0)


def reduce_points_g1(Q: np.ndarray) -> ReductionSolution:
    """Reduce raw degree-p control points (p >= 4) to the L2-optimal G1 cubic.

    Endpoints and end-tangent directions are pinned; the free magnitudes
    (delta0, delta1) solve the linear system obtained by differentiating the
    L2 integral, with every integral expressed through Gram-matrix rows.
    Degenerate tangents or a singular system fall back to unit magnitudes and
    leave error control to the subdivision loop.
    """
    Q = np.asarray(Q, dtype=np.float64)
    p = len(Q) - 1
    if p < 4:
        raise DomainError(f"reduction needs degree >= 4, got {p}")
    dQ0 = Q[1] - Q[0]
    dQp = Q[p] - Q[p - 1]
    span = Q.max(axis=0) - Q.min(axis=0)
    scale = float(np.linalg.norm(span))
    eps = 1e-12 * max(scale, 1e-300)
    if np.linalg.norm(dQ0) <= eps or np.linalg.norm(dQp) <= eps:
        R = _g1_cubic(Q, 1.0, 1.0)
        return ReductionSolution(1.0, 1.0, R, _l2_error(Q, R))
    G3p = gram_matrix(3, p)
    G33 = gram_matrix(3, 3)
    ends = np.array([Q[0], Q[0], Q[p], Q[p]])
    V1 = G3p[1] @ Q - G33[1] @ ends
    V2 = G3p[2] @ Q - G33[2] @ ends
    c = p / 3.0
    # stationarity of the L2 integral in (delta0, delta1)
    a11 = G33[1, 1] * c * float(dQ0 @ dQ0)
    a12 = -G33[1, 2] * c * float(dQp @ dQ0)
    a21 = G33[2, 1] * c * float(dQ0 @ dQp)
    a22 = -G33[2, 2] * c * float(dQp @ dQp)
    b1 = float(V1 @ dQ0)
    b2 = float(V2 @ dQp)
    det = a11 * a22 - a12 * a21
    if abs(det) <= 1e-12 * (abs(a11 * a22) + abs(a12 * a21)):
        R = _g1_cubic(Q, 1.0, 1.0)
        return ReductionSolution(1.0, 1.0, R, _l2_error(Q, R))
    d0 = (b1 * a22 - a12 * b2) / det
    d1 = (a11 * b2 - a21 * b1) / det
    R = _g1_cubic(Q, d0, d1)
    return ReductionSolution(float(d0), float(d1), R, _l2_error(Q, R))


def reduce_to_cubic_g1(segment: BezierSegment) -> ReductionSolution:
    """Reduce a degree-p Bezier segment (p >= 4) to its G1 cubic approximant."""
    return reduce_points_g1(segment.control_points)


def elevate_degree(segment: BezierSegment, target: int) -> BezierSegment:
    """Rewrite the segment at a higher degree; the point set is unchanged."""
    if target < segment.degree:
        raise DomainError(f"cannot elevate degree {segment.degree} down to {target}")
    P = np.asarray(segment.control_points, dtype=np.float64)
    while len(P) - 1 < target:
        p = len(P) - 1
        out = np.empty((p + 2, P.shape[1]))
        out[0] = P[0]
        for i in range(1, p + 1):
            w = i / (p + 1.0)
            out[i] = w * P[i - 1] + (1.0 - w) * P[i]
        out[p + 1] = P[p]
        P = out
    return BezierSegment(target, P, segment.source_interval)


def _max_error(P, approx_iv, Q, orig_iv, samples):
    """Max pointwise deviation at equal global parameters over a uniform grid."""
    us = np.linspace(0.0, 1.0, samples)
    ts = approx_iv[0] + us * (approx_iv[1] - approx_iv[0])
    vs = (ts - orig_iv[0]) / (orig_iv[1] - orig_iv[0])
    a = bernstein_design(3, us) @ P
    o = bernstein_design(len(Q) - 1, vs) @ Q
    err = np.linalg.norm(a - o, axis=1)
    mx = float(err.max())
    return mx, us[err >= mx - 1e-12]


def measure_l1_error(approx: CubicApproxSegment, original: BezierSegment,
                     samples: int = 64):
    """(max error, every local parameter attaining it within 1e-12)."""
    if samples < 2:
        raise DomainError("samples must be >= 2")
    oa, ob = original.source_interval
    aa, ab = approx.source_interval
    if aa < oa - 1e-12 or ab > ob + 1e-12:
        raise DomainError("approximant interval must lie inside the original's")
    return _max_error(approx.control_points, approx.source_interval,
                      original.control_points, original.source_interval, samples)


def _restrict(points: np.ndarray, a: float, b: float) -> np.ndarray:
    """Control points of a Bezier restricted to local [a, b], renormalized."""
    P = points
    n = len(P) - 1
    if a > 0.0:
        _, SR = subdivision_matrices(a, n)
        P = SR @ P
        b = (b - a) / (1.0 - a)
    if b < 1.0:
        SL, _ = subdivision_matrices(b, n)
        P = SL @ P
    return P


def subdivide_and_modify(approx: CubicApproxSegment, original: BezierSegment,
                         z: float):
    """Split the cubic at z and snap the shared split point onto the original.

    Children keep measured_error = inf until the loop measures them; both
    children store the one snapped point, so the seam is C0 exact.
    """
    if not 0.0 < z < 1.0:
        raise DomainError(f"split parameter {z} outside (0, 1)")
    SL, SR = subdivision_matrices(z)
    L = SL @ approx.control_points
    R = SR @ approx.control_points
    aa, ab = approx.source_interval
    t_split = aa + z * (ab - aa)
    oa, ob = original.source_interval
    p_orig = eval_bezier(original.control_points, (t_split - oa) / (ob - oa))
    L[3] = p_orig
    R[0] = p_orig
    return (CubicApproxSegment(L, (aa, t_split), np.inf),
            CubicApproxSegment(R, (t_split, ab), np.inf))


def approximate_error_controlled(segments, tol: float, batch_cap: int = 4096,
                                 loop_samples: int = 64, verify_samples: int = 1024,
                                 max_depth: int = 32, collect_levels: bool = False):
    """Approximate Bezier segments by cubics whose max deviation stays <= tol.

    Degree 2 segments are elevated once (exact) and cubic input passes
    through untouched.  Higher degrees get the G1 reduction, then the
    level-by-level loop: measure at loop_samples, verify candidate passers at
    verify_samples, and split the rest at all of their worst-error parameters
    simultaneously.  Each child is re-fitted against its own slice of the
    original segment, which keeps the per-level error contraction at the
    O(h^4) rate of the cubic fit.  At most batch_cap pending items are
    processed per pass; the excess waits for the next pass.

    Returns the cubics ordered by source interval, or (cubics, levels) when
    collect_levels is set.
    """
    if not tol > 0.0:
        raise DomainError("tolerance must be positive")
    out = []
    queue = []  # (orig_index, local_a, local_b, cubic points, depth)
    originals = []
    for seg in segments:
        p = seg.degree
        if p <= 2:
            cubic = elevate_degree(seg, 3)
            out.append(CubicApproxSegment(cubic.control_points, seg.source_interval, 0.0))
            continue
        if p == 3:
            out.append(CubicApproxSegment(seg.control_points, seg.source_interval, 0.0))
            continue
        idx = len(originals)
        originals.append(seg)
        queue.append((idx, 0.0, 1.0, reduce_points_g1(seg.control_points).cubic, 0))

    levels = []
    while queue:
        batch = queue[: max(1, batch_cap)]
        queue = queue[len(batch):]
        failing = []          # (in-batch index, item, argmax params)
        batch_records = []
        for j, item in enumerate(batch):
            idx, la, lb, P, depth = item
            orig = originals[idx]
            oa, ob = orig.source_interval
            piv = (oa + la * (ob - oa), oa + lb * (ob - oa))
            mx, args = _max_error(P, piv, orig.control_points,
                                  orig.source_interval, loop_samples)
            if mx <= tol:
                mx2, args2 = _max_error(P, piv, orig.control_points,
                                        orig.source_interval, verify_samples)
                if mx2 <= tol:
                    out.append(CubicApproxSegment(P, piv, mx2))
                    if collect_levels:
                        batch_records.append(CubicApproxSegment(P, piv, mx))
                    continue
                args = args2
                mx = mx2
            if depth >= max_depth:
                raise DepthExceeded(
                    f"tolerance {tol} not reached after {max_depth} levels "
                    f"on source interval {piv}")
            if collect_levels:
                batch_records.append(CubicApproxSegment(P, piv, mx))
            zs = [z for z in args if 1e-9 < z < 1.0 - 1e-9]
            failing.append((j, item, zs or [0.5]))

        counts = [len(zs) + 1 for _, _, zs in failing]
        prefix = np.concatenate(([0], np.cumsum(counts, dtype=np.int64)))
        next_level = [None] * int(prefix[-1])
        for (j, item, zs), base in zip(failing, prefix[:-1]):
            idx, la, lb, P, depth = item
            orig = originals[idx]
            cuts = [la] + [la + z * (lb - la) for z in zs] + [lb]
            # one stored point per interior cut keeps the new seams C0 exact
            cut_pts = [eval_bezier(orig.control_points, c) for c in cuts[1:-1]]
            for k in range(len(cuts) - 1):
                ca, cb = cuts[k], cuts[k + 1]
                child = np.array(reduce_points_g1(
                    _restrict(orig.control_points, ca, cb)).cubic)
                if k > 0:
                    child[0] = cut_pts[k - 1]
                if k < len(cuts) - 2:
                    child[3] = cut_pts[k]
                next_level[base + k] = (idx, ca, cb, child, depth + 1)
        if collect_levels:
            levels.append(SubdivisionLevel(
                tuple(batch_records), prefix,
                np.array([j for j, _, _ in failing], dtype=np.int64)))
        queue.extend(next_level)

    out.sort(key=lambda s: s.source_interval[0])
    if collect_levels:
        return out, levels
    return out
