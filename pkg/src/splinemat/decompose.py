"""B-spline to piecewise-Bezier conversion through the matrix pipeline.

Per span q the control points come out of one matrix product
Q = B_p^{-1} @ M @ A @ P_local.  The basis matrix A is built in the
span-shifted power basis (powers of t - t_q), which turns the
reparameterization M into diag(h^k) and keeps the product free of the
catastrophic cancellation the global power basis suffers on curves with many
spans; the factorization itself is unchanged.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .basis import power_to_bernstein_matrix, symbolic_basis_matrix
from .core import BezierSegment, BSplineCurve, EmptyDomain, GeometryError, validate_curve


def decompose_to_bezier(curve: BSplineCurve) -> list[BezierSegment]:
    """One degree-p Bezier segment per nonzero-length span, in parameter order.

    The Bernstein inverse applied here is the closed-form power-to-Bernstein
    matrix (exact binomial-ratio entries): unlike the numerically inverted
    B_p, whose residual blows past 1e-9 near degree 24, it keeps the whole
    degree range of the curve type usable.  Tests cross-check both routes.
    """
    validate_curve(curve)
    p = curve.degree
    knots = curve.knots.knots
    cp = curve.control_points
    Binv = power_to_bernstein_matrix(p)
    spans = curve.span_indices()
    if not spans:
        raise EmptyDomain("curve has no nonzero-length span")
    segments = []
    for q in spans:
        h = knots[q + 1] - knots[q]
        A = symbolic_basis_matrix(knots, p, q, center=knots[q])
        Q = Binv @ ((h ** np.arange(p + 1))[:, None] * A @ cp[q - p : q + 1])
        # clamping makes the outer endpoints exact; store the exact values
        if q == spans[0]:
            Q[0] = cp[0]
        if q == spans[-1]:
            Q[p] = cp[-1]
        segments.append(BezierSegment(p, Q, (knots[q], knots[q + 1])))
    return segments


def batched_decompose(curves, workers: int | None = None):
    """Decompose many curves; per-curve failures are reported in place.

    Returns a list aligned with the input: each entry is either the segment
    list or the GeometryError that curve raised.  Output order never depends
    on the worker count.
    """

    def one(curve):
        try:
            return decompose_to_bezier(curve)
        except GeometryError as exc:
            return exc

    curves = list(curves)
    if workers is None or workers <= 1 or len(curves) <= 1:
        return [one(c) for c in curves]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, curves))
