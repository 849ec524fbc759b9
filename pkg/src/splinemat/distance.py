"""Squared-distance machinery for (cubic segment, query point) pairs.

E(u) is the derivative of the squared distance along the segment; its own
derivative E'(u) is a quartic whose roots cut the segment into pieces on
which E is monotone, the precondition for subdivision-free clipping.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .basis import reparam_matrix, subdivision_matrices
from .core import CubicApproxSegment, DomainError, Poly


@dataclass(frozen=True, eq=False)
class DistancePolys:
    """E and its formal derivative for one (segment, query) pair."""

    e: Poly
    e_prime: Poly


def _segment_points(segment) -> np.ndarray:
    if isinstance(segment, CubicApproxSegment):
        return segment.control_points
    pts = np.asarray(segment, dtype=np.float64)
    if pts.shape[0] != 4:
        raise DomainError("distance polynomials need a cubic (4 control points)")
    return pts


def distance_polys(segment, q) -> DistancePolys:
    """Build E(u) (degree <= 5) and E'(u) (degree <= 4) in power form."""
    pts = _segment_points(segment)
    q = np.asarray(q, dtype=np.float64)
    e = np.empty(6)
    _kernels._distance_poly(pts, q, e)
    return DistancePolys(Poly(e), Poly(e[1:] * np.arange(1, 6)))


def solve_quartic(coeffs, interval=(0.0, 1.0)) -> np.ndarray:
    """Closed-form (Ferrari) real roots of a degree<=4 polynomial in the interval.

    Degenerate leading coefficients cascade to the cubic, quadratic, and
    linear formulas.  Roots are polished, deduplicated within 1e-10, and
    returned sorted; no roots is a valid outcome.
    """
    c = coeffs.coeffs if isinstance(coeffs, Poly) else np.asarray(coeffs, dtype=np.float64)
    if len(c) > 5 and np.any(c[5:] != 0.0):
        raise DomainError("solve_quartic handles degree <= 4")
    c5 = np.zeros(5)
    c5[: min(5, len(c))] = c[:5]
    lo, hi = interval
    if (lo, hi) != (0.0, 1.0):
        if not lo < hi:
            raise DomainError("empty interval")
        c5 = reparam_matrix(lo, hi, 4) @ c5
    out = np.empty(4)
    n = _kernels._quartic_roots_01(c5, out)
    roots = out[:n].copy()
    if (lo, hi) != (0.0, 1.0):
        roots = lo + roots * (hi - lo)
    return roots


def monotonic_split(segment: CubicApproxSegment, q) -> list[CubicApproxSegment]:
    """Split the segment at every interior root of E' (exact subdivision).

    On each returned piece E is monotone.  Roots within 1e-10 of an endpoint
    are dropped since splitting there is a no-op.  The split uses plain
    subdivision matrices; no control point is modified.
    """
    polys = distance_polys(segment, q)
    roots = solve_quartic(polys.e_prime)
    cuts = [r for r in roots if 1e-10 < r < 1.0 - 1e-10]
    if not cuts:
        return [segment]
    pieces = []
    pts = segment.control_points
    ta, tb = segment.source_interval
    prev = 0.0
    for z in cuts:
        zloc = (z - prev) / (1.0 - prev)
        SL, SR = subdivision_matrices(zloc)
        t_split = ta + z * (tb - ta)
        pieces.append(CubicApproxSegment(SL @ pts, (ta + prev * (tb - ta), t_split),
                                         segment.measured_error))
        pts = SR @ pts
        prev = z
    pieces.append(CubicApproxSegment(pts, (ta + prev * (tb - ta), tb),
                                     segment.measured_error))
    return pieces
