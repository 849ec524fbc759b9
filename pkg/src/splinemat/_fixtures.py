"""Seeded random geometry used by the selftest, the benchmark, and tests.

Curves mimic the experimental setup: clamped, coordinates confined to the
unit box, degrees and knot-vector lengths shaped like the evaluation models.
Control nets default to a momentum random walk, which gives smooth CAD-like
shapes rather than the maximally wiggly nets iid sampling produces.
"""

import numpy as np

from .core import BSplineCurve

# (degree, knot length) rows of the evaluation models
TABLE_SHAPES = [
    (4, 10), (5, 12), (6, 14),
    (4, 14), (5, 18), (6, 22),
    (4, 35), (5, 22), (6, 57),
    (5, 46),
]


def _clamped_knots(rng, degree: int, n_control: int, min_gap: float = 1e-3,
                   uniform: bool = False):
    interior = n_control - degree - 1
    if interior < 0:
        raise ValueError("need at least degree+1 control points")
    if uniform:
        mid = np.linspace(0.0, 1.0, interior + 2)[1:-1]
    else:
        while True:
            mid = np.sort(rng.uniform(0.0, 1.0, interior))
            gaps = np.diff(np.concatenate(([0.0], mid, [1.0])))
            if interior == 0 or gaps.min() > min_gap:
                break
    return np.concatenate((np.zeros(degree + 1), mid, np.ones(degree + 1)))


def _walk_points(rng, n: int, dim: int) -> np.ndarray:
    pts = np.zeros((n, dim))
    v = rng.normal(size=dim)
    v /= np.linalg.norm(v)
    for i in range(1, n):
        v = v + 0.55 * rng.normal(size=dim)
        v /= np.linalg.norm(v)
        pts[i] = pts[i - 1] + v
    lo = pts.min(axis=0)
    span = np.maximum(pts.max(axis=0) - lo, 1e-9)
    return (pts - lo) / span


def random_clamped_curve(rng, degree: int, n_control: int, dim: int,
                         smooth: bool = True,
                         uniform_knots: bool = False) -> BSplineCurve:
    knots = _clamped_knots(rng, degree, n_control, uniform=uniform_knots)
    if smooth and n_control > 2:
        cp = _walk_points(rng, n_control, dim)
    else:
        cp = rng.uniform(0.0, 1.0, (n_control, dim))
    return BSplineCurve(degree, knots, cp)


def table_shaped_curve(rng, degree: int, knot_length: int, dim: int) -> BSplineCurve:
    return random_clamped_curve(rng, degree, knot_length - degree - 1, dim)


def random_queries(rng, n: int, dim: int) -> np.ndarray:
    return rng.uniform(0.0, 1.0, (n, dim))


def single_span_cubic(dim: int = 2) -> BSplineCurve:
    pts = [[0.0, 0.0], [0.3, 0.9], [0.7, 0.8], [1.0, 0.1]]
    if dim == 3:
        pts = [p + [0.2 * i] for i, p in enumerate(pts)]
    return BSplineCurve(3, [0.0] * 4 + [1.0] * 4, pts)


def two_span_uniform_cubic() -> BSplineCurve:
    return BSplineCurve(
        3,
        [0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0],
        [[0.0, 0.0], [0.1, 0.6], [0.4, 1.0], [0.7, 0.7], [1.0, 0.0]],
    )
