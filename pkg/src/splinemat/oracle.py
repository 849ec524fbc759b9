"""Independent reference implementations used by tests and verification.

Everything here is deliberately naive: direct basis recursion, serial Boehm
knot insertion, dense grid scans.  None of it shares code with the matrix
pipeline it cross-checks.
"""

import numpy as np

from .core import BezierSegment, BSplineCurve, DomainError, validate_curve


def _basis_rows(knots: np.ndarray, p: int, ts: np.ndarray) -> np.ndarray:
    """All basis function values N_{i,p}(t) by the raw two-term recursion.

    Level 0 uses the half-open indicator convention; the right domain
    endpoint is special-cased onto the final nonzero span so clamped curves
    interpolate their last control point.
    """
    ts = np.asarray(ts, dtype=np.float64)
    nb = len(knots) - 1
    N = np.zeros((len(ts), nb))
    last = None
    for i in range(nb):
        if knots[i] < knots[i + 1]:
            N[:, i] = (knots[i] <= ts) & (ts < knots[i + 1])
            last = i
    at_end = ts == knots[-1]
    if np.any(at_end) and last is not None:
        N[at_end] = 0.0
        N[at_end, last] = 1.0
    for j in range(1, p + 1):
        Nn = np.zeros((len(ts), nb - j))
        for i in range(nb - j):
            d1 = knots[i + j] - knots[i]
            if d1 > 0.0:
                Nn[:, i] += (ts - knots[i]) / d1 * N[:, i]
            d2 = knots[i + j + 1] - knots[i + 1]
            if d2 > 0.0:
                Nn[:, i] += (knots[i + j + 1] - ts) / d2 * N[:, i + 1]
        N = Nn
    return N


def eval_de_boor_many(curve: BSplineCurve, ts) -> np.ndarray:
    """Curve points at an array of parameters, via the basis recursion."""
    ts = np.asarray(ts, dtype=np.float64)
    lo, hi = curve.domain
    if np.any(ts < lo) or np.any(ts > hi):
        raise DomainError(f"parameter outside domain [{lo}, {hi}]")
    N = _basis_rows(curve.knots.knots, curve.degree, ts)
    return N[:, : curve.control_points.shape[0]] @ curve.control_points


def eval_de_boor(curve: BSplineCurve, t: float) -> np.ndarray:
    return eval_de_boor_many(curve, [t])[0]


def _insert_knot(knots, cp, p, t):
    # Boehm single-knot insertion
    k = int(np.searchsorted(knots, t, side="right")) - 1
    new = np.empty((len(cp) + 1, cp.shape[1]))
    for i in range(len(cp) + 1):
        if i <= k - p:
            new[i] = cp[i]
        elif i <= k:
            a = (t - knots[i]) / (knots[i + p] - knots[i])
            new[i] = (1.0 - a) * cp[i - 1] + a * cp[i]
        else:
            new[i] = cp[i - 1]
    return np.insert(knots, k + 1, t), new


def decompose_by_knot_insertion(curve: BSplineCurve) -> list[BezierSegment]:
    """Classical serial decomposition: raise every interior knot to multiplicity p."""
    validate_curve(curve)
    p = curve.degree
    knots = np.array(curve.knots.knots)
    cp = np.array(curve.control_points)
    lo, hi = curve.domain
    interior = sorted(set(knots[(knots > lo) & (knots < hi)]))
    for t in interior:
        while np.count_nonzero(knots == t) < p:
            knots, cp = _insert_knot(knots, cp, p, t)
    segs = []
    breaks = sorted(set(knots))
    start = 0
    for i in range(len(breaks) - 1):
        ta, tb = breaks[i], breaks[i + 1]
        segs.append(BezierSegment(p, cp[start : start + p + 1], (ta, tb)))
        start += p
    return segs


def oracle_project_batch(curve: BSplineCurve, queries: np.ndarray, grid: int = 4096):
    """Brute-force nearest parameter for many queries at once.

    Dense grid scan followed by a vectorized ternary search on each query's
    bracketing cells down to width 1e-10.  Returns (t, distance, resolution)
    where resolution is the largest distance between adjacent grid points, a
    bound on how much of the distance landscape the scan can miss.
    """
    if grid < 2:
        raise DomainError("grid must be >= 2")
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    lo, hi = curve.domain
    ts = np.linspace(lo, hi, grid)
    pts = eval_de_boor_many(curve, ts)
    resolution = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).max())
    nq = len(queries)
    best = np.empty(nq, dtype=np.int64)
    for s in range(0, nq, 256):
        block = queries[s : s + 256]
        d2 = ((pts[None, :, :] - block[:, None, :]) ** 2).sum(axis=2)
        best[s : s + 256] = np.argmin(d2, axis=1)
    a = ts[np.maximum(best - 1, 0)]
    b = ts[np.minimum(best + 1, grid - 1)]
    while np.max(b - a) > 1e-10:
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        f1 = np.linalg.norm(eval_de_boor_many(curve, m1) - queries, axis=1)
        f2 = np.linalg.norm(eval_de_boor_many(curve, m2) - queries, axis=1)
        take1 = f1 < f2
        b = np.where(take1, m2, b)
        a = np.where(take1, a, m1)
    tm = 0.5 * (a + b)
    dist = np.linalg.norm(eval_de_boor_many(curve, tm) - queries, axis=1)
    return tm, dist, resolution


def oracle_project(curve: BSplineCurve, q, grid: int = 4096):
    """Single-query convenience wrapper around oracle_project_batch."""
    t, d, res = oracle_project_batch(curve, [q], grid)
    return float(t[0]), float(d[0]), res


def bisect_poly_roots(coeffs, lo: float = 0.0, hi: float = 1.0,
                      cells: int = 4096, tol: float = 1e-9) -> np.ndarray:
    """Sign-change scan plus bisection; the reference for closed-form solvers."""
    c = np.asarray(coeffs, dtype=np.float64)[::-1]
    ts = np.linspace(lo, hi, cells + 1)
    vals = np.polyval(c, ts)
    roots = [float(t) for t, v in zip(ts, vals) if v == 0.0]
    idx = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
    a = ts[idx].copy()
    b = ts[idx + 1].copy()
    fa = vals[idx].copy()
    while len(a) and np.max(b - a) > tol:
        m = 0.5 * (a + b)
        fm = np.polyval(c, m)
        left = fa * fm <= 0.0
        b = np.where(left, m, b)
        a = np.where(left, a, m)
        fa = np.where(left, fa, fm)
    roots.extend((0.5 * (a + b)).tolist())
    out = []
    for r in sorted(roots):
        if not out or r - out[-1] > 1e-10:
            out.append(r)
    return np.array(out)
