"""Domain types, validation, and affine parameter bookkeeping.

All geometry is stored in float64 numpy arrays.  Points are native 2D or 3D
row vectors; curves never embed 2D data in 3D.  Every type here is an
immutable value object once constructed, so instances can be shared freely
between concurrent workers.
"""

from dataclasses import dataclass

import numpy as np

MAX_DEGREE = 31


class GeometryError(Exception):
    """Base class for everything this library raises on bad geometry."""


class NonMonotoneKnots(GeometryError):
    pass


class NotClamped(GeometryError):
    pass


class CountMismatch(GeometryError):
    pass


class DegreeOutOfRange(GeometryError):
    pass


class DomainError(GeometryError):
    pass


class DegenerateSpan(GeometryError):
    pass


class EmptyDomain(GeometryError):
    pass


class DepthExceeded(GeometryError):
    pass


class NoRoot(GeometryError):
    pass


class PointNotOnCurve(GeometryError):
    pass


def as_readonly(values, dtype=np.float64) -> np.ndarray:
    """Contiguous float64 copy with the write flag cleared."""
    arr = np.array(values, dtype=dtype, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KnotVector:
    """Nondecreasing parameter sequence; validation happens in validate_curve."""

    knots: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "knots", as_readonly(self.knots))
        if self.knots.ndim != 1:
            raise CountMismatch("knot vector must be one-dimensional")

    def __len__(self):
        return len(self.knots)

    def __getitem__(self, i):
        return self.knots[i]


@dataclass(frozen=True, eq=False)
class BSplineCurve:
    """Clamped B-spline curve: degree, knot vector, and control points."""

    degree: int
    knots: KnotVector
    control_points: np.ndarray

    def __post_init__(self):
        if not isinstance(self.knots, KnotVector):
            object.__setattr__(self, "knots", KnotVector(self.knots))
        cp = np.atleast_2d(np.asarray(self.control_points, dtype=np.float64))
        object.__setattr__(self, "control_points", as_readonly(cp))

    @property
    def dimension(self) -> int:
        return self.control_points.shape[1]

    @property
    def domain(self) -> tuple[float, float]:
        k = self.knots.knots
        return float(k[self.degree]), float(k[len(k) - self.degree - 1])

    def span_indices(self):
        """Indices q of nonzero-length spans [t_q, t_{q+1}); zero spans are skipped."""
        k = self.knots.knots
        p = self.degree
        return [q for q in range(p, len(k) - p - 1) if k[q] < k[q + 1]]


@dataclass(frozen=True, eq=False)
class BezierSegment:
    """One polynomial piece in Bernstein form plus its source interval."""

    degree: int
    control_points: np.ndarray
    source_interval: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "control_points", as_readonly(self.control_points))
        ta, tb = self.source_interval
        object.__setattr__(self, "source_interval", (float(ta), float(tb)))
        if self.control_points.shape[0] != self.degree + 1:
            raise CountMismatch("segment needs degree+1 control points")
        if not ta < tb:
            raise DegenerateSpan(f"empty source interval ({ta}, {tb})")

    def evaluate(self, u):
        return eval_bezier(self.control_points, u)


@dataclass(frozen=True, eq=False)
class CubicApproxSegment:
    """Cubic approximant of part of a curve, with its measured max error."""

    control_points: np.ndarray
    source_interval: tuple[float, float]
    measured_error: float

    def __post_init__(self):
        object.__setattr__(self, "control_points", as_readonly(self.control_points))
        ta, tb = self.source_interval
        object.__setattr__(self, "source_interval", (float(ta), float(tb)))
        if self.control_points.shape[0] != 4:
            raise CountMismatch("cubic segment needs exactly 4 control points")

    def evaluate(self, u):
        return eval_bezier(self.control_points, u)


@dataclass(frozen=True, eq=False)
class Poly:
    """Dense real polynomial, ascending-power coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", as_readonly(np.atleast_1d(self.coeffs)))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            out = out * x + c
        return out if out.ndim else float(out)

    def derivative(self) -> "Poly":
        c = self.coeffs
        if len(c) <= 1:
            return Poly(np.zeros(1))
        return Poly(c[1:] * np.arange(1, len(c)))

    def effective_degree(self, rel_tol: float = 1e-12) -> int:
        c = np.abs(self.coeffs)
        scale = c.max()
        if scale == 0.0:
            return 0
        idx = np.nonzero(c > rel_tol * scale)[0]
        return int(idx[-1]) if len(idx) else 0


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Outcome of projecting one query point onto a curve."""

    query: np.ndarray
    t_star: float
    foot: np.ndarray
    distance: float
    candidates_examined: int

    def __post_init__(self):
        object.__setattr__(self, "query", as_readonly(self.query))
        object.__setattr__(self, "foot", as_readonly(self.foot))


def validate_curve(curve: BSplineCurve) -> BSplineCurve:
    """Check every curve invariant; return the curve unchanged if all hold.

    Raises the exception naming the violated invariant: NonMonotoneKnots,
    NotClamped, CountMismatch, or DegreeOutOfRange.
    """
    p = curve.degree
    if not 1 <= p <= MAX_DEGREE:
        raise DegreeOutOfRange(f"degree {p} outside [1, {MAX_DEGREE}]")
    k = curve.knots.knots
    if np.any(np.diff(k) < 0):
        i = int(np.nonzero(np.diff(k) < 0)[0][0])
        raise NonMonotoneKnots(f"knots[{i}]={k[i]} > knots[{i + 1}]={k[i + 1]}")
    if len(k) < 2 * (p + 1):
        raise CountMismatch(f"need at least {2 * (p + 1)} knots for degree {p}")
    if not (np.all(k[: p + 1] == k[0]) and np.all(k[-p - 1 :] == k[-1])):
        raise NotClamped("first and last p+1 knots must repeat")
    # multiplicity cap: p+1 repeats allowed (the clamped ends), never more
    vals, counts = np.unique(k, return_counts=True)
    if np.any(counts > p + 1):
        v = vals[np.argmax(counts)]
        raise NonMonotoneKnots(f"knot {v} has multiplicity {counts.max()} > {p + 1}")
    expected = len(k) - p - 1
    if curve.control_points.shape[0] != expected:
        raise CountMismatch(
            f"got {curve.control_points.shape[0]} control points, "
            f"expected {expected} for {len(k)} knots at degree {p}"
        )
    if curve.dimension not in (2, 3):
        raise DomainError(f"control points must be 2D or 3D, got {curve.dimension}D")
    return curve


def local_to_global(interval, u: float) -> float:
    """Map local u in [0,1] to the global parameter of the interval."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"local parameter {u} outside [0, 1]")
    ta, tb = interval
    return ta + u * (tb - ta)


def global_to_local(interval, t: float) -> float:
    """Inverse of local_to_global; round-trips within 1e-14."""
    ta, tb = interval
    return (t - ta) / (tb - ta)


def eval_bezier(points: np.ndarray, u) -> np.ndarray:
    """De Casteljau evaluation of a Bezier curve at scalar or array u."""
    points = np.asarray(points, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    scalar = u.ndim == 0
    uu = u.reshape(-1, 1, 1)
    b = np.broadcast_to(points, (uu.shape[0],) + points.shape).copy()
    for _ in range(points.shape[0] - 1):
        b = (1.0 - uu) * b[:, :-1, :] + uu * b[:, 1:, :]
    out = b[:, 0, :]
    return out[0] if scalar else out
