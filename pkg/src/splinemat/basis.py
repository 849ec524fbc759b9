"""Constant and per-span matrices driving the whole pipeline.

Matrices are plain row-major float64 ndarrays.  Constant families
(Bernstein, power-to-Bernstein, Gram) are built once, cached under a lock,
and handed out read-only.
"""

import threading

import numpy as np

from .core import MAX_DEGREE, BSplineCurve, DegenerateSpan, DomainError, as_readonly

# Pascal triangle up to 2*MAX_DEGREE + 1 rows; keeps every binomial the
# pipeline needs (Gram matrices reach C(m+n, i+j) with m = n = MAX_DEGREE)
# away from factorial overflow.
_PASCAL_ROWS = 2 * MAX_DEGREE + 2
PASCAL = np.zeros((_PASCAL_ROWS, _PASCAL_ROWS))
PASCAL[:, 0] = 1.0
for _n in range(1, _PASCAL_ROWS):
    PASCAL[_n, 1 : _n + 1] = PASCAL[_n - 1, : _n] + PASCAL[_n - 1, 1 : _n + 1]
PASCAL.setflags(write=False)


def binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return PASCAL[n, k]


_cache_lock = threading.Lock()
_bernstein_cache: dict[int, np.ndarray] = {}
_bernstein_inv_cache: dict[int, np.ndarray] = {}
_power_to_bernstein_cache: dict[int, np.ndarray] = {}
_gram_cache: dict[tuple[int, int], np.ndarray] = {}


def bernstein_matrix(p: int) -> np.ndarray:
    """B_p with [1 u ... u^p] @ B_p @ Q = Bezier curve value.

    Column j holds the power coefficients of the Bernstein basis polynomial
    B_{j,p}(u) = C(p,j) u^j (1-u)^(p-j).
    """
    if not 1 <= p <= MAX_DEGREE:
        raise DomainError(f"degree {p} outside [1, {MAX_DEGREE}]")
    with _cache_lock:
        if p not in _bernstein_cache:
            B = np.zeros((p + 1, p + 1))
            for j in range(p + 1):
                for k in range(j, p + 1):
                    B[k, j] = (-1.0) ** (k - j) * binom(p, j) * binom(p - j, k - j)
            _bernstein_cache[p] = as_readonly(B)
        return _bernstein_cache[p]


def bernstein_matrix_inverse(p: int) -> np.ndarray:
    """Numerical inverse of B_p (partial-pivoted LU).

    The residual ||B_p @ inv - I|| is checked at construction; anything above
    1e-9 is a hard error since every decomposed control point passes through
    this matrix.
    """
    B = bernstein_matrix(p)
    with _cache_lock:
        if p not in _bernstein_inv_cache:
            inv = np.linalg.inv(B)
            resid = np.abs(B @ inv - np.eye(p + 1)).max()
            if resid > 1e-9:
                raise ArithmeticError(
                    f"Bernstein inverse residual {resid:.2e} at degree {p}"
                )
            _bernstein_inv_cache[p] = as_readonly(inv)
        return _bernstein_inv_cache[p]


def power_to_bernstein_matrix(n: int) -> np.ndarray:
    """Lower-triangular T with b = T @ a mapping power coefficients a to
    Bernstein ordinates b; T[i, j] = C(i,j) / C(n,j) for j <= i.

    Closed form, so it doubles as an independent check on
    bernstein_matrix_inverse (T @ B_n = I).
    """
    if n < 1:
        raise DomainError("degree must be >= 1")
    with _cache_lock:
        if n not in _power_to_bernstein_cache:
            T = np.zeros((n + 1, n + 1))
            for i in range(n + 1):
                for j in range(i + 1):
                    T[i, j] = binom(i, j) / binom(n, j)
            _power_to_bernstein_cache[n] = as_readonly(T)
        return _power_to_bernstein_cache[n]


def gram_matrix(m: int, n: int) -> np.ndarray:
    """Integrals of Bernstein products: g_ij = C(m,i) C(n,j) / ((m+n+1) C(m+n, i+j))."""
    if m < 1 or n < 1:
        raise DomainError("gram_matrix needs degrees >= 1")
    with _cache_lock:
        key = (m, n)
        if key not in _gram_cache:
            G = np.empty((m + 1, n + 1))
            for i in range(m + 1):
                for j in range(n + 1):
                    G[i, j] = binom(m, i) * binom(n, j) / ((m + n + 1) * binom(m + n, i + j))
            _gram_cache[key] = as_readonly(G)
        return _gram_cache[key]


def symbolic_basis_matrix(knots: np.ndarray, p: int, q: int, center: float = 0.0) -> np.ndarray:
    """Polynomial coefficients of the p+1 basis functions alive on span q.

    Runs the Cox-de Boor recursion symbolically on coefficient rows: level-0
    functions are indicator constants on [t_q, t_{q+1}), and each level
    multiplies by the linear blend factors.  Column j of the result holds the
    coefficients of N_{q-p+j,p} in powers of (t - center).

    center=0 gives the plain power basis.  Callers chasing accuracy on curves
    with many spans should pass center=t_q: the coefficients then stay
    O(1/h^k) and the downstream reparameterization is diagonal, which avoids
    the severe cancellation the global basis suffers far from t=0.
    """
    knots = np.asarray(knots, dtype=np.float64)
    if q < p or q + 1 >= len(knots):
        raise DomainError(f"span index {q} invalid for degree {p}")
    if knots[q] >= knots[q + 1]:
        raise DegenerateSpan(f"span [{knots[q]}, {knots[q + 1]}] has zero length")
    level = {q: np.concatenate(([1.0], np.zeros(p)))}
    for j in range(1, p + 1):
        nxt = {}
        for i in range(q - j, q + 1):
            c = np.zeros(p + 1)
            left = level.get(i)
            if left is not None:
                den = knots[i + j] - knots[i]
                # (t - t_i)/den written around the center
                c[1:] += left[:-1] / den
                c += (center - knots[i]) / den * left
            right = level.get(i + 1)
            if right is not None:
                den = knots[i + j + 1] - knots[i + 1]
                c[1:] -= right[:-1] / den
                c += (knots[i + j + 1] - center) / den * right
            nxt[i] = c
        level = nxt
    A = np.empty((p + 1, p + 1))
    for j in range(p + 1):
        A[:, j] = level[q - p + j]
    return A


def basis_coefficient_matrix(curve: BSplineCurve, span_index: int) -> np.ndarray:
    """A_{q,p,T}: [1 t ... t^p] @ A @ [P_{q-p} ... P_q] reproduces the curve on span q."""
    return symbolic_basis_matrix(curve.knots.knots, curve.degree, span_index)


def reparam_matrix(t_q: float, t_q1: float, p: int) -> np.ndarray:
    """M with [1 t ... t^p] = [1 u ... u^p] @ M for t = u*(t_q1-t_q) + t_q.

    Entries from the binomial expansion: M[k, i] = C(i,k) (t_q1-t_q)^k t_q^(i-k).
    """
    if t_q >= t_q1:
        raise DegenerateSpan(f"interval [{t_q}, {t_q1}] has zero length")
    d = t_q1 - t_q
    M = np.zeros((p + 1, p + 1))
    for i in range(p + 1):
        for k in range(i + 1):
            M[k, i] = binom(i, k) * d**k * t_q ** (i - k)
    return M


def subdivision_matrices(z: float, degree: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """(S_L, S_R) splitting a Bezier at z: S_L @ P covers [0,z], S_R @ P covers [z,1].

    S_L[i, j] = C(i,j) z^j (1-z)^(i-j) for j <= i and
    S_R[i, j] = C(n-i, j-i) z^(j-i) (1-z)^(n-j) for i <= j.
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"split parameter {z} outside [0, 1]")
    n = degree
    SL = np.zeros((n + 1, n + 1))
    SR = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(i + 1):
            SL[i, j] = binom(i, j) * z**j * (1.0 - z) ** (i - j)
    for i in range(n + 1):
        for j in range(i, n + 1):
            SR[i, j] = binom(n - i, j - i) * z ** (j - i) * (1.0 - z) ** (n - j)
    return SL, SR


def bernstein_design(n: int, us: np.ndarray) -> np.ndarray:
    """Rows of Bernstein basis values B_{j,n}(u) for each sample u."""
    us = np.asarray(us, dtype=np.float64)
    cols = [binom(n, j) * us**j * (1.0 - us) ** (n - j) for j in range(n + 1)]
    return np.stack(cols, axis=1)
