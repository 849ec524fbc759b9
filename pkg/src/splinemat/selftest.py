"""Built-in invariant suites runnable from the CLI.

Each suite reports a case count and its worst residual; any residual above
the suite threshold fails the whole run.  A fault hook lets tests corrupt a
constant table and confirm the checks actually bite.
"""

import numpy as np

from . import basis, oracle
from ._fixtures import random_clamped_curve, single_span_cubic, two_span_uniform_cubic
from ._kernels import _quartic_roots_01
from .decompose import decompose_to_bezier
from .project import clip_root, rebase


def _suite_partition_of_unity(rng):
    worst = 0.0
    count = 0
    for degree in range(1, 7):
        n_control = degree + (4 if degree <= 3 else 2)
        curve = random_clamped_curve(rng, degree, n_control, 2,
                                     uniform_knots=True)
        knots = curve.knots.knots
        for q in curve.span_indices():
            A = basis.basis_coefficient_matrix(curve, q)
            ts = rng.uniform(knots[q], knots[q + 1], 20)
            rows = np.vander(ts, degree + 1, increasing=True) @ A
            worst = max(worst, float(np.abs(rows.sum(axis=1) - 1.0).max()))
            count += len(ts)
    return count, worst, 1e-12


def _suite_bernstein_inverse(rng, corrupt=None):
    worst = 0.0
    count = 0
    for p in range(2, 11):
        B = np.array(basis.bernstein_matrix(p))
        if corrupt is not None:
            B = corrupt(B)
        resid = np.abs(B @ basis.bernstein_matrix_inverse(p) - np.eye(p + 1)).max()
        worst = max(worst, float(resid))
        count += 1
    return count, worst, 1e-9


def _suite_decomposition(rng):
    worst = 0.0
    count = 0
    curves = [single_span_cubic(), two_span_uniform_cubic()]
    for degree in (2, 4, 6):
        curves.append(random_clamped_curve(rng, degree, degree + 6, 3))
    for curve in curves:
        segs = decompose_to_bezier(curve)
        ki = oracle.decompose_by_knot_insertion(curve)
        diag = float(np.linalg.norm(curve.control_points.max(axis=0)
                                    - curve.control_points.min(axis=0)))
        for a, b in zip(segs, ki):
            worst = max(worst, float(np.abs(a.control_points - b.control_points).max()) / diag)
        for seg in segs:
            ta, tb = seg.source_interval
            ts = np.linspace(ta, tb, 65)
            dev = np.linalg.norm(
                seg.evaluate((ts - ta) / (tb - ta)) - oracle.eval_de_boor_many(curve, ts),
                axis=1)
            worst = max(worst, float(dev.max()) / diag)
            count += len(ts)
    return count, worst, 1e-9


def _suite_quartic(rng):
    worst = 0.0
    count = 0
    buf = np.empty(4)
    for _ in range(500):
        c = rng.uniform(-1.0, 1.0, 5)
        n = _quartic_roots_01(c, buf)
        ref = oracle.bisect_poly_roots(c)
        if n != len(ref):
            worst = max(worst, 1.0)
        elif n:
            worst = max(worst, float(np.abs(buf[:n] - ref).max()))
        count += 1
    return count, worst, 1e-8


def _suite_clipping(rng):
    worst = 0.0
    count = 0
    for _ in range(200):
        root = rng.uniform(0.05, 0.95)
        others = rng.uniform(1.5, 4.0, 4) * rng.choice([-1.0, 1.0], 4)
        coeffs = np.polynomial.polynomial.polyfromroots([root, *others])
        e = np.zeros(6)
        e[: len(coeffs)] = coeffs
        ep = e[1:] * np.arange(1, 6)
        us = np.linspace(0.0, 1.0, 65)
        slopes = np.vander(us, 5, increasing=True) @ ep
        if slopes.min() < 0.0 < slopes.max():
            continue  # not monotone on [0,1]; the clipping contract needs monotone E
        bez = rebase(e)
        if not (bez.e_start < 0.0 <= bez.e_end):
            bez = rebase(-e)
        if not (bez.e_start < 0.0 <= bez.e_end):
            continue
        res = clip_root(bez)
        worst = max(worst, abs(res.root - root))
        count += 1
    return count, worst, 1e-6


def run_selftest(rng_seed: int = 0, corrupt_bernstein=None):
    """Run every suite; returns (ok, report_lines)."""
    rng = np.random.default_rng(rng_seed)
    suites = [
        ("partition_of_unity", lambda: _suite_partition_of_unity(rng)),
        ("bernstein_inverse", lambda: _suite_bernstein_inverse(rng, corrupt_bernstein)),
        ("decomposition_exactness", lambda: _suite_decomposition(rng)),
        ("quartic_vs_bisection", lambda: _suite_quartic(rng)),
        ("clipping_enclosure", lambda: _suite_clipping(rng)),
    ]
    ok = True
    lines = []
    for name, fn in suites:
        count, worst, threshold = fn()
        passed = worst <= threshold
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: "
                     f"count={count} max_residual={worst:.3e} (limit {threshold:g})")
    return ok, lines
