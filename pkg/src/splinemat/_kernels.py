"""Hot numeric kernels for the per-query projection pipeline.

Everything here is written as plain scalar/ndarray code so it runs
identically on the pure-numpy fallback path; with numba on, each function is
jitted (cache=True, nogil=True) and the batch driver fans queries out over
threads.  Per-query results land in dedicated output slots, so values are
bitwise identical for any worker count.
"""

import math

import numpy as np

from ._accel import njit
from .basis import bernstein_matrix, power_to_bernstein_matrix

_B3 = bernstein_matrix(3)
_T5 = power_to_bernstein_matrix(5)


@njit
def _polish_root(c0, c1, c2, c3, c4, x):
    # two guarded Newton steps against the full quartic
    for _ in range(2):
        f = c0 + x * (c1 + x * (c2 + x * (c3 + x * c4)))
        df = c1 + x * (2.0 * c2 + x * (3.0 * c3 + x * 4.0 * c4))
        if df != 0.0:
            step = f / df
            if abs(step) < 0.5:
                x -= step
    return x


@njit
def _quad_roots(c0, c1, c2, out, n):
    """Append real roots of c2 x^2 + c1 x + c0 to out[n:]; return new count."""
    if c2 == 0.0:
        if c1 != 0.0:
            out[n] = -c0 / c1
            n += 1
        return n
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return n
    sq = math.sqrt(disc)
    if c1 >= 0.0:
        qq = -0.5 * (c1 + sq)
    else:
        qq = -0.5 * (c1 - sq)
    out[n] = qq / c2
    n += 1
    if qq != 0.0:
        out[n] = c0 / qq
        n += 1
    return n


@njit
def _cubic_roots(c0, c1, c2, c3, out, n):
    """Append the real roots of the cubic to out[n:]; return new count."""
    if c3 == 0.0:
        return _quad_roots(c0, c1, c2, out, n)
    b = c2 / c3
    c = c1 / c3
    d = c0 / c3
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    off = -b / 3.0
    disc = -4.0 * p ** 3 - 27.0 * q * q
    if disc >= 0.0 and p < 0.0:
        # three real roots, trigonometric form
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        if arg > 1.0:
            arg = 1.0
        elif arg < -1.0:
            arg = -1.0
        th = math.acos(arg) / 3.0
        for k in range(3):
            out[n] = m * math.cos(th - 2.0943951023931953 * k) + off
            n += 1
        return n
    srt = math.sqrt(max(q * q / 4.0 + p ** 3 / 27.0, 0.0))
    u = -q / 2.0 + srt
    v = -q / 2.0 - srt
    out[n] = np.cbrt(u) + np.cbrt(v) + off
    n += 1
    return n


@njit
def _quartic_roots_01(c, out):
    """Real roots of the degree<=4 polynomial c in [0,1]: Ferrari closed form.

    A leading coefficient below 1e-12 of the coefficient scale cascades to
    the cubic (Cardano), quadratic, and linear closed forms.  Candidates get
    two Newton polish steps, a residual filter at 1e-9 of the coefficient
    scale, then sorting and 1e-10 dedup.  Returns the root count.
    """
    scale = 0.0
    for i in range(5):
        a = abs(c[i])
        if a > scale:
            scale = a
    if scale == 0.0:
        return 0
    eps = 1e-12 * scale
    cand = np.empty(6)
    n = 0
    if abs(c[4]) <= eps:
        if abs(c[3]) <= eps:
            n = _quad_roots(c[0], c[1], c[2], cand, 0)
        else:
            n = _cubic_roots(c[0], c[1], c[2], c[3], cand, 0)
    else:
        b3 = c[3] / c[4]
        b2 = c[2] / c[4]
        b1 = c[1] / c[4]
        b0 = c[0] / c[4]
        p = b2 - 3.0 * b3 * b3 / 8.0
        q = b1 - b3 * b2 / 2.0 + b3 ** 3 / 8.0
        r = b0 - b3 * b1 / 4.0 + b3 * b3 * b2 / 16.0 - 3.0 * b3 ** 4 / 256.0
        off = -b3 / 4.0
        qscale = max(1.0, abs(p))
        qscale = max(qscale, abs(r))
        if abs(q) <= 1e-14 * qscale:
            # biquadratic in y^2
            zbuf = np.empty(6)
            zn = _quad_roots(r, p, 1.0, zbuf, 0)
            for i in range(zn):
                if zbuf[i] >= 0.0:
                    s = math.sqrt(zbuf[i])
                    cand[n] = s + off
                    cand[n + 1] = -s + off
                    n += 2
        else:
            # resolvent cubic 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0
            mbuf = np.empty(6)
            mn = _cubic_roots(-q * q, 2.0 * p * p - 8.0 * r, 8.0 * p, 8.0, mbuf, 0)
            m = mbuf[0]
            for i in range(1, mn):
                if mbuf[i] > m:
                    m = mbuf[i]
            if m > 0.0:
                s = math.sqrt(2.0 * m)
                n = _quad_roots(p / 2.0 + m - q / (2.0 * s), s, 1.0, cand, n)
                n = _quad_roots(p / 2.0 + m + q / (2.0 * s), -s, 1.0, cand, n)
                for i in range(n):
                    cand[i] += off
    # polish, filter to [0,1], residual check
    kept = 0
    for i in range(n):
        x = _polish_root(c[0], c[1], c[2], c[3], c[4], cand[i])
        f = c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])))
        if abs(f) <= 1e-9 * scale and -1e-12 <= x <= 1.0 + 1e-12:
            if x < 0.0:
                x = 0.0
            elif x > 1.0:
                x = 1.0
            cand[kept] = x
            kept += 1
    # insertion sort + dedup within 1e-10
    for i in range(1, kept):
        x = cand[i]
        j = i - 1
        while j >= 0 and cand[j] > x:
            cand[j + 1] = cand[j]
            j -= 1
        cand[j + 1] = x
    m = 0
    for i in range(kept):
        if m == 0 or cand[i] - out[m - 1] > 1e-10:
            if m < 4:
                out[m] = cand[i]
                m += 1
    return m


@njit
def _distance_poly(P, q, e):
    """Power coefficients of E(u) = 2 (C(u) - q) . C'(u) for a cubic C."""
    d = P.shape[1]
    for k in range(6):
        e[k] = 0.0
    for dim in range(d):
        w0 = _B3[0, 0] * P[0, dim] + _B3[0, 1] * P[1, dim] + _B3[0, 2] * P[2, dim] + _B3[0, 3] * P[3, dim]
        w1 = _B3[1, 0] * P[0, dim] + _B3[1, 1] * P[1, dim] + _B3[1, 2] * P[2, dim] + _B3[1, 3] * P[3, dim]
        w2 = _B3[2, 0] * P[0, dim] + _B3[2, 1] * P[1, dim] + _B3[2, 2] * P[2, dim] + _B3[2, 3] * P[3, dim]
        w3 = _B3[3, 0] * P[0, dim] + _B3[3, 1] * P[1, dim] + _B3[3, 2] * P[2, dim] + _B3[3, 3] * P[3, dim]
        w0 -= q[dim]
        d0 = w1
        d1 = 2.0 * w2
        d2 = 3.0 * w3
        e[0] += 2.0 * w0 * d0
        e[1] += 2.0 * (w0 * d1 + w1 * d0)
        e[2] += 2.0 * (w0 * d2 + w1 * d1 + w2 * d0)
        e[3] += 2.0 * (w1 * d2 + w2 * d1 + w3 * d0)
        e[4] += 2.0 * (w2 * d2 + w3 * d1)
        e[5] += 2.0 * w3 * d2


@njit
def _restrict_ordinates(b, lo, hi):
    """Ordinates of the scalar Bernstein polynomial restricted to [lo, hi]."""
    n = b.shape[0] - 1
    cur = b.copy()
    if lo > 0.0:
        right = np.empty(n + 1)
        right[n] = cur[n]
        tmp = cur.copy()
        for k in range(1, n + 1):
            for i in range(n + 1 - k):
                tmp[i] = (1.0 - lo) * tmp[i] + lo * tmp[i + 1]
            right[n - k] = tmp[n - k]
        cur = right
        hi = (hi - lo) / (1.0 - lo)
    if hi < 1.0:
        left = np.empty(n + 1)
        left[0] = cur[0]
        tmp = cur.copy()
        for k in range(1, n + 1):
            for i in range(n + 1 - k):
                tmp[i] = (1.0 - hi) * tmp[i] + hi * tmp[i + 1]
            left[k] = tmp[0]
        cur = left
    return cur


@njit
def _eval_ordinates(b, u):
    n = b.shape[0] - 1
    tmp = b.copy()
    for k in range(n):
        for i in range(n - k):
            tmp[i] = (1.0 - u) * tmp[i] + u * tmp[i + 1]
    return tmp[0]


@njit
def _hull_cross(b):
    """Axis crossings of the convex hull of (i/n, b_i).

    Returns (found, z1, z2): the abscissa range where the hull meets y = 0.
    Abscissae are strictly increasing, so the monotone chains come from two
    linear scans; if every ordinate shares a strict sign there is no hull
    crossing and found is False.
    """
    n = b.shape[0] - 1
    xs = np.empty(n + 1)
    for i in range(n + 1):
        xs[i] = i / n
    lox = np.empty(n + 1)
    loy = np.empty(n + 1)
    hix = np.empty(n + 1)
    hiy = np.empty(n + 1)
    nl = 0
    nh = 0
    for i in range(n + 1):
        x = xs[i]
        y = b[i]
        while nl > 1 and ((lox[nl - 1] - lox[nl - 2]) * (y - loy[nl - 2])
                          - (x - lox[nl - 2]) * (loy[nl - 1] - loy[nl - 2])) <= 0.0:
            nl -= 1
        lox[nl] = x
        loy[nl] = y
        nl += 1
        while nh > 1 and ((hix[nh - 1] - hix[nh - 2]) * (y - hiy[nh - 2])
                          - (x - hix[nh - 2]) * (hiy[nh - 1] - hiy[nh - 2])) >= 0.0:
            nh -= 1
        hix[nh] = x
        hiy[nh] = y
        nh += 1
    z1 = 2.0
    z2 = -1.0
    for chain in range(2):
        if chain == 0:
            cx, cy, m = lox, loy, nl
        else:
            cx, cy, m = hix, hiy, nh
        for i in range(m - 1):
            y0 = cy[i]
            y1 = cy[i + 1]
            if y0 == 0.0:
                z = cx[i]
            elif y1 == 0.0:
                z = cx[i + 1]
            elif (y0 < 0.0 < y1) or (y1 < 0.0 < y0):
                z = cx[i] + (cx[i + 1] - cx[i]) * (-y0) / (y1 - y0)
            else:
                continue
            if z < z1:
                z1 = z
            if z > z2:
                z2 = z
        if m > 0 and cy[m - 1] == 0.0:
            z = cx[m - 1]
            if z < z1:
                z1 = z
            if z > z2:
                z2 = z
    if z2 < z1:
        return False, 0.0, 0.0
    return True, z1, z2


@njit
def _clip_root(b, tol, max_iter, widths):
    """Subdivision-free Bezier clipping toward the single root of b.

    Iterates hull crossing + clip, composing the running interval affinely.
    widths[k] records the enclosure width after iteration k+1 (final width
    repeated once converged).  Returns (root, ok, iterations_used).
    """
    lo = 0.0
    hi = 1.0
    cur = b.copy()
    used = 0
    for it in range(max_iter):
        found, z1, z2 = _hull_cross(cur)
        if not found:
            for k in range(it, max_iter):
                widths[k] = hi - lo
            return 0.5 * (lo + hi), False, it
        used = it + 1
        nlo = lo + z1 * (hi - lo)
        nhi = lo + z2 * (hi - lo)
        if z2 - z1 < 1e-15:
            lo = nlo
            hi = nlo
            for k in range(it, max_iter):
                widths[k] = 0.0
            return nlo, True, used
        cur = _restrict_ordinates(cur, z1, z2)
        lo = nlo
        hi = nhi
        widths[it] = hi - lo
        if hi - lo <= tol:
            for k in range(it + 1, max_iter):
                widths[k] = hi - lo
            return 0.5 * (lo + hi), True, used
    return 0.5 * (lo + hi), True, used


@njit
def _decasteljau_point(P, u, out):
    d = P.shape[1]
    for dim in range(d):
        b0 = P[0, dim]
        b1 = P[1, dim]
        b2 = P[2, dim]
        b3 = P[3, dim]
        b0 = (1.0 - u) * b0 + u * b1
        b1 = (1.0 - u) * b1 + u * b2
        b2 = (1.0 - u) * b2 + u * b3
        b0 = (1.0 - u) * b0 + u * b1
        b1 = (1.0 - u) * b1 + u * b2
        out[dim] = (1.0 - u) * b0 + u * b1


@njit
def _matvec6(T, x, out):
    for i in range(6):
        acc = 0.0
        for j in range(6):
            acc += T[i, j] * x[j]
        out[i] = acc


@njit
def _project_block(seg_pts, seg_ta, seg_tb, seam_t, seam_pt, queries,
                   clip_tol, max_iter, soundness_samples,
                   out_t, out_foot, out_dist, out_cand, out_stats, out_sound):
    """Project a block of queries against one prepared curve.

    Per query: seam candidates, then per cubic segment a monotonic split at
    the roots of E', elimination on the piece ordinates, clipping of the
    survivors, and an order-independent min reduction (smallest distance,
    ties within 1e-12 broken by smallest parameter).

    out_stats columns: surviving pieces, clips with local width <= tol after
    3 iterations, same in source-parameter units, converged final (local),
    converged final (source units), hull-never-crossed flags.
    When soundness_samples > 0, out_sound gets the minimum squared distance
    sampled on the pieces elimination dropped (inf when none was dropped).
    """
    S = seg_pts.shape[0]
    d = seg_pts.shape[2]
    nq = queries.shape[0]
    maxc = (S + 1) + 5 * S
    cand_t = np.empty(maxc)
    cand_d = np.empty(maxc)
    cand_f = np.empty((maxc, d))
    e = np.empty(6)
    ep = np.empty(5)
    roots = np.empty(4)
    bseg = np.empty(6)
    bounds = np.empty(6)
    widths = np.empty(max_iter)
    foot = np.empty(d)

    for nidx in range(nq):
        q = queries[nidx]
        m = 0
        for s in range(S + 1):
            acc = 0.0
            for dim in range(d):
                diff = q[dim] - seam_pt[s, dim]
                acc += diff * diff
            cand_t[m] = seam_t[s]
            cand_d[m] = math.sqrt(acc)
            for dim in range(d):
                cand_f[m, dim] = seam_pt[s, dim]
            m += 1
        pieces = 0
        conv3_l = 0
        conv3_g = 0
        convf_l = 0
        convf_g = 0
        noroot = 0
        sound_min = np.inf
        for s in range(S):
            P = seg_pts[s]
            _distance_poly(P, q, e)
            for k in range(5):
                ep[k] = (k + 1) * e[k + 1]
            nr = _quartic_roots_01(ep, roots)
            nb = 0
            bounds[0] = 0.0
            nb = 1
            for i in range(nr):
                if 1e-10 < roots[i] < 1.0 - 1e-10:
                    bounds[nb] = roots[i]
                    nb += 1
            bounds[nb] = 1.0
            nb += 1
            _matvec6(_T5, e, bseg)
            for k in range(nb - 1):
                lo = bounds[k]
                hi = bounds[k + 1]
                bp = _restrict_ordinates(bseg, lo, hi)
                if not (bp[0] < 0.0 and bp[0] * bp[5] <= 0.0):
                    if soundness_samples > 0:
                        for si in range(soundness_samples):
                            v = lo + (hi - lo) * si / (soundness_samples - 1.0)
                            _decasteljau_point(P, v, foot)
                            acc = 0.0
                            for dim in range(d):
                                diff = q[dim] - foot[dim]
                                acc += diff * diff
                            if acc < sound_min:
                                sound_min = acc
                    continue
                pieces += 1
                root, ok, used = _clip_root(bp, clip_tol, max_iter, widths)
                if not ok:
                    noroot += 1
                    continue
                gscale = (hi - lo) * (seg_tb[s] - seg_ta[s])
                w3 = widths[2] if max_iter > 2 else widths[max_iter - 1]
                wf = widths[max_iter - 1]
                if w3 <= clip_tol:
                    conv3_l += 1
                if w3 * gscale <= clip_tol:
                    conv3_g += 1
                if wf <= clip_tol:
                    convf_l += 1
                if wf * gscale <= clip_tol:
                    convf_g += 1
                v = lo + root * (hi - lo)
                _decasteljau_point(P, v, foot)
                acc = 0.0
                for dim in range(d):
                    diff = q[dim] - foot[dim]
                    acc += diff * diff
                cand_t[m] = seg_ta[s] + v * (seg_tb[s] - seg_ta[s])
                cand_d[m] = math.sqrt(acc)
                for dim in range(d):
                    cand_f[m, dim] = foot[dim]
                m += 1
        # order-independent reduction: min distance, then min t inside the tie band
        dmin = np.inf
        for i in range(m):
            if cand_d[i] < dmin:
                dmin = cand_d[i]
        best = -1
        tbest = np.inf
        for i in range(m):
            if cand_d[i] <= dmin + 1e-12 and cand_t[i] < tbest:
                tbest = cand_t[i]
                best = i
        out_t[nidx] = cand_t[best]
        out_dist[nidx] = cand_d[best]
        for dim in range(d):
            out_foot[nidx, dim] = cand_f[best, dim]
        out_cand[nidx] = m
        out_stats[nidx, 0] = pieces
        out_stats[nidx, 1] = conv3_l
        out_stats[nidx, 2] = conv3_g
        out_stats[nidx, 3] = convf_l
        out_stats[nidx, 4] = convf_g
        out_stats[nidx, 5] = noroot
        out_sound[nidx] = sound_min


@njit
def _quartic_block(coeffs, out_roots, out_counts):
    buf = np.empty(4)
    for i in range(coeffs.shape[0]):
        n = _quartic_roots_01(coeffs[i], buf)
        out_counts[i] = n
        for k in range(n):
            out_roots[i, k] = buf[k]


@njit
def _newton_quartic_block(coeffs, out_roots, out_counts):
    """Multistart Newton baseline for the bench report (not a production path)."""
    for i in range(coeffs.shape[0]):
        c = coeffs[i]
        scale = 0.0
        for j in range(5):
            a = abs(c[j])
            if a > scale:
                scale = a
        found = np.empty(8)
        nf = 0
        for s in range(8):
            x = s / 7.0
            converged = False
            for _ in range(40):
                f = c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])))
                df = c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]))
                if df == 0.0:
                    break
                step = f / df
                x -= step
                if abs(step) < 1e-14:
                    converged = True
                    break
            if not converged:
                continue
            f = c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])))
            if abs(f) <= 1e-9 * scale and -1e-12 <= x <= 1.0 + 1e-12:
                if x < 0.0:
                    x = 0.0
                elif x > 1.0:
                    x = 1.0
                dup = False
                for k in range(nf):
                    if abs(found[k] - x) <= 1e-10:
                        dup = True
                        break
                if not dup and nf < 8:
                    found[nf] = x
                    nf += 1
        for a in range(1, nf):
            x = found[a]
            b = a - 1
            while b >= 0 and found[b] > x:
                found[b + 1] = found[b]
                b -= 1
            found[b + 1] = x
        nkeep = min(nf, 4)
        out_counts[i] = nkeep
        for k in range(nkeep):
            out_roots[i, k] = found[k]
