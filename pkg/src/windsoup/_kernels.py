"""Compiled inner loops: counter-hash Gaussians, bridge paths, refined winding
and resolved path maxima.

A keyed loop of duration T is one infinitely refinable object. Every dyadic
time interval of [0, T] is a heap node g (root interval 1, children 2g and
2g + 1); the bridge midpoint of node g is the Gaussian pair hashed from
(key, g). Coarse paths with 2^L steps are the level-L midpoints (Levy
construction), so segment j of a coarse path is node 2^L + j, a path with
2^(L+1) steps contains every vertex of the 2^L path, and any two queries that
bisect the same segment see the same midpoint regardless of evaluation order
or process.

Refinement stops at a finite resolution, so the winding of a terminal
segment's sub-bridge around x is not decided by its chord. Given the endpoints
a, b (relative to x) and the duration dt, the sub-bridge sweeps arg(b/a) + 2πm
with an explicit law for the sheet m (``sheet_prob``), sampled with the uniform
hashed from (key, SHEET_STREAM | g). Winding numbers are therefore exact in
law rather than resolution-limited.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
SHEET_STREAM = np.uint64(1) << np.uint64(63)
#: nodes are only bisected below this index, so 2g + 1 never reaches the stream bit
NODE_LIMIT = np.uint64(1) << np.uint64(62)
U1 = np.uint64(1)
U11 = np.uint64(11)
U27 = np.uint64(27)
U30 = np.uint64(30)
U31 = np.uint64(31)
TWO_PI = 2.0 * math.pi
INV_2_53 = 1.0 / 9007199254740992.0

MAX_DEPTH = 40
MAX_LEVEL = 21
STACK = 2 * MAX_DEPTH + 8
#: sheet corrections are skipped when P(m != 0) <= exp(-SHEET_CUT)
SHEET_CUT = 40.0
Y_MAX = 6.5
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> U30)) * MIX1
    z = (z ^ (z >> U27)) * MIX2
    return z ^ (z >> U31)


@njit(cache=True, nogil=True)
def normal_pair(key, counter):
    """Two independent standard normals for ``(key, counter)`` (Box-Muller)."""
    h1 = mix64(key ^ mix64((counter + U1) * GOLDEN))
    h2 = mix64(h1 + GOLDEN)
    u1 = (float(h1 >> U11) + 0.5) * INV_2_53
    u2 = float(h2 >> U11) * INV_2_53
    rad = math.sqrt(-2.0 * math.log(u1))
    return rad * math.cos(TWO_PI * u2), rad * math.sin(TWO_PI * u2)


@njit(cache=True, nogil=True)
def uniform01(key, counter):
    h = mix64(key ^ mix64((counter + U1) * GOLDEN))
    return float(h >> U11) * INV_2_53


@njit(cache=True, nogil=True)
def midpoint(a, b, dt, key, g):
    """Bridge midpoint of node ``g`` spanning duration ``dt`` from a to b."""
    g1, g2 = normal_pair(key, g)
    return 0.5 * (a + b) + 0.5 * math.sqrt(dt) * complex(g1, g2)


@njit(cache=True, nogil=True)
def segment_distance(a, b):
    """Distance from the origin to the segment [a, b]."""
    d = b - a
    l2 = d.real * d.real + d.imag * d.imag
    if l2 == 0.0:
        return abs(a)
    s = -(a.real * d.real + a.imag * d.imag) / l2
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return abs(a + s * d)


@njit(cache=True, nogil=True)
def turning_angle(a, b):
    """Signed angle swept around the origin going from a to b, in (-pi, pi]."""
    phi = math.atan2(a.real * b.imag - a.imag * b.real, a.real * b.real + a.imag * b.imag)
    # atan2 returns -pi for a cross product of -0.0
    return math.pi if phi == -math.pi else phi


# ---------------------------------------------------------------- winding sheets


@njit(cache=True, nogil=True)
def _sheet_panel(lo, hi, r2z, c):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    acc = 0.0
    for i in range(_GL_X.shape[0]):
        y = mid + half * _GL_X[i]
        tau = 2.0 * math.asinh(y / r2z)
        acc += _GL_W[i] * 2.0 * y * math.exp(-y * y) * math.atan(tau / c)
    return acc * half


@njit(cache=True, nogil=True)
def sheet_g(z, c):
    """∫_0^∞ c/(t² + c²) exp(-z (cosh t - 1)) dt for z > 0.

    Integrating by parts gives E[arctan(τ/c)] where z(cosh τ - 1) = y² and y²
    is a unit exponential. The y-integrand is smooth; its scales are √(2z)
    (where τ turns logarithmic) and √(2z) sinh(c/2) (where τ = c), so the
    panels are graded geometrically from below both.
    """
    if c == 0.0:
        return 0.0
    sgn = 1.0 if c > 0.0 else -1.0
    c = abs(c)
    r2z = math.sqrt(2.0 * z)
    y0 = min(r2z, r2z * math.sinh(0.5 * c) if c < 700.0 else np.inf, 1.0) * 0.25
    total = _sheet_panel(0.0, y0, r2z, c)
    lo = y0
    while lo < Y_MAX:
        hi = min(2.0 * lo, Y_MAX)
        total += _sheet_panel(lo, hi, r2z, c)
        lo = hi
    return sgn * total


@njit(cache=True, nogil=True)
def _sheet_gk(z, phi0, k):
    c = phi0 + (2 * k + 1) * math.pi
    # phi0 = pi is the limit from below, where G(z, 0-) = -pi/2
    return -0.5 * math.pi if c == 0.0 else sheet_g(z, c)


@njit(cache=True, nogil=True)
def sheet_prob(m, z, phi0):
    """P(sheet = m) for a bridge of duration dt from a to b around the origin.

    ``z = |a||b|/dt`` and ``phi0 = arg(b/a)`` in (-π, π]; the swept angle is
    phi0 + 2πm. With g_k = G(z, phi0 + (2k+1)π) the law telescopes:
    P(m) = [m == 0] + e^{-z(1 + cos phi0)} (g_{m-1} - g_m)/π.
    """
    e = math.exp(-z * (1.0 + math.cos(phi0)))
    p = e / math.pi * (_sheet_gk(z, phi0, m - 1) - _sheet_gk(z, phi0, m))
    return 1.0 + p if m == 0 else p


@njit(cache=True, nogil=True)
def _first_crossing(z, phi0, k0, step, thresh, below):
    """Smallest |k - k0| in direction ``step`` with g_k < thresh (``below``) or g_k > thresh."""
    k_ok = k0
    n = 1
    while True:
        k = k0 + step * n
        g = _sheet_gk(z, phi0, k)
        if (g < thresh) if below else (g > thresh):
            break
        k_ok = k
        if n >= 1 << 40:
            return k
        n *= 2
    lo = k_ok
    hi = k
    while abs(hi - lo) > 1:
        mid = lo + step * (abs(hi - lo) // 2)
        g = _sheet_gk(z, phi0, mid)
        if (g < thresh) if below else (g > thresh):
            hi = mid
        else:
            lo = mid
    return hi


@njit(cache=True, nogil=True)
def sample_sheet(z, phi0, u):
    """Inverse-CDF draw of the sheet: u in [0, P(0)) gives 0, then the positive
    sheets in increasing order, then the negative ones in decreasing order."""
    e = math.exp(-z * (1.0 + math.cos(phi0))) / math.pi
    g0 = _sheet_gk(z, phi0, 0)
    gm1 = _sheet_gk(z, phi0, -1)
    pos = e * g0
    neg = -e * gm1
    u -= 1.0 - pos - neg
    if u < 0.0:
        return 0
    if u < pos:
        # P(1 <= m <= M) = e (g_0 - g_M)
        return _first_crossing(z, phi0, 0, 1, g0 - u / e, True)
    u -= pos
    # P(-M <= m <= -1) = e (g_{-M-1} - g_{-1})
    return _first_crossing(z, phi0, -1, -1, gm1 + u / e, False) + 1


@njit(cache=True, nogil=True)
def segment_sheet(a, b, dt, key, g):
    """Sheet correction (in turns) for the sub-bridge a -> b; 0 when negligible."""
    ra = abs(a)
    rb = abs(b)
    q = (ra * rb + a.real * b.real + a.imag * b.imag) / dt
    if q > SHEET_CUT:
        return 0
    u = uniform01(key, SHEET_STREAM | g)
    # P(m != 0) <= exp(-q), so the inverse CDF lands on m = 0 without evaluating it
    if u < -math.expm1(-q):
        return 0
    return sample_sheet(ra * rb / dt, turning_angle(a, b), u)


# ---------------------------------------------------------------- paths


@njit(cache=True, nogil=True)
def fill_bridge(root, duration, level, key, verts, times, nodes):
    """Exact planar Brownian bridge root -> root at 2^level + 1 equally spaced times.

    Unit diffusivity: each coordinate of an increment over dt has variance dt.
    """
    n = 1 << level
    verts[0] = root
    verts[n] = root
    for lv in range(level):
        seg = n >> lv
        half = seg >> 1
        dt = duration / (1 << lv)
        base = np.uint64(1 << lv)
        for i in range(1 << lv):
            lo = i * seg
            verts[lo + half] = midpoint(verts[lo], verts[lo + seg], dt, key, base + np.uint64(i))
    for j in range(n + 1):
        times[j] = duration * j / n
        nodes[j] = np.uint64(n + j) if j < n else np.uint64(0)


@njit(cache=True, nogil=True)
def fill_bridges(roots, durations, levels, keys, offsets, verts, times, nodes):
    for i in range(roots.shape[0]):
        lo = offsets[i]
        hi = offsets[i + 1]
        fill_bridge(roots[i], durations[i], levels[i], keys[i], verts[lo:hi], times[lo:hi],
                    nodes[lo:hi])


@njit(cache=True, nogil=True)
def polygon_angle(verts, x):
    total = 0.0
    mind = np.inf
    for j in range(verts.shape[0] - 1):
        a = verts[j] - x
        b = verts[j + 1] - x
        total += turning_angle(a, b)
        d = segment_distance(a, b)
        if d < mind:
            mind = d
    return total, mind


@njit(cache=True, nogil=True)
def refined_angle(verts, clock, nodes, key, x, target, eps, max_depth, factor):
    """Total angle swept around ``x``, bisecting segments near ``x``.

    A segment of duration dt is bisected while its distance to x is below
    ``factor * sqrt(dt)``, ``sqrt(dt) >= target`` and depth < ``max_depth``.
    Terminal segments that are still near x get their sheet sampled.
    Returns (angle, n_ill, min_distance, n_nodes); ``n_ill`` counts terminal
    segments passing within ``eps`` of x.
    """
    sa = np.empty(STACK, np.complex128)
    sb = np.empty(STACK, np.complex128)
    sdt = np.empty(STACK, np.float64)
    sg = np.empty(STACK, np.uint64)
    sdep = np.empty(STACK, np.int64)
    total = 0.0
    n_ill = 0
    n_nodes = 0
    mind = np.inf
    for j in range(verts.shape[0] - 1):
        sa[0] = verts[j] - x
        sb[0] = verts[j + 1] - x
        sdt[0] = clock[j + 1] - clock[j]
        sg[0] = nodes[j]
        sdep[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            a = sa[sp]
            b = sb[sp]
            dt = sdt[sp]
            g = sg[sp]
            dep = sdep[sp]
            d = segment_distance(a, b)
            s = math.sqrt(dt)
            near = d < factor * s
            if near and dep < max_depth and s >= target and g < NODE_LIMIT:
                m = midpoint(a, b, dt, key, g)
                n_nodes += 1
                sa[sp] = m
                sb[sp] = b
                sdt[sp] = 0.5 * dt
                sg[sp] = g + g + U1
                sdep[sp] = dep + 1
                sa[sp + 1] = a
                sb[sp + 1] = m
                sdt[sp + 1] = 0.5 * dt
                sg[sp + 1] = g + g
                sdep[sp + 1] = dep + 1
                sp += 2
            else:
                if d < mind:
                    mind = d
                total += turning_angle(a, b)
                if d <= eps:
                    n_ill += 1
                elif near:
                    total += TWO_PI * segment_sheet(a, b, dt, key, g)
    return total, n_ill, mind, n_nodes


@njit(cache=True, nogil=True)
def refine_path(verts, clock, nodes, key, x, target, max_depth, factor):
    """Materialize the bisections performed by ``refined_angle``.

    Returns (vertices, clock, nodes, n_unresolved); ``n_unresolved`` counts
    segments that hit ``max_depth`` while still requiring refinement.
    """
    n = verts.shape[0] - 1
    cap = verts.shape[0] + 64
    out_v = np.empty(cap, np.complex128)
    out_t = np.empty(cap, np.float64)
    out_g = np.empty(cap, np.uint64)
    sa = np.empty(STACK, np.complex128)
    sb = np.empty(STACK, np.complex128)
    sta = np.empty(STACK, np.float64)
    stb = np.empty(STACK, np.float64)
    sg = np.empty(STACK, np.uint64)
    sdep = np.empty(STACK, np.int64)
    unresolved = 0
    out_v[0] = verts[0]
    out_t[0] = clock[0]
    k = 0
    for j in range(n):
        sa[0] = verts[j]
        sb[0] = verts[j + 1]
        sta[0] = clock[j]
        stb[0] = clock[j + 1]
        sg[0] = nodes[j]
        sdep[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            a = sa[sp]
            b = sb[sp]
            ta = sta[sp]
            tb = stb[sp]
            g = sg[sp]
            dep = sdep[sp]
            dt = tb - ta
            s = math.sqrt(dt)
            near = segment_distance(a - x, b - x) < factor * s
            if near and dep < max_depth and s >= target and g < NODE_LIMIT:
                m = midpoint(a, b, dt, key, g)
                tm = 0.5 * (ta + tb)
                sa[sp] = m
                sb[sp] = b
                sta[sp] = tm
                stb[sp] = tb
                sg[sp] = g + g + U1
                sdep[sp] = dep + 1
                sa[sp + 1] = a
                sb[sp + 1] = m
                sta[sp + 1] = ta
                stb[sp + 1] = tm
                sg[sp + 1] = g + g
                sdep[sp + 1] = dep + 1
                sp += 2
            else:
                if near and s >= target:
                    unresolved += 1
                if k + 2 >= cap:
                    cap *= 2
                    nv = np.empty(cap, np.complex128)
                    nt = np.empty(cap, np.float64)
                    ng = np.empty(cap, np.uint64)
                    nv[:k + 1] = out_v[:k + 1]
                    nt[:k + 1] = out_t[:k + 1]
                    ng[:k + 1] = out_g[:k + 1]
                    out_v = nv
                    out_t = nt
                    out_g = ng
                out_g[k] = g
                out_v[k + 1] = b
                out_t[k + 1] = tb
                k += 1
    out_g[k] = 0
    return out_v[:k + 1].copy(), out_t[:k + 1].copy(), out_g[:k + 1].copy(), unresolved


@njit(cache=True, nogil=True)
def mobius_abs(z, x, radius):
    """|j_x(z)| for the disc of the given radius: j_x(z) = R(z - x)/(R^2 - conj(x) z)."""
    return abs(radius * (z - x) / (radius * radius - x.conjugate() * z))


@njit(cache=True, nogil=True)
def _cut_index(cuts, best):
    i = 0
    while i < cuts.shape[0] and cuts[i] <= best:
        i += 1
    return i


@njit(cache=True, nogil=True)
def resolved_max(verts, clock, nodes, key, x, radius, tol, cuts, max_depth, factor):
    """Maximum of |j_x| along the refined path, by branch and bound.

    A segment's sub-path is assumed to stay within ``factor * sqrt(dt)`` of its
    chord; |j_x| is bounded on that neighbourhood through the Lipschitz constant
    of the Moebius map.

    With ``cuts`` empty, segments whose bound cannot beat the running maximum by
    more than ``tol`` are discarded and the maximum is resolved to ``tol``.
    Otherwise ``cuts`` is sorted and only the bracket of the maximum matters:
    a segment is discarded when its bound stays below the next cut above the
    running maximum, and the search stops once the last cut is reached. The
    result then lies in the same bracket [cuts[i], cuts[i+1]) as the true max.
    """
    nc = cuts.shape[0]
    best = 0.0
    for j in range(verts.shape[0]):
        v = mobius_abs(verts[j], x, radius)
        if v > best:
            best = v
    ic = _cut_index(cuts, best)
    if nc > 0 and ic == nc:
        return best
    r2 = radius * radius
    ax = abs(x)
    sa = np.empty(STACK, np.complex128)
    sb = np.empty(STACK, np.complex128)
    sdt = np.empty(STACK, np.float64)
    sg = np.empty(STACK, np.uint64)
    sdep = np.empty(STACK, np.int64)
    for j in range(verts.shape[0] - 1):
        sa[0] = verts[j]
        sb[0] = verts[j + 1]
        sdt[0] = clock[j + 1] - clock[j]
        sg[0] = nodes[j]
        sdep[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            a = sa[sp]
            b = sb[sp]
            dt = sdt[sp]
            g = sg[sp]
            dep = sdep[sp]
            if dep >= max_depth or g >= NODE_LIMIT:
                continue
            reach = 0.5 * abs(b - a) + factor * math.sqrt(dt)
            rho = max(abs(a), abs(b)) + reach
            if ax * rho < 0.999 * r2:
                q = r2 - ax * rho
                lip = radius * (r2 - ax * ax) / (q * q)
                ub = max(mobius_abs(a, x, radius), mobius_abs(b, x, radius)) + lip * reach
                if nc == 0:
                    if ub <= best + tol:
                        continue
                elif ub < cuts[ic]:
                    continue
            m = midpoint(a, b, dt, key, g)
            v = mobius_abs(m, x, radius)
            if v > best:
                best = v
                if nc > 0:
                    ic = _cut_index(cuts, best)
                    if ic == nc:
                        return best
            sa[sp] = m
            sb[sp] = b
            sdt[sp] = 0.5 * dt
            sg[sp] = g + g + U1
            sdep[sp] = dep + 1
            sa[sp + 1] = a
            sb[sp + 1] = m
            sdt[sp + 1] = 0.5 * dt
            sg[sp + 1] = g + g
            sdep[sp + 1] = dep + 1
            sp += 2
    return best


# ---------------------------------------------------------------- batch kernels


@njit(cache=True, nogil=True)
def bridge_windings(roots, keys, duration, level, x, target, eps, max_depth, factor):
    """Winding numbers around ``x`` of independent bridges (whole plane)."""
    n = roots.shape[0]
    m = (1 << level) + 1
    wind = np.empty(n, np.int64)
    ill = np.zeros(n, np.int64)
    verts = np.empty(m, np.complex128)
    times = np.empty(m, np.float64)
    nodes = np.empty(m, np.uint64)
    for i in range(n):
        fill_bridge(roots[i], duration, level, keys[i], verts, times, nodes)
        ang, n_ill, _, _ = refined_angle(verts, times, nodes, keys[i], x, target, eps,
                                         max_depth, factor)
        wind[i] = int(round(ang / TWO_PI))
        ill[i] = n_ill
    return wind, ill


@njit(cache=True, nogil=True)
def screen_pairs(roots, durations, points, sigma):
    """(loop, point) pairs with |root - x| < sigma * sqrt(duration), loop-major
    and in point order within a loop. Points are swept in order of real part."""
    n = roots.shape[0]
    order = np.argsort(points.real)
    xs = points.real[order]
    cap = 1024
    li = np.empty(cap, np.int64)
    pi = np.empty(cap, np.int64)
    k = 0
    for i in range(n):
        lim = sigma * math.sqrt(durations[i])
        lo = np.searchsorted(xs, roots[i].real - lim)
        hi = np.searchsorted(xs, roots[i].real + lim, side="right")
        k0 = k
        for q in range(lo, hi):
            p = order[q]
            if abs(roots[i] - points[p]) < lim:
                if k == cap:
                    cap *= 2
                    li2 = np.empty(cap, np.int64)
                    pi2 = np.empty(cap, np.int64)
                    li2[:k] = li[:k]
                    pi2[:k] = pi[:k]
                    li = li2
                    pi = pi2
                li[k] = i
                pi[k] = p
                k += 1
        if k - k0 > 1:
            pi[k0:k] = np.sort(pi[k0:k])
    return li[:k].copy(), pi[:k].copy()


@njit(cache=True, nogil=True)
def padded_bboxes(offsets, verts, clock, factor):
    """Vertex bounding boxes grown by ``factor * sqrt(max coarse dt)``."""
    n = offsets.shape[0] - 1
    out = np.empty((n, 4), np.float64)
    for i in range(n):
        lo = offsets[i]
        hi = offsets[i + 1]
        x0 = np.inf
        x1 = -np.inf
        y0 = np.inf
        y1 = -np.inf
        dtmax = 0.0
        for k in range(lo, hi):
            z = verts[k]
            x0 = min(x0, z.real)
            x1 = max(x1, z.real)
            y0 = min(y0, z.imag)
            y1 = max(y1, z.imag)
            if k > lo:
                dtmax = max(dtmax, clock[k] - clock[k - 1])
        pad = factor * math.sqrt(dtmax)
        out[i, 0] = x0 - pad
        out[i, 1] = x1 + pad
        out[i, 2] = y0 - pad
        out[i, 3] = y1 + pad
    return out


@njit(cache=True, nogil=True)
def pair_angles(offsets, verts, clock, nodes, keys, pair_loop, pair_point, points,
                target, eps, max_depth, factor):
    n = pair_loop.shape[0]
    ang = np.empty(n, np.float64)
    ill = np.empty(n, np.int64)
    for k in range(n):
        i = pair_loop[k]
        lo = offsets[i]
        hi = offsets[i + 1]
        a, n_ill, _, _ = refined_angle(verts[lo:hi], clock[lo:hi], nodes[lo:hi], keys[i],
                                       points[pair_point[k]], target, eps, max_depth, factor)
        ang[k] = a
        ill[k] = n_ill
    return ang, ill


@njit(cache=True, nogil=True)
def pair_reach(offsets, verts, clock, nodes, keys, pair_loop, pair_point, points,
               radius, tol, cuts, max_depth, factor):
    n = pair_loop.shape[0]
    out = np.empty(n, np.float64)
    for k in range(n):
        i = pair_loop[k]
        lo = offsets[i]
        hi = offsets[i + 1]
        out[k] = resolved_max(verts[lo:hi], clock[lo:hi], nodes[lo:hi], keys[i],
                              points[pair_point[k]], radius, tol, cuts, max_depth, factor)
    return out


@njit(cache=True, nogil=True)
def loops_inside(offsets, verts, clock, nodes, keys, radius, tol, max_depth, factor):
    """True for loops whose refined path stays strictly inside the disc."""
    n = offsets.shape[0] - 1
    out = np.empty(n, np.bool_)
    one = np.ones(1)
    for i in range(n):
        lo = offsets[i]
        hi = offsets[i + 1]
        m = resolved_max(verts[lo:hi], clock[lo:hi], nodes[lo:hi], keys[i], 0j, radius, tol, one,
                         max_depth, factor)
        out[i] = m < 1.0
    return out
