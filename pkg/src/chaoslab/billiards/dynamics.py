"""Collision dynamics: next collision, reflection and the billiard map.

Kernels keep the Cartesian state (piece, position, direction) between
collisions and convert to boundary coordinates (q, phi) only when needed,
so the deep part of a cusp is resolved to relative precision.

Every collision reports a status code:

    0 ok, 1 grazing, 2 corner, 3 lost orbit, 4 cusp depth, 5 cusp series cap
"""
import numpy as np

from .._jit import jit
from .geometry import ARC, CUSP, SEGMENT, cusp_abscissa, cusp_arclength, piece_frame

OK, GRAZING, CORNER, LOST, CUSP_DEPTH, CUSP_SERIES = 0, 1, 2, 3, 4, 5
STATUS_NAMES = ("ok", "grazing", "corner", "lost_orbit", "cusp_depth", "cusp_series")

GRAZING_TOL = 1e-9
CORNER_TOL = 1e-10
TAU_MIN = 1e-12
S_FLOOR = 1e-8
SERIES_CAP = 10**6
_EDGE = 1e-12


# --------------------------------------------------------------- per piece


@jit
def _hit_segment(p, length, x, y, vx, vy):
    tx, ty = p[4], p[5]
    denom = vx * ty - vy * tx  # = -<v, n>, positive for incoming rays
    if denom <= 0.0:
        return np.inf, 0.0
    wx, wy = p[0] - x, p[1] - y
    t = (wx * ty - wy * tx) / denom
    u = (wx * vy - wy * vx) / denom
    if t <= TAU_MIN or u < -_EDGE or u > length + _EDGE:
        return np.inf, 0.0
    return t, min(max(u, 0.0), length)


@jit
def _arc_position(p, hx, hy):
    """Arclength along the arc of the point (hx, hy), or -1 if off the arc."""
    r, th0, span, sgn = p[2], p[3], p[4], p[5]
    th = np.arctan2(hy - p[1], hx - p[0])
    d = (sgn * (th - th0)) % (2.0 * np.pi)
    if span >= 2.0 * np.pi - 1e-13:
        return d * r
    if d <= span + _EDGE / r:
        return min(d, span) * r
    if d >= 2.0 * np.pi - _EDGE / r:
        return 0.0
    return -1.0


@jit
def _hit_arc(p, x, y, vx, vy):
    cx, cy, r, sgn = p[0], p[1], p[2], p[5]
    dx, dy = x - cx, y - cy
    b = vx * dx + vy * dy
    c = dx * dx + dy * dy - r * r
    disc = b * b - c
    if disc < 0.0:
        return np.inf, 0.0
    sq = np.sqrt(disc)
    qv = -(b + sq) if b >= 0.0 else -(b - sq)
    if qv == 0.0:
        return np.inf, 0.0
    r1, r2 = qv, c / qv
    lo, hi = min(r1, r2), max(r1, r2)
    best, bu = np.inf, 0.0
    for t in (lo, hi):
        # incoming iff sgn * <v, P - c> > 0 with <v, P - c> = b + t
        if t > TAU_MIN and sgn * (b + t) > 0.0:
            u = _arc_position(p, x + t * vx, y + t * vy)
            if u >= 0.0:
                best, bu = t, u
                break
    return best, bu


@jit
def _cusp_g(side, eta, py, px, vy, vx, t):
    xx = px + t * vx
    if xx < 0.0:
        xx = 0.0
    return side * (py + t * vy) - xx**eta / eta


@jit
def _cusp_dg(side, eta, vy, vx, xx):
    if xx < 0.0:
        xx = 0.0
    return side * vy - vx * xx ** (eta - 1.0)


@jit
def _hit_cusp(p, x, y, vx, vy, max_flight):
    """First t with side*y(t) = x(t)**eta / eta, x(t) in [0, eps0].

    g(t) = side*y(t) - x(t)**eta/eta is concave, negative inside the table.
    The maximiser t_m follows from g'(t) = 0; if g(lo) < 0 < g(t_m) the root
    is approached by Newton from the left, which stays below the root.
    """
    eta, side, eps0 = p[0], p[1], p[2]
    if vx > 0.0:
        lo, hi = (0.0 - x) / vx, (eps0 - x) / vx
    elif vx < 0.0:
        lo, hi = (eps0 - x) / vx, (0.0 - x) / vx
    else:
        if x < 0.0 or x > eps0:
            return np.inf, 0.0
        lo, hi = 0.0, max_flight
    lo = max(lo, TAU_MIN)
    hi = min(hi, max_flight)
    if lo >= hi:
        return np.inf, 0.0
    glo = _cusp_g(side, eta, y, x, vy, vx, lo)
    if glo >= 0.0:
        return np.inf, 0.0
    if _cusp_dg(side, eta, vy, vx, x + lo * vx) <= 0.0:
        return np.inf, 0.0
    if _cusp_dg(side, eta, vy, vx, x + hi * vx) >= 0.0:
        tm = hi
    else:
        xs = (side * vy / vx) ** (1.0 / (eta - 1.0))
        tm = min(max((xs - x) / vx, lo), hi)
    if _cusp_g(side, eta, y, x, vy, vx, tm) <= 0.0:
        return np.inf, 0.0
    t = lo
    a, b = lo, tm
    done = False
    for _ in range(100):
        gv = _cusp_g(side, eta, y, x, vy, vx, t)
        if gv >= 0.0:
            done = True
            break
        a = t
        dt = -gv / _cusp_dg(side, eta, vy, vx, x + t * vx)
        if not (dt > 0.0) or t + dt >= b:
            break
        t += dt
        if dt <= 1e-16 * t:
            done = True
            break
    if not done:
        for _ in range(200):
            t = 0.5 * (a + b)
            if _cusp_g(side, eta, y, x, vy, vx, t) < 0.0:
                a = t
            else:
                b = t
            if b - a <= 4e-16 * b:
                break
        t = b
    s = x + t * vx
    s = min(max(s, 0.0), eps0)
    a_s = cusp_arclength(s, eta)
    u = a_s if p[3] > 0.0 else p[4] - a_s
    return t, u


# --------------------------------------------------------------- collision


@jit
def next_hit(kinds, params, lengths, x, y, vx, vy, max_flight):
    """(piece, tau, u) of the first boundary hit; piece -1 if none."""
    best_t = np.inf
    best_k = -1
    best_u = 0.0
    for k in range(kinds.shape[0]):
        kind = kinds[k]
        if kind == SEGMENT:
            t, u = _hit_segment(params[k], lengths[k], x, y, vx, vy)
        elif kind == ARC:
            t, u = _hit_arc(params[k], x, y, vx, vy)
        else:
            t, u = _hit_cusp(params[k], x, y, vx, vy, max_flight)
        if t < best_t:
            best_t, best_k, best_u = t, k, u
    return best_k, best_t, best_u


@jit
def normal_at(kind, p, hx, hy):
    """Inward unit normal (nx, ny) at a point on the piece."""
    if kind == SEGMENT:
        return -p[5], p[4]
    if kind == ARC:
        r = np.hypot(hx - p[0], hy - p[1])
        return -p[5] * (hx - p[0]) / r, -p[5] * (hy - p[1]) / r
    eta, side, dr = p[0], p[1], p[3]
    slope = side * max(hx, 0.0) ** (eta - 1.0)
    nrm = np.sqrt(1.0 + slope * slope)
    tx, ty = dr / nrm, dr * slope / nrm
    return -ty, tx


@jit
def reflect_vector(vx, vy, nx, ny):
    d = vx * nx + vy * ny
    return vx - 2.0 * d * nx, vy - 2.0 * d * ny


@jit
def piece_residual(kind, p, hx, hy):
    if kind == SEGMENT:
        return abs((hx - p[0]) * p[5] - (hy - p[1]) * p[4])
    if kind == ARC:
        return abs(np.hypot(hx - p[0], hy - p[1]) - p[2])
    return abs(hy - p[1] * max(hx, 0.0) ** p[0] / p[0])


@jit
def collide(kinds, params, lengths, x, y, vx, vy, max_flight):
    """Fly to the next wall and reflect.

    Returns (status, piece, u, hx, hy, vx', vy', tau, residual).
    """
    k, t, u = next_hit(kinds, params, lengths, x, y, vx, vy, max_flight)
    if k < 0 or t > max_flight:
        return LOST, -1, 0.0, x, y, vx, vy, np.inf, 0.0
    hx = x + t * vx
    hy = y + t * vy
    kind = kinds[k]
    p = params[k]
    res = piece_residual(kind, p, hx, hy)
    if kind == CUSP:
        hy = p[1] * max(hx, 0.0) ** p[0] / p[0]
    nx, ny = normal_at(kind, p, hx, hy)
    cos_in = -(vx * nx + vy * ny)
    wx, wy = reflect_vector(vx, vy, nx, ny)
    nv = np.hypot(wx, wy)
    wx /= nv
    wy /= nv
    status = OK
    if kind == CUSP and hx < S_FLOOR:
        status = CUSP_DEPTH
    elif u < CORNER_TOL or lengths[k] - u < CORNER_TOL:
        status = CORNER
    elif cos_in < GRAZING_TOL:
        status = GRAZING
    return status, k, u, hx, hy, wx, wy, t, res


@jit
def launch(kinds, params, offsets, q, phi):
    """Cartesian state (piece, x, y, vx, vy) leaving q at angle phi."""
    n = kinds.shape[0]
    k = 0
    while k < n - 1 and offsets[k + 1] <= q:
        k += 1
    u = q - offsets[k]
    x, y, tx, ty, nx, ny = piece_frame(kinds[k], params[k], u)
    c, s = np.cos(phi), np.sin(phi)
    return k, x, y, c * nx + s * tx, c * ny + s * ty


@jit
def phase_of(kind, p, offset, u, hx, hy, wx, wy):
    """(q, phi) of an outgoing direction w at a point on piece."""
    nx, ny = normal_at(kind, p, hx, hy)
    tx, ty = ny, -nx
    return offset + u, np.arctan2(wx * tx + wy * ty, wx * nx + wy * ny)


# ------------------------------------------------------------ batch kernels


@jit
def map_batch_kernel(kinds, params, lengths, offsets, q0, phi0, max_flight):
    """One application of the billiard map to each (q0[i], phi0[i])."""
    m = q0.shape[0]
    q1 = np.empty(m)
    phi1 = np.empty(m)
    tau = np.empty(m)
    status = np.zeros(m, dtype=np.int64)
    res = np.zeros(m)
    for i in range(m):
        k, x, y, vx, vy = launch(kinds, params, offsets, q0[i], phi0[i])
        st, j, u, hx, hy, wx, wy, t, r = collide(kinds, params, lengths, x, y, vx, vy, max_flight)
        status[i] = st
        tau[i] = t
        res[i] = r
        if st == LOST:
            q1[i] = np.nan
            phi1[i] = np.nan
        else:
            q1[i], phi1[i] = phase_of(kinds[j], params[j], offsets[j], u, hx, hy, wx, wy)
    return q1, phi1, tau, status, res


@jit
def orbit_kernel(kinds, params, lengths, offsets, q0, phi0, n, max_flight):
    """Single orbit of n steps; stops at the first non-ok status.

    Returns (q[n+1], phi[n+1], tau[n], steps_done, status, max_residual).
    """
    qs = np.empty(n + 1)
    ps = np.empty(n + 1)
    taus = np.empty(n)
    qs[0], ps[0] = q0, phi0
    k, x, y, vx, vy = launch(kinds, params, offsets, q0, phi0)
    worst = 0.0
    series = 0
    for i in range(n):
        st, j, u, x, y, vx, vy, t, r = collide(kinds, params, lengths, x, y, vx, vy, max_flight)
        worst = max(worst, r)
        if st == OK and kinds[j] == CUSP:
            series += 1
            if series > SERIES_CAP:
                st = CUSP_SERIES
        elif st == OK:
            series = 0
        if st != OK:
            return qs, ps, taus, i, st, worst
        taus[i] = t
        qs[i + 1], ps[i + 1] = phase_of(kinds[j], params[j], offsets[j], u, x, y, vx, vy)
    return qs, ps, taus, n, OK, worst


@jit
def _obs_q(code, q, total):
    a = 2.0 * np.pi * code[1] * q / total
    return np.cos(a) if code[0] == 0 else np.sin(a)


@jit
def sums_kernel(kinds, params, lengths, offsets, q0, phi0, code, n, max_flight):
    """Per start: sum_{i<n} psi(q_i) (Kahan), flight time total, status, residual."""
    m = q0.shape[0]
    total = offsets[offsets.shape[0] - 1]
    sums = np.zeros(m)
    flight = np.zeros(m)
    status = np.zeros(m, dtype=np.int64)
    worst = np.zeros(m)
    for i in range(m):
        k, x, y, vx, vy = launch(kinds, params, offsets, q0[i], phi0[i])
        q = q0[i]
        s = 0.0
        comp = 0.0
        fl = 0.0
        series = 0
        for step in range(n):
            yv = _obs_q(code, q, total) - comp
            tt = s + yv
            comp = (tt - s) - yv
            s = tt
            if step == n - 1:
                break
            st, j, u, x, y, vx, vy, t, r = collide(kinds, params, lengths, x, y, vx, vy, max_flight)
            worst[i] = max(worst[i], r)
            if st == OK and kinds[j] == CUSP:
                series += 1
                if series > SERIES_CAP:
                    st = CUSP_SERIES
            elif st == OK:
                series = 0
            if st != OK:
                status[i] = st
                break
            fl += t
            q = offsets[j] + u
        sums[i] = s
        flight[i] = fl
    return sums, flight, status, worst


@jit
def free_path_kernel(kinds, params, lengths, offsets, q0, phi0, n, max_flight):
    """Per start: total flight length over n collisions, status, residual."""
    m = q0.shape[0]
    flight = np.zeros(m)
    steps = np.zeros(m, dtype=np.int64)
    status = np.zeros(m, dtype=np.int64)
    worst = np.zeros(m)
    for i in range(m):
        k, x, y, vx, vy = launch(kinds, params, offsets, q0[i], phi0[i])
        fl = 0.0
        done = 0
        for step in range(n):
            st, j, u, x, y, vx, vy, t, r = collide(kinds, params, lengths, x, y, vx, vy, max_flight)
            worst[i] = max(worst[i], r)
            if st != OK:
                status[i] = st
                break
            fl += t
            done += 1
        flight[i] = fl
        steps[i] = done
    return flight, steps, status, worst


@jit
def count_kernel(kinds, params, lengths, offsets, q0, phi0, cx, cy, radius, window_end, max_flight):
    """Visits to the disk B_radius(cx, cy) per window.

    Iterate i lies in window w when window_end[w-1] <= i < window_end[w]
    (window_end[-1] is the last iterate plus one).  Visits are counted at
    the collision point of f^i x, i >= 0.
    """
    m = q0.shape[0]
    nw = window_end.shape[0]
    counts = np.zeros((m, nw), dtype=np.int64)
    status = np.zeros(m, dtype=np.int64)
    r2 = radius * radius
    n = window_end[nw - 1]
    for i in range(m):
        k, x, y, vx, vy = launch(kinds, params, offsets, q0[i], phi0[i])
        w = 0
        series = 0
        for it in range(n):
            while it >= window_end[w]:
                w += 1
            if (x - cx) ** 2 + (y - cy) ** 2 < r2:
                counts[i, w] += 1
            if it == n - 1:
                break
            st, j, u, x, y, vx, vy, t, r = collide(kinds, params, lengths, x, y, vx, vy, max_flight)
            if st == OK and kinds[j] == CUSP:
                series += 1
                if series > SERIES_CAP:
                    st = CUSP_SERIES
            elif st == OK:
                series = 0
            if st != OK:
                status[i] = st
                break
    return counts, status


@jit
def hitting_kernel(kinds, params, lengths, offsets, q0, phi0, cx, cy, radius, cap, max_flight):
    """First n >= 1 with f^n x in B_radius(cx, cy); cap + 1 when censored."""
    m = q0.shape[0]
    out = np.empty(m, dtype=np.int64)
    status = np.zeros(m, dtype=np.int64)
    r2 = radius * radius
    for i in range(m):
        k, x, y, vx, vy = launch(kinds, params, offsets, q0[i], phi0[i])
        hit = cap + 1
        for it in range(1, cap + 1):
            st, j, u, x, y, vx, vy, t, r = collide(kinds, params, lengths, x, y, vx, vy, max_flight)
            if st != OK:
                status[i] = st
                break
            if (x - cx) ** 2 + (y - cy) ** 2 < r2:
                hit = it
                break
        out[i] = hit
    return out, status
