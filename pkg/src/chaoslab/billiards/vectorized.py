"""Numpy version of one billiard-map step for tables of segments and arcs.

All starts advance together: each piece is intersected with every ray and
the earliest admissible hit wins.  Used as the fallback backend and as the
reference for the kernel benchmark.
"""
import numpy as np

from ..errors import ConfigurationError
from . import dynamics as dyn
from .geometry import ARC, CUSP, SEGMENT


def _frames(table, q):
    k = np.clip(np.searchsorted(table.offsets, q, side="right") - 1, 0, len(table.pieces) - 1)
    u = q - table.offsets[k]
    par = table.params[k]
    kind = table.kinds[k]
    seg = kind == SEGMENT
    x = np.where(seg, par[:, 0] + u * par[:, 4], 0.0)
    y = np.where(seg, par[:, 1] + u * par[:, 5], 0.0)
    tx = np.where(seg, par[:, 4], 0.0)
    ty = np.where(seg, par[:, 5], 0.0)
    arc = ~seg
    r = np.where(arc, par[:, 2], 1.0)
    sgn = par[:, 5]
    th = np.where(arc, par[:, 3] + sgn * u / r, 0.0)
    x = np.where(arc, par[:, 0] + r * np.cos(th), x)
    y = np.where(arc, par[:, 1] + r * np.sin(th), y)
    tx = np.where(arc, -sgn * np.sin(th), tx)
    ty = np.where(arc, sgn * np.cos(th), ty)
    return x, y, tx, ty, -ty, tx


def map_batch_np(table, q, phi, max_flight):
    if np.any(table.kinds == CUSP):
        raise ConfigurationError("the numpy billiard step handles segments and arcs only")
    q = np.asarray(q, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    x, y, tx, ty, nx, ny = _frames(table, q)
    c, s = np.cos(phi), np.sin(phi)
    vx = c * nx + s * tx
    vy = c * ny + s * ty
    m = q.shape[0]
    best_t = np.full(m, np.inf)
    best_k = np.full(m, -1)
    best_u = np.zeros(m)
    for k, (kind, p, length) in enumerate(zip(table.kinds, table.params, table.lengths)):
        if kind == SEGMENT:
            denom = vx * p[5] - vy * p[4]
            wx, wy = p[0] - x, p[1] - y
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (wx * p[5] - wy * p[4]) / denom
                u = (wx * vy - wy * vx) / denom
            ok = (denom > 0) & (t > dyn.TAU_MIN) & (u >= -dyn._EDGE) & (u <= length + dyn._EDGE)
            u = np.clip(u, 0.0, length)
        else:
            t, u, ok = _arc_hits(p, x, y, vx, vy)
        t = np.where(ok, t, np.inf)
        better = t < best_t
        best_t = np.where(better, t, best_t)
        best_k = np.where(better, k, best_k)
        best_u = np.where(better, u, best_u)
    lost = (best_k < 0) | (best_t > max_flight)
    kk = np.where(lost, 0, best_k)
    hx = x + best_t * vx
    hy = y + best_t * vy
    par = table.params[kk]
    seg = table.kinds[kk] == SEGMENT
    rr = np.hypot(hx - par[:, 0], hy - par[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        hnx = np.where(seg, -par[:, 5], -par[:, 5] * (hx - par[:, 0]) / rr)
        hny = np.where(seg, par[:, 4], -par[:, 5] * (hy - par[:, 1]) / rr)
    res = np.where(seg, np.abs((hx - par[:, 0]) * par[:, 5] - (hy - par[:, 1]) * par[:, 4]),
                   np.abs(rr - par[:, 2]))
    d = vx * hnx + vy * hny
    wx = vx - 2.0 * d * hnx
    wy = vy - 2.0 * d * hny
    nv = np.hypot(wx, wy)
    wx, wy = wx / nv, wy / nv
    htx, hty = hny, -hnx
    q1 = (table.offsets[kk] + best_u) % table.total_length
    phi1 = np.arctan2(wx * htx + wy * hty, wx * hnx + wy * hny)
    status = np.zeros(m, dtype=np.int64)
    length = table.lengths[kk]
    status[-d < dyn.GRAZING_TOL] = dyn.GRAZING
    status[(best_u < dyn.CORNER_TOL) | (length - best_u < dyn.CORNER_TOL)] = dyn.CORNER
    status[lost] = dyn.LOST
    q1[lost] = np.nan
    phi1[lost] = np.nan
    return q1, phi1, best_t, status, res


def _arc_hits(p, x, y, vx, vy):
    cx, cy, r, th0, span, sgn = p[:6]
    dx, dy = x - cx, y - cy
    b = vx * dx + vy * dy
    c = dx * dx + dy * dy - r * r
    disc = b * b - c
    sq = np.sqrt(np.maximum(disc, 0.0))
    qv = np.where(b >= 0, -(b + sq), -(b - sq))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1, r2 = qv, c / qv
    lo, hi = np.minimum(r1, r2), np.maximum(r1, r2)
    t_out = np.full(x.shape, np.inf)
    u_out = np.zeros(x.shape)
    ok_out = np.zeros(x.shape, dtype=bool)
    for t in (hi, lo):  # lo last so it wins when both qualify
        hx, hy = x + t * vx, y + t * vy
        d = (sgn * (np.arctan2(hy - cy, hx - cx) - th0)) % (2.0 * np.pi)
        if span >= 2.0 * np.pi - 1e-13:
            on, u = np.ones(x.shape, dtype=bool), d * r
        else:
            on = (d <= span + dyn._EDGE / r) | (d >= 2.0 * np.pi - dyn._EDGE / r)
            u = np.where(d >= 2.0 * np.pi - dyn._EDGE / r, 0.0, np.minimum(d, span) * r)
        ok = (disc >= 0) & (qv != 0) & (t > dyn.TAU_MIN) & (sgn * (b + t) > 0) & on
        t_out = np.where(ok, t, t_out)
        u_out = np.where(ok, u, u_out)
        ok_out |= ok
    return t_out, u_out, ok_out
