"""Concrete tables: stadium, squash, flower, semi-dispersing, cusp, test tables."""
import numpy as np

from ..errors import GeometryError
from .geometry import ARC, SEGMENT, BilliardTable, arc, cusp_curve, segment, piece_frame

HALF_PI = 0.5 * np.pi


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise GeometryError(f"{k} must be positive, got {v}")


def stadium(L=2.0, rho=1.0):
    """Two parallel segments of length L joined by radius-rho half circles."""
    _positive(L=L, rho=rho)
    h = 0.5 * L
    pieces = [
        segment((-h, -rho), (h, -rho)),
        arc((h, 0.0), rho, -HALF_PI, np.pi, 1),
        segment((h, rho), (-h, rho)),
        arc((-h, 0.0), rho, HALF_PI, np.pi, 1),
    ]
    return BilliardTable(pieces, f"stadium(L={L:g}, rho={rho:g})",
                         meta={"family": "stadium", "L": L, "rho": rho})


def squash(r1=1.0, r2=0.5, d=2.0):
    """Convex hull of two disks (radii r1 > r2 >= 0, centers d apart)."""
    _positive(r1=r1, d=d)
    if r2 < 0 or not r1 > r2:
        raise GeometryError(f"squash needs r1 > r2 >= 0, got r1={r1}, r2={r2}")
    if not d > r1 - r2:
        raise GeometryError(f"squash needs d > r1 - r2 for external tangents, got d={d}")
    g = np.arcsin((r1 - r2) / d)
    a = HALF_PI - g
    big_top = (r1 * np.cos(a), r1 * np.sin(a))
    big_bot = (r1 * np.cos(a), -r1 * np.sin(a))
    pieces = []
    if r2 > 0:
        pieces.append(arc((d, 0.0), r2, -a, 2.0 * a, 1))
        small_top = (d + r2 * np.cos(a), r2 * np.sin(a))
        small_bot = (d + r2 * np.cos(a), -r2 * np.sin(a))
    else:
        small_top = small_bot = (d, 0.0)
    pieces.append(segment(small_top, big_top))
    pieces.append(arc((0.0, 0.0), r1, a, np.pi + 2.0 * g, 1))
    pieces.append(segment(big_bot, small_bot))
    table = BilliardTable(pieces, f"squash(r1={r1:g}, r2={r2:g}, d={d:g})",
                          meta={"family": "squash", "r1": r1, "r2": r2, "d": d})
    spans = [p.params[4] for p in pieces if p.kind == ARC]
    if not any(s > np.pi for s in spans):
        raise GeometryError("squash must contain an arc longer than a half circle")
    return table


def flower(petals=5, radius=1.0):
    """Semicircular focusing petals on the edges of a regular polygon.

    The polygon has circumradius ``radius``; petal i is the outer half of the
    circle whose diameter is edge i.  Each petal's full circle contains no
    other boundary point, which :func:`check_focusing_arcs` verifies.
    """
    petals = int(petals)
    if petals < 3:
        raise GeometryError(f"flower needs at least 3 petals, got {petals}")
    _positive(radius=radius)
    ang = 2.0 * np.pi * np.arange(petals) / petals
    verts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    pieces = []
    for i in range(petals):
        a, b = verts[i], verts[(i + 1) % petals]
        mid = 0.5 * (a + b)
        half = 0.5 * float(np.hypot(*(b - a)))
        th0 = float(np.arctan2(*(a - mid)[::-1]))
        pieces.append(arc(mid, half, th0, np.pi, 1))
    table = BilliardTable(pieces, f"flower(petals={petals}, radius={radius:g})",
                          meta={"family": "flower", "petals": petals, "radius": radius})
    check_focusing_arcs(table)
    return table


def check_focusing_arcs(table, samples=400):
    """Each focusing arc spans at most a half circle and its closed disk
    contains no other boundary point."""
    for i, p in enumerate(table.pieces):
        if p.kind != ARC or p.params[5] < 0:
            continue
        cx, cy, r, _, span, _ = p.params[:6]
        if span > np.pi + 1e-12:
            raise GeometryError(f"focusing arc {i} spans {span:.6f} > pi")
        for j, other in enumerate(table.pieces):
            if j == i:
                continue
            us = np.linspace(0.0, other.length, samples)[1:-1]
            pts = np.array([other.frame(u)[:2] for u in us])
            dist = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
            if np.any(dist <= r * (1.0 + 1e-9)):
                raise GeometryError(
                    f"piece {j} enters the disk of focusing arc {i} (min distance "
                    f"{dist.min():.6f} <= radius {r:.6f})"
                )


def semi_dispersing(a=2.0, b=1.0, disks=((1.0, 0.5, 0.3),)):
    """a x b rectangle with disjoint disk scatterers (cx, cy, r) inside."""
    _positive(a=a, b=b)
    pieces = [
        segment((0.0, 0.0), (a, 0.0)),
        segment((a, 0.0), (a, b)),
        segment((a, b), (0.0, b)),
        segment((0.0, b), (0.0, 0.0)),
    ]
    chains = [(0, 3)]
    disks = [tuple(map(float, d)) for d in disks]
    for k, (cx, cy, r) in enumerate(disks):
        _positive(disk_radius=r)
        if not (cx - r > 0 and cx + r < a and cy - r > 0 and cy + r < b):
            raise GeometryError(
                f"scatterer {k} (center ({cx:g}, {cy:g}), radius {r:g}) is not strictly "
                f"inside the {a:g} x {b:g} rectangle"
            )
        for m in range(k):
            ox, oy, orad = disks[m]
            if np.hypot(cx - ox, cy - oy) <= r + orad:
                raise GeometryError(f"scatterers {m} and {k} are not disjoint")
        pieces.append(arc((cx, cy), r, 0.0, 2.0 * np.pi, -1))
        chains.append((len(pieces) - 1, len(pieces) - 1))
    return BilliardTable(pieces, f"semi_dispersing({a:g}x{b:g}, disks={len(disks)})", chains,
                         meta={"family": "semi_dispersing", "a": a, "b": b, "disks": disks})


def _circle_through_tangent(piece, u, radius):
    """Center of the dispersing circle tangent to ``piece`` at u."""
    x, y, tx, ty, nx, ny = piece.frame(u)
    return np.array([x - radius * nx, y - radius * ny])


def cusp(eta=3.0, eps0=0.5, side_radius=1.0, cap_center=3.0, cap_radius=2.2):
    """Cusp at the origin between z = +-s**eta/eta, s in [0, eps0].

    The curves are closed by three dispersing arcs: two of radius
    ``side_radius`` continuing each curve tangentially at s = eps0 and a cap
    circle centred at (cap_center, 0).  Boundary order: lower curve outward,
    lower arc, cap, upper arc, upper curve inward, so the tip sits at q = 0
    for the lower curve and q = |dQ| for the upper one.
    """
    _positive(eps0=eps0, side_radius=side_radius, cap_radius=cap_radius)
    if side_radius < 1.0 or cap_radius < 1.0:
        raise GeometryError("closing arcs must have radius >= 1")
    low = cusp_curve(eta, -1.0, eps0, 1.0)
    up = cusp_curve(eta, 1.0, eps0, -1.0)
    c2 = _circle_through_tangent(low, low.length, side_radius)
    c1 = np.array([c2[0], -c2[1]])
    c3 = np.array([cap_center, 0.0])
    dist = float(np.hypot(*(c3 - c2)))
    if not (abs(cap_radius - side_radius) < dist < cap_radius + side_radius):
        raise GeometryError("cap circle must cut both side circles")
    if c2[1] + side_radius >= 0.0:
        raise GeometryError("side circles reach the axis and pinch the table")
    # intersection of the lower side circle with the cap (the one facing the cusp)
    e = (c3 - c2) / dist
    along = (dist**2 + side_radius**2 - cap_radius**2) / (2.0 * dist)
    perp = np.sqrt(side_radius**2 - along**2)
    cand = [c2 + along * e + s * perp * np.array([-e[1], e[0]]) for s in (1.0, -1.0)]
    corner = max(cand, key=lambda p: p[1])  # the one nearer the axis
    p_start = low.endpoints()[1]
    th_start = np.arctan2(p_start[1] - c2[1], p_start[0] - c2[0])
    th_end = np.arctan2(corner[1] - c2[1], corner[0] - c2[0])
    span2 = (th_start - th_end) % (2.0 * np.pi)
    lower_arc = arc(c2, side_radius, th_start, span2, -1)
    phi_low = np.arctan2(corner[1], corner[0] - c3[0])
    phi_up = -phi_low
    span3 = (phi_low - phi_up) % (2.0 * np.pi)
    cap = arc(c3, cap_radius, phi_low, span3, -1)
    mirror = np.array([corner[0], -corner[1]])
    p_up = up.endpoints()[0]
    th_a = np.arctan2(mirror[1] - c1[1], mirror[0] - c1[0])
    th_b = np.arctan2(p_up[1] - c1[1], p_up[0] - c1[0])
    span1 = (th_a - th_b) % (2.0 * np.pi)
    upper_arc = arc(c1, side_radius, th_a, span1, -1)
    pieces = [low, lower_arc, cap, upper_arc, up]
    tag = f"cusp(eta={eta:g}, eps0={eps0:g}, arcs=[{side_radius:g}, {cap_radius:g}, {side_radius:g}])"
    table = BilliardTable(pieces, tag, meta={
        "family": "cusp", "eta": eta, "eps0": eps0, "side_radius": side_radius,
        "cap_center": cap_center, "cap_radius": cap_radius,
    })
    check_simple(table)
    return table


def check_simple(table, samples=300):
    """Sampled polylines of non-adjacent pieces must not intersect."""
    n = len(table.pieces)
    polys = []
    for p in table.pieces:
        us = np.linspace(0.0, p.length, samples)
        polys.append(np.array([p.frame(u)[:2] for u in us]))

    def crosses(a, b):
        p, r = a[:-1], a[1:] - a[:-1]
        q, s = b[:-1], b[1:] - b[:-1]
        rxs = r[:, None, 0] * s[None, :, 1] - r[:, None, 1] * s[None, :, 0]
        qp = q[None, :, :] - p[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qp[..., 0] * s[None, :, 1] - qp[..., 1] * s[None, :, 0]) / rxs
            u = (qp[..., 0] * r[:, None, 1] - qp[..., 1] * r[:, None, 0]) / rxs
        return bool(np.any((t > 1e-9) & (t < 1 - 1e-9) & (u > 1e-9) & (u < 1 - 1e-9)))

    adjacent = set()
    for first, last in table.chains:
        for i in range(first, last + 1):
            j = first if i == last else i + 1
            adjacent.add((min(i, j), max(i, j)))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = polys[i], polys[j]
            if (i, j) in adjacent:
                a, b = a[1:-1], b[1:-1]
            if crosses(a, b):
                raise GeometryError(f"pieces {i} and {j} intersect; boundary is not simple")


def square(side=1.0):
    """Unit-square test table."""
    return rectangle(side, side, tag=f"square({side:g})")


def rectangle(a=2.0, b=1.0, tag=None):
    _positive(a=a, b=b)
    pieces = [
        segment((0.0, 0.0), (a, 0.0)),
        segment((a, 0.0), (a, b)),
        segment((a, b), (0.0, b)),
        segment((0.0, b), (0.0, 0.0)),
    ]
    return BilliardTable(pieces, tag or f"rectangle({a:g}x{b:g})",
                         meta={"family": "rectangle", "a": a, "b": b})


def circle(radius=1.0):
    _positive(radius=radius)
    return BilliardTable([arc((0.0, 0.0), radius, -np.pi, 2.0 * np.pi, 1)],
                         f"circle({radius:g})", meta={"family": "circle", "radius": radius})


PRESETS = {
    "stadium": stadium,
    "squash": squash,
    "flower": flower,
    "semi_dispersing": semi_dispersing,
    "cusp": cusp,
    "square": square,
    "rectangle": rectangle,
    "circle": circle,
}
MAIN_FAMILIES = ("stadium", "squash", "flower", "semi_dispersing", "cusp")


def build_preset(name, **params):
    """Build and validate a table by preset name."""
    if name not in PRESETS:
        raise GeometryError(f"unknown table preset {name!r}; choose from {sorted(PRESETS)}")
    try:
        return PRESETS[name](**params)
    except TypeError as exc:
        raise GeometryError(f"bad parameters for preset {name!r}: {exc}") from None
