import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from chaoslab.billiards import build_preset
from chaoslab.billiards import dynamics as dyn
from chaoslab.billiards.core import (
    PhasePoint,
    billiard_map,
    billiard_orbit,
    free_paths,
    map_batch,
    map_batch_numpy,
    max_flight,
    next_collision,
    reflect,
    sample_invariant,
)
from chaoslab.billiards.cusp import (
    cusp_alpha,
    cusp_integral,
    cusp_integral_riemann,
    cusp_sigma,
    tip_coordinates,
)
from chaoslab.billiards.geometry import cusp_abscissa, cusp_arclength
from chaoslab.errors import (
    ConfigurationError,
    DomainError,
    GeometryError,
    GrazingError,
)

from conftest import FIVE

# ------------------------------------------------------------- geometry


def test_stadium_length():
    t = build_preset("stadium", L=2.0, rho=1.0)
    assert abs(t.total_length - (4.0 + 2.0 * math.pi)) < 1e-12
    assert abs(t.area() - (4.0 + math.pi)) < 1e-12


def test_cusp_curve_point():
    t = build_preset("cusp", eta=3.0, eps0=0.5)
    low, up = t.pieces[0], t.pieces[-1]
    u = cusp_arclength(0.3, 3.0)
    x, y = low.frame(u)[:2]
    assert abs(x - 0.3) < 1e-12 and abs(y + 0.009) < 1e-12
    x, y = up.frame(up.length - u)[:2]
    assert abs(x - 0.3) < 1e-12 and abs(y - 0.009) < 1e-12


@given(st.floats(1e-6, 0.9), st.sampled_from([2.0, 3.0, 4.5]))
def test_cusp_arclength_against_quadrature(s, eta):
    ref, _ = integrate.quad(lambda v: math.sqrt(1.0 + v ** (2 * eta - 2)), 0.0, s, epsabs=1e-14)
    a = cusp_arclength(s, eta)
    assert abs(a - ref) < 1e-12
    assert abs(cusp_abscissa(a, eta) - s) < 1e-12


def test_oversized_disk_rejected():
    with pytest.raises(GeometryError):
        build_preset("semi_dispersing", a=2.0, b=1.0, disks=((1.0, 0.5, 0.6),))


@pytest.mark.parametrize("name,params", [
    ("stadium", {"L": -1.0}),
    ("squash", {"r1": 0.5, "r2": 1.0}),
    ("cusp", {"side_radius": 0.5}),
    ("nope", {}),
    ("stadium", {"width": 2.0}),
])
def test_invalid_geometry(name, params):
    with pytest.raises(GeometryError):
        build_preset(name, **params)


@pytest.mark.parametrize("name", FIVE)
def test_presets_closed_and_positive_area(tables, name):
    t = tables[name]
    t.validate()
    assert t.area() > 0
    assert abs(t.total_length - t.lengths.sum()) < 1e-12


# ------------------------------------------------------------- reflection


def test_reflection_examples():
    s = 1.0 / math.sqrt(2.0)
    assert np.allclose(reflect((s, -s), (0.0, 1.0)), (s, s), atol=1e-15)
    assert np.allclose(reflect((0.0, -1.0), (0.0, 1.0)), (0.0, 1.0), atol=1e-15)


def test_reflection_involution():
    r = np.random.default_rng(3)
    for _ in range(1000):
        a, b = r.uniform(0, 2 * np.pi, 2)
        n = np.array([math.cos(a), math.sin(a)])
        v = np.array([math.cos(b), math.sin(b)])
        if v @ n > -1e-6:
            v = -v
        if v @ n > -1e-6:
            continue
        w = reflect(v, n)
        back = reflect(-w, n)
        assert np.max(np.abs(back + v)) < 1e-12


def test_reflection_preserves_speed():
    r = np.random.default_rng(8)
    a = r.uniform(0, 2 * np.pi, 10_000)
    b = r.uniform(0, 2 * np.pi, 10_000)
    for x, y in zip(a, b):
        n = np.array([math.cos(x), math.sin(x)])
        v = np.array([math.cos(y), math.sin(y)])
        if v @ n > -1e-6:
            continue
        assert abs(np.hypot(*reflect(v, n)) - 1.0) < 1e-12


def test_reflection_errors():
    with pytest.raises(GrazingError):
        reflect((1.0, -1e-12), (0.0, 1.0))
    with pytest.raises(DomainError):
        reflect((0.0, 1.0), (0.0, 1.0))
    with pytest.raises(DomainError):
        reflect((0.0, -2.0), (0.0, 1.0))


# ------------------------------------------------------------- collisions


def test_square_vertical_flight():
    t = build_preset("square")
    c = next_collision(t, (0.5, 0.5), (0.0, 1.0))
    assert c.piece == 2 and abs(c.tau - 0.5) < 1e-15


@pytest.mark.parametrize("phi", [0.0, 0.3, -0.7, 1.2])
def test_circle_chord_length(phi):
    t = build_preset("circle")
    o = billiard_orbit(t, PhasePoint(1.0, phi), 3)
    assert np.allclose(o.tau, 2.0 * math.cos(phi), atol=1e-12)


def test_cusp_hit_on_curve():
    t = build_preset("cusp")
    for a in (0.02, 0.05, 0.1, -0.04):
        c = next_collision(t, (0.3, 0.0), (-math.cos(a), math.sin(a)))
        x, y = c.point
        assert t.kinds[c.piece] == 2
        assert abs(abs(y) - x**3 / 3.0) < 1e-12
        assert c.residual < 1e-12


def test_circle_map():
    t = build_preset("circle")
    q, phi = 0.4, 0.35
    o = billiard_orbit(t, PhasePoint(q, phi), 20)
    assert np.all(o.phi == o.phi[0]) or np.max(np.abs(o.phi - phi)) < 1e-12
    step = (o.q[1:] - o.q[:-1]) % t.total_length
    assert np.allclose(step, math.pi - 2.0 * phi, atol=1e-10)


def test_rectangle_angles():
    t = build_preset("rectangle", a=2.0, b=1.0)
    o = billiard_orbit(t, PhasePoint(0.37, 0.4), 500)
    assert o.flag is None
    assert len(set(np.round(o.phi, 9))) <= 4


def test_stadium_long_orbit_contract(stadium):
    o = billiard_orbit(stadium, PhasePoint(0.3, 0.2), 10**6)
    assert o.flag is None and o.steps == 10**6
    assert np.all(np.abs(o.phi) <= math.pi / 2)
    assert np.all((o.q >= 0) & (o.q < stadium.total_length))
    assert o.max_residual < 1e-10


def test_corner_hit_flags_orbit():
    t = build_preset("square")
    # from (0.5, 0) aimed at the corner (1, 1)
    phi = -math.atan2(0.5, 1.0)
    o = billiard_orbit(t, PhasePoint(0.5, phi), 5)
    assert o.flag == "corner" and o.steps == 0
    assert o.q.size == 1


def test_grazing_launch_rejected(stadium):
    with pytest.raises(DomainError):
        billiard_map(stadium, PhasePoint(0.5, 2.0))
    with pytest.raises(GrazingError):
        billiard_map(stadium, PhasePoint(0.5, math.pi / 2))


def test_map_matches_orbit(stadium):
    x = PhasePoint(1.1, -0.4)
    y = billiard_map(stadium, x)
    o = billiard_orbit(stadium, x, 1)
    assert abs(y.q - o.q[1]) < 1e-14 and abs(y.phi - o.phi[1]) < 1e-14


@pytest.mark.parametrize("name", ["stadium", "squash", "flower", "semi_dispersing"])
def test_numpy_step_matches_kernel(tables, name):
    t = tables[name]
    q, phi = sample_invariant(t, 5, 20000)
    a = map_batch(t, q, phi)
    b = map_batch_numpy(t, q, phi)
    ok = (a[3] == 0) & (b[3] == 0)
    assert np.mean(ok) > 0.999
    assert np.array_equal(a[3], b[3])
    dq = np.abs(a[0][ok] - b[0][ok])
    dq = np.minimum(dq, t.total_length - dq)
    assert np.max(dq) < 1e-10 and np.max(np.abs(a[1][ok] - b[1][ok])) < 1e-10


def test_numpy_step_rejects_cusp(tables):
    q, phi = sample_invariant(tables["cusp"], 1, 10)
    with pytest.raises(ConfigurationError):
        map_batch_numpy(tables["cusp"], q, phi)


# ------------------------------------------------------------- invariance


def test_sampler_marginals(stadium):
    q, phi = sample_invariant(stadium, 17, 10**6)
    for v, lo, hi in ((np.sin(phi), -1.0, 1.0), (q, 0.0, stadium.total_length)):
        counts, _ = np.histogram(v, bins=10, range=(lo, hi))
        assert np.max(np.abs(counts / 1e5 - 1.0)) < 0.01


def test_sampler_reproducible_in_chunks(stadium):
    a = sample_invariant(stadium, 3, 100)
    b = sample_invariant(stadium, 3, 60, 40)
    assert np.array_equal(a[0][40:], b[0]) and np.array_equal(a[1][40:], b[1])


def _cells(t, q, phi):
    h, _, _ = np.histogram2d(q / t.total_length, np.sin(phi), bins=8,
                             range=((0, 1), (-1, 1)))
    return h


def test_stadium_pushforward_invariance(stadium):
    m = 10**6
    q, phi = sample_invariant(stadium, 23, m)
    q1, p1, _, st_, _ = map_batch(stadium, q, phi)
    ok = st_ == 0
    before = _cells(stadium, q, phi)
    after = _cells(stadium, q1[ok], p1[ok])
    expected = m / 64.0
    assert np.max(np.abs(after / expected - 1.0)) < 0.03
    assert np.max(np.abs(before / expected - 1.0)) < 0.03


def test_stadium_mean_free_path(stadium):
    flight, steps, status, _ = free_paths(stadium, 31, 10, 10**5)
    assert np.all(status == 0)
    mfp = flight.sum() / steps.sum()
    ref = math.pi * (4 + math.pi) / (4 + 2 * math.pi)
    assert abs(stadium.mean_free_path() - ref) < 1e-12
    assert abs(mfp / ref - 1.0) < 0.02


# ------------------------------------------------------------- reversibility


def _reversal_error(t, x0, n):
    o = billiard_orbit(t, x0, n)
    if o.flag:
        return None
    back = billiard_orbit(t, PhasePoint(float(o.q[-1]), -float(o.phi[-1])), n)
    if back.flag:
        return None
    dq = abs(back.q[-1] - x0.q)
    dq = min(dq, t.total_length - dq)
    return max(dq, abs(back.phi[-1] + x0.phi))


@pytest.mark.parametrize("name", FIVE)
def test_time_reversal_short_orbits(tables, name):
    t = tables[name]
    q, phi = sample_invariant(t, 41, 200)
    worst = 0.0
    for a, b in zip(q, phi):
        e = _reversal_error(t, PhasePoint(float(a), float(b)), 10)
        if e is not None:
            worst = max(worst, e)
    assert worst < 1e-6


def _stadium_errors(stadium, n):
    q, phi = sample_invariant(stadium, 47, 100)
    e = [_reversal_error(stadium, PhasePoint(float(a), float(b)), n) for a, b in zip(q, phi)]
    return np.array([x for x in e if x is not None])


def test_time_reversal_stadium_typical_thirty_steps(stadium):
    assert np.median(_stadium_errors(stadium, 30)) < 1e-3
    # round-off growth is exponential, not a branch error
    m10 = np.median(_stadium_errors(stadium, 10))
    m20 = np.median(_stadium_errors(stadium, 20))
    assert 1e2 < m20 / m10 < 1e7


@pytest.mark.xfail(strict=True, reason="worst case over 100 starts grows about e per collision; "
                   "a few orbits exceed 1e-3 by n = 30")
def test_time_reversal_stadium_thirty_steps_literal(stadium):
    assert _stadium_errors(stadium, 30).max() < 1e-3


@pytest.mark.xfail(strict=True, reason="round-off grows like exp(0.9 n) on dispersing tables; "
                   "1e-6 at n = 100 is below float64 resolution after amplification")
@pytest.mark.parametrize("name", ["semi_dispersing", "cusp"])
def test_time_reversal_hundred_steps_literal(tables, name):
    t = tables[name]
    q, phi = sample_invariant(t, 43, 50)
    worst = 0.0
    for a, b in zip(q, phi):
        e = _reversal_error(t, PhasePoint(float(a), float(b)), 100)
        if e is not None:
            worst = max(worst, e)
    assert worst < 1e-6


# ------------------------------------------------------------- cusp integral


def test_cusp_integral_limit_case():
    f = lambda q, phi: 1.0
    a = cusp_integral(2.0, f, 1.0, 0.0)
    b = cusp_integral_riemann(2.0, f, 1.0, 0.0)
    ref, _ = integrate.quad(lambda p: 0.5 * math.sqrt(math.sin(p)), 0.0, math.pi)
    assert abs(a - b) < 1e-6
    assert abs(a - ref) < 1e-10
    assert cusp_alpha(2.0) == 2.0


def test_cusp_sigma_linear(tables):
    t = tables["cusp"]
    q1, q2 = tip_coordinates(t)
    assert q1 == t.total_length and q2 == 0.0
    L = t.total_length
    psi = lambda q, p: math.cos(2 * math.pi * q / L)
    s1 = cusp_sigma(3.0, psi, q1, q2, L)
    s2 = cusp_sigma(3.0, lambda q, p: 2.0 * psi(q, p), q1, q2, L)
    assert abs(s2 - 2.0 * s1) < 1e-12
    assert cusp_sigma(3.0, lambda q, p: 0.0, q1, q2, L) == 0.0
    with pytest.raises(ConfigurationError):
        cusp_integral(1.5, psi, q1, q2)


def test_max_flight_positive(stadium):
    assert max_flight(stadium) > stadium.total_length / 2


def test_status_names():
    assert dyn.STATUS_NAMES[dyn.CORNER] == "corner"
