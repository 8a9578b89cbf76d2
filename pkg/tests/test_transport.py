from __future__ import annotations

import numpy as np
import pytest

from gaussbonnet import catalog
from gaussbonnet.curves import ParamCurve, circle_loop, latitude_loop, polyline_loop, tube_loop
from gaussbonnet.errors import CurveNotRegular, InputError, LeftDomain, NotClosed, NotTangent
from gaussbonnet.quadrature import ParamRegion, integrate_curvature
from gaussbonnet.transport import (
    deficit_angle,
    integrate_geodesic,
    parallel_transport,
    rotation_rate,
    tangential_acceleration,
)
from gaussbonnet.verify import rectangle_loop

SPHERE = catalog.sphere()
TORUS = catalog.torus(2.0, 1.0)
TS = np.linspace(0.0, 1.0, 2001)


def start_tangent(surface, curve, which=0):
    uv = curve.path(np.array(0.0))
    r = surface.first_partials(uv[0], uv[1])[which]
    return r / np.linalg.norm(r)


def signed_angle(a, b, n):
    return np.arctan2(np.cross(a, b) @ n, a @ b)


# parallel transport


def test_transport_keeps_vectors_tangent_and_unit():
    curve = latitude_loop(np.pi / 5)
    res = parallel_transport(SPHERE, curve, 2.0 * start_tangent(SPHERE, curve), steps=512)
    assert len(res.samples) == 513
    assert np.allclose(np.linalg.norm(res.w, axis=1), 2.0, atol=1e-14)
    assert np.max(np.abs(np.einsum("ij,ij->i", res.w, res.normals))) < 1e-8 * 2.0


def test_velocity_along_geodesic_is_parallel():
    e = catalog.ellipsoid(1.0, 0.8, 0.5)
    geo = e.first_partials(0.3, 0.2)
    d = geo[0] + 0.5 * geo[1]
    d /= np.linalg.norm(d)
    g = integrate_geodesic(e, (0.3, 0.2), d, 2.0, steps=1024)
    chart = g.surface or e
    res = parallel_transport(chart, g, d, steps=1024)
    vel = g.velocity(chart, res.t)
    angles = [signed_angle(w, v, n) for w, v, n in zip(res.w, vel, res.normals)]
    assert np.ptp(angles) < 1e-6


def test_plane_loop_returns_vector():
    plane = catalog.plane()
    for curve in (circle_loop((0.5, -1.0), 2.0), polyline_loop([(0, 0), (3, 0), (1, 2)])):
        w0 = np.array([0.6, 0.8, 0.0])
        res = parallel_transport(plane, curve, w0, steps=256)
        assert np.allclose(res.w[-1], w0, atol=1e-8)
        assert abs(res.deficit_angle) < 1e-8


def test_latitude_rotation_matches_closed_form():
    phi = np.pi / 6
    curve = latitude_loop(phi)
    w0 = start_tangent(SPHERE, curve)
    res = parallel_transport(SPHERE, curve, w0)
    n = res.normals[0]
    # w(1) is w(0) turned by -2 pi sin(phi) = -pi about the normal
    rot = signed_angle(w0, res.w[-1], n)
    assert abs(abs(rot) - np.pi) < 1e-9
    assert res.deficit_angle == pytest.approx(np.pi, abs=1e-12)


@pytest.mark.parametrize("deg", [10, 30, 50, 70, 85])
def test_latitude_rotation_angle(deg):
    phi = np.radians(deg)
    curve = latitude_loop(phi)
    w0 = start_tangent(SPHERE, curve)
    res = parallel_transport(SPHERE, curve, w0)
    rot = signed_angle(w0, res.w[-1], res.normals[0])
    expected = -2 * np.pi * np.sin(phi)
    assert abs(np.angle(np.exp(1j * (rot - expected)))) < 1e-9


def test_not_tangent():
    curve = latitude_loop(0.3)
    with pytest.raises(NotTangent):
        parallel_transport(SPHERE, curve, np.array([0.0, 0.0, 1.0]))
    with pytest.raises(NotTangent):
        parallel_transport(SPHERE, curve, np.zeros(3))


def test_too_few_steps():
    with pytest.raises(InputError):
        parallel_transport(SPHERE, latitude_loop(0.3), start_tangent(SPHERE, latitude_loop(0.3)), steps=4)


def test_curve_not_regular():
    still = ParamCurve(lambda t: np.zeros(np.shape(t) + (2,)) + 0.2, closed=True)
    with pytest.raises(CurveNotRegular):
        deficit_angle(SPHERE, still)


def test_not_closed():
    arc = ParamCurve(lambda t: np.stack([np.asarray(t), 0.3 + 0 * np.asarray(t)], axis=-1), closed=False)
    with pytest.raises(NotClosed):
        deficit_angle(SPHERE, arc)
    lying = ParamCurve(arc.path, closed=True)
    with pytest.raises(NotClosed):
        deficit_angle(SPHERE, lying)


def test_open_curve_has_no_deficit():
    arc = ParamCurve(lambda t: np.stack([np.asarray(t), 0.3 + 0 * np.asarray(t)], axis=-1))
    res = parallel_transport(SPHERE, arc, start_tangent(SPHERE, arc), steps=64)
    assert res.deficit_angle is None


# deficit angles


@pytest.mark.parametrize("deg", [-60, -20, 15, 30, 45, 60, 75])
def test_latitude_deficit_closed_form(deg):
    phi = np.radians(deg)
    # the far point at the south pole makes every parallel bound the northern cap
    omega = deficit_angle(SPHERE, latitude_loop(phi), far_point=(0.0, 0.0, -1.0))
    assert omega == pytest.approx(2 * np.pi * (1 - np.sin(phi)), abs=1e-10)


def test_equator_deficit():
    # a great circle: w returns to itself, and the unreduced value is the
    # hemisphere area 2 pi, which is 0 modulo 2 pi
    curve = latitude_loop(0.0)
    w0 = start_tangent(SPHERE, curve)
    res = parallel_transport(SPHERE, curve, w0)
    assert np.allclose(res.w[-1], w0, atol=1e-12)
    assert res.deficit_angle == pytest.approx(2 * np.pi, abs=1e-12)
    assert abs(np.angle(np.exp(1j * res.deficit_angle))) < 1e-12


def test_southern_loop_bounds_nearer_cap_by_default():
    omega = deficit_angle(SPHERE, latitude_loop(-np.pi / 4))
    assert omega == pytest.approx(-2 * np.pi * (1 - np.sin(np.pi / 4)), abs=1e-10)


@pytest.mark.parametrize("psi", [np.pi / 6, np.pi / 4, np.pi / 3, 2 * np.pi / 3, 3 * np.pi / 4])
def test_torus_tube_loop_against_band_integral(psi):
    lo, hi = sorted((psi, np.pi / 2))
    sign = 1.0 if psi < np.pi / 2 else -1.0
    band = sign * integrate_curvature(TORUS, ParamRegion(-np.pi, np.pi, lo, hi, resolution=(64, 4096)))
    assert abs(deficit_angle(TORUS, tube_loop(psi)) - band) < 1e-5


def test_torus_top_circle():
    # the Gauss map is constant on the top circle, so nothing turns
    assert abs(deficit_angle(TORUS, tube_loop(np.pi / 2))) < 1e-12
    assert abs(integrate_curvature(TORUS, ParamRegion(-np.pi, np.pi, np.pi / 2 - 1e-9, np.pi / 2))) < 1e-5


def test_w0_independence():
    loops = [
        (SPHERE, latitude_loop(0.4)),
        (TORUS, tube_loop(0.9)),
        (catalog.ellipsoid(1.0, 0.8, 0.5), rectangle_loop(0.2, 1.1, -0.3, 0.5)),
    ]
    for surface, curve in loops:
        a = deficit_angle(surface, curve, w0=start_tangent(surface, curve, 0))
        b = deficit_angle(surface, curve, w0=start_tangent(surface, curve, 1))
        n = np.cross(start_tangent(surface, curve, 0), start_tangent(surface, curve, 1))
        mixed = np.cos(1.0) * start_tangent(surface, curve, 0) + np.sin(1.0) * np.cross(n / np.linalg.norm(n), start_tangent(surface, curve, 0))
        c = deficit_angle(surface, curve, w0=mixed)
        assert abs(a - b) < 1e-9
        assert abs(a - c) < 1e-9


@pytest.mark.parametrize(
    "surface,curve",
    [
        (SPHERE, latitude_loop(np.pi / 6)),
        (TORUS, tube_loop(3 * np.pi / 4)),
        (TORUS, rectangle_loop(-0.5, 0.7, 0.3, 1.2)),
        (catalog.ellipsoid(1.0, 0.8, 0.5), rectangle_loop(0.2, 1.1, -0.3, 0.5)),
    ],
)
def test_orientation_antisymmetry(surface, curve):
    assert abs(deficit_angle(surface, curve) + deficit_angle(surface, curve.reversed())) < 1e-8


@pytest.mark.parametrize("surface", [SPHERE, TORUS, catalog.ellipsoid(1.0, 0.8, 0.5)], ids=lambda s: s.name)
def test_loop_concatenation(surface):
    whole = rectangle_loop(0.2, 1.0, 0.1, 0.7)
    left = rectangle_loop(0.2, 0.6, 0.1, 0.7)
    right = rectangle_loop(0.6, 1.0, 0.1, 0.7)
    total = deficit_angle(surface, whole)
    assert abs(total - deficit_angle(surface, left) - deficit_angle(surface, right)) < 1e-6


def test_norm_drift_order():
    curve = latitude_loop(np.pi / 6)
    w0 = start_tangent(SPHERE, curve)
    drift = [parallel_transport(SPHERE, curve, w0, n).norm_drift for n in (64, 128, 256, 512)]
    orders = np.log2(np.array(drift[:-1]) / np.array(drift[1:]))
    assert np.all((orders >= 3.5) & (orders <= 4.5))


def test_deficit_convergence_order():
    curve = latitude_loop(np.pi / 6)
    errs = [abs(deficit_angle(SPHERE, curve, n) - np.pi) for n in (32, 64, 128, 256)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 3.5) & (orders <= 4.5))


# accelerations


@pytest.mark.parametrize("phi", [0.2, np.pi / 6, 1.1, -0.7])
def test_latitude_tangential_acceleration(phi):
    curve = latitude_loop(phi)
    a_t = tangential_acceleration(SPHERE, curve, TS)
    c = np.cos(2 * np.pi * TS)
    s = np.sin(2 * np.pi * TS)
    sp, cp = np.sin(phi), np.cos(phi)
    expected = -4 * np.pi**2 * cp * np.stack([c * sp**2, s * sp**2, -sp * cp + 0 * TS], axis=-1)
    assert np.allclose(a_t, expected, atol=1e-12)
    assert np.allclose(rotation_rate(SPHERE, curve, TS), 2 * np.pi * abs(sp), atol=1e-12)


def test_planar_circle_curvature():
    plane = catalog.plane()
    for rho in (0.5, 1.0, 3.0):
        curve = circle_loop((1.0, 2.0), rho)
        a_t = np.linalg.norm(tangential_acceleration(plane, curve, TS), axis=-1)
        speed = np.linalg.norm(curve.velocity(plane, TS), axis=-1)
        # at unit speed |a_T| is the curvature 1 / rho
        assert np.allclose(a_t / speed**2, 1.0 / rho, rtol=1e-12)


# geodesics


def test_equator_geodesic_closes():
    g = integrate_geodesic(SPHERE, (0.0, 0.0), np.array([0.0, 1.0, 0.0]), 2 * np.pi)
    chart = g.surface or SPHERE
    assert np.linalg.norm(g.points(chart, 1.0) - [1.0, 0.0, 0.0]) < 1e-6
    assert np.max(np.abs(g.points(chart, TS)[:, 2])) < 1e-9
    a_t = np.linalg.norm(tangential_acceleration(chart, g, TS), axis=-1)
    assert a_t.max() / (2 * np.pi) ** 2 < 1e-6


def test_meridian_reaches_pole():
    g = integrate_geodesic(SPHERE, (0.0, 0.0), np.array([0.0, 0.0, 1.0]), np.pi / 2)
    chart = g.surface or SPHERE
    assert np.linalg.norm(g.points(chart, 1.0) - [0.0, 0.0, 1.0]) < 1e-6
    pts = g.points(chart, TS)
    assert np.allclose(pts[:, 1], 0.0, atol=1e-9)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)


def test_plane_geodesic_is_straight():
    plane = catalog.plane()
    d = np.array([0.6, 0.8, 0.0])
    # RK4 is exact on straight lines; a moderate step count keeps the
    # interpolant's second derivative free of amplified rounding
    g = integrate_geodesic(plane, (1.0, -2.0), d, 5.0, steps=256)
    line = np.array([1.0, -2.0, 0.0]) + 5.0 * TS[:, None] * d
    assert np.max(np.abs(g.points(plane, TS) - line)) < 1e-12
    acc = np.linalg.norm(tangential_acceleration(plane, g, TS), axis=-1) / 5.0**2
    assert acc.max() < 1e-10


def test_geodesic_on_torus_is_geodesic():
    ru, rv = TORUS.first_partials(0.3, 0.4)
    d = (ru / np.linalg.norm(ru) + rv / np.linalg.norm(rv)) / np.sqrt(2)
    g = integrate_geodesic(TORUS, (0.3, 0.4), d, 4.0)
    a_t = np.linalg.norm(tangential_acceleration(TORUS, g, TS), axis=-1)
    speed = np.linalg.norm(g.velocity(TORUS, TS), axis=-1)
    assert np.allclose(speed, 4.0, rtol=1e-9)
    assert a_t.max() / 4.0**2 < 1e-6


def test_geodesic_errors():
    plane = catalog.plane()
    with pytest.raises(LeftDomain):
        integrate_geodesic(plane, (0.0, 0.0), np.array([1.0, 0.0, 0.0]), 30.0)
    with pytest.raises(NotTangent):
        integrate_geodesic(plane, (0.0, 0.0), np.array([0.0, 0.0, 1.0]), 1.0)
    with pytest.raises(InputError):
        integrate_geodesic(plane, (0.0, 0.0), np.array([1.0, 0.0, 0.0]), -1.0)
