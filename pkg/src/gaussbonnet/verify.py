"""Numerical checks of the integral identities around Gauss-Bonnet.

Each check returns a :class:`VerificationReport` pairing two independently
computed numbers: a holonomy or angle computed from curves, and an area
integral computed by quadrature (or a closed form such as ``2 pi chi``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import catalog
from .curves import ParamCurve, latitude_loop, polyline_loop
from .errors import (
    GaussMapDegenerate,
    GeodesicShootingFailed,
    InputError,
    LeftDomain,
    NearAxis,
    NotClosed,
    NotClosedSurface,
    OutOfRange,
    SouthernHemisphere,
)
from .quadrature import ParamRegion, integrate_curvature, polygon_region
from .surface import ParametricSurface, _inv2, local_geometry, normal_derivative
from .transport import (
    DEFAULT_STEPS,
    chart_of,
    curve_from_samples,
    deficit_angle,
    geodesic_batch,
    reference_axis,
)

IDENTITIES = ("prop1", "prop3", "stokes", "triangle", "total", "foucault")
TOTAL_RESOLUTION = (256, 4096)


@dataclass(frozen=True)
class VerificationReport:
    identity: str
    lhs: float
    rhs: float
    resolution: tuple[int, int] | None = None
    steps: int | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.identity not in IDENTITIES:
            raise InputError(f"unknown identity {self.identity!r}")

    @property
    def abs_error(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_error(self) -> float:
        scale = abs(self.rhs)
        return self.abs_error / scale if scale > 0 else self.abs_error

    def passed(self, tol: float) -> bool:
        return self.abs_error < tol

    def to_dict(self) -> dict:
        out = {
            "identity": self.identity,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "abs_error": float(self.abs_error),
            "rel_error": float(self.rel_error),
            "resolution": list(self.resolution) if self.resolution else None,
            "steps": self.steps,
        }
        out.update(self.details)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# deficit = integral of K


def verify_deficit_equals_integral(
    surface: ParametricSurface,
    curve: ParamCurve,
    region: ParamRegion,
    steps: int = DEFAULT_STEPS,
    resolution=None,
) -> VerificationReport:
    """Deficit angle of a positively oriented boundary loop against the
    quadrature of ``K dA`` over the region it bounds."""
    if resolution is not None:
        region = region.with_resolution(*resolution)
    lhs = deficit_angle(surface, curve, steps)
    rhs = integrate_curvature(chart_of(surface, curve), region)
    return VerificationReport(
        "prop3", lhs, rhs, tuple(region.resolution), steps, {"surface": surface.name}
    )


def rectangle_loop(u0, u1, v0, v1) -> ParamCurve:
    """Counterclockwise boundary of a parameter rectangle."""
    return polyline_loop([(u0, v0), (u1, v0), (u1, v1), (u0, v1)])


def random_loops(seed: int = 0, count: int = 10, surfaces=None):
    """Random rectangular loops with their enclosed regions.

    Rectangles are drawn well inside each chart (spherical charts keep
    ``|phi| < 1.3``) and are cycled over the given surfaces, by default a
    sphere, a torus and a triaxial ellipsoid.  Returns a list of
    ``(surface, curve, region)``.
    """
    rng = np.random.default_rng(seed)
    if surfaces is None:
        surfaces = [catalog.sphere(1.0), catalog.torus(2.0, 1.0), catalog.ellipsoid(1.0, 0.8, 0.5)]
    out = []
    for k in range(count):
        surf = surfaces[k % len(surfaces)]
        (a, b), (c, d) = surf.domain
        spherical = surf.pole_distance is not None
        v_lo, v_hi = (-1.3, 1.3) if spherical else (c + 0.1, d - 0.1)
        w = rng.uniform(0.3, 1.2)
        h = rng.uniform(0.2, 0.8)
        u0 = rng.uniform(a + 0.1, b - 0.1 - w)
        v0 = rng.uniform(v_lo, v_hi - h)
        region = ParamRegion(u0, u0 + w, v0, v0 + h)
        out.append((surf, rectangle_loop(u0, u0 + w, v0, v0 + h), region))
    return out


# Stokes route on the unit sphere


def stokes_field(x) -> np.ndarray:
    """The field ``F = (1 - sqrt(1 - x^2 - y^2)) / (x^2 + y^2) (-y, x, 0)``.

    Its curl is ``(0, 0, 1 / sqrt(1 - x^2 - y^2))``, so the flux of the curl
    through a piece of the upper unit hemisphere is that piece's area.  The
    prefactor is evaluated as ``1 / (1 + sqrt(1 - rho^2))``, which is the same
    function without cancellation near the axis.
    """
    x = np.asarray(x, float)
    rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
    root = np.sqrt(np.clip(1.0 - rho2, 0.0, None))
    f = 1.0 / (1.0 + root)
    return np.stack([-f * x[..., 1], f * x[..., 0], np.zeros_like(f)], axis=-1)


def stokes_curl_fd(x, rel: float = 1e-3, h_max: float = 1e-4) -> np.ndarray:
    """Curl of :func:`stokes_field` by fourth-order central differences.

    Off the sphere the field changes on the scale of ``1 - x^2 - y^2``, which
    is ``z^2`` at a point of the sphere, so the step is ``rel * z^2`` (capped
    at ``h_max``).
    """
    x = np.asarray(x, float)
    h = np.minimum(h_max, rel * x[..., 2] ** 2)[..., None]
    J = np.empty(x.shape + (3,))  # J[..., i, j] = dF_i / dx_j
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        J[..., :, j] = (
            stokes_field(x - 2 * h * e) - 8 * stokes_field(x - h * e) + 8 * stokes_field(x + h * e) - stokes_field(x + 2 * h * e)
        ) / (12 * h)
    return np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]], axis=-1
    )


def stokes_deficit_sphere(curve: ParamCurve, steps: int = DEFAULT_STEPS, surface=None) -> float:
    """Line integral of :func:`stokes_field` around a closed curve on the
    unit sphere, by composite Simpson quadrature in ``t``.

    Curves must stay in the open upper hemisphere and away from the polar
    axis.
    """
    surface = chart_of(surface if surface is not None else catalog.sphere(1.0), curve)
    if not curve.closed:
        raise NotClosed("stokes_deficit_sphere needs a closed curve")
    n = steps + (steps % 2)
    t = np.linspace(0.0, 1.0, n + 1)
    x = curve.points(surface, t)
    if np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0)) > 1e-9:
        raise InputError("curve does not lie on the unit sphere")
    if np.any(x[:, 2] <= 0.0):
        raise SouthernHemisphere("the field is only valid on the open upper hemisphere")
    if np.min(x[:, 0] ** 2 + x[:, 1] ** 2) < 1e-10:
        raise NearAxis("curve passes too close to the z-axis")
    vel = curve.velocity(surface, t)
    integrand = np.einsum("ij,ij->i", stokes_field(x), vel)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(math.fsum(w * integrand) / (3.0 * n))


def verify_stokes(curve: ParamCurve, region: ParamRegion, steps: int = DEFAULT_STEPS, surface=None) -> VerificationReport:
    surface = chart_of(surface if surface is not None else catalog.sphere(1.0), curve)
    lhs = stokes_deficit_sphere(curve, steps, surface)
    rhs = integrate_curvature(surface, region)
    return VerificationReport("stokes", lhs, rhs, tuple(region.resolution), steps)


# Gauss map


def _perpendicular(a):
    e = np.eye(3)[int(np.argmin(np.abs(a)))]
    e = e - (e @ a) * a
    return e / np.linalg.norm(e)


def gauss_image_curve(surface: ParametricSurface, curve: ParamCurve, min_speed: float = 1e-8):
    """The loop ``N(c(t))`` as a curve on a unit-sphere chart.

    The chart is centred on the mean normal of the loop so the image stays
    away from the chart's poles.  The image velocity comes from the
    Weingarten relation, never from differencing normals.  Returns
    ``(sphere_chart, image_curve)``.
    """
    surface = chart_of(surface, curve)
    probe = np.linspace(0.0, 1.0, 1025)
    uv = curve.path(probe)
    duv = curve.derivative(probe)
    geo = local_geometry(surface, uv[:, 0], uv[:, 1])
    ndot = normal_derivative(surface, None, None, duv[:, 0], duv[:, 1], geometry=geo)
    speed = np.linalg.norm(ndot, axis=1)
    vel = np.linalg.norm(duv[:, :1] * geo.ru + duv[:, 1:] * geo.rv, axis=1)
    moving = vel > 1e-12 * vel.max()  # polyline corners stop on purpose
    if not moving.any() or np.any(speed[moving] <= min_speed * vel[moving]):
        raise GaussMapDegenerate("the Gauss image of the curve stops (K = 0 along it)")

    center = reference_axis(geo.normal)
    spread = np.arccos(np.clip(geo.normal @ center, -1.0, 1.0))
    if spread.max() < 1.2:
        # image near the centre: keep it on the chart's equator band
        frame = catalog._frame_for(center)
    else:
        # wide image, e.g. a great circle: put the chart's pole at the centre
        frame = catalog._frame_for(_perpendicular(center), pole=center)
    sphere = catalog.sphere(1.0, frame=frame)

    def path(t):
        t = np.asarray(t, float)
        uvt = curve.path(t)
        n = local_geometry(surface, uvt[..., 0], uvt[..., 1], second=False).normal
        theta, phi = sphere.locate(n)
        return np.stack([theta, phi], axis=-1)

    def derivative(t):
        t = np.asarray(t, float)
        uvt = curve.path(t)
        d = curve.derivative(t)
        g = local_geometry(surface, uvt[..., 0], uvt[..., 1])
        nd = normal_derivative(surface, None, None, d[..., 0], d[..., 1], geometry=g)
        theta, phi = sphere.locate(g.normal)
        su, sv = sphere.first_partials(theta, phi)
        rhs = np.stack([np.einsum("...i,...i->...", su, nd), np.einsum("...i,...i->...", sv, nd)], axis=-1)
        gs = local_geometry(sphere, theta, phi, second=False).g
        return np.einsum("...ij,...j->...i", _inv2(gs), rhs)

    image = ParamCurve(
        path, derivative, closed=curve.closed, corners=curve.corners, surface=sphere, label=f"gauss({curve.label})"
    )
    return sphere, image


def verify_prop1(surface: ParametricSurface, curve: ParamCurve, steps: int = DEFAULT_STEPS) -> VerificationReport:
    """Deficit along a loop against the deficit along its Gauss image.

    ``image_orientation`` in the details is the sign of ``K`` along the loop:
    where ``K < 0`` the Gauss map reverses orientation, so the image of the
    region the loop bounds lies on the image loop's right.
    """
    surface = chart_of(surface, curve)
    sphere, image = gauss_image_curve(surface, curve)
    lhs = deficit_angle(surface, curve, steps)
    rhs = deficit_angle(sphere, image, steps)
    uv = curve.path(np.linspace(0.0, 1.0, 257))
    geo = local_geometry(surface, uv[:, 0], uv[:, 1])
    K = np.linalg.det(geo.b) / np.linalg.det(geo.g)
    orientation = int(np.sign(np.mean(K)))
    return VerificationReport(
        "prop1", lhs, rhs, None, steps, {"surface": surface.name, "image_orientation": orientation}
    )


# geodesic triangles


@dataclass(frozen=True)
class Geodesic:
    """A geodesic segment joining two chart points."""

    curve: ParamCurve
    start_velocity: np.ndarray
    end_velocity: np.ndarray
    length: float
    miss: float


def _closest_approach(surface, samples, j, target):
    """Arc length, distance and signed lateral offset of the point of launch
    ``j`` closest to ``target``."""
    n = int(samples.valid[j])
    pts = samples.points[:n, j]
    dist = np.linalg.norm(pts - target, axis=1)
    k = int(np.argmin(dist))
    lo, hi = max(k - 1, 0), min(k + 1, n - 1)
    s_star = samples.s[k]
    if hi > lo:
        sl = slice(lo, hi + 1)
        c = curve_from_samples(
            samples.s[sl], samples.uv[sl, j], samples.duv[sl, j], samples.dduv[sl, j]
        )
        s0, s1 = samples.s[lo], samples.s[hi]

        def d2(s):
            uv = c.path((s - s0) / (s1 - s0))
            x = surface.position(uv[0], uv[1])
            return float(np.sum((x - target) ** 2))

        res = minimize_scalar(d2, bounds=(s0, s1), method="bounded", options={"xatol": 1e-13})
        s_star = float(res.x)
        uv = c.path((s_star - s0) / (s1 - s0))
        duv = c.derivative((s_star - s0) / (s1 - s0)) / (s1 - s0)
    else:
        uv, duv = samples.uv[k, j], samples.duv[k, j]
    geo = local_geometry(surface, uv[0], uv[1], second=False)
    x = surface.position(uv[0], uv[1])
    tangent = duv[0] * geo.ru + duv[1] * geo.rv
    side = np.cross(geo.normal, tangent)
    return s_star, float(np.linalg.norm(x - target)), float((target - x) @ side)


def shoot_geodesic(
    surface: ParametricSurface,
    p,
    q,
    steps: int = 256,
    search_steps: int = 128,
    tol: float = 1e-8,
) -> Geodesic:
    """Geodesic from chart point ``p`` to chart point ``q`` by shooting.

    The launch angle is measured in the tangent plane at ``p`` from the
    projected chord.  A batch of launches brackets a sign change of the
    signed lateral miss, ``brentq`` solves for the angle with
    ``search_steps`` integration steps, and a final integration with
    ``steps`` steps is polished by secant updates until the endpoint is
    within ``tol`` of ``q``.
    """
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    xp = surface.position(p[0], p[1])
    xq = surface.position(q[0], q[1])
    geo = local_geometry(surface, p[0], p[1], second=False)
    chord = xq - xp
    length = float(np.linalg.norm(chord))
    if length == 0.0:
        raise InputError("geodesic endpoints coincide")
    e1 = chord - (chord @ geo.normal) * geo.normal
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(geo.normal, e1)
    L = 2.0 * length

    def direction(a):
        a = np.asarray(a, float)[..., None]
        return np.cos(a) * e1 + np.sin(a) * e2

    def probe(angles, n, arc=L):
        angles = np.atleast_1d(angles)
        samples = geodesic_batch(
            surface, np.repeat(p[None], len(angles), 0), direction(angles), arc, n, truncate=True
        )
        return [_closest_approach(surface, samples, j, xq) for j in range(len(angles))]

    grid = np.linspace(-1.2, 1.2, 25)
    found = probe(grid, search_steps)
    best = None
    for i in range(len(grid) - 1):
        (_, d0, m0), (_, d1, m1) = found[i], found[i + 1]
        if d0 < 0.1 * tol or d1 < 0.1 * tol:
            best = (0.0, grid[i] if d0 <= d1 else grid[i + 1], None)
            break
        if np.sign(m0) != np.sign(m1) and max(d0, d1) < length:
            score = d0 + d1
            if best is None or score < best[0]:
                best = (score, grid[i], grid[i + 1])
    if best is None:
        raise GeodesicShootingFailed("could not bracket the launch angle")

    if best[2] is None:
        alpha = best[1]
    else:
        try:
            alpha = brentq(lambda a: probe(a, search_steps)[0][2], best[1], best[2], xtol=1e-13)
        except ValueError as exc:
            raise GeodesicShootingFailed(str(exc)) from exc

    arc = probe(alpha, search_steps)[0][0]
    for _ in range(6):
        samples = geodesic_batch(surface, p[None], direction(alpha)[None], arc, steps)
        miss = float(np.linalg.norm(samples.points[-1, 0] - xq))
        if miss < tol:
            break
        # secant update of the angle at full resolution
        da = 1e-7
        (arc, _, lat), (_, _, lat2) = probe([alpha, alpha + da], steps, 1.05 * arc)
        if lat2 != lat:
            alpha -= lat * da / (lat2 - lat)
    else:
        raise GeodesicShootingFailed(f"terminal miss {miss:.3e} exceeds {tol:g}")
    curve = curve_from_samples(samples.s, samples.uv[:, 0], samples.duv[:, 0], samples.dduv[:, 0], surface=surface)
    return Geodesic(curve, samples.velocity[0, 0], samples.velocity[-1, 0], arc, miss)


def _angle(a, b):
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), a @ b))


OCTANT = ((0.0, 0.0), (np.pi / 2, 0.0), (0.0, np.pi / 2))


def geodesic_triangle_excess(
    surface: ParametricSurface,
    vertices,
    steps: int = 256,
    resolution=(1024, 1024),
    refine: int = 8,
) -> VerificationReport:
    """Angle excess of a geodesic triangle against the quadrature of ``K dA``
    over it.

    Vertices are chart coordinates; they may sit on a spherical chart's pole
    because the computation moves to a chart centred on the triangle when the
    surface provides one.  The triangle must not straddle a periodic seam of
    the working chart.
    """
    verts = [np.asarray(v, float) for v in vertices]
    if len(verts) != 3:
        raise InputError("a triangle needs three vertices")
    chart = surface
    if surface.recenter is not None:
        pts = [surface.position(v[0], v[1]) for v in verts]
        chart = surface.recenter(np.mean(pts, axis=0))
        verts = [np.array(chart.locate(x), float) for x in pts]

    sides = [shoot_geodesic(chart, verts[i], verts[(i + 1) % 3], steps) for i in range(3)]
    angles = []
    for i in range(3):
        outgoing = sides[i].start_velocity
        incoming = sides[i - 1].end_velocity
        angles.append(_angle(outgoing, -incoming))
    lhs = sum(angles) - np.pi

    t = np.linspace(0.0, 1.0, 4 * steps + 1)[:-1]
    polygon = np.concatenate([s.curve.path(t) for s in sides])
    region = polygon_region(polygon, resolution, refine)
    rhs = integrate_curvature(chart, region)
    return VerificationReport(
        "triangle",
        lhs,
        rhs,
        tuple(resolution),
        steps,
        {"angles": [float(a) for a in angles], "angle_sum": float(sum(angles)), "max_miss": max(s.miss for s in sides)},
    )


# global theorem and Foucault


def total_curvature(surface: ParametricSurface, resolution=TOTAL_RESOLUTION) -> VerificationReport:
    """Integral of ``K dA`` over a closed catalog surface against ``2 pi chi``.

    The default grid is coarse in the periodic direction, where the midpoint
    rule converges spectrally, and fine in the other.
    """
    if surface.euler_characteristic is None:
        raise NotClosedSurface(f"{surface.name} is not a closed catalog surface")
    lhs = integrate_curvature(surface, ParamRegion.full(surface, resolution))
    rhs = 2.0 * np.pi * surface.euler_characteristic
    return VerificationReport(
        "total", lhs, rhs, tuple(resolution), None, {"surface": surface.name, "chi": surface.euler_characteristic}
    )


def foucault_rotation(latitude_degrees: float) -> float:
    """Rotation of a Foucault pendulum's swing plane per sidereal day, in
    degrees: ``360 sin(latitude)``.  Positive is clockwise seen from above,
    the sense observed in the northern hemisphere.
    """
    lat = float(latitude_degrees)
    if not math.isfinite(lat) or abs(lat) > 90.0:
        raise OutOfRange("latitude must lie in [-90, 90] degrees")
    return 360.0 * math.sin(math.radians(lat))


def verify_foucault(latitude_degrees: float, steps: int = DEFAULT_STEPS) -> VerificationReport:
    """Foucault rotation against the transported deficit around the
    latitude circle, using ``rotation = 360 deg - deficit``."""
    rotation = foucault_rotation(latitude_degrees)
    phi = math.radians(latitude_degrees)
    if abs(phi) >= math.pi / 2:
        deficit = 0.0 if phi > 0 else 4 * math.pi
    else:
        # the south pole as far point: the loop always bounds the northern cap
        deficit = deficit_angle(catalog.sphere(1.0), latitude_loop(phi), steps, far_point=(0.0, 0.0, -1.0))
    lhs = rotation
    rhs = 360.0 - math.degrees(deficit)
    return VerificationReport("foucault", lhs, rhs, None, steps, {"latitude_degrees": float(latitude_degrees)})
