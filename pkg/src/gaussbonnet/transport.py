"""Extrinsic parallel transport, deficit angles and geodesics.

Nothing here uses Christoffel symbols.  A tangent field ``w`` along a curve
is parallel when ``dw/dt`` has no tangential part, which for tangent ``w``
is the linear ODE ``dw/dt = -(w . dN/dt) N``.  A geodesic is a unit-speed
curve whose acceleration is normal, ``c'' = b(c', c') N``.  Both are
integrated with the classical fourth-order Runge-Kutta scheme at a fixed
step, re-projecting onto the tangent plane and restoring the norm after every
step.

Deficit angles
--------------
The angle between ``w(0)`` and ``w(1)`` is only defined modulo ``2 pi``.  To
report an unreduced value the transported vector is measured against the
tangent field ``X = e - (e . N) N`` obtained by projecting a fixed ambient
direction ``e``.  ``X`` depends only on the normal, so it is single valued
around the loop and the accumulated change ``d_beta`` of the angle from ``X``
to ``w`` is well defined.  ``X`` vanishes where ``N = +-e``; each such zero
enclosed by the loop contributes ``2 pi`` times the winding number of the
Gauss image ``N(t)`` around ``+-e``.  Winding numbers on the sphere are taken
relative to a far point ``p``, by default the antipode of the mean normal of
the loop.  The result

    deficit = d_beta + 2 pi (wind(N, e; p) + wind(N, -e; p))

does not depend on ``e`` and equals the signed area enclosed by the Gauss
image as seen from ``p``.  For a positively oriented loop bounding a region
whose normals avoid ``p`` it is the integral of ``K`` over that region.  It
changes sign when the loop is reversed and is additive under concatenation
for a fixed ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BPoly

from .curves import ParamCurve
from .errors import (
    AmbiguousDeficit,
    CurveNotRegular,
    DegenerateChart,
    InputError,
    LeftDomain,
    NotClosed,
    NotTangent,
)
from .surface import ParametricSurface, _inv2, local_geometry, normal_derivative

TWO_PI = 2.0 * np.pi
DEFAULT_STEPS = 4096
POLE_MARGIN = 0.1


def chart_of(surface: ParametricSurface, curve: ParamCurve) -> ParametricSurface:
    """The chart a curve's coordinates refer to."""
    return curve.surface if curve.surface is not None else surface


@dataclass(frozen=True)
class TransportResult:
    """Transported field sampled at ``steps + 1`` uniform nodes.

    ``norm_drift`` accumulates ``| |w_pred| - |w0| |`` over all steps, where
    ``w_pred`` is the raw Runge-Kutta update before the tangent projection
    and renormalisation; it scales like ``steps**-4``.
    ``deficit_angle`` is ``None`` for open curves.
    """

    t: np.ndarray
    w: np.ndarray
    normals: np.ndarray
    deficit_angle: float | None
    norm_drift: float

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.w))


def _dense_geometry(surface, curve, steps):
    """Geometry at all nodes and half-steps, i.e. ``2 steps + 1`` times."""
    tt = np.linspace(0.0, 1.0, 2 * steps + 1)
    uv = curve.path(tt)
    duv = curve.derivative(tt)
    geo = local_geometry(surface, uv[:, 0], uv[:, 1])
    ndot = normal_derivative(surface, None, None, duv[:, 0], duv[:, 1], geometry=geo)
    vel = duv[:, :1] * geo.ru + duv[:, 1:] * geo.rv
    speed = np.linalg.norm(vel, axis=1)
    mask = np.ones(tt.shape, bool)
    for c in curve.corners:
        mask &= np.abs(tt - c) > 1e-12
    scale = speed.max() if speed.size else 0.0
    if scale == 0.0 or np.any(speed[mask] <= 1e-12 * scale):
        raise CurveNotRegular("curve velocity vanishes away from declared corners")
    return tt, uv, geo, ndot


def _rk4_transport(normals, ndot, w0, h):
    """Integrate ``w' = -N (N' . w)`` with stage data at half steps.

    The ODE is linear, so each RK4 step is a 3x3 matrix; all step matrices
    are built at once and only the matrix-vector chain runs sequentially.
    """
    steps = (len(normals) - 1) // 2
    A = -np.einsum("ki,kj->kij", normals, ndot)  # A(t) w = -N (N' . w)
    A0, A1, A2 = A[0:-1:2], A[1::2], A[2::2]
    eye = np.eye(3)
    B2 = A1 @ (eye + 0.5 * h * A0)
    B3 = A1 @ (eye + 0.5 * h * B2)
    B4 = A2 @ (eye + h * B3)
    M = eye + (h / 6.0) * (A0 + 2.0 * B2 + 2.0 * B3 + B4)

    w = np.empty((steps + 1, 3))
    w[0] = w0
    norm0 = float(np.linalg.norm(w0))
    nodes = normals[::2]
    drift = 0.0
    cur = np.array(w0, float)
    for k in range(steps):
        nxt = M[k] @ cur
        drift += abs(float(np.sqrt(nxt @ nxt)) - norm0)
        n = nodes[k + 1]
        nxt = nxt - (nxt @ n) * n
        cur = nxt * (norm0 / np.sqrt(nxt @ nxt))
        w[k + 1] = cur
    return w, drift


def parallel_transport(
    surface: ParametricSurface,
    curve: ParamCurve,
    w0,
    steps: int = DEFAULT_STEPS,
    far_point=None,
) -> TransportResult:
    """Parallel-transport the tangent vector ``w0`` along ``curve``.

    ``steps`` fixed RK4 steps are taken over ``t in [0, 1]``.  For closed
    curves the unreduced deficit angle is computed as described in the
    module docstring; ``far_point`` overrides the reference point on the unit
    sphere used for winding numbers.
    """
    if steps < 8:
        raise InputError("steps must be >= 8")
    surface = chart_of(surface, curve)
    _, _, geo, ndot = _dense_geometry(surface, curve, steps)
    normals = geo.normal
    w0 = np.asarray(w0, float)
    wn = np.linalg.norm(w0)
    if wn == 0 or abs(w0 @ normals[0]) > 1e-8 * wn:
        raise NotTangent("w0 is not tangent at the start of the curve")

    w, drift = _rk4_transport(normals, ndot, w0, 1.0 / steps)
    node_normals = normals[::2]
    deficit = None
    if curve.closed:
        _check_closed(surface, curve)
        deficit = _accumulated_deficit(node_normals, w, far_point)
    return TransportResult(np.linspace(0.0, 1.0, steps + 1), w, node_normals, deficit, drift)


def _check_closed(surface, curve):
    ends = curve.points(surface, np.array([0.0, 1.0]))
    if np.linalg.norm(ends[1] - ends[0]) > 1e-9 * max(1.0, float(np.abs(ends).max())):
        raise NotClosed("curve endpoints differ in R^3")


def _orthonormal_pair(a):
    axis = np.eye(3)[int(np.argmin(np.abs(a)))]
    u1 = axis - (axis @ a) * a
    u1 /= np.linalg.norm(u1)
    return u1, np.cross(a, u1)


def reference_axis(normals: np.ndarray) -> np.ndarray:
    """Unit vector pointing at the Gauss image of a loop from inside.

    The mean normal when it is not negligible, otherwise the oriented vector
    area of the image loop (great circles and other balanced loops).
    """
    loop = normals[:-1]
    mean = loop.mean(axis=0)
    if np.linalg.norm(mean) > 1e-6:
        return mean / np.linalg.norm(mean)
    area = np.cross(loop, np.roll(loop, -1, axis=0)).sum(axis=0)
    if np.linalg.norm(area) < 1e-12:
        raise AmbiguousDeficit("cannot choose a reference axis for this loop")
    return area / np.linalg.norm(area)


def sphere_winding(points: np.ndarray, target: np.ndarray, far: np.ndarray) -> int:
    """Winding number of a closed loop on the unit sphere around ``target``,
    relative to ``far``, via stereographic projection from ``far``.

    Positive means counterclockwise as seen from outside the sphere.
    """
    target = np.asarray(target, float)
    far = np.asarray(far, float)
    if np.linalg.norm(target - far) < 1e-12:
        return 0
    a = -far
    u1, u2 = _orthonormal_pair(a)

    def project(x):
        x = np.atleast_2d(x)
        denom = 1.0 - x @ far
        return np.stack([(x @ u1) / denom, (x @ u2) / denom], axis=-1)

    if np.min(1.0 - points @ far) < 1e-9:
        raise AmbiguousDeficit("Gauss image passes through the far point")
    p = project(points)
    q = project(target)[0]
    ang = np.unwrap(np.arctan2(p[:, 1] - q[1], p[:, 0] - q[0]))
    turns = (ang[-1] - ang[0]) / TWO_PI
    return int(round(turns))


def _accumulated_deficit(normals, w, far_point=None) -> float:
    if far_point is None:
        a = reference_axis(normals)
    else:
        a = -np.asarray(far_point, float)
        a /= np.linalg.norm(a)
    far = -a
    u1, u2 = _orthonormal_pair(a)
    s = 1.0 / np.sqrt(2.0)
    candidates = [a, u1, u2, s * (u1 + u2), s * (u1 - u2)]
    clearance = [np.min(np.linalg.norm(np.cross(normals, e), axis=1)) for e in candidates]
    best = int(np.argmax(clearance))
    if clearance[best] < 1e-3:
        raise AmbiguousDeficit("no reference direction clears the Gauss image")
    e = candidates[best]

    X = e - (normals @ e)[:, None] * normals
    beta = np.arctan2(np.einsum("ij,ij->i", np.cross(X, w), normals), np.einsum("ij,ij->i", X, w))
    beta = np.unwrap(beta)
    d_beta = beta[-1] - beta[0]
    wind = sphere_winding(normals, e, far) + sphere_winding(normals, -e, far)
    return float(d_beta + TWO_PI * wind)


def _default_w0(surface, curve):
    uv = curve.path(np.array(0.0))
    ru, _ = surface.first_partials(uv[0], uv[1])
    return ru / np.linalg.norm(ru)


def deficit_angle(
    surface: ParametricSurface,
    curve: ParamCurve,
    steps: int = DEFAULT_STEPS,
    w0=None,
    far_point=None,
) -> float:
    """Signed, unreduced deficit angle of a closed curve (radians).

    The loop should be positively oriented with respect to the region it
    bounds; on the unit sphere the counterclockwise parallel at latitude
    ``phi`` gives ``2 pi (1 - sin phi)``.
    """
    if not curve.closed:
        raise NotClosed("deficit_angle needs a closed curve")
    chart = chart_of(surface, curve)
    if w0 is None:
        w0 = _default_w0(chart, curve)
    return parallel_transport(chart, curve, w0, steps, far_point).deficit_angle


def _acceleration(surface, curve, t):
    t = np.asarray(t, float)
    uv = curve.path(t)
    duv = curve.derivative(t)
    dduv = curve.second_derivative(t)
    geo = local_geometry(surface, uv[..., 0], uv[..., 1])
    ruu, ruv, rvv = geo.second
    du, dv = duv[..., :1], duv[..., 1:]
    acc = (
        dduv[..., :1] * geo.ru
        + dduv[..., 1:] * geo.rv
        + du * du * ruu
        + 2 * du * dv * ruv
        + dv * dv * rvv
    )
    vel = du * geo.ru + dv * geo.rv
    return acc, vel, geo.normal


def tangential_acceleration(surface: ParametricSurface, curve: ParamCurve, t) -> np.ndarray:
    """Projection of the acceleration ``c''(t)`` onto the tangent plane."""
    surface = chart_of(surface, curve)
    acc, _, n = _acceleration(surface, curve, t)
    return acc - np.einsum("...i,...i->...", acc, n)[..., None] * n


def rotation_rate(surface: ParametricSurface, curve: ParamCurve, t):
    """``|a_T| / |v|``: rate at which a parallel vector turns relative to a
    constant-speed curve."""
    surface = chart_of(surface, curve)
    acc, vel, n = _acceleration(surface, curve, t)
    a_t = acc - np.einsum("...i,...i->...", acc, n)[..., None] * n
    return np.linalg.norm(a_t, axis=-1) / np.linalg.norm(vel, axis=-1)


# geodesics


class _NearPole(Exception):
    pass


def _geodesic_rhs(surface, uv, V, geo=None):
    """Coordinate velocity ``g^-1 [r_u r_v]^T V`` and ambient acceleration
    ``(N . r_ij u'_i u'_j) N``."""
    if geo is None:
        geo = local_geometry(surface, uv[..., 0], uv[..., 1])
    rhs = np.stack([np.einsum("...i,...i->...", geo.ru, V), np.einsum("...i,...i->...", geo.rv, V)], axis=-1)
    ginv = _inv2(geo.g)
    udot = np.einsum("...ij,...j->...i", ginv, rhs)
    ruu, ruv, rvv = geo.second
    du, dv = udot[..., :1], udot[..., 1:]
    Q = du * du * ruu + 2 * du * dv * ruv + dv * dv * rvv
    kappa = np.einsum("...i,...i->...", Q, geo.normal)
    return udot, kappa[..., None] * geo.normal, geo, Q, ginv


@dataclass(frozen=True)
class GeodesicSamples:
    """Raw output of the geodesic integrator for a batch of launches.

    Arrays are indexed ``[node, launch, ...]``; ``s`` is arc length.
    ``valid`` holds, per launch, the number of nodes computed before the
    trajectory left the chart (only when truncation was requested).
    """

    s: np.ndarray
    uv: np.ndarray
    duv: np.ndarray
    dduv: np.ndarray
    points: np.ndarray
    velocity: np.ndarray
    valid: np.ndarray


def geodesic_batch(
    surface: ParametricSurface,
    start,
    direction,
    arc_length: float,
    steps: int,
    truncate: bool = False,
    pole_margin: float | None = None,
) -> GeodesicSamples:
    """Integrate unit-speed geodesics for a batch of launches at once.

    ``start`` has shape ``(M, 2)`` and ``direction`` ``(M, 3)``.  With
    ``truncate`` a launch that leaves a non-periodic axis is frozen instead of
    raising :class:`LeftDomain`.
    """
    uv = np.array(start, float).reshape(-1, 2)
    V = np.array(direction, float).reshape(-1, 3)
    m = len(uv)
    h = arc_length / steps
    geo = local_geometry(surface, uv[:, 0], uv[:, 1], second=False)
    V = V - np.einsum("ij,ij->i", V, geo.normal)[:, None] * geo.normal
    V /= np.linalg.norm(V, axis=1, keepdims=True)

    out_uv = np.empty((steps + 1, m, 2))
    out_du = np.empty((steps + 1, m, 2))
    out_ddu = np.empty((steps + 1, m, 2))
    out_V = np.empty((steps + 1, m, 3))
    valid = np.full(m, steps + 1)
    alive = np.ones(m, bool)

    def check(uv):
        if pole_margin is not None and surface.pole_distance is not None:
            if np.any(surface.pole_distance(uv[:, 0], uv[:, 1])[alive] < pole_margin):
                raise _NearPole
        inside = surface.in_domain(uv[:, 0], uv[:, 1])
        if np.any(~inside & alive) and not truncate:
            raise LeftDomain("geodesic left the chart domain")
        return inside

    check(uv)
    for k in range(steps + 1):
        # geometry at the node serves the projection, the record and k1
        geo = local_geometry(surface, uv[:, 0], uv[:, 1])
        V = V - np.einsum("ij,ij->i", V, geo.normal)[:, None] * geo.normal
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        k1u, k1v, _, Q, ginv = _geodesic_rhs(surface, uv, V, geo)
        proj = np.stack([np.einsum("ij,ij->i", geo.ru, Q), np.einsum("ij,ij->i", geo.rv, Q)], axis=-1)
        out_uv[k] = uv
        out_du[k] = k1u
        out_ddu[k] = -np.einsum("...ij,...j->...i", ginv, proj)
        out_V[k] = V
        if k == steps:
            break
        k2u, k2v = _geodesic_rhs(surface, uv + 0.5 * h * k1u, V + 0.5 * h * k1v)[:2]
        k3u, k3v = _geodesic_rhs(surface, uv + 0.5 * h * k2u, V + 0.5 * h * k2v)[:2]
        k4u, k4v = _geodesic_rhs(surface, uv + h * k3u, V + h * k3v)[:2]
        new_uv = uv + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
        new_V = V + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        inside = check(new_uv)
        stopped = alive & ~inside
        valid[stopped] = k + 1
        alive &= inside
        new_uv[~alive] = uv[~alive]
        new_V[~alive] = V[~alive]
        uv, V = new_uv, new_V

    s = np.linspace(0.0, arc_length, steps + 1)
    points = surface.position(out_uv[..., 0], out_uv[..., 1])
    return GeodesicSamples(s, out_uv, out_du, out_ddu, points, out_V, valid)


def curve_from_samples(s, uv, duv, dduv, surface=None, label="geodesic") -> ParamCurve:
    """Quintic Hermite interpolant through sampled values, first and second
    derivatives, reparametrised to ``t in [0, 1]``."""
    length = s[-1] - s[0]
    y = np.stack([uv, duv, dduv], axis=1)  # (n, 3, 2)
    poly = BPoly.from_derivatives(s, y)
    d1 = poly.derivative(1)
    d2 = poly.derivative(2)
    s0 = s[0]
    return ParamCurve(
        path=lambda t: poly(s0 + length * np.asarray(t, float)),
        derivative=lambda t: length * d1(s0 + length * np.asarray(t, float)),
        second_derivative=lambda t: length**2 * d2(s0 + length * np.asarray(t, float)),
        surface=surface,
        label=label,
    )


def integrate_geodesic(
    surface: ParametricSurface,
    start,
    direction,
    arc_length: float,
    steps: int = 1024,
) -> ParamCurve:
    """Unit-speed geodesic from ``start = (u, v)`` with initial tangent
    ``direction`` (a vector in R^3), of length ``arc_length``.

    The returned curve is parametrised by ``t = s / arc_length``.  Spherical
    charts are singular at their poles; if the trajectory comes within
    ``POLE_MARGIN`` of one it is recomputed in a re-centred chart of the same
    surface whose equator follows the launch direction, and the curve's
    ``surface`` attribute names that chart.  Non-periodic charts raise
    :class:`LeftDomain` when the trajectory exits.
    """
    if not arc_length > 0:
        raise InputError("arc_length must be positive")
    start = np.asarray(start, float)
    direction = np.asarray(direction, float)
    n0 = local_geometry(surface, start[0], start[1], second=False).normal
    if abs(direction @ n0) > 1e-8 * np.linalg.norm(direction):
        raise NotTangent("launch direction is not tangent")
    chart = surface
    margin = POLE_MARGIN if surface.recenter is not None else None
    try:
        if margin is not None:
            # a coarse pass finds most pole approaches at a fraction of the cost
            geodesic_batch(chart, start[None], direction[None], arc_length, max(16, steps // 16), pole_margin=margin)
        samples = geodesic_batch(chart, start[None], direction[None], arc_length, steps, pole_margin=margin)
    except _NearPole:
        x0 = surface.position(start[0], start[1])
        chart = surface.recenter(x0, np.cross(x0, direction))
        local = np.array(chart.locate(x0), float)
        samples = geodesic_batch(chart, local[None], direction[None], arc_length, steps)
    return curve_from_samples(
        samples.s, samples.uv[:, 0], samples.duv[:, 0], samples.dduv[:, 0], surface=chart
    )
