"""Catalog of surfaces with analytic derivatives.

All charts are oriented so that ``r_u x r_v`` points outward (away from the
axis for the open surfaces of revolution).  Spherical-type charts
(``sphere``, ``ellipsoid``) use azimuth ``theta`` in ``[-pi, pi]`` (periodic)
and latitude ``phi`` in ``(-pi/2, pi/2)``, shrunk by ``POLE_EPS`` so the
degenerate pole rows are never part of the domain.
"""

from __future__ import annotations

import numpy as np

from .surface import ParametricSurface

POLE_EPS = 1e-9


def _stack(x, y, z):
    out = np.empty(np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(z)) + (3,))
    out[..., 0] = x
    out[..., 1] = y
    out[..., 2] = z
    return out


def plane(extent: float = 10.0) -> ParametricSurface:
    """The plane ``z = 0`` over ``[-extent, extent]^2``."""
    zero = lambda u, v: _stack(0.0 * u, 0.0 * v, 0.0 * u)
    return ParametricSurface(
        name="plane",
        chart=lambda u, v: _stack(u, v, 0.0 * u),
        domain=((-extent, extent), (-extent, extent)),
        r_u=lambda u, v: _stack(1.0 + 0 * u, 0 * v, 0 * u),
        r_v=lambda u, v: _stack(0 * u, 1.0 + 0 * v, 0 * u),
        r_uu=zero,
        r_uv=zero,
        r_vv=zero,
        params={"extent": extent},
    )


def cylinder(radius: float = 1.0, height: float = 10.0) -> ParametricSurface:
    """``(R cos u, R sin u, v)`` with ``|v| <= height / 2``."""
    R = float(radius)
    return ParametricSurface(
        name="cylinder",
        chart=lambda u, v: _stack(R * np.cos(u), R * np.sin(u), v + 0 * u),
        domain=((-np.pi, np.pi), (-height / 2, height / 2)),
        periodic=(True, False),
        r_u=lambda u, v: _stack(-R * np.sin(u), R * np.cos(u), 0 * u + 0 * v),
        r_v=lambda u, v: _stack(0 * u + 0 * v, 0 * u, 1.0 + 0 * u + 0 * v),
        r_uu=lambda u, v: _stack(-R * np.cos(u), -R * np.sin(u), 0 * u + 0 * v),
        r_uv=lambda u, v: _stack(0 * u + 0 * v, 0 * u, 0 * u),
        r_vv=lambda u, v: _stack(0 * u + 0 * v, 0 * u, 0 * u),
        params={"radius": R, "height": height},
    )


def cone(half_angle: float, s_min: float = 0.1, s_max: float = 2.0) -> ParametricSurface:
    """Cone with apex at the origin opening along +z.

    ``r(theta, s) = s (sin a cos theta, sin a sin theta, cos a)`` where ``a``
    is the half-angle in radians and ``s`` the distance from the apex.
    """
    sa, ca = np.sin(half_angle), np.cos(half_angle)
    zero = lambda t, s: _stack(0 * t + 0 * s, 0 * t, 0 * t)
    return ParametricSurface(
        name="cone",
        chart=lambda t, s: _stack(s * sa * np.cos(t), s * sa * np.sin(t), s * ca + 0 * t),
        domain=((-np.pi, np.pi), (s_min, s_max)),
        periodic=(True, False),
        r_u=lambda t, s: _stack(-s * sa * np.sin(t), s * sa * np.cos(t), 0 * t + 0 * s),
        r_v=lambda t, s: _stack(sa * np.cos(t) + 0 * s, sa * np.sin(t) + 0 * s, ca + 0 * t + 0 * s),
        r_uu=lambda t, s: _stack(-s * sa * np.cos(t), -s * sa * np.sin(t), 0 * t + 0 * s),
        r_uv=lambda t, s: _stack(-sa * np.sin(t) + 0 * s, sa * np.cos(t) + 0 * s, 0 * t + 0 * s),
        r_vv=zero,
        params={"half_angle": float(half_angle)},
    )


def torus(R: float = 2.0, r: float = 1.0) -> ParametricSurface:
    """Torus of revolution about z.

    ``theta`` runs around the z-axis and ``psi`` around the tube, with
    ``psi = 0`` on the outer equator and ``psi = pi`` on the inner one, so
    ``K = cos psi / (r (R + r cos psi))``.
    """
    if not R > r > 0:
        raise ValueError("torus needs R > r > 0")
    R, r = float(R), float(r)

    def chart(t, p):
        rho = R + r * np.cos(p)
        return _stack(rho * np.cos(t), rho * np.sin(t), r * np.sin(p))

    def r_t(t, p):
        rho = R + r * np.cos(p)
        return _stack(-rho * np.sin(t), rho * np.cos(t), 0 * t + 0 * p)

    def r_p(t, p):
        return _stack(-r * np.sin(p) * np.cos(t), -r * np.sin(p) * np.sin(t), r * np.cos(p) + 0 * t)

    def r_tt(t, p):
        rho = R + r * np.cos(p)
        return _stack(-rho * np.cos(t), -rho * np.sin(t), 0 * t + 0 * p)

    def r_tp(t, p):
        return _stack(r * np.sin(p) * np.sin(t), -r * np.sin(p) * np.cos(t), 0 * t + 0 * p)

    def r_pp(t, p):
        return _stack(-r * np.cos(p) * np.cos(t), -r * np.cos(p) * np.sin(t), -r * np.sin(p) + 0 * t)

    return ParametricSurface(
        name="torus",
        chart=chart,
        domain=((-np.pi, np.pi), (-np.pi, np.pi)),
        periodic=(True, True),
        r_u=r_t,
        r_v=r_p,
        r_uu=r_tt,
        r_uv=r_tp,
        r_vv=r_pp,
        euler_characteristic=0,
        params={"R": R, "r": r},
    )


def _unit_sphere(t, p):
    return _stack(np.cos(t) * np.cos(p), np.sin(t) * np.cos(p), np.sin(p) + 0 * t)


def _unit_sphere_t(t, p):
    return _stack(-np.sin(t) * np.cos(p), np.cos(t) * np.cos(p), 0 * t + 0 * p)


def _unit_sphere_p(t, p):
    return _stack(-np.cos(t) * np.sin(p), -np.sin(t) * np.sin(p), np.cos(p) + 0 * t)


def _unit_sphere_tt(t, p):
    return _stack(-np.cos(t) * np.cos(p), -np.sin(t) * np.cos(p), 0 * t + 0 * p)


def _unit_sphere_tp(t, p):
    return _stack(np.sin(t) * np.sin(p), -np.cos(t) * np.sin(p), 0 * t + 0 * p)


def _frame_for(center: np.ndarray, pole=None) -> np.ndarray:
    """Rotation whose first column is ``center`` and whose third column (the
    chart's polar axis) is perpendicular to it, taken along ``pole`` when
    given and otherwise along the coordinate axis least aligned with
    ``center``."""
    c = np.asarray(center, float)
    c = c / np.linalg.norm(c)
    axis = np.eye(3)[int(np.argmin(np.abs(c)))] if pole is None else np.asarray(pole, float)
    d = axis - np.dot(axis, c) * c
    if np.linalg.norm(d) < 1e-12:
        axis = np.eye(3)[int(np.argmin(np.abs(c)))]
        d = axis - np.dot(axis, c) * c
    d /= np.linalg.norm(d)
    return np.column_stack([c, np.cross(d, c), d])


def ellipsoid(a: float, b: float, c: float, frame=None, name: str = "ellipsoid") -> ParametricSurface:
    """Ellipsoid ``x^2/a^2 + y^2/b^2 + z^2/c^2 = 1``.

    The chart is ``diag(a, b, c) Q s(theta, phi)`` with ``s`` the standard
    spherical chart of the unit sphere and ``Q`` the rotation ``frame``
    (identity by default).  Different frames are different charts of the same
    surface; ``recenter`` builds one whose equator passes through a given
    point so that computations can be moved away from the poles.
    """
    D = np.array([float(a), float(b), float(c)])
    Q = np.eye(3) if frame is None else np.asarray(frame, float)
    M = D[:, None] * Q

    def lin(vec):
        return vec @ M.T

    def chart(t, p):
        return lin(_unit_sphere(t, p))

    def locate(x):
        y = (np.asarray(x, float) / D) @ Q
        y = y / np.linalg.norm(y, axis=-1, keepdims=True)
        return np.arctan2(y[..., 1], y[..., 0]), np.arcsin(np.clip(y[..., 2], -1.0, 1.0))

    def recenter(point, pole=None):
        # pole is an ambient direction; map it with the same linear change
        y = np.asarray(point, float) / D
        hint = None if pole is None else np.asarray(pole, float) * D
        return ellipsoid(a, b, c, frame=_frame_for(y, hint), name=name)

    is_sphere = a == b == c
    params = {"R": float(a)} if is_sphere else {"a": float(a), "b": float(b), "c": float(c)}
    if frame is not None:
        params["frame"] = Q.tolist()
    return ParametricSurface(
        name=name,
        chart=chart,
        domain=((-np.pi, np.pi), (-np.pi / 2 + POLE_EPS, np.pi / 2 - POLE_EPS)),
        periodic=(True, False),
        r_u=lambda t, p: lin(_unit_sphere_t(t, p)),
        r_v=lambda t, p: lin(_unit_sphere_p(t, p)),
        r_uu=lambda t, p: lin(_unit_sphere_tt(t, p)),
        r_uv=lambda t, p: lin(_unit_sphere_tp(t, p)),
        r_vv=lambda t, p: -lin(_unit_sphere(t, p)),
        euler_characteristic=2,
        params=params,
        locate=locate,
        recenter=recenter,
        pole_distance=lambda t, p: np.pi / 2 - np.abs(p),
    )


def sphere(R: float = 1.0, frame=None) -> ParametricSurface:
    """Sphere of radius ``R``: ``R (cos t cos p, sin t cos p, sin p)``."""
    return ellipsoid(R, R, R, frame=frame, name="sphere")


def stereographic_sphere(R: float = 1.0, extent: float = 3.0) -> ParametricSurface:
    """Sphere of radius ``R`` charted by inverse stereographic projection
    from the north pole; ``(u, v) = (0, 0)`` is the south pole.

    Coordinates are swapped relative to the textbook formula so that the
    normal points outward.  Covers the sphere minus a polar cap, so it carries
    no Euler characteristic.
    """
    R = float(R)

    def chart(u, v):
        s = 1 + u * u + v * v
        return R * _stack(2 * v / s, 2 * u / s, 1 - 2 / s)

    def r_u(u, v):
        s = 1 + u * u + v * v
        return R * _stack(-4 * u * v / s**2, (2 * s - 4 * u * u) / s**2, 4 * u / s**2)

    def r_v(u, v):
        s = 1 + u * u + v * v
        return R * _stack((2 * s - 4 * v * v) / s**2, -4 * u * v / s**2, 4 * v / s**2)

    def r_uu(u, v):
        s = 1 + u * u + v * v
        return R * _stack(
            -4 * v / s**2 + 16 * u * u * v / s**3,
            -12 * u / s**2 + 16 * u**3 / s**3,
            4 / s**2 - 16 * u * u / s**3,
        )

    def r_uv(u, v):
        s = 1 + u * u + v * v
        return R * _stack(
            -4 * u / s**2 + 16 * u * v * v / s**3,
            -4 * v / s**2 + 16 * u * u * v / s**3,
            -16 * u * v / s**3,
        )

    def r_vv(u, v):
        s = 1 + u * u + v * v
        return R * _stack(
            -12 * v / s**2 + 16 * v**3 / s**3,
            -4 * u / s**2 + 16 * u * v * v / s**3,
            4 / s**2 - 16 * v * v / s**3,
        )

    return ParametricSurface(
        name="stereographic_sphere",
        chart=chart,
        domain=((-extent, extent), (-extent, extent)),
        r_u=r_u,
        r_v=r_v,
        r_uu=r_uu,
        r_uv=r_uv,
        r_vv=r_vv,
        params={"R": R},
    )


def from_chart(chart, domain, periodic=(False, False), name="custom", euler_characteristic=None) -> ParametricSurface:
    """Wrap a user chart; all derivatives come from central differences."""
    return ParametricSurface(
        name=name,
        chart=chart,
        domain=tuple(tuple(map(float, d)) for d in domain),
        periodic=tuple(periodic),
        euler_characteristic=euler_characteristic,
    )


CATALOG = {
    "sphere": (sphere, 1),
    "torus": (torus, 2),
    "cylinder": (cylinder, 1),
    "cone": (cone, 1),
    "ellipsoid": (ellipsoid, 3),
    "plane": (plane, 0),
}


def from_spec(spec: str) -> ParametricSurface:
    """Build a catalog surface from ``name[:p1,p2,...]``.

    The cone's half-angle is given in degrees, every other parameter is a
    length.  Unknown names and wrong parameter counts raise ``KeyError`` and
    ``ValueError`` respectively.
    """
    name, _, rest = spec.strip().partition(":")
    name = name.lower()
    if name not in CATALOG:
        raise KeyError(f"unknown surface {name!r}; known: {', '.join(sorted(CATALOG))}")
    factory, nparams = CATALOG[name]
    values = [float(x) for x in rest.split(",")] if rest else []
    if values and len(values) != nparams:
        raise ValueError(f"{name} takes {nparams} parameter(s), got {len(values)}")
    if any(not np.isfinite(x) or x <= 0 for x in values):
        raise ValueError(f"{name} parameters must be positive: {values}")
    if name == "cone" and values:
        values = [np.radians(values[0])]
    if name == "cone" and not values:
        values = [np.radians(30.0)]
    return factory(*values)
