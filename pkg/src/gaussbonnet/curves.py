"""Curves in the parameter domain of a surface.

A :class:`ParamCurve` maps ``t in [0, 1]`` to ``(u, v)``.  All constructors
below return vectorised callables: ``path(t)`` accepts an array of ``t`` and
returns an array of shape ``t.shape + (2,)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi


def _central(fn, h):
    def d(t):
        t = np.asarray(t, float)
        return (fn(t + h) - fn(t - h)) / (2 * h)

    return d


@dataclass(frozen=True)
class ParamCurve:
    """A path ``t -> (u(t), v(t))`` in a chart's parameter domain.

    ``derivative`` and ``second_derivative`` fall back to central differences
    of ``path`` when omitted.  ``corners`` lists parameter values where the
    velocity vanishes on purpose (polyline vertices); regularity checks skip
    them.  ``surface`` optionally pins the chart the coordinates refer to;
    geodesics integrated through a re-centred chart carry it here.
    """

    path: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray] | None = None
    closed: bool = False
    second_derivative: Callable[[np.ndarray], np.ndarray] | None = None
    corners: tuple[float, ...] = ()
    surface: object | None = field(default=None, repr=False, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.derivative is None:
            object.__setattr__(self, "derivative", _central(self.path, 1e-6))
        if self.second_derivative is None:
            object.__setattr__(self, "second_derivative", _central(self.derivative, 1e-5))

    def __call__(self, t):
        return self.path(np.asarray(t, float))

    def velocity(self, surface, t) -> np.ndarray:
        """Velocity in R^3, ``u' r_u + v' r_v``."""
        t = np.asarray(t, float)
        uv = self.path(t)
        duv = self.derivative(t)
        ru, rv = surface.first_partials(uv[..., 0], uv[..., 1])
        return duv[..., :1] * ru + duv[..., 1:] * rv

    def points(self, surface, t) -> np.ndarray:
        uv = self.path(np.asarray(t, float))
        return surface.position(uv[..., 0], uv[..., 1])

    def reversed(self) -> ParamCurve:
        p, d, dd = self.path, self.derivative, self.second_derivative
        return replace(
            self,
            path=lambda t: p(1.0 - np.asarray(t, float)),
            derivative=lambda t: -d(1.0 - np.asarray(t, float)),
            second_derivative=lambda t: dd(1.0 - np.asarray(t, float)),
            corners=tuple(sorted(1.0 - c for c in self.corners)),
            label=f"reversed({self.label})" if self.label else "",
        )


def coordinate_loop(axis: int, value: float, start: float = 0.0, turns: int = 1, label="") -> ParamCurve:
    """Loop that holds one coordinate fixed and runs the other through a full
    period ``2 pi`` (both catalog periodic axes have period ``2 pi``).

    ``axis`` is the index of the *moving* coordinate.
    """
    speed = TWO_PI * turns

    def path(t):
        t = np.asarray(t, float)
        moving = start + speed * t
        fixed = np.full_like(moving, value)
        return np.stack((moving, fixed) if axis == 0 else (fixed, moving), axis=-1)

    def deriv(t):
        t = np.asarray(t, float)
        a = np.full_like(t, speed)
        z = np.zeros_like(t)
        return np.stack((a, z) if axis == 0 else (z, a), axis=-1)

    def deriv2(t):
        t = np.asarray(t, float)
        return np.zeros(t.shape + (2,))

    return ParamCurve(path, deriv, closed=True, second_derivative=deriv2, label=label)


def latitude_loop(phi: float, start: float = 0.0) -> ParamCurve:
    """Parallel at latitude ``phi`` on a spherical chart, counterclockwise
    seen from above (``theta`` increasing)."""
    return coordinate_loop(0, phi, start, label=f"latitude:{phi!r}")


def tube_loop(psi: float, start: float = 0.0) -> ParamCurve:
    """Torus circle at fixed tube angle ``psi``, ``theta`` increasing."""
    return coordinate_loop(0, psi, start, label=f"tube:{psi!r}")


def ellipse_loop(center, a: float, b: float | None = None, angle: float = 0.0) -> ParamCurve:
    """Counterclockwise ellipse in the parameter plane with semi-axes
    ``a, b`` rotated by ``angle``; ``b`` defaults to ``a`` (a circle)."""
    b = a if b is None else b
    cu, cv = map(float, center)
    ca, sa = np.cos(angle), np.sin(angle)
    rot = np.array([[ca, -sa], [sa, ca]])

    def path(t):
        t = np.asarray(t, float)
        local = np.stack([a * np.cos(TWO_PI * t), b * np.sin(TWO_PI * t)], axis=-1)
        return local @ rot.T + np.array([cu, cv])

    def deriv(t):
        t = np.asarray(t, float)
        local = np.stack([-a * np.sin(TWO_PI * t), b * np.cos(TWO_PI * t)], axis=-1)
        return TWO_PI * local @ rot.T

    def deriv2(t):
        t = np.asarray(t, float)
        local = np.stack([-a * np.cos(TWO_PI * t), -b * np.sin(TWO_PI * t)], axis=-1)
        return TWO_PI**2 * local @ rot.T

    return ParamCurve(path, deriv, closed=True, second_derivative=deriv2, label=f"ellipse:{a},{b}")


def circle_loop(center, radius: float) -> ParamCurve:
    return ellipse_loop(center, radius, radius)


def polyline_loop(points, closed: bool = True) -> ParamCurve:
    """Piecewise-linear path through ``points`` (closed by default).

    Each segment gets an equal share of ``[0, 1]`` and is traversed with the
    easing ``s - sin(2 pi s) / (2 pi)``, whose first and second derivatives
    vanish at both ends.  The path therefore stops at every vertex and the
    parametrisation is twice differentiable, which keeps fixed-step
    integrators at full order across the corners.  Transported vectors pass
    through a corner unchanged; only their angle to the curve jumps.
    """
    pts = np.asarray(points, float)
    if closed and not np.allclose(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    nseg = len(pts) - 1
    if nseg < 1:
        raise ValueError("polyline needs at least two points")
    delta = np.diff(pts, axis=0)

    def locate(t):
        x = np.clip(np.asarray(t, float), 0.0, 1.0) * nseg
        k = np.minimum(np.floor(x).astype(int), nseg - 1)
        return k, x - k

    def path(t):
        k, s = locate(t)
        ease = s - np.sin(TWO_PI * s) / TWO_PI
        return pts[k] + ease[..., None] * delta[k]

    def deriv(t):
        k, s = locate(t)
        rate = nseg * (1.0 - np.cos(TWO_PI * s))
        return rate[..., None] * delta[k]

    def deriv2(t):
        k, s = locate(t)
        acc = nseg**2 * TWO_PI * np.sin(TWO_PI * s)
        return acc[..., None] * delta[k]

    corners = tuple(k / nseg for k in range(nseg + 1))
    return ParamCurve(path, deriv, closed=closed, second_derivative=deriv2, corners=corners, label="polyline")


def parse_loop(spec: str) -> tuple[str, list[float]]:
    """Split ``kind:a,b,...`` into its kind and numbers.  Values written with
    a ``deg`` suffix are converted to radians."""
    kind, _, rest = spec.strip().partition(":")
    values = []
    for tok in filter(None, (x.strip() for x in rest.split(","))):
        if tok.endswith("deg"):
            values.append(float(np.radians(float(tok[:-3]))))
        else:
            values.append(float(tok))
    return kind.lower(), values
