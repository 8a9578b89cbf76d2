"""Parametric surfaces and pointwise differential geometry.

Every function here is vectorised: ``u`` and ``v`` may be scalars or arrays
of any broadcast-compatible shape, vector results carry a trailing axis of
length 3 and matrix results trailing axes ``(2, 2)``.

Sign conventions
----------------
The unit normal is ``N = r_u x r_v / |r_u x r_v|``, so it follows the order of
the chart coordinates; catalog charts are written so that ``N`` points
outward on closed surfaces.  The second fundamental form is taken verbatim as
``b_ij = r_ij . N`` and principal curvatures are the eigenvalues of
``g^-1 b``.  With those conventions the outward-oriented unit sphere has
``b = -g`` and principal curvatures ``(-1, -1)``; the Gaussian curvature
``K = det b / det g = +1`` does not depend on the choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .errors import DegenerateChart

EPS_REG = 1e-12

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ParametricSurface:
    """A chart ``r(u, v)`` of a surface in R^3 together with its derivatives.

    ``chart`` and the optional partial-derivative callables must broadcast
    over array arguments and return arrays with a trailing axis of size 3.
    Missing partials are replaced by central differences: first partials use
    a step of ``1e-5`` times the domain extent, second partials difference the
    analytic first partials when present and otherwise use a second
    difference of the chart with step ``1e-4`` times the extent.
    ``fd_step`` overrides both steps with one absolute value.

    ``euler_characteristic`` is catalog metadata: it is set only when the
    periodic identifications make the chart cover a closed surface once.
    ``locate``, ``recenter`` and ``pole_distance`` are optional hooks used to
    route computations away from coordinate singularities (spherical charts).
    """

    name: str
    chart: Field
    domain: tuple[tuple[float, float], tuple[float, float]]
    periodic: tuple[bool, bool] = (False, False)
    r_u: Field | None = None
    r_v: Field | None = None
    r_uu: Field | None = None
    r_uv: Field | None = None
    r_vv: Field | None = None
    euler_characteristic: int | None = None
    params: dict = field(default_factory=dict)
    fd_step: float | None = None
    locate: Callable | None = field(default=None, repr=False)
    recenter: Callable | None = field(default=None, repr=False)
    pole_distance: Callable | None = field(default=None, repr=False)

    @property
    def extent(self) -> tuple[float, float]:
        (u0, u1), (v0, v1) = self.domain
        return u1 - u0, v1 - v0

    @property
    def is_closed(self) -> bool:
        return self.euler_characteristic is not None

    @property
    def has_analytic_derivatives(self) -> bool:
        return None not in (self.r_u, self.r_v, self.r_uu, self.r_uv, self.r_vv)

    def with_finite_differences(self, h: float | None = None) -> ParametricSurface:
        """Same chart with every derivative replaced by central differences."""
        return replace(
            self,
            name=f"{self.name}[fd]",
            r_u=None,
            r_v=None,
            r_uu=None,
            r_uv=None,
            r_vv=None,
            fd_step=h,
        )

    def position(self, u, v) -> np.ndarray:
        return np.asarray(self.chart(np.asarray(u, float), np.asarray(v, float)))

    def _steps(self, rel: float) -> tuple[float, float]:
        if self.fd_step is not None:
            return self.fd_step, self.fd_step
        eu, ev = self.extent
        return rel * eu, rel * ev

    def first_partials(self, u, v) -> tuple[np.ndarray, np.ndarray]:
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        hu, hv = self._steps(1e-5)
        if self.r_u is not None:
            ru = np.asarray(self.r_u(u, v))
        else:
            ru = (self.chart(u + hu, v) - self.chart(u - hu, v)) / (2 * hu)
        if self.r_v is not None:
            rv = np.asarray(self.r_v(u, v))
        else:
            rv = (self.chart(u, v + hv) - self.chart(u, v - hv)) / (2 * hv)
        return ru, rv

    def second_partials(self, u, v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        out = [None, None, None]
        analytic = (self.r_uu, self.r_uv, self.r_vv)
        for i, fn in enumerate(analytic):
            if fn is not None:
                out[i] = np.asarray(fn(u, v))
        if all(o is not None for o in out):
            return tuple(out)

        if self.r_u is not None and self.r_v is not None:
            hu, hv = self._steps(1e-5)
            if out[0] is None:
                out[0] = (self.r_u(u + hu, v) - self.r_u(u - hu, v)) / (2 * hu)
            if out[1] is None:
                a = (self.r_u(u, v + hv) - self.r_u(u, v - hv)) / (2 * hv)
                b = (self.r_v(u + hu, v) - self.r_v(u - hu, v)) / (2 * hu)
                out[1] = 0.5 * (a + b)
            if out[2] is None:
                out[2] = (self.r_v(u, v + hv) - self.r_v(u, v - hv)) / (2 * hv)
            return tuple(out)

        r = self.chart
        hu, hv = self._steps(1e-4)
        if out[0] is None or out[2] is None:
            r0 = r(u, v)
        if out[0] is None:
            out[0] = (r(u + hu, v) - 2 * r0 + r(u - hu, v)) / hu**2
        if out[1] is None:
            out[1] = (
                r(u + hu, v + hv) - r(u + hu, v - hv) - r(u - hu, v + hv) + r(u - hu, v - hv)
            ) / (4 * hu * hv)
        if out[2] is None:
            out[2] = (r(u, v + hv) - 2 * r0 + r(u, v - hv)) / hv**2
        return tuple(out)

    def in_domain(self, u, v) -> np.ndarray:
        """True where non-periodic coordinates lie inside the closed domain."""
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        ok = np.ones(np.broadcast(u, v).shape, dtype=bool)
        for x, (lo, hi), per in zip((u, v), self.domain, self.periodic):
            if not per:
                ok &= (x >= lo) & (x <= hi)
        return ok


class LocalGeometry(NamedTuple):
    ru: np.ndarray
    rv: np.ndarray
    normal: np.ndarray
    g: np.ndarray
    b: np.ndarray | None
    second: tuple[np.ndarray, np.ndarray, np.ndarray] | None


@dataclass(frozen=True)
class FundamentalForms:
    """First (``g``) and second (``b``) fundamental forms in the chart basis."""

    g: np.ndarray
    b: np.ndarray

    @property
    def det_g(self) -> np.ndarray:
        return _det2(self.g)

    @property
    def det_b(self) -> np.ndarray:
        return _det2(self.b)

    @property
    def area_element(self) -> np.ndarray:
        return np.sqrt(self.det_g)

    @property
    def shape_operator(self) -> np.ndarray:
        """Matrix of ``g^-1 b`` (acts on coordinate velocity vectors)."""
        return _inv2(self.g) @ self.b


@dataclass(frozen=True)
class SurfacePoint:
    """Point of a surface with its unit normal.

    ``pole`` is set by :func:`gauss_map` when the image lies on the z-axis,
    where the azimuth is undefined and reported as 0.
    """

    u: float | np.ndarray
    v: float | np.ndarray
    position: np.ndarray
    normal: np.ndarray
    pole: bool | np.ndarray = False


def _det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def _inv2(m: np.ndarray) -> np.ndarray:
    det = _det2(m)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out / det[..., None, None]


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _cross(a, b):
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def _normal_from(ru, rv, eps_reg):
    n = _cross(ru, rv)
    nn = np.linalg.norm(n, axis=-1)
    if np.any(~(nn >= eps_reg)):
        bad = np.flatnonzero(~(np.atleast_1d(nn) >= eps_reg))
        raise DegenerateChart(
            f"|r_u x r_v| below {eps_reg:g} at {bad.size} point(s)"
        )
    return n / nn[..., None]


def local_geometry(surface: ParametricSurface, u, v, second=True, eps_reg=EPS_REG) -> LocalGeometry:
    """Tangent basis, unit normal and fundamental forms in one pass."""
    ru, rv = surface.first_partials(u, v)
    normal = _normal_from(ru, rv, eps_reg)
    g = np.empty(ru.shape[:-1] + (2, 2))
    g[..., 0, 0] = _dot(ru, ru)
    g[..., 0, 1] = g[..., 1, 0] = _dot(ru, rv)
    g[..., 1, 1] = _dot(rv, rv)
    if not second:
        return LocalGeometry(ru, rv, normal, g, None, None)
    ruu, ruv, rvv = surface.second_partials(u, v)
    b = np.empty_like(g)
    b[..., 0, 0] = _dot(ruu, normal)
    b[..., 0, 1] = b[..., 1, 0] = _dot(ruv, normal)
    b[..., 1, 1] = _dot(rvv, normal)
    return LocalGeometry(ru, rv, normal, g, b, (ruu, ruv, rvv))


def unit_normal(surface: ParametricSurface, u, v, eps_reg: float = EPS_REG) -> np.ndarray:
    ru, rv = surface.first_partials(u, v)
    return _normal_from(ru, rv, eps_reg)


def fundamental_forms(surface: ParametricSurface, u, v, eps_reg: float = EPS_REG) -> FundamentalForms:
    geo = local_geometry(surface, u, v, eps_reg=eps_reg)
    return FundamentalForms(geo.g, geo.b)


def gaussian_curvature(surface: ParametricSurface, u, v, eps_reg: float = EPS_REG):
    """``K = (b11 b22 - b12^2) / (g11 g22 - g12^2)``."""
    geo = local_geometry(surface, u, v, eps_reg=eps_reg)
    return _det2(geo.b) / _det2(geo.g)


def curvature_density(surface: ParametricSurface, u, v, eps_reg: float = EPS_REG):
    """``K sqrt(det g)``, the integrand of total curvature in chart coordinates."""
    geo = local_geometry(surface, u, v, eps_reg=eps_reg)
    det_g = _det2(geo.g)
    return _det2(geo.b) / np.sqrt(det_g)


def principal_curvatures(surface: ParametricSurface, u, v, eps_reg: float = EPS_REG):
    """Eigenvalues ``k1 >= k2`` of the shape operator ``g^-1 b``.

    The mean ``k1 + k2`` is the trace of the shape operator and is not given a
    separate function.
    """
    forms = fundamental_forms(surface, u, v, eps_reg)
    w = forms.shape_operator
    half_tr = 0.5 * (w[..., 0, 0] + w[..., 1, 1])
    det = _det2(w)
    # g^-1 b is self-adjoint w.r.t. g, so the discriminant is >= 0 up to rounding
    disc = np.sqrt(np.maximum(half_tr**2 - det, 0.0))
    return half_tr + disc, half_tr - disc


def normal_derivative(surface: ParametricSurface, u, v, du, dv, geometry: LocalGeometry | None = None):
    """Rate of change of ``N`` along the coordinate velocity ``(du, dv)``.

    Uses the Weingarten relation ``dN = -[r_u r_v] g^-1 b (du, dv)``, so no
    derivative of the normal field itself is differenced.
    """
    geo = geometry if geometry is not None else local_geometry(surface, u, v)
    vel = np.stack(np.broadcast_arrays(np.asarray(du, float), np.asarray(dv, float)), axis=-1)
    coeff = np.einsum("...ij,...j->...i", _inv2(geo.g) @ geo.b, vel)
    return -(coeff[..., :1] * geo.ru + coeff[..., 1:] * geo.rv)


def surface_point(surface: ParametricSurface, u, v) -> SurfacePoint:
    return SurfacePoint(u, v, surface.position(u, v), unit_normal(surface, u, v))


def spherical_coordinates(x: np.ndarray):
    """Azimuth and latitude of unit vectors; the latitude is measured from the
    horizontal plane.  Returns ``(theta, phi, at_pole)``."""
    x = np.asarray(x, float)
    horiz = np.hypot(x[..., 0], x[..., 1])
    at_pole = horiz == 0.0
    theta = np.where(at_pole, 0.0, np.arctan2(x[..., 1], x[..., 0]))
    phi = np.arctan2(x[..., 2], horiz)
    return theta, phi, at_pole


def gauss_map(surface: ParametricSurface, u, v) -> SurfacePoint:
    """Image of ``(u, v)`` under the Gauss map, as a point of the unit sphere.

    The returned ``u, v`` are the spherical coordinates ``(theta, phi)`` of
    the normal.  On the z-axis ``theta`` is reported as 0 and ``pole`` is set.
    """
    n = unit_normal(surface, u, v)
    theta, phi, at_pole = spherical_coordinates(n)
    if np.ndim(theta) == 0:
        theta, phi, at_pole = float(theta), float(phi), bool(at_pole)
    return SurfacePoint(theta, phi, n, n, at_pole)
