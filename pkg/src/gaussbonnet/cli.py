"""Command-line front end.

Every subcommand writes JSON records (one per line) or CSV to standard
output or ``--output``.  Exit codes: 0 success, 1 a residual exceeded
``--tolerance``, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import catalog, curves, mesh, verify
from .errors import GaussBonnetError, InputError, NonManifold, NumericalError
from .quadrature import ParamRegion, integrate_curvature, polygon_region
from .surface import local_geometry, principal_curvatures
from .transport import DEFAULT_STEPS, deficit_angle

EXIT_OK, EXIT_TOLERANCE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(InputError):
    pass


# argument parsing helpers


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _grid(text):
    try:
        a, b = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None
    if a <= 0 or b <= 0:
        raise argparse.ArgumentTypeError(f"expected positive NxM, got {text!r}")
    return a, b


def _numbers(text):
    """Comma-separated numbers; a ``deg`` suffix converts to radians."""
    return curves.parse_loop("x:" + text)[1]


def _surface(spec):
    try:
        return catalog.from_spec(spec)
    except KeyError as exc:
        raise UsageError(str(exc).strip("'\"")) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# loops and the regions they bound


def build_loop(surface, spec: str):
    """Parse a loop string and return ``(curve, region, sign)``.

    ``region`` is the parameter region the loop bounds (``None`` when there
    is no natural one) and ``sign`` the orientation with which its integral
    should equal the deficit.  Latitude and tube loops bound the band
    between the loop and the nearer of the circles at ``+-90`` degrees.
    """
    kind, values = curves.parse_loop(spec)
    (u0, u1), (v0, v1) = surface.domain
    if kind in ("latitude", "tube"):
        if len(values) != 1:
            raise UsageError(f"{kind} takes one angle")
        a = values[0]
        if not v0 < a < v1:
            raise UsageError(f"{kind} angle outside the chart domain")
        curve = curves.coordinate_loop(0, a, label=f"{kind}:{a!r}")
        if not surface.periodic[0]:
            return curve, None, 1.0
        top = min(np.pi / 2, v1) if kind == "tube" else v1
        bottom = max(-np.pi / 2, v0) if kind == "tube" else v0
        if a >= 0:
            lo, hi, sign = (a, top, 1.0) if a <= top else (top, a, -1.0)
        else:
            lo, hi, sign = (bottom, a, -1.0) if a >= bottom else (a, bottom, 1.0)
        region = ParamRegion(u0, u1, lo, hi, resolution=(64, 4096)) if hi > lo else None
        return curve, region, sign
    if kind == "circle":
        if len(values) not in (1, 3):
            raise UsageError("circle takes r or r,u0,v0")
        r = values[0]
        center = values[1:] if len(values) == 3 else [(u0 + u1) / 2, (v0 + v1) / 2]
        if r <= 0:
            raise UsageError("circle radius must be positive")
        curve = curves.circle_loop(center, r)
        th = np.linspace(0.0, 2 * np.pi, 4097)
        poly = np.stack([center[0] + r * np.cos(th), center[1] + r * np.sin(th)], axis=-1)
        return curve, polygon_region(poly, (512, 512), refine=8), 1.0
    if kind == "param":
        if len(values) < 6 or len(values) % 2:
            raise UsageError("param takes at least three u,v pairs")
        pts = np.array(values).reshape(-1, 2)
        curve = curves.polyline_loop(pts)
        return curve, polygon_region(pts, (512, 512), refine=8), 1.0
    raise UsageError(f"unknown loop kind {kind!r}")


def _check_in_domain(surface, curve):
    uv = curve.path(np.linspace(0.0, 1.0, 257))
    if not np.all(surface.in_domain(uv[:, 0], uv[:, 1])):
        raise UsageError("loop leaves the chart domain")


# output


class Output:
    def __init__(self, path=None):
        self.path = path
        self.buffer = io.StringIO()

    def json(self, record):
        self.buffer.write(json.dumps(record, sort_keys=True) + "\n")

    def text(self, text):
        self.buffer.write(text)

    def close(self):
        if self.path:
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(self.buffer.getvalue())
        else:
            sys.stdout.write(self.buffer.getvalue())


def _tolerance_status(args, errors):
    if args.tolerance is None:
        return EXIT_OK
    return EXIT_OK if all(e < args.tolerance for e in errors) else EXIT_TOLERANCE


# subcommands


def cmd_curvature(args, out):
    surface = _surface(args.surface)
    if args.at is not None and args.grid is not None:
        raise UsageError("use either --at or --grid")
    if args.grid is not None:
        (a, b), (c, d) = surface.domain
        n, m = args.grid
        u = a + (b - a) * (np.arange(n) + 0.5) / n
        v = c + (d - c) * (np.arange(m) + 0.5) / m
        uu, vv = np.meshgrid(u, v, indexing="ij")
        uu, vv = uu.ravel(), vv.ravel()
    else:
        at = _numbers(args.at or "")
        if len(at) != 2:
            raise UsageError("--at takes u,v")
        uu, vv = np.array([at[0]]), np.array([at[1]])
        if not surface.in_domain(uu, vv).all():
            raise UsageError("point outside the chart domain")
    geo = local_geometry(surface, uu, vv)
    K = np.linalg.det(geo.b) / np.linalg.det(geo.g)
    k1, k2 = principal_curvatures(surface, uu, vv)
    rows = zip(uu, vv, K, k1, k2, geo.normal)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "v", "K", "k1", "k2", "nx", "ny", "nz"])
        for u, v, k, a, b, n in rows:
            w.writerow([repr(float(x)) for x in (u, v, k, a, b, *n)])
        out.text(buf.getvalue())
    else:
        for u, v, k, a, b, n in rows:
            out.json({"surface": surface.name, "u": float(u), "v": float(v), "K": float(k),
                      "k1": float(a), "k2": float(b), "normal": [float(x) for x in n]})
    return EXIT_OK


def cmd_transport(args, out):
    surface = _surface(args.surface)
    curve, region, sign = build_loop(surface, args.loop)
    _check_in_domain(surface, curve)
    omega = deficit_angle(surface, curve, args.steps)
    record = {"surface": surface.name, "loop": args.loop, "steps": args.steps,
              "deficit": omega, "deficit_degrees": math.degrees(omega)}
    errors = []
    if args.compare_integral:
        if region is None:
            raise UsageError("this loop bounds no region in the chart")
        if args.resolution:
            region = region.with_resolution(*args.resolution)
        integral = sign * integrate_curvature(surface, region)
        record.update({"integral": integral, "abs_error": abs(omega - integral),
                       "resolution": list(region.resolution)})
        errors.append(abs(omega - integral))
    out.json(record)
    return _tolerance_status(args, errors)


def _verify_reports(args):
    ident = args.identity
    if ident == "foucault":
        if args.latitude is None:
            raise UsageError("foucault needs --latitude")
        rep = verify.verify_foucault(args.latitude, args.steps)
        return [rep], {"rotation_degrees": rep.lhs}
    if ident == "total":
        surface = _surface(args.surface)
        res = args.resolution or verify.TOTAL_RESOLUTION
        return [verify.total_curvature(surface, res)], {}
    if ident == "stokes":
        sphere = catalog.sphere(1.0)
        curve, region, sign = build_loop(sphere, args.loop or "latitude:30deg")
        if args.resolution and region is not None:
            region = region.with_resolution(*args.resolution)
        lhs = verify.stokes_deficit_sphere(curve, args.steps, sphere)
        rhs = sign * integrate_curvature(sphere, region) if region is not None else float("nan")
        return [verify.VerificationReport("stokes", lhs, rhs, tuple(region.resolution), args.steps)], {}
    if ident == "prop1":
        surface = _surface(args.surface)
        curve, _, _ = build_loop(surface, args.loop or "tube:45deg")
        return [verify.verify_prop1(surface, curve, args.steps)], {}
    if ident == "prop3":
        if args.random:
            loops = verify.random_loops(args.seed, args.random)
        else:
            surface = _surface(args.surface)
            curve, region, sign = build_loop(surface, args.loop or "latitude:45deg")
            if region is None or sign < 0:
                raise UsageError("prop3 needs a loop that positively bounds a region")
            loops = [(surface, curve, region)]
        res = args.resolution
        return [verify.verify_deficit_equals_integral(s, c, r, args.steps, res) for s, c, r in loops], {}
    if ident == "triangle":
        surface = _surface(args.surface)
        if (args.vertices or "octant") == "octant":
            vertices = verify.OCTANT
        else:
            vals = _numbers(args.vertices)
            if len(vals) != 6:
                raise UsageError("--vertices takes octant or u1,v1,u2,v2,u3,v3")
            vertices = np.array(vals).reshape(3, 2)
        steps = args.steps if args.steps != DEFAULT_STEPS else 256
        res = args.resolution or (1024, 1024)
        return [verify.geodesic_triangle_excess(surface, vertices, steps, res)], {}
    raise UsageError(f"unknown identity {ident!r}")


def cmd_verify(args, out):
    reports, extra = _verify_reports(args)
    for rep in reports:
        record = rep.to_dict()
        record.update(extra)
        out.json(record)
    return _tolerance_status(args, [r.abs_error for r in reports])


def cmd_mesh(args, out):
    try:
        m = mesh.read_mesh(args.path)
    except OSError as exc:
        raise UsageError(f"cannot read {args.path}: {exc.strerror}") from None
    if args.action == "chi":
        out.json({"V": m.V, "E": m.E, "F": m.F, "chi": mesh.euler_characteristic(m)})
        return EXIT_OK
    if args.action == "validate":
        out.json({"valid": True, **mesh.validate(m)})
        return EXIT_OK
    report = mesh.total_defect(m)
    if args.format == "csv":
        out.text(report.to_csv())
    else:
        out.json(report.to_dict())
    return _tolerance_status(args, [report.residual])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS, help="integration steps")
    common.add_argument("--resolution", type=_grid, default=None, help="quadrature grid NxM")
    common.add_argument("--tolerance", type=_positive_float, default=None,
                        help="exit with status 1 if a residual reaches this value")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="write here instead of standard output")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised sweeps")

    parser = argparse.ArgumentParser(prog="gaussbonnet", description="Gauss-Bonnet numerical laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", parents=[common], help="K, k1, k2 and N at points or on a grid")
    p.add_argument("--surface", required=True, help="catalog surface, e.g. torus:2,1")
    p.add_argument("--at", default=None, help="u,v (radians, or with a deg suffix)")
    p.add_argument("--grid", type=_grid, default=None, help="cell-centred NxM grid over the domain")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("transport", parents=[common], help="deficit angle around a loop")
    p.add_argument("--surface", required=True)
    p.add_argument("--loop", required=True, help="latitude:<deg>, tube:<deg>, circle:<r>[,u0,v0], param:u0,v0,...")
    p.add_argument("--compare-integral", action="store_true", help="also integrate K over the bounded region")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("verify", parents=[common], help="run one of the identity checks")
    p.add_argument("identity", choices=verify.IDENTITIES)
    p.add_argument("--surface", default="sphere:1")
    p.add_argument("--loop", default=None)
    p.add_argument("--vertices", default=None, help="octant or u1,v1,u2,v2,u3,v3")
    p.add_argument("--latitude", type=float, default=None, help="degrees")
    p.add_argument("--random", type=_positive_int, default=None, help="number of random loops (prop3)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mesh", parents=[common], help="discrete defects of an OFF/OBJ mesh")
    p.add_argument("action", choices=("defect", "chi", "validate"))
    p.add_argument("path")
    p.set_defaults(func=cmd_mesh)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    out = Output(args.output)
    try:
        status = args.func(args, out)
    except NonManifold as exc:
        print(f"error: {exc}", file=sys.stderr)
        for e in exc.boundary_edges:
            print(f"boundary edge {e[0]} {e[1]}", file=sys.stderr)
        for e in exc.nonmanifold_edges:
            print(f"non-manifold edge {e[0]} {e[1]}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GaussBonnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.close()
    return status


if __name__ == "__main__":
    sys.exit(main())
