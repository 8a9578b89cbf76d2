"""Exception hierarchy.

Two families: ``InputError`` for malformed or out-of-contract inputs and
``NumericalError`` for failures that only show up once the computation runs
(degenerate charts, trajectories leaving the domain, failed shooting).
The CLI maps the first family to exit code 2 and the second to 3.
"""

from __future__ import annotations


class GaussBonnetError(Exception):
    """Base class for every error raised by this package."""


class InputError(GaussBonnetError, ValueError):
    pass


class NumericalError(GaussBonnetError, ArithmeticError):
    pass


# surfaces


class DegenerateChart(NumericalError):
    """``|r_u x r_v|`` fell below the regularity threshold."""


# curves and transport


class NotTangent(InputError):
    pass


class CurveNotRegular(NumericalError):
    pass


class NotClosed(InputError):
    pass


class LeftDomain(NumericalError):
    """A trajectory crossed the boundary of a non-periodic chart axis."""


class AmbiguousDeficit(NumericalError):
    """The Gauss image of a loop passes through the chosen far point."""


# verification


class NearAxis(NumericalError):
    pass


class SouthernHemisphere(InputError):
    pass


class GaussMapDegenerate(NumericalError):
    pass


class GeodesicShootingFailed(NumericalError):
    pass


class NotClosedSurface(InputError):
    pass


class OutOfRange(InputError):
    pass


# meshes


class MeshError(GaussBonnetError):
    pass


class ParseError(MeshError, InputError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class NonTriangulatable(MeshError, InputError):
    pass


class IndexOutOfRange(MeshError, InputError):
    pass


class DegenerateFace(MeshError, InputError):
    pass


class IsolatedVertex(MeshError, InputError):
    pass


class OpenStar(MeshError, InputError):
    pass


class NonManifold(MeshError, InputError):
    """Some edge is not shared by exactly two faces.

    ``boundary_edges`` lists edges used once, ``nonmanifold_edges`` edges
    used three or more times.
    """

    def __init__(self, message, boundary_edges=(), nonmanifold_edges=()):
        self.boundary_edges = [tuple(e) for e in boundary_edges]
        self.nonmanifold_edges = [tuple(e) for e in nonmanifold_edges]
        super().__init__(message)
