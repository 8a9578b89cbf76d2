"""Numerical laboratory for Gauss-Bonnet: curvature from fundamental forms,
extrinsic parallel transport and geodesics, deficit angles, and continuous
and discrete checks that total curvature is ``2 pi chi``."""

from . import catalog, curves, errors, mesh, meshgen, quadrature, surface, transport, verify
from .catalog import cone, cylinder, ellipsoid, from_chart, from_spec, plane, sphere, stereographic_sphere, torus
from .curves import ParamCurve, circle_loop, ellipse_loop, latitude_loop, polyline_loop, tube_loop
from .mesh import DefectReport, TriMesh, angle_defect, euler_characteristic, load_mesh, read_mesh, total_defect
from .meshgen import sphere_mesh_convergence
from .quadrature import ParamRegion, integrate_curvature
from .surface import (
    FundamentalForms,
    ParametricSurface,
    SurfacePoint,
    fundamental_forms,
    gauss_map,
    gaussian_curvature,
    principal_curvatures,
    unit_normal,
)
from .transport import (
    TransportResult,
    deficit_angle,
    integrate_geodesic,
    parallel_transport,
    rotation_rate,
    tangential_acceleration,
)
from .verify import (
    VerificationReport,
    foucault_rotation,
    geodesic_triangle_excess,
    stokes_deficit_sphere,
    total_curvature,
    verify_deficit_equals_integral,
    verify_prop1,
)

__version__ = "0.1.0"
