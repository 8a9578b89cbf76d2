"""Small closed meshes used as fixtures and for convergence studies."""

from __future__ import annotations

import math

import numpy as np

from .mesh import TriMesh, angle_defects, fan_triangulate, incident_faces

FOUR_PI = 4.0 * math.pi


def tetrahedron() -> TriMesh:
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    f = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
    return TriMesh(v, f)


CUBE_VERTICES = np.array(
    [[x, y, z] for x in (-1.0, 1.0) for y in (-1.0, 1.0) for z in (-1.0, 1.0)]
)
CUBE_QUADS = [[0, 1, 3, 2], [4, 6, 7, 5], [0, 4, 5, 1], [2, 3, 7, 6], [0, 2, 6, 4], [1, 5, 7, 3]]


def cube() -> TriMesh:
    """Unit-cube corners ``(+-1, +-1, +-1)`` with fan-triangulated faces."""
    faces = [t for q in CUBE_QUADS for t in fan_triangulate(q)]
    return TriMesh(CUBE_VERTICES, faces)


def octahedron() -> TriMesh:
    v = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    f = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    return TriMesh(v, f)


def icosahedron() -> TriMesh:
    """Regular icosahedron inscribed in the unit sphere."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        float,
    )
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    return TriMesh(v, f)


def subdivide(mesh: TriMesh, project: bool = True) -> TriMesh:
    """Split every triangle into four through edge midpoints, optionally
    pushing all vertices onto the unit sphere."""
    verts = [tuple(x) for x in mesh.vertices]
    mid = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in mid:
            mid[key] = len(verts)
            verts.append(tuple((mesh.vertices[a] + mesh.vertices[b]) / 2.0))
        return mid[key]

    faces = []
    for a, b, c in mesh.faces.tolist():
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    v = np.array(verts)
    if project:
        v /= np.linalg.norm(v, axis=1, keepdims=True)
    return TriMesh(v, faces)


def icosphere(level: int) -> TriMesh:
    mesh = icosahedron()
    for _ in range(int(level)):
        mesh = subdivide(mesh)
    return mesh


def torus_grid(n: int = 16, m: int = 16, R: float = 2.0, r: float = 1.0) -> TriMesh:
    """``n`` steps around the axis by ``m`` around the tube, each grid
    quad split along one diagonal; outward orientation."""
    i, j = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    theta = 2 * np.pi * i / n
    psi = 2 * np.pi * j / m
    rho = R + r * np.cos(psi)
    v = np.stack([rho * np.cos(theta), rho * np.sin(theta), r * np.sin(psi)], axis=-1).reshape(-1, 3)

    def idx(a, b):
        return (a % n) * m + (b % m)

    faces = []
    for a in range(n):
        for b in range(m):
            p, q, s, t = idx(a, b), idx(a + 1, b), idx(a + 1, b + 1), idx(a, b + 1)
            faces += [[p, q, s], [p, s, t]]
    return TriMesh(v, faces)


def genus2(n: int = 12, m: int = 8) -> TriMesh:
    """Two torus grids joined by a short triangular tube.

    One face is removed from the outer equator of each torus, facing each
    other, and the two triangular holes are connected by three quads (six
    triangles).  That removes two faces and adds six faces and six edges,
    so ``chi = 0 + 0 - 6 + 4 = -2``.
    """
    a = torus_grid(n, m)
    b = torus_grid(n, m)
    R, r = 2.0, 1.0
    shift = 2 * (R + r) + 0.5
    vb = b.vertices.copy()
    vb[:, 0] = shift - vb[:, 0]  # mirror so the removed faces face each other
    vb[:, 1] = -vb[:, 1]  # mirror twice: a rotation, orientation preserved
    offset = a.V
    # face 0 of a torus grid touches theta = 0, psi = 0 (the outer equator)
    fa = a.faces[0].tolist()
    fb = (b.faces[0] + offset).tolist()
    faces = a.faces[1:].tolist() + (b.faces[1:] + offset).tolist()
    verts = np.vstack([a.vertices, vb])
    # walking the second hole backwards matches the first hole's walk, so
    # the tube uses every hole edge opposite to the faces that remain
    pair = {fa[0]: fb[0], fa[1]: fb[2], fa[2]: fb[1]}
    for k in range(3):
        x0, x1 = fa[k], fa[(k + 1) % 3]
        y0, y1 = pair[x0], pair[x1]
        faces += [[x0, x1, y1], [x0, y1, y0]]
    return TriMesh(verts, faces)


def spherical_triangle_area(a, b, c) -> np.ndarray:
    """Area of the geodesic triangle with unit-vector corners, from
    ``tan(E/2) = |a . (b x c)| / (1 + a.b + b.c + c.a)``."""
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(num, den)


def sphere_mesh_convergence(levels=(0, 1, 2, 3, 4)) -> list[dict]:
    """Defect sums and per-vertex defect/area ratios on an icosphere ladder.

    Each vertex is credited a third of the spherical area of every incident
    face.  ``ratio_*`` columns summarise ``defect / area_share`` (``K = 1``
    in the limit) over vertices of valence six, the regular ones.
    """
    rows = []
    for level in levels:
        mesh = icosphere(level)
        d = angle_defects(mesh)
        p = mesh.vertices[mesh.faces]
        area = spherical_triangle_area(p[:, 0], p[:, 1], p[:, 2])
        share = np.zeros(mesh.V)
        np.add.at(share, mesh.faces.ravel(), np.repeat(area / 3.0, 3))
        valence = np.array([len(f) for f in incident_faces(mesh)])
        ratio = d / share
        regular = valence == 6
        edge = np.linalg.norm(mesh.vertices[mesh.edges[:, 0]] - mesh.vertices[mesh.edges[:, 1]], axis=1)
        rows.append(
            {
                "level": level,
                "V": mesh.V,
                "F": mesh.F,
                "max_edge": float(edge.max()),
                "defect_sum_error": abs(math.fsum(d) - FOUR_PI),
                "ratio_min": float(ratio[regular].min()) if regular.any() else float(ratio.min()),
                "ratio_max": float(ratio[regular].max()) if regular.any() else float(ratio.max()),
                "ratio_valence5": float(ratio[valence == 5].mean()),
            }
        )
    return rows
