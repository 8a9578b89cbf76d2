from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussbonnet import meshgen
from gaussbonnet.errors import (
    DegenerateFace,
    IndexOutOfRange,
    InputError,
    IsolatedVertex,
    NonManifold,
    NonTriangulatable,
    OpenStar,
    ParseError,
)
from gaussbonnet.mesh import (
    TriMesh,
    angle_defect,
    angle_defects,
    euler_characteristic,
    load_mesh,
    read_mesh,
    to_off,
    total_defect,
    validate,
)

DATA = Path(__file__).parent / "data"
FOUR_PI = 4 * math.pi

CLOSED = {
    "tetrahedron": (meshgen.tetrahedron(), 2),
    "cube": (meshgen.cube(), 2),
    "octahedron": (meshgen.octahedron(), 2),
    "icosahedron": (meshgen.icosahedron(), 2),
    "icosphere2": (meshgen.icosphere(2), 2),
    "torus16": (meshgen.torus_grid(16, 16), 0),
    "torus_thin": (meshgen.torus_grid(40, 6, R=5.0, r=0.2), 0),
    "genus2": (meshgen.genus2(), -2),
}


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q


# parsing


def test_off_tetrahedron():
    m = read_mesh(DATA / "tetra.off")
    assert (m.V, m.F, m.E) == (4, 4, 6)
    assert euler_characteristic(m) == 2


def test_obj_cube_with_quads():
    m = read_mesh(DATA / "cube.obj")
    assert (m.V, m.F, m.E) == (8, 12, 18)
    assert euler_characteristic(m) == 2
    rep = total_defect(m)
    assert np.allclose(rep.defects, np.pi / 2, atol=1e-14)
    assert rep.total == pytest.approx(FOUR_PI, abs=1e-12)


def test_corpus_files():
    assert euler_characteristic(read_mesh(DATA / "genus2.off")) == -2
    assert euler_characteristic(read_mesh(DATA / "torus16.off")) == 0


def test_obj_extras():
    text = """# comment
o thing
v 1 1 1
v 1 -1 -1
v -1 1 -1
v -1 -1 1
vn 0 0 1
vt 0 0
f 1/1/1 2/1/1 3/1/1
f 1//1 4//1 2//1
f -4 -2 -1
f 2 4 3
"""
    m = load_mesh(text)
    assert (m.V, m.F) == (4, 4)
    assert total_defect(m).residual < 1e-12


def test_off_header_variants():
    body = "4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n"
    a = load_mesh(b"OFF\n" + body.encode())
    b = load_mesh("OFF " + body)
    c = load_mesh("# leading comment\nOFF\n" + body, fmt="off")
    for m in (a, b, c):
        assert (m.V, m.F, m.E) == (4, 4, 6)


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("", 1, 1),
        ("OFF\n4 4\n1 1 1\n", 4, 1),
        ("OFF\n4 x 0\n", 2, 3),
        ("PLY\n", 1, 1),
        ("OFF\n3 1 0\n0 0 0\n1 0\n0 1 0\n3 0 1 2\n", 4, 4),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1\n", 6, 6),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n3 0 1 2\n", 7, 1),
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 zz\n", 4, 7),
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nbogus 1\n", 5, 1),
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n", 4, 3),
    ],
)
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(ParseError) as info:
        load_mesh(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_truncated_and_binary_files():
    with pytest.raises(ParseError):
        read_mesh(DATA / "truncated.off")
    with pytest.raises(ParseError):
        load_mesh(b"OFF\n\xff\xfe")


def test_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        load_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n")
    with pytest.raises(IndexOutOfRange):
        load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n")
    with pytest.raises(IndexOutOfRange):
        TriMesh(np.zeros((3, 3)), [[0, 1, -1]])


def test_non_triangulatable():
    with pytest.raises(NonTriangulatable):
        load_mesh("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 1 2\n")
    with pytest.raises(NonTriangulatable):
        # collinear first three corners make a zero-area fan triangle
        load_mesh("OFF\n4 1 0\n0 0 0\n1 0 0\n2 0 0\n0 1 0\n4 0 1 2 3\n")


def test_unknown_format():
    with pytest.raises(InputError):
        load_mesh("OFF\n", fmt="stl")


def test_off_round_trip():
    m = meshgen.genus2()
    back = load_mesh(to_off(m))
    assert np.array_equal(back.faces, m.faces)
    assert np.array_equal(back.vertices, m.vertices)


# validation


def test_open_strip_lists_boundary():
    with pytest.raises(NonManifold) as info:
        validate(read_mesh(DATA / "open_strip.off"))
    assert info.value.boundary_edges == [(0, 1), (0, 3), (1, 2), (2, 3)]
    assert info.value.nonmanifold_edges == []


def test_nonmanifold_edge():
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
    m = TriMesh(v, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])
    with pytest.raises(NonManifold) as info:
        validate(m)
    assert info.value.nonmanifold_edges == [(0, 1)]


def test_isolated_vertex():
    t = meshgen.tetrahedron()
    m = TriMesh(np.vstack([t.vertices, [[5.0, 5.0, 5.0]]]), t.faces)
    with pytest.raises(IsolatedVertex):
        validate(m)
    with pytest.raises(IsolatedVertex):
        angle_defect(m, 4)


def test_open_star_bowtie():
    # two tetrahedra sharing only vertex 0
    t = meshgen.tetrahedron()
    v = np.vstack([t.vertices, -t.vertices[1:] + 2 * t.vertices[0]])
    f2 = np.where(t.faces == 0, 0, t.faces + 3)[:, ::-1]
    m = TriMesh(v, np.vstack([t.faces, f2]))
    with pytest.raises(OpenStar):
        validate(m)
    with pytest.raises(OpenStar):
        angle_defect(m, 0)


def test_degenerate_face():
    t = meshgen.tetrahedron()
    with pytest.raises(DegenerateFace):
        validate(TriMesh(t.vertices, np.vstack([t.faces, [[0, 0, 1]]])))
    flat = t.vertices.copy()
    flat[3] = (flat[0] + flat[1]) / 2
    with pytest.raises(DegenerateFace):
        validate(TriMesh(flat, [[0, 1, 3], [0, 3, 2], [1, 2, 3], [0, 2, 1]]))


@pytest.mark.parametrize("name", list(CLOSED))
def test_closed_corpus(name):
    m, chi = CLOSED[name]
    info = validate(m)
    assert info["euler_characteristic"] == chi
    assert info["consistently_oriented"]
    assert 2 * m.E == 3 * m.F
    rep = total_defect(m)
    assert rep.chi == chi
    assert rep.residual < 1e-9 * m.V


# defects


def test_regular_vertex_defects():
    assert angle_defect(meshgen.tetrahedron(), 0) == pytest.approx(np.pi, abs=1e-14)
    ico = meshgen.icosahedron()
    assert np.allclose([angle_defect(ico, i) for i in range(ico.V)], np.pi / 3, atol=1e-14)
    assert np.allclose(angle_defects(meshgen.octahedron()), 2 * np.pi / 3, atol=1e-14)


def test_cube_defects():
    rep = total_defect(meshgen.cube())
    assert np.allclose(rep.defects, np.pi / 2, atol=1e-14)
    assert rep.residual < 1e-12


def test_torus_saddle_defect():
    n, m = 16, 16
    mesh = meshgen.torus_grid(n, m)
    inner = [i * m + m // 2 for i in range(n)]  # psi = pi
    outer = [i * m for i in range(n)]
    assert all(angle_defect(mesh, v) < 0 for v in inner)
    assert all(angle_defect(mesh, v) > 0 for v in outer)
    assert abs(total_defect(mesh).total) < 1e-9


def test_genus2_total():
    rep = total_defect(meshgen.genus2())
    assert rep.chi == -2
    assert rep.total == pytest.approx(-FOUR_PI, abs=1e-9)


def test_angle_defect_matches_batch():
    m = meshgen.torus_grid(8, 6)
    batch = angle_defects(m)
    for v in range(m.V):
        assert angle_defect(m, v) == pytest.approx(batch[v], abs=1e-13)
    with pytest.raises(IndexOutOfRange):
        angle_defect(m, m.V)


def test_thin_triangles_keep_precision():
    # a flat vertex surrounded by slivers: its defect is exactly zero
    k = 200
    ang = np.linspace(0, 2 * np.pi, k, endpoint=False)
    rim = np.stack([np.cos(ang), np.sin(ang), np.zeros(k)], axis=1)
    v = np.vstack([[0, 0, 0], rim, [[0, 0, -1]]])
    faces = [[0, 1 + i, 1 + (i + 1) % k] for i in range(k)] + [[k + 1, 1 + (i + 1) % k, 1 + i] for i in range(k)]
    m = TriMesh(v, faces)
    assert abs(angle_defect(m, 0)) < 1e-12
    assert total_defect(m).residual < 1e-9


def test_rigid_motion_and_scale():
    rng = np.random.default_rng(5)
    for name in ("icosphere2", "torus16", "genus2"):
        m, _ = CLOSED[name]
        base = angle_defects(m)
        moved = m.transformed(random_rotation(rng), rng.normal(size=3) * 10)
        assert np.max(np.abs(angle_defects(moved) - base)) < 1e-10
        for s in (1e-3, 0.7, 250.0):
            assert np.max(np.abs(angle_defects(m.transformed(scale=s)) - base)) < 1e-12


def test_report_serialisation():
    rep = total_defect(meshgen.tetrahedron())
    d = json.loads(rep.to_json())
    assert d["chi"] == 2 and d["V"] == 4 and d["E"] == 6 and d["F"] == 4
    assert d["total_defect"] == pytest.approx(FOUR_PI)
    assert len(d["defects"]) == 4
    lines = rep.to_csv().splitlines()
    assert lines[0] == "vertex_index,defect_radians"
    assert len(lines) == 5
    assert float(lines[1].split(",")[1]) == rep.defects[0]


# triangulation invariance


def prism_polygons(radii, angles, height):
    """Closed prism over a convex polygon: two n-gon caps and n quads."""
    n = len(angles)
    base = np.stack([radii * np.cos(angles), radii * np.sin(angles), np.zeros(n)], axis=1)
    top = base + [0.0, 0.0, height]
    verts = np.vstack([base, top])
    polys = [list(range(n))[::-1], list(range(n, 2 * n))]
    polys += [[i, (i + 1) % n, n + (i + 1) % n, n + i] for i in range(n)]
    return verts, polys


def fan_from(poly, k):
    return poly[k % len(poly):] + poly[: k % len(poly)]


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(3, 12),
    seed=st.integers(0, 2**32 - 1),
    shifts=st.lists(st.integers(0, 11), min_size=20, max_size=20),
)
def test_triangulation_invariance(n, seed, shifts):
    rng = np.random.default_rng(seed)
    # sorted angles with a bounded gap give a convex polygon on a circle
    angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    if np.max(np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))) > 0.9 * np.pi:
        angles = np.linspace(0, 2 * np.pi, n, endpoint=False) + rng.uniform(0, 0.1)
    verts, polys = prism_polygons(np.ones(n), angles, rng.uniform(0.2, 3.0))
    shell = TriMesh(verts, np.zeros((0, 3), int))
    a = load_mesh(to_off(shell, polys))
    b = load_mesh(to_off(shell, [fan_from(p, s) for p, s in zip(polys, shifts)]))
    assert euler_characteristic(a) == euler_characteristic(b) == 2
    assert 2 * a.E == 3 * a.F and 2 * b.E == 3 * b.F
    # planar convex faces: the angle sum at each vertex does not depend on the diagonals
    assert np.max(np.abs(angle_defects(a) - angle_defects(b))) < 1e-12
    assert total_defect(b).residual < 1e-12


@settings(max_examples=15, deadline=None)
@given(n=st.integers(3, 10), m=st.integers(3, 10), shift=st.integers(0, 3))
def test_quad_torus_triangulation_invariance(n, m, shift):
    grid = meshgen.torus_grid(n, m)
    quads = [[(a % n) * m + b % m, ((a + 1) % n) * m + b % m, ((a + 1) % n) * m + (b + 1) % m, (a % n) * m + (b + 1) % m]
             for a in range(n) for b in range(m)]
    tri = load_mesh(to_off(grid, [fan_from(q, shift) for q in quads]))
    assert euler_characteristic(tri) == 0
    assert abs(total_defect(tri).total) < 1e-9


# convergence on the icosphere ladder


def test_sphere_mesh_convergence():
    rows = meshgen.sphere_mesh_convergence((0, 1, 2, 3))
    assert rows[0]["defect_sum_error"] < 1e-12
    assert rows[3]["defect_sum_error"] < 1e-10
    assert [r["V"] - 3 * r["F"] // 2 + r["F"] for r in rows] == [2, 2, 2, 2]
    assert abs(rows[3]["ratio_min"] - 1) < 0.05 and abs(rows[3]["ratio_max"] - 1) < 0.05
    spread = [max(abs(r["ratio_min"] - 1), abs(r["ratio_max"] - 1)) for r in rows[1:]]
    assert spread == sorted(spread, reverse=True)
