"""Triangle meshes, angle defects and the discrete Euler characteristic.

Angles are computed as ``atan2(|a x b|, a . b)``, which keeps full relative
precision for angles near ``0`` and ``pi`` where ``arccos`` loses digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateFace,
    IndexOutOfRange,
    InputError,
    IsolatedVertex,
    NonManifold,
    NonTriangulatable,
    OpenStar,
    ParseError,
)

TWO_PI = 2.0 * math.pi
AREA_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Indexed triangle mesh.  ``faces`` are counterclockwise seen from
    outside for closed meshes; nothing here depends on it except
    :meth:`consistently_oriented`."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, float).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise IndexOutOfRange(f"face index outside 0..{len(v) - 1}")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def V(self) -> int:
        return len(self.vertices)

    @property
    def F(self) -> int:
        return len(self.faces)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        e = np.sort(self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        return np.unique(e, axis=0) if len(e) else e

    @property
    def E(self) -> int:
        return len(self.edges)

    @property
    def scale(self) -> float:
        if not len(self.vertices):
            return 0.0
        return float(np.ptp(self.vertices, axis=0).max())

    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def edge_use(self) -> Counter:
        return Counter(map(tuple, np.sort(self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1).tolist()))

    def consistently_oriented(self) -> bool:
        directed = Counter(map(tuple, self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2).tolist()))
        return all(n == 1 for n in directed.values())

    def transformed(self, rotation=None, translation=None, scale: float = 1.0) -> TriMesh:
        v = self.vertices * scale
        if rotation is not None:
            v = v @ np.asarray(rotation, float).T
        if translation is not None:
            v = v + np.asarray(translation, float)
        return TriMesh(v, self.faces.copy())


# parsing


def _tokens(line: str):
    """Yield ``(column, token)`` with 1-based columns, stopping at ``#``."""
    col = 0
    for part in line.split("#", 1)[0].split():
        col = line.index(part, col)
        yield col + 1, part
        col += len(part)


def _number(tok, lineno, col, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(lineno, col, f"expected {'an integer' if kind is int else 'a number'}, got {tok!r}") from None


def fan_triangulate(polygon, vertices=None, where=None) -> list[tuple[int, int, int]]:
    """Triangles ``(p0, p_k, p_k+1)``.  With ``vertices`` given, polygons
    with repeated indices or a vanishing fan triangle raise
    :class:`NonTriangulatable`."""
    poly = [int(i) for i in polygon]
    if len(poly) < 3:
        raise NonTriangulatable(f"polygon with {len(poly)} vertices{where or ''}")
    tris = [(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]
    if len(poly) > 3 and vertices is not None:
        if len(set(poly)) != len(poly):
            raise NonTriangulatable(f"polygon repeats a vertex{where or ''}")
        p = np.asarray(vertices, float)[np.array(tris)]
        area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
        scale = float(np.ptp(np.asarray(vertices, float), axis=0).max()) or 1.0
        if np.any(area <= AREA_EPS * scale**2):
            raise NonTriangulatable(f"fan triangulation produces a degenerate triangle{where or ''}")
    return tris


def _finish(vertices, polygons):
    v = np.asarray(vertices, float).reshape(-1, 3)
    faces = []
    for lineno, poly in polygons:
        for i in poly:
            if not 0 <= i < len(v):
                raise IndexOutOfRange(f"line {lineno}: vertex index {i} outside 0..{len(v) - 1}")
        faces.extend(fan_triangulate(poly, v, where=f" (line {lineno})"))
    return TriMesh(v, np.array(faces, dtype=np.int64).reshape(-1, 3))


def parse_off(text: str) -> TriMesh:
    lines = text.splitlines()
    items = []  # (lineno, [(col, tok), ...]) for non-empty lines
    for n, line in enumerate(lines, 1):
        toks = list(_tokens(line))
        if toks:
            items.append((n, toks))
    if not items:
        raise ParseError(1, 1, "empty file")
    n, toks = items[0]
    head = toks[0][1]
    if not head.upper().endswith("OFF"):
        raise ParseError(n, toks[0][0], f"expected OFF header, got {head!r}")
    rest = toks[1:]
    pos = 1
    if not rest:
        if len(items) < 2:
            raise ParseError(n + 1, 1, "missing vertex/face counts")
        n, rest = items[1]
        pos = 2
    if len(rest) < 2:
        raise ParseError(n, rest[0][0] if rest else 1, "expected vertex and face counts")
    nv = _number(rest[0][1], n, rest[0][0], int)
    nf = _number(rest[1][1], n, rest[1][0], int)
    if nv < 0 or nf < 0:
        raise ParseError(n, rest[0][0], "negative counts")
    body = items[pos:]
    if len(body) < nv + nf:
        last = items[-1][0]
        raise ParseError(last + 1, 1, f"unexpected end of file: expected {nv} vertices and {nf} faces")
    vertices = []
    for n, toks in body[:nv]:
        if len(toks) < 3:
            raise ParseError(n, toks[-1][0] + len(toks[-1][1]), "vertex needs three coordinates")
        vertices.append([_number(t, n, c) for c, t in toks[:3]])
    polygons = []
    for n, toks in body[nv : nv + nf]:
        k = _number(toks[0][1], n, toks[0][0], int)
        if k < 3:
            raise ParseError(n, toks[0][0], f"face needs at least 3 vertices, got {k}")
        if len(toks) < k + 1:
            raise ParseError(n, toks[-1][0] + len(toks[-1][1]), f"face declares {k} vertices, found {len(toks) - 1}")
        polygons.append((n, [_number(t, n, c, int) for c, t in toks[1 : k + 1]]))
    if len(body) > nv + nf:
        n, toks = body[nv + nf]
        raise ParseError(n, toks[0][0], "trailing data after the declared faces")
    return _finish(vertices, polygons)


OBJ_IGNORED = {"vt", "vn", "o", "g", "s", "usemtl", "mtllib"}


def parse_obj(text: str) -> TriMesh:
    """The ``v``/``f`` subset of Wavefront OBJ.  Texture, normal, group and
    material statements are skipped; anything else is an error.  Face
    indices may be negative (relative) and may carry ``/vt/vn`` suffixes."""
    vertices = []
    polygons = []
    for n, line in enumerate(text.splitlines(), 1):
        toks = list(_tokens(line))
        if not toks:
            continue
        col, key = toks[0]
        if key == "v":
            if len(toks) < 4:
                raise ParseError(n, len(line) + 1, "vertex needs three coordinates")
            vertices.append([_number(t, n, c) for c, t in toks[1:4]])
        elif key == "f":
            if len(toks) < 4:
                raise ParseError(n, len(line) + 1, "face needs at least 3 vertices")
            poly = []
            for c, t in toks[1:]:
                i = _number(t.split("/")[0], n, c, int)
                if i == 0:
                    raise ParseError(n, c, "OBJ indices start at 1")
                poly.append(i - 1 if i > 0 else len(vertices) + i)
            polygons.append((n, poly))
        elif key not in OBJ_IGNORED:
            raise ParseError(n, col, f"unsupported statement {key!r}")
    if not vertices:
        raise ParseError(1, 1, "no vertices")
    return _finish(vertices, polygons)


def load_mesh(data, fmt: str | None = None) -> TriMesh:
    """Parse OFF or OBJ from ``bytes`` or ``str``.  Without ``fmt`` the
    format is sniffed: a leading ``OFF`` keyword means OFF, otherwise OBJ."""
    if isinstance(data, (bytes, bytearray)):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(1, exc.start + 1, "file is not UTF-8 text") from None
    else:
        text = str(data)
    if fmt is None:
        first = next((tok for line in text.splitlines() for _, tok in _tokens(line)), "")
        fmt = "off" if first.upper().endswith("OFF") else "obj"
    fmt = fmt.lower()
    if fmt == "off":
        return parse_off(text)
    if fmt == "obj":
        return parse_obj(text)
    raise InputError(f"unknown mesh format {fmt!r}")


def read_mesh(path) -> TriMesh:
    path = Path(path)
    suffix = path.suffix.lower().lstrip(".")
    return load_mesh(path.read_bytes(), suffix if suffix in ("off", "obj") else None)


def to_off(mesh: TriMesh, polygons=None) -> str:
    """OFF text for the mesh, or for explicit ``polygons`` over its
    vertices."""
    faces = mesh.faces.tolist() if polygons is None else [list(p) for p in polygons]
    out = ["OFF", f"{mesh.V} {len(faces)} 0"]
    out += [" ".join(repr(float(x)) for x in row) for row in mesh.vertices]
    out += [f"{len(f)} " + " ".join(str(int(i)) for i in f) for f in faces]
    return "\n".join(out) + "\n"


# validation


def incident_faces(mesh: TriMesh) -> list[list[list[int]]]:
    inc = [[] for _ in range(mesh.V)]
    for f in mesh.faces.tolist():
        for v in f:
            inc[v].append(f)
    return inc


def star_cycles(mesh: TriMesh, vertex: int, faces=None) -> tuple[int, bool]:
    """Number of faces at ``vertex`` and whether their link edges form one
    closed cycle.  ``faces`` may pass the incident faces precomputed."""
    if faces is None:
        faces = mesh.faces[np.any(mesh.faces == vertex, axis=1)].tolist()
    if not len(faces):
        return 0, False
    link = defaultdict(list)
    for f in faces:
        k = f.index(vertex)
        a, b = f[(k + 1) % 3], f[(k + 2) % 3]
        link[a].append(b)
        link[b].append(a)
    if any(len(nb) != 2 for nb in link.values()):
        return len(faces), False
    # walk the link starting anywhere; a single cycle visits every node
    start = next(iter(link))
    prev, cur, seen = None, start, 1
    while True:
        a, b = link[cur]
        nxt = a if a != prev else b
        if nxt == start:
            break
        prev, cur, seen = cur, nxt, seen + 1
        if seen > len(link):
            break
    return len(faces), seen == len(link)


def validate(mesh: TriMesh) -> dict:
    """Closed-manifold checks, raising on the first failure class.

    Order: degenerate faces, isolated vertices, edge manifoldness, vertex
    stars.  Returns a diagnostics dict for valid meshes.
    """
    f = mesh.faces
    repeated = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
    thin = mesh.face_areas() <= AREA_EPS * max(mesh.scale, 1e-300) ** 2
    bad = np.flatnonzero(repeated | thin)
    if bad.size:
        raise DegenerateFace(f"{bad.size} degenerate face(s), first at index {int(bad[0])}")
    used = np.zeros(mesh.V, bool)
    used[f.ravel()] = True
    if not used.all():
        idx = np.flatnonzero(~used)
        raise IsolatedVertex(f"{idx.size} vertex/vertices in no face, first {int(idx[0])}")
    use = mesh.edge_use()
    boundary = sorted(e for e, n in use.items() if n == 1)
    over = sorted(e for e, n in use.items() if n > 2)
    if boundary or over:
        raise NonManifold(
            f"{len(boundary)} boundary edge(s), {len(over)} edge(s) shared by more than two faces",
            boundary,
            over,
        )
    for v, faces in enumerate(incident_faces(mesh)):
        n, closed = star_cycles(mesh, v, faces)
        if n < 3 or not closed:
            raise OpenStar(f"vertex {v}: star of {n} face(s) is not a single closed fan")
    return {
        "V": mesh.V,
        "E": mesh.E,
        "F": mesh.F,
        "euler_characteristic": euler_characteristic(mesh),
        "consistently_oriented": mesh.consistently_oriented(),
    }


def euler_characteristic(mesh: TriMesh) -> int:
    return int(mesh.V) - int(mesh.E) + int(mesh.F)


# angle defects


def corner_angles(mesh: TriMesh) -> np.ndarray:
    """Interior angle of every face at each of its three corners, ``(F, 3)``."""
    p = mesh.vertices[mesh.faces]
    out = np.empty((mesh.F, 3))
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        out[:, k] = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.einsum("ij,ij->i", a, b))
    return out


def angle_defects(mesh: TriMesh) -> np.ndarray:
    """``2 pi`` minus the angle sum at every vertex (no star checks)."""
    ang = corner_angles(mesh)
    sums = np.zeros(mesh.V)
    np.add.at(sums, mesh.faces.ravel(), ang.ravel())
    return TWO_PI - sums


def angle_defect(mesh: TriMesh, vertex: int) -> float:
    vertex = int(vertex)
    if not 0 <= vertex < mesh.V:
        raise IndexOutOfRange(f"vertex {vertex} outside 0..{mesh.V - 1}")
    n, closed = star_cycles(mesh, vertex)
    if n == 0:
        raise IsolatedVertex(f"vertex {vertex} is in no face")
    if n < 3 or not closed:
        raise OpenStar(f"vertex {vertex}: star of {n} face(s) is not a single closed fan")
    rows, cols = np.nonzero(mesh.faces == vertex)
    ang = corner_angles(TriMesh(mesh.vertices, mesh.faces[rows]))
    return TWO_PI - math.fsum(ang[np.arange(len(rows)), cols])


@dataclass(frozen=True)
class DefectReport:
    defects: np.ndarray
    total: float
    V: int
    E: int
    F: int
    chi: int

    @property
    def residual(self) -> float:
        return abs(self.total - TWO_PI * self.chi)

    def to_dict(self, per_vertex: bool = True) -> dict:
        out = {
            "V": self.V,
            "E": self.E,
            "F": self.F,
            "chi": self.chi,
            "total_defect": self.total,
            "two_pi_chi": TWO_PI * self.chi,
            "residual": self.residual,
        }
        if per_vertex:
            out["defects"] = [float(x) for x in self.defects]
        return out

    def to_json(self, per_vertex: bool = True) -> str:
        return json.dumps(self.to_dict(per_vertex), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex_index", "defect_radians"])
        for i, d in enumerate(self.defects):
            w.writerow([i, repr(float(d))])
        return buf.getvalue()


def total_defect(mesh: TriMesh) -> DefectReport:
    """Validate the mesh and sum its angle defects in vertex order."""
    validate(mesh)
    d = angle_defects(mesh)
    return DefectReport(d, math.fsum(d), mesh.V, mesh.E, mesh.F, euler_characteristic(mesh))
