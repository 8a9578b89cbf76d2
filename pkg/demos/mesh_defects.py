"""
Angle defects on triangle meshes
================================

The angle defects of a closed mesh sum to 2 pi chi whatever the shape.
"""

import math

from gaussbonnet import meshgen
from gaussbonnet.mesh import angle_defects, total_defect

meshes = {
    "tetrahedron": meshgen.tetrahedron(),
    "cube": meshgen.cube(),
    "icosahedron": meshgen.icosahedron(),
    "icosphere(3)": meshgen.icosphere(3),
    "torus 16x16": meshgen.torus_grid(16, 16),
    "genus 2": meshgen.genus2(),
}
for name, m in meshes.items():
    rep = total_defect(m)
    print(f"{name:>13}: V={m.V:4d} chi={rep.chi:3d} sum={rep.total:+.12f} 2pi chi={2 * math.pi * rep.chi:+.12f}")

# on a torus the defects are not zero vertex by vertex, they only cancel
d = angle_defects(meshes["torus 16x16"])
print(f"torus defects range from {d.min():+.4f} to {d.max():+.4f}, sum {d.sum():+.2e}")
