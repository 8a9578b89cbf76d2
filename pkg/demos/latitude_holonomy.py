"""
Holonomy around latitude circles
================================

Carry a tangent vector once around each latitude of the unit sphere and
compare the rotation it picks up with the area of the cap it encloses.
"""

import math

import numpy as np

from gaussbonnet import catalog
from gaussbonnet.curves import latitude_loop
from gaussbonnet.transport import deficit_angle, parallel_transport

sphere = catalog.sphere(1.0)

# the deficit equals the enclosed cap area 2 pi (1 - sin phi)
print(f"{'lat':>5} {'deficit':>12} {'cap area':>12} {'error':>10}")
for deg in range(0, 90, 15):
    phi = math.radians(deg)
    omega = deficit_angle(sphere, latitude_loop(phi), steps=4096)
    cap = 2 * math.pi * (1 - math.sin(phi))
    print(f"{deg:5d} {omega:12.8f} {cap:12.8f} {abs(omega - cap):10.2e}")

# the transported vector keeps its length; the drift comes from the RK4 steps only
w0 = np.array([0.0, 0.0, 1.0])  # pointing north at the start of the loop
w0 = w0 - (w0 @ sphere.position(0.0, math.radians(30))) * sphere.position(0.0, math.radians(30))
res = parallel_transport(sphere, latitude_loop(math.radians(30)), w0 / np.linalg.norm(w0), steps=256)
print("norm drift at 256 steps:", res.norm_drift)
print("final vs initial:", np.round(res.w[0], 6), "->", np.round(res.w[-1], 6))
