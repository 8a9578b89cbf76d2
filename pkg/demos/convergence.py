"""
Convergence of the two routes
=============================

The deficit angle from parallel transport converges at fourth order in the
number of steps; the midpoint integral of K converges at second order.
"""

import math

import numpy as np

from gaussbonnet import catalog
from gaussbonnet.curves import latitude_loop
from gaussbonnet.quadrature import ParamRegion, integrate_curvature
from gaussbonnet.transport import deficit_angle

sphere = catalog.sphere(1.0)
phi = math.pi / 6
exact = 2 * math.pi * (1 - math.sin(phi))

steps = [16, 32, 64, 128, 256]
err = np.array([abs(deficit_angle(sphere, latitude_loop(phi), n) - exact) for n in steps])
print("transport errors:", err)
print("observed orders: ", np.log2(err[:-1] / err[1:]))

cells = [16, 32, 64, 128, 256]
qerr = np.array([
    abs(integrate_curvature(sphere, ParamRegion(-math.pi, math.pi, phi, math.pi / 2 - 1e-9, resolution=(8, n))) - exact)
    for n in cells
])
print("quadrature errors:", qerr)
print("observed orders:  ", np.log2(qerr[:-1] / qerr[1:]))
