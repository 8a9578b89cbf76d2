"""
Foucault's pendulum
===================

A pendulum's swing plane is parallel transported around its latitude once per
sidereal day; the net turn relative to the ground is 360 sin(latitude) degrees.
"""

from gaussbonnet.verify import foucault_rotation, verify_foucault

for name, lat in [("equator", 0.0), ("Quito", -0.18), ("Paris", 48.8566), ("Oslo", 59.91), ("north pole", 90.0)]:
    print(f"{name:>11}: {foucault_rotation(lat):9.4f} deg per day")

# same number from the transport route, as a full report
print(verify_foucault(48.8566).to_json())
