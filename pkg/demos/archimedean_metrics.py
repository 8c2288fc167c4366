"""Numerical metrics on the sphere and the exact height they induce.

Run: python demos/archimedean_metrics.py
"""

import numpy as np

from heights import (PotentialField, SphereGeometry, am_energy,
                     apply_metric_change, aubin_i, aubin_j, build_p1_fs,
                     entropy, k_energy, modular_height, ricci_density,
                     scalar_curvature_l2)

geom = SphereGeometry(128)
model = build_p1_fs()

# The round metric has scalar curvature 2 and Calabi energy 4.
one = np.ones(geom.shape)
print("round metric: S =", ricci_density(geom, one)[0, 0],
      " ||S||^2 =", scalar_curvature_l2(geom, one))

# A random smooth Kahler potential and its energy functionals.
phi = PotentialField.random(geom, seed=7)
print("E(phi)   =", am_energy(phi))
print("I(phi)   =", aubin_i(phi), " J(phi) =", aubin_j(phi))
print("Ent(phi) =", entropy(phi))
print("mu(phi)  =", k_energy(phi))

# Changing the archimedean metric by phi shifts the modular height by
# exactly (deg L / [K:Q]) * mu(phi).
changed = apply_metric_change(model, phi)
dh = (modular_height(changed) - modular_height(model)).evaluate()
print("delta h_K =", dh, " vs mu =", k_energy(phi),
      " |diff| =", abs(dh - k_energy(phi)))
