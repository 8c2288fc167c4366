"""Section Grams: balanced iteration and the large-m scans.

Run: python demos/balanced_and_scans.py
"""

import numpy as np

from heights import (SectionGram, SphereGeometry, balanced_iterate,
                     build_p1_fs, dequantization_scan,
                     hilbert_samuel_residual, l2_gram, modular_height)

geom = SphereGeometry(64)
model = build_p1_fs()
m = 4

# Perturb the Fubini-Study Gram and iterate the balancing operator;
# the extended Chow height decreases monotonically along the way.
g0 = l2_gram("p1-fs", m, "fs", "m-omega")
rng = np.random.default_rng(1)
sym = rng.standard_normal((m + 1, m + 1))
pert = SectionGram(m, g0.basis, g0.gram * np.exp(0.05 * (sym + sym.T) / 2),
                   g0.volume_convention)
g, iters, converged, trace = balanced_iterate(pert, geom, tol=1e-9,
                                              max_iter=300, model=model)
print("balanced iteration converged:", converged, "after", iters, "steps")
print("htilde_C along the flow:",
      [round(float(h), 12) for _, _, h in trace[:4]],
      "...", round(float(trace[-1][2]), 12))

# Chow heights of the L2 Grams converge to h_K after subtracting the
# (n/4) log m divergence; the fitted constant is h_K / 4.
scan = dequantization_scan(model, 60)
hk = modular_height(model).evaluate()
print("fitted constant =", scan.fitted_constant, " target h_K/4 =", hk / 4)
print("fitted log slope =", scan.fitted_log_slope, " target 1/4")

# The arithmetic Hilbert-Samuel residual deg^(m) - (A m^2 - B m)/2 is
# o(m) on the tail.
rows = hilbert_samuel_residual(model, 120)
for mm, r in rows[-3:]:
    print(f"m = {mm}: residual/m = {r / mm:+.6f}")
