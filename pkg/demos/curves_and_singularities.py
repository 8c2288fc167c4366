"""Faltings heights of elliptic curves and local stability analysis.

Run: python demos/curves_and_singularities.py
"""

from heights import (BrieskornPhamSpec, brieskorn_pham_analyze,
                     curve_from_label, elliptic_faltings_height,
                     faltings_to_hk)

# Two independent evaluation paths (q-expansion of eta, and AGM of the
# period lattice) agree to full precision on each curve.
for label in ("37a1", "11a1", "389a1", "5077a1"):
    curve = curve_from_label(label)
    hq = elliptic_faltings_height(curve, method="qexp")
    ha = elliptic_faltings_height(curve, method="agm")
    print(f"{label}: h_F = {hq:+.12f}  (paths differ by {abs(hq - ha):.1e})"
          f"  h_K(d=2) = {faltings_to_hk(hq, 2):+.12f}")

# A weighted-homogeneous hypersurface singularity: the quotient chart
# at the last coordinate, its Hilbert-Samuel multiplicity (a lower
# bound for the hypersurface point) and the klt side checks.
spec = BrieskornPhamSpec((8, 15, 7), 11)
rep = brieskorn_pham_analyze(spec)
print("chart:", rep["chart"], " multiplicity >=", rep["multiplicity"],
      " threshold (n+1)! =", rep["threshold"])
print("destabilizing:", rep["destabilizing"], " klt:", rep["klt"],
      " log discrepancies:", rep["log_discrepancies"])
