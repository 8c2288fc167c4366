"""Exact height functionals on the two built-in families.

Run: python demos/exact_families.py
"""

from heights import (aubin_I_rel, aubin_J_rel, build_p1_fs,
                     build_p2_blowup_family, component_twist_derivative,
                     decomposition_check, modular_height, na_calabi,
                     na_scalar_curvature, relative_modular_height)

# The projective line with the mass-1 Fubini-Study metric: every entry
# of the intersection form is a closed form, and h_K = log(2 pi) - 1.
p1 = build_p1_fs()
hk = modular_height(p1)
print("P1:  h_K =", hk, "=", hk.evaluate())

# Two integral models of the same degree-8 del Pezzo surface, differing
# by a blow-up with exceptional fibers over 2, 3, 5.  The relative
# height is an exact rational combination of log p.
pair = build_p2_blowup_family(primes=(2, 3, 5))
rel = relative_modular_height(pair.model, pair.ref)
print("blow-up family: h_K(model) - h_K(ref) =", rel)

# The same difference decomposes into energy, Ricci energy and entropy
# terms; both sides agree exactly.
lhs, rhs = decomposition_check(pair)
print("decomposition exact:", lhs.exact_eq(rhs))

# Aubin-type functionals satisfy 0 <= I/(n+1) <= J <= nI/(n+1).
I, J = aubin_I_rel(pair), aubin_J_rel(pair)
print("I =", I.evaluate(), " J =", J.evaluate())

# Non-archimedean scalar curvature of the exceptional components and
# the twist derivative that detects non-constant curvature.
m = pair.model
print("S^nA at 3:", na_scalar_curvature(m, 3))
print("Calabi over 2,3,5:", na_calabi(m, [2, 3, 5]))
for comp in sorted(f.component_id for f in m.fibers if f.prime == 3):
    d = component_twist_derivative(m, 3, comp)
    print("twist derivative along", comp, "=", d)
