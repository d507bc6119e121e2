"""Volumes of truncated hyperideal simplices and the Schlafli formula.

The regular simplex with vertex norm s is truncated along the polar planes of
its vertices. We compute its volume with two independent quadratures and
watch the volume change under a small change of dihedral angles, which to
first order is minus half the length-weighted angle change.
"""
import numpy as np

from polyrigid import simplex as sx

for s in (1.2, 1.4, 1.6):
    S = sx.HyperidealSimplex.regular(s)
    vb = sx.simplex_volume(S, tol=1e-10, method="boundary")
    vt = sx.simplex_volume(S, tol=1e-6, method="tetra")
    th = sx.simplex_dihedrals(S)[0]
    print(f"s={s}: angle {np.degrees(th):.3f} deg, V boundary {vb:.10f}, V tetra {vt:.8f}")

# Near the ideal limit the volume approaches that of the regular ideal simplex.
for s in (1.01, 1.001):
    print(f"s={s}: V boundary {sx.simplex_volume(sx.HyperidealSimplex.regular(s), tol=1e-10):.7f}")

print("regular ideal simplex, 3 Lambda(pi/3) =", 3 * sx.lobachevsky(np.pi / 3))

# The volume is concave in the angles.
H = sx.hessian_volume(sx.HyperidealSimplex.regular(1.3))
print("Hessian eigenvalues at s=1.3:", np.round(np.linalg.eigvalsh(H), 4))

rng = np.random.default_rng(1)
S = sx.random_simplex(rng)
res, h = sx.schlafli_residuals(S, rng.normal(size=6), steps=(1e-3, 5e-4, 2.5e-4, 1.25e-4))
print("Schlafli residuals:", res)
print("halving ratios (second order gives 4):", np.round(res[:-1] / res[1:], 3))

# Angles determine the simplex: solve back from the dihedral angles.
S1 = sx.solve_from_angles(sx.simplex_dihedrals(S))
print("length roundtrip error:", np.abs(sx.simplex_lengths(S1) - sx.simplex_lengths(S)).max())
