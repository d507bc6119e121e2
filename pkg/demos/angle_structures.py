"""Volume maximisation over angle structures of the octahedron.

An angle structure gives six dihedral angles to each tetrahedron. Fixing
the total angle around every edge defines a fiber. The total volume is
strictly concave on the fiber, and its maximum is the unique point where
all tetrahedra agree on the length of each shared edge, which is the
geometric structure.
"""
import numpy as np

from polyrigid import angles, instances, mesh

t = instances.octahedron_triangulation(1.2)
theta0 = angles.base_point(t)
alpha = angles.edge_sums(t, theta0)
Z = angles.fiber_basis(t)
print(f"{t.n_tets} tetrahedra, {theta0.size} angles, fiber dimension {Z.shape[1]}")
print("criticality at the geometric angles:", angles.criticality_residual(t, theta0))

d = Z @ np.random.default_rng(5).normal(size=Z.shape[1])
start = theta0 + (0.01 * d / np.linalg.norm(d)).reshape(theta0.shape)
print("criticality after a perturbation:", angles.criticality_residual(t, start))

sol = angles.maximize_on_fiber(t, alpha, start)
print(f"Newton: {sol.iterations} iterations, back within {np.abs(sol.theta - theta0).max():.1e}")
print("volume", angles.total_volume(t, sol.theta))

# In boundary-angle coordinates the volume is a strictly concave function.
m, cells = instances.hyperideal_bipyramid()
rep = angles.theorem_E_check(mesh.triangulate_cellulation(mesh.validate_cellulation(m, cells)))
print(f"bipyramid: chart rank {rep['chart_rank']}, Hessian eigenvalues", np.round(rep["hessian_eigenvalues"], 3))
