"""A Euclidean negative control: the cube with a subdivided face.

Splitting the top face at its centroid adds a vertex whose four edges all
lie in one plane. Pushing that vertex along the face normal does not change
any edge length to first order, so the framework is infinitesimally
flexible. The SVD verdict finds one extra kernel vector and we localise it.
"""
import numpy as np

from polyrigid import instances, rigidity

m = instances.subdivided_cube()
T = rigidity.euclidean_trivial_motions(m)
rep = rigidity.rigidity_verdict(rigidity.euclidean_length_jacobian(m), T, mode="euclidean-length")
print(f"verdict {rep.verdict}, kernel {rep.kernel_dim} (trivial {rep.trivial_dim})")

v, res, field = rigidity.localize_field(rep.extra_kernel, T, m.n_vertices)
u = field[3 * v : 3 * v + 3]
print(f"extra motion lives on vertex {v} at {m.vertices[v]}, residual elsewhere {res:.1e}")
print("direction:", np.round(u / np.linalg.norm(u), 12))

# Rigidity is an affine property: any invertible affine image keeps the kernel.
rng = np.random.default_rng(0)
A = rng.normal(size=(3, 3))
m2 = m.transformed(A, rng.normal(size=3))
rep2 = rigidity.rigidity_verdict(rigidity.euclidean_length_jacobian(m2), rigidity.euclidean_trivial_motions(m2))
print("kernel after a random affine map:", rep2.kernel_dim)
