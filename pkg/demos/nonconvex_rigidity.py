"""Rigidity survives when the polyhedron is not convex.

A triangular bipyramid whose apexes sit off to one side has a reflex edge
(interior dihedral angle above 180 degrees). It is still hyperideal with
respect to the unit sphere, and its length and angle Jacobians still have
only the six trivial motions in their kernels.

For comparison we also run the octahedron with a small bump glued on one
face.
"""
import numpy as np

from polyrigid import ellipsoid, instances, mesh, rigidity


def run(name, m, cells):
    cel = mesh.validate_cellulation(m, cells)
    t = mesh.triangulate_cellulation(cel)
    ok = ellipsoid.ellipsoid_hypothesis_check(cel, instances.unit_sphere()).passed and mesh.hyperideal_check(t).passed
    length, angle = rigidity.theorem_b_reports(t)
    print(f"{name}: max interior dihedral {np.degrees(m.dihedral_angles().max()):.2f} deg, hypotheses {ok}")
    print(f"  length kernel {length.kernel_dim} ({length.verdict}), angle kernel {angle.kernel_dim} ({angle.verdict})")


run("reflex bipyramid", *instances.reflex_bipyramid())
run("bumped octahedron", *instances.bump_octahedron())
