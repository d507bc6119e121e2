"""Reference polyhedra, cellulations and simplices used by tests, demos and the CLI."""
import numpy as np

from .ellipsoid import Ellipsoid
from .mesh import make_mesh, triangulate_cellulation, validate_cellulation


def orient_from(vertices, triangles, centre):
    """Orient every triangle so its normal points away from ``centre``.

    Valid for surfaces star-shaped with respect to ``centre``.
    """
    V = np.asarray(vertices, dtype=float)
    out = []
    for a, b, c in triangles:
        n = np.cross(V[b] - V[a], V[c] - V[a])
        out.append((a, b, c) if n @ (V[[a, b, c]].mean(axis=0) - centre) > 0 else (a, c, b))
    return out


def octahedron_vertices(d=1.2):
    """``+-d`` on the axes, ordered +x, -x, +y, -y, +z, -z."""
    return np.array([[d, 0, 0], [-d, 0, 0], [0, d, 0], [0, -d, 0], [0, 0, d], [0, 0, -d]], dtype=float)


OCTAHEDRON_FACES = [(x, y, z) for x in (0, 1) for y in (2, 3) for z in (4, 5)]
#: four tetrahedra around the diagonal from +z to -z
OCTAHEDRON_CELLS = [(4, 5, 0, 2), (4, 5, 2, 1), (4, 5, 1, 3), (4, 5, 3, 0)]


def octahedron(d=1.2, check_embedding=True):
    V = octahedron_vertices(d)
    return make_mesh(V, orient_from(V, OCTAHEDRON_FACES, np.zeros(3)), check_embedding=check_embedding)


def octahedron_triangulation(d=1.2):
    m = octahedron(d)
    return triangulate_cellulation(validate_cellulation(m, OCTAHEDRON_CELLS))


def bump_octahedron(d=1.2, apex_norm=1.01):
    """Octahedron with face (+x, +y, +z) replaced by three triangles to an apex.

    Returns ``(mesh, cells)``: the four octahedron tetrahedra plus the bump tetrahedron.
    """
    V = np.vstack([octahedron_vertices(d), apex_norm * np.ones(3) / np.sqrt(3)])
    faces = [f for f in OCTAHEDRON_FACES if f != (0, 2, 4)] + [(0, 2, 6), (2, 4, 6), (4, 0, 6)]
    m = make_mesh(V, orient_from(V, faces, np.zeros(3)))
    return m, OCTAHEDRON_CELLS + [(0, 2, 4, 6)]


#: two tetrahedra glued along the base (0, 1, 2), apexes on opposite sides;
#: the union has a reflex edge (total dihedral angle about 190 degrees)
REFLEX_BIPYRAMID_VERTICES = np.array(
    [
        [0.970, 0.461, 0.015],
        [-1.336, -0.772, 0.002],
        [0.224, -0.004, -1.238],
        [0.945, -1.069, 0.147],
        [-0.302, 1.105, 0.104],
    ]
)

BIPYRAMID_FACES = [(0, 1, 3), (1, 2, 3), (2, 0, 3), (0, 1, 4), (1, 2, 4), (2, 0, 4)]
BIPYRAMID_CELLS = [(0, 1, 2, 3), (0, 1, 2, 4)]


def bipyramid_mesh(vertices):
    V = np.asarray(vertices, dtype=float)
    return make_mesh(V, orient_from(V, BIPYRAMID_FACES, V[:3].mean(axis=0)))


def reflex_bipyramid():
    return bipyramid_mesh(REFLEX_BIPYRAMID_VERTICES), BIPYRAMID_CELLS


def hyperideal_bipyramid(r=1.3, h=1.3, jitter=0.03, seed=7):
    """Triangular bipyramid around the origin, slightly perturbed off symmetry."""
    ang = 2 * np.pi * np.arange(3) / 3
    V = np.vstack([np.column_stack([r * np.cos(ang), r * np.sin(ang), np.zeros(3)]), [[0, 0, h], [0, 0, -h]]])
    V += jitter * np.random.default_rng(seed).uniform(-1, 1, size=V.shape)
    return bipyramid_mesh(V), BIPYRAMID_CELLS


def subdivided_cube():
    """Cube ``[-1, 1]^3`` whose top face is split into 4 triangles at its centroid."""
    V = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)] + [[0, 0, 1]], dtype=float)
    idx = {tuple(p): k for k, p in enumerate(V[:8].astype(int).tolist())}
    faces = []
    for axis in range(3):
        for side in (-1, 1):
            quad = [p for p in idx if p[axis] == side]
            others = [k for k in range(3) if k != axis]
            quad.sort(key=lambda p: np.arctan2(p[others[1]], p[others[0]]))
            ids = [idx[p] for p in quad]
            if axis == 2 and side == 1:
                faces += [(ids[k], ids[(k + 1) % 4], 8) for k in range(4)]
            else:
                faces += [(ids[0], ids[1], ids[2]), (ids[0], ids[2], ids[3])]
    return make_mesh(V, orient_from(V, faces, np.zeros(3)))


def tetrahedron(scale=1.0):
    V = scale * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return make_mesh(V, orient_from(V, [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)], np.zeros(3)))


def torus_off(n=4, m=4, R=2.0, r=0.7):
    """OFF text of a triangulated torus (Euler characteristic 0)."""
    pts, tris = [], []
    for i in range(n):
        for j in range(m):
            u, v = 2 * np.pi * i / n, 2 * np.pi * j / m
            pts.append([(R + r * np.cos(v)) * np.cos(u), (R + r * np.cos(v)) * np.sin(u), r * np.sin(v)])
    for i in range(n):
        for j in range(m):
            a, b = i * m + j, ((i + 1) % n) * m + j
            c, d = ((i + 1) % n) * m + (j + 1) % m, i * m + (j + 1) % m
            tris += [(a, b, c), (a, c, d)]
    lines = ["OFF", f"{len(pts)} {len(tris)} 0"]
    lines += [" ".join(f"{x:.12g}" for x in p) for p in pts]
    lines += [f"3 {a} {b} {c}" for a, b, c in tris]
    return "\n".join(lines) + "\n"


def unit_sphere():
    return Ellipsoid.sphere(1.0)
