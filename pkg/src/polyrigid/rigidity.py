"""Edge-length and dihedral-angle Jacobians, trivial motions and SVD verdicts.

Deformation fields are flat arrays of length ``3V`` (vertex-major). Jacobian
columns use the same layout.
"""
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import null_space, orth

from . import hypcore
from .errors import DegenerateVertexSet, EdgeMissesBall
from .mesh import TET_EDGES
from .simplex import face_planes

SIGMA_TOL = 1e-8


# euclidean ----------------------------------------------------------------


def euclidean_length_jacobian(m, edges=None):
    """Rigidity matrix: row ``(i, j)`` is ``p_i - p_j`` in block i and ``p_j - p_i`` in block j."""
    P = m.vertices
    edges = m.edges if edges is None else np.asarray(edges)
    J = np.zeros((len(edges), 3 * len(P)))
    for r, (i, j) in enumerate(edges):
        d = P[i] - P[j]
        J[r, 3 * i : 3 * i + 3] = d
        J[r, 3 * j : 3 * j + 3] = -d
    return J


def _check_spread(P):
    centred = P - P.mean(axis=0)
    sv = np.linalg.svd(centred, compute_uv=False) if len(P) > 1 else np.zeros(1)
    if len(P) < 3 or sv[1] <= 1e-9 * max(sv[0], 1e-300):
        raise DegenerateVertexSet("vertices are collinear")


def euclidean_trivial_motions(m):
    """Three translations and three rotations ``b x p``, shape ``(6, 3V)``."""
    P = m.vertices if hasattr(m, "vertices") else np.asarray(m, dtype=float)
    _check_spread(P)
    out = []
    for a in np.eye(3):
        out.append(np.tile(a, len(P)))
    for b in np.eye(3):
        out.append(np.cross(b, P).ravel())
    return np.array(out)


# hyperbolic ---------------------------------------------------------------


def projective_field(M, points):
    """Chart velocity of the flow of ``M`` in so(3,1): ``(MX)_{1..3} - v (MX)_4``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    X = np.hstack([P, np.ones((len(P), 1))]) @ np.asarray(M).T
    return X[:, :3] - P * X[:, 3:4]


def so31_trivial_motions(vertices):
    """Chart fields of the six so(3,1) generators (rotations, then boosts), shape ``(6, 3V)``."""
    P = np.asarray(vertices, dtype=float)
    _check_spread(P)
    T = np.array([projective_field(M, P).ravel() for M in hypcore.so31_basis()])
    if np.linalg.matrix_rank(T, tol=1e-9 * np.abs(T).max()) < 6:
        raise DegenerateVertexSet("isometry fields are dependent on this vertex set")
    return T


def length_gradient(v, w):
    """Gradient of ``arccosh(-<V, W>)`` with respect to the chart points ``v, w``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if not hypcore.edge_meets_ball(v, w):
        raise EdgeMissesBall(f"segment at distance {hypcore.segment_distance_to_origin(v, w):.12g}")
    av2, aw2 = v @ v - 1.0, w @ w - 1.0
    aa = np.sqrt(av2 * aw2)
    q = (1.0 - v @ w) / aa
    s = np.sqrt(q * q - 1.0)
    gv = (-w / aa - q * v / av2) / s
    gw = (-v / aa - q * w / aw2) / s
    return gv, gw


def hyperbolic_length_jacobian_points(P, edges):
    P = np.asarray(P, dtype=float)
    J = np.zeros((len(edges), 3 * len(P)))
    for r, (i, j) in enumerate(edges):
        gi, gj = length_gradient(P[i], P[j])
        J[r, 3 * i : 3 * i + 3] = gi
        J[r, 3 * j : 3 * j + 3] = gj
    return J


def _edge_rows(t, edge_set):
    if edge_set == "boundary":
        return [tuple(e) for e in t.mesh.edges.tolist()]
    if edge_set == "all":
        return list(t.edges)
    raise ValueError(f"edge_set must be 'boundary' or 'all', got {edge_set!r}")


def hyperbolic_length_jacobian(t, edge_set="boundary", vertices=None):
    """Jacobian of truncated edge lengths with respect to the 3V chart coordinates."""
    P = t.mesh.vertices if vertices is None else vertices
    return hyperbolic_length_jacobian_points(P, _edge_rows(t, edge_set))


def _face_plane_derivatives(P):
    """Outward face polars of a tetrahedron and their derivatives.

    Returns ``N (4, 4)`` and ``dN (4, 4, 12)``: ``dN[k]`` is the Jacobian of the
    polar of face k (opposite vertex k) with respect to the 12 coordinates.
    """
    N = face_planes(P)
    dN = np.zeros((4, 4, 12))
    for k in range(4):
        f = [m for m in range(4) if m != k]
        a, b, c = P[f]
        n = np.cross(b - a, c - a)
        m = np.append(n, n @ a)
        norm = np.sqrt(hypcore.mink_inner(m, m))
        sign = -1.0 if P[k] @ n - m[3] > 0 else 1.0
        dm = np.zeros((4, 12))
        blocks = {
            f[0]: (-hypcore.cross_matrix(b - c), np.cross(b, c)),
            f[1]: (-hypcore.cross_matrix(c - a), np.cross(c, a)),
            f[2]: (-hypcore.cross_matrix(a - b), np.cross(a, b)),
        }
        for vtx, (dn, dc) in blocks.items():
            dm[:3, 3 * vtx : 3 * vtx + 3] = dn
            dm[3, 3 * vtx : 3 * vtx + 3] = dc
        dm *= sign
        proj = hypcore.mink_inner(N[k][None, :], dm.T)
        dN[k] = (dm - np.outer(N[k], proj)) / norm
    return N, dN


def simplex_angle_jacobian(P):
    """``(6, 12)`` Jacobian of the interior dihedral angles of a hyperideal tetrahedron."""
    P = np.asarray(P, dtype=float)
    N, dN = _face_plane_derivatives(P)
    G = hypcore.SIGNATURE
    J = np.zeros((6, 12))
    for e, (i, j) in enumerate(TET_EDGES):
        k, l = (m for m in range(4) if m not in (i, j))
        cos = -hypcore.mink_inner(N[k], N[l])
        sin = np.sqrt(1.0 - cos * cos)
        J[e] = (N[l] @ G @ dN[k] + N[k] @ G @ dN[l]) / sin
    return J


def total_dihedral_angles(t, vertices=None):
    """Per triangulation edge, the sum of incident cell dihedral angles (never reduced mod 2 pi)."""
    from .simplex import simplex_dihedrals

    P = t.mesh.vertices if vertices is None else vertices
    out = np.zeros(len(t.edges))
    for k, tet in enumerate(t.tets):
        np.add.at(out, t.local_to_edge[k], simplex_dihedrals(P[tet]))
    return out


def hyperbolic_angle_jacobian(t, edge_set="boundary", vertices=None):
    """Jacobian of total dihedral angles at the chosen edges with respect to 3V coordinates."""
    P = t.mesh.vertices if vertices is None else vertices
    for a, b in t.edges:
        if not hypcore.edge_meets_ball(P[a], P[b]):
            raise EdgeMissesBall(f"edge {(a, b)} misses the open ball")
    full = np.zeros((len(t.edges), 3 * len(P)))
    for k, tet in enumerate(t.tets):
        Jt = simplex_angle_jacobian(P[tet])
        cols = np.concatenate([np.arange(3 * v, 3 * v + 3) for v in tet])
        for e in range(6):
            full[t.local_to_edge[k, e], cols] += Jt[e]
    if edge_set == "all":
        return full
    if edge_set == "boundary":
        return full[t.boundary_edge_ids]
    raise ValueError(f"edge_set must be 'boundary' or 'all', got {edge_set!r}")


# verdicts -----------------------------------------------------------------


@dataclass
class RigidityReport:
    mode: str
    rows: int
    cols: int
    singular_values: list
    trivial_dim: int
    kernel_dim: int
    verdict: str
    margin: float
    sigma_tol: float = SIGMA_TOL
    trivial_residual: float = 0.0
    extra_kernel: list = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("extra_kernel")
        return d


def rigidity_verdict(J, trivial, sigma_tol=SIGMA_TOL, mode=""):
    """SVD rigidity decision for the Jacobian ``J`` given a trivial-motion basis (rows).

    ``margin`` is the smallest singular value of ``J`` on the orthogonal
    complement of the trivial motions. Relative to the largest singular value
    it decides: above ``10 sigma_tol`` rigid, below ``sigma_tol / 10`` flexible,
    in between inconclusive. Trivial motions leaving the kernel by more than
    ``10 sigma_tol`` also give inconclusive.
    """
    J = np.asarray(J, dtype=float)
    rows, cols = J.shape
    s = np.linalg.svd(J, compute_uv=False)
    smax = s[0] if len(s) and s[0] > 0 else 1.0
    kernel_dim = int(np.sum(s < sigma_tol * smax) + max(0, cols - rows))

    Q = orth(np.asarray(trivial, dtype=float).T)
    k = Q.shape[1]
    triv_res = float(np.linalg.norm(J @ Q, 2) / smax) if k else 0.0
    C = null_space(Q.T) if k else np.eye(cols)
    JC = J @ C
    if JC.shape[1] > JC.shape[0]:
        margin, extra = 0.0, C @ null_space(JC)[:, 0]
    else:
        _, sc, vt = np.linalg.svd(JC)
        margin, extra = float(sc[-1]), C @ vt[-1]
    rel = margin / smax

    if triv_res > 10 * sigma_tol:
        verdict = "inconclusive"
    elif rel > 10 * sigma_tol and kernel_dim == k:
        verdict = "rigid"
    elif rel < sigma_tol / 10 and kernel_dim > k:
        verdict = "flexible"
    else:
        verdict = "inconclusive"
    return RigidityReport(
        mode=mode,
        rows=rows,
        cols=cols,
        singular_values=[float(x) for x in s],
        trivial_dim=k,
        kernel_dim=kernel_dim,
        verdict=verdict,
        margin=margin,
        sigma_tol=sigma_tol,
        trivial_residual=triv_res,
        extra_kernel=None if verdict == "rigid" else extra.tolist(),
    )


def localize_field(u, trivial, n_vertices):
    """Find the vertex carrying ``u`` modulo trivial motions.

    For each vertex, fit the trivial motions to ``u`` on all other vertices and
    report the vertex with the smallest misfit, as ``(vertex, residual, field)``
    where ``field = u - fitted motion`` is (nearly) supported on that vertex.
    """
    u = np.asarray(u, dtype=float)
    T = np.asarray(trivial, dtype=float)
    best = None
    for v in range(n_vertices):
        keep = np.ones(3 * n_vertices, dtype=bool)
        keep[3 * v : 3 * v + 3] = False
        coef = np.linalg.lstsq(T[:, keep].T, u[keep], rcond=None)[0]
        local = u - coef @ T
        res = float(np.linalg.norm(local[keep]))
        if best is None or res < best[1]:
            best = (v, res, local)
    return best


def theorem_b_reports(t, sigma_tol=SIGMA_TOL):
    """Hyperbolic length and angle verdicts on the boundary edges of ``t``."""
    T = so31_trivial_motions(t.mesh.vertices)
    length = rigidity_verdict(hyperbolic_length_jacobian(t), T, sigma_tol, "hyperbolic-length")
    angle = rigidity_verdict(hyperbolic_angle_jacobian(t), T, sigma_tol, "hyperbolic-angle")
    return length, angle
