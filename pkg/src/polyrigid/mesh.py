"""Polyhedra, cellulations and triangulations.

A :class:`SurfaceMesh` is a triangulated 2-sphere embedded in R^3 with
outward-oriented triangles. A :class:`Cellulation` decomposes the enclosed
solid into convex cells whose vertices are mesh vertices; a
:class:`Triangulation` is a cellulation by tetrahedra. All three are built
through validating constructors (:func:`make_mesh`,
:func:`validate_cellulation`, :func:`triangulate_cellulation`) and are treated
as immutable afterwards.
"""
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
import io
import json

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from . import hypcore
from .errors import (
    DegenerateSimplex,
    DegenerateTriangle,
    ForeignVertex,
    InconclusiveIntersection,
    NonConvexCell,
    NotClosed,
    NotFaceToFace,
    NotSphere,
    ParseError,
    SelfIntersecting,
    VolumeMismatch,
)

REL_EPS_GEO = 1e-9
REL_EPS_VOL = 1e-12
VOLUME_RTOL = 1e-8

#: local edge order of a tetrahedron, (e12, e13, e14, e23, e24, e34)
TET_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _diameter(points):
    points = np.asarray(points, dtype=float)
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def tet_volume(a, b, c, d):
    """Signed Euclidean volume of the tetrahedron ``abcd``."""
    return float(np.linalg.det(np.array([b - a, c - a, d - a]))) / 6.0


# surface meshes -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    @property
    def n_vertices(self):
        return len(self.vertices)

    @cached_property
    def diameter(self):
        return _diameter(self.vertices)

    @property
    def eps_geo(self):
        return REL_EPS_GEO * self.diameter

    @property
    def eps_vol(self):
        return REL_EPS_VOL * self.diameter**3

    @cached_property
    def edges(self):
        """Sorted array of undirected edges ``(i, j)`` with ``i < j``."""
        return _edges_of(self.triangles)

    @cached_property
    def edge_index(self):
        return {tuple(e): k for k, e in enumerate(self.edges.tolist())}

    @cached_property
    def edge_triangles(self):
        """For every edge, the indices of its two incident triangles."""
        inc = {tuple(e): [] for e in self.edges.tolist()}
        for t, tri in enumerate(self.triangles.tolist()):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                inc[(min(a, b), max(a, b))].append(t)
        return inc

    @property
    def euler_characteristic(self):
        return self.n_vertices - len(self.edges) + len(self.triangles)

    @cached_property
    def volume(self):
        """Enclosed volume by the divergence theorem."""
        return _signed_volume(self.vertices, self.triangles)

    def dihedral_angles(self):
        """Interior Euclidean dihedral angle at every edge, in ``[0, 2 pi)``.

        Values above ``pi`` mark reflex edges.
        """
        V = self.vertices
        out = np.zeros(len(self.edges))
        for k, (i, j) in enumerate(self.edges.tolist()):
            t1, t2 = (self.triangles[t] for t in self.edge_triangles[(i, j)])
            c = next(v for v in t1 if v not in (i, j))
            d = next(v for v in t2 if v not in (i, j))
            axis = V[j] - V[i]
            axis = axis / np.linalg.norm(axis)
            u = V[c] - V[i] - (V[c] - V[i]) @ axis * axis
            w = V[d] - V[i] - (V[d] - V[i]) @ axis * axis
            ang = np.arctan2(np.linalg.norm(np.cross(u, w)), u @ w)
            n1 = np.cross(V[t1[1]] - V[t1[0]], V[t1[2]] - V[t1[0]])
            out[k] = 2 * np.pi - ang if n1 @ (V[d] - V[i]) > 0 else ang
        return out

    def transformed(self, matrix, translation=None):
        """Image under ``x -> matrix @ x + translation`` (re-oriented if needed)."""
        matrix = np.asarray(matrix, dtype=float)
        t = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
        verts = self.vertices @ matrix.T + t
        tris = self.triangles if np.linalg.det(matrix) > 0 else self.triangles[:, ::-1]
        return SurfaceMesh(verts, np.ascontiguousarray(tris))

    def to_off(self):
        out = io.StringIO()
        out.write(f"OFF\n{self.n_vertices} {len(self.triangles)} {len(self.edges)}\n")
        for v in self.vertices:
            out.write(" ".join(repr(float(c)) for c in v) + "\n")
        for t in self.triangles:
            out.write("3 " + " ".join(str(int(i)) for i in t) + "\n")
        return out.getvalue()


def _edges_of(triangles):
    tri = np.asarray(triangles, dtype=int)
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def _signed_volume(vertices, triangles):
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def make_mesh(vertices, triangles, check_embedding=True):
    """Validate a triangulated sphere and return it with outward orientation.

    Raises:
        DegenerateTriangle, NotClosed, NotSphere, SelfIntersecting,
        InconclusiveIntersection: naming the first offending simplex.
    """
    verts = np.array(vertices, dtype=float)
    tris = np.array(triangles, dtype=int)
    if verts.ndim != 2 or verts.shape[1] != 3 or len(verts) < 4:
        raise ParseError("need at least 4 vertices with 3 coordinates each")
    if tris.ndim != 2 or tris.shape[1] != 3 or len(tris) == 0:
        raise ParseError("triangles must be index triples")
    if tris.min() < 0 or tris.max() >= len(verts):
        bad = int(np.argmax((tris < 0).any(axis=1) | (tris >= len(verts)).any(axis=1)))
        raise ParseError(f"triangle {bad} has an out-of-range vertex index")
    eps = REL_EPS_GEO * _diameter(verts)

    for t, (i, j, k) in enumerate(tris):
        if len({i, j, k}) < 3:
            raise DegenerateTriangle(f"triangle {t} repeats a vertex")
        area2 = np.linalg.norm(np.cross(verts[j] - verts[i], verts[k] - verts[i]))
        longest = max(np.linalg.norm(verts[a] - verts[b]) for a, b in ((i, j), (j, k), (k, i)))
        if area2 <= eps * longest:
            raise DegenerateTriangle(f"triangle {t} has zero area")

    directed = {}
    for t, (i, j, k) in enumerate(tris.tolist()):
        for a, b in ((i, j), (j, k), (k, i)):
            directed.setdefault((a, b), []).append(t)
    for (a, b), ts in directed.items():
        if len(ts) > 1:
            raise NotClosed(f"edge ({a}, {b}) is traversed twice in the same direction")
        if (b, a) not in directed:
            raise NotClosed(f"edge ({min(a, b)}, {max(a, b)}) has only one incident triangle")

    used = np.unique(tris)
    if len(used) != len(verts):
        missing = sorted(set(range(len(verts))) - set(used.tolist()))
        raise NotSphere(f"vertex {missing[0]} belongs to no triangle")
    chi = len(verts) - len(_edges_of(tris)) + len(tris)
    if chi != 2:
        raise NotSphere(f"Euler characteristic is {chi}, expected 2")

    if _signed_volume(verts, tris) < 0:
        tris = np.ascontiguousarray(tris[:, ::-1])
    if check_embedding:
        _check_embedded(verts, tris, eps)
    return SurfaceMesh(verts, tris)


# triangle-triangle intersection -------------------------------------------


def _point_triangle_distance(p, a, b, c):
    # closest point on triangle, after Ericson, Real-Time Collision Detection 5.1.5
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = ab @ ap, ac @ ap
    if d1 <= 0 and d2 <= 0:
        return np.linalg.norm(p - a)
    bp = p - b
    d3, d4 = ab @ bp, ac @ bp
    if d3 >= 0 and d4 <= d3:
        return np.linalg.norm(p - b)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        return np.linalg.norm(p - (a + d1 / (d1 - d3) * ab))
    cp = p - c
    d5, d6 = ab @ cp, ac @ cp
    if d6 >= 0 and d5 <= d6:
        return np.linalg.norm(p - c)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        return np.linalg.norm(p - (a + d2 / (d2 - d6) * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0 and d4 - d3 >= 0 and d5 - d6 >= 0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return np.linalg.norm(p - (b + w * (c - b)))
    denom = 1.0 / (va + vb + vc)
    return np.linalg.norm(p - (a + ab * vb * denom + ac * vc * denom))


def _segment_segment_distance(p1, q1, p2, q2):
    d1, d2, r = q1 - p1, q2 - p2, p1 - p2
    a, e, f = d1 @ d1, d2 @ d2, d2 @ r
    c = d1 @ r
    b = d1 @ d2
    denom = a * e - b * b
    s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-300 else 0.0
    t = (b * s + f) / e
    if t < 0:
        t, s = 0.0, np.clip(-c / a, 0.0, 1.0)
    elif t > 1:
        t, s = 1.0, np.clip((b - c) / a, 0.0, 1.0)
    return np.linalg.norm(p1 + d1 * s - (p2 + d2 * t))


def _triangle_distance(T1, T2):
    d = min(_point_triangle_distance(p, *T2) for p in T1)
    d = min(d, min(_point_triangle_distance(p, *T1) for p in T2))
    for i, j in ((0, 1), (1, 2), (2, 0)):
        for k, l in ((0, 1), (1, 2), (2, 0)):
            d = min(d, _segment_segment_distance(T1[i], T1[j], T2[k], T2[l]))
    return d


def _segment_pierces(p, q, tri, eps):
    """True if the segment crosses the triangle's interior with margin eps."""
    a, b, c = tri
    n = np.cross(b - a, c - a)
    n = n / np.linalg.norm(n)
    dp, dq = (p - a) @ n, (q - a) @ n
    if dp * dq >= 0 or min(abs(dp), abs(dq)) <= eps:
        return False
    x = p + dp / (dp - dq) * (q - p)
    for u, v in ((a, b), (b, c), (c, a)):
        if np.cross(v - u, x - u) @ n <= eps * np.linalg.norm(v - u):
            return False
    return True


def _tri_pair_verdict(T1, T2, shared, eps):
    """Return 'ok', 'intersect' or 'inconclusive' for two mesh triangles.

    ``shared`` lists (index in T1, index in T2) of common vertices.
    """
    if len(shared) == 2:
        (i1, i2), (j1, j2) = shared
        k1 = 3 - i1 - j1
        k2 = 3 - i2 - j2
        a, b = T1[i1], T1[j1]
        n = np.cross(b - a, T1[k1] - a)
        n /= np.linalg.norm(n)
        off = (T2[k2] - a) @ n
        if abs(off) > eps:
            return "ok"
        # coplanar: overlap iff both apexes on the same side of the shared edge
        t = (b - a) / np.linalg.norm(b - a)
        w1 = T1[k1] - a - ((T1[k1] - a) @ t) * t
        w2 = T2[k2] - a - ((T2[k2] - a) @ t) * t
        return "intersect" if w1 @ w2 > 0 else "ok"

    if len(shared) == 1:
        (i1, i2), = shared
        s = T1[i1]
        a1, b1 = (T1[k] - s for k in range(3) if k != i1)
        a2, b2 = (T2[k] - s for k in range(3) if k != i2)
        n1 = np.cross(a1, b1)
        n2 = np.cross(a2, b2)
        n1 /= np.linalg.norm(n1)
        n2 /= np.linalg.norm(n2)
        scale = max(np.linalg.norm(w) for w in (a1, b1, a2, b2))
        tol = eps / scale
        u = np.cross(n1, n2)
        if np.linalg.norm(u) > tol:
            # non-coplanar: both triangles meet the line of their planes in a
            # segment starting at s; they overlap iff they leave s the same way
            u /= np.linalg.norm(u)
            verdict = "ok"
            for d in (u, -u):
                st1 = _cone_status(d, a1, b1, n1, tol)
                st2 = _cone_status(d, a2, b2, n2, tol)
                if st1 == st2 == "in":
                    return "intersect"
                if st1 != "out" and st2 != "out":
                    verdict = "inconclusive"
            return verdict
        e1 = a1 / np.linalg.norm(a1)
        e2 = np.cross(n1, e1)
        angle = lambda w: float(np.arctan2(w @ e2, w @ e1))
        sec1 = _sector(angle(a1), angle(b1))
        sec2 = _sector(angle(a2), angle(b2))
        rays1 = (sec1[0], sec1[0] + sec1[1])
        rays2 = (sec2[0], sec2[0] + sec2[1])
        if any(_ray_in_sector(r, sec1, tol) for r in rays2) or any(
            _ray_in_sector(r, sec2, tol) for r in rays1
        ):
            return "intersect"
        if any(_ray_in_sector(r, sec1, -tol) for r in rays2) or any(
            _ray_in_sector(r, sec2, -tol) for r in rays1
        ):
            return "inconclusive"
        return "ok"

    for i, j in ((0, 1), (1, 2), (2, 0)):
        if _segment_pierces(T1[i], T1[j], T2, eps) or _segment_pierces(T2[i], T2[j], T1, eps):
            return "intersect"
    return "inconclusive" if _triangle_distance(T1, T2) <= eps else "ok"


def _cone_status(d, a, b, n, tol):
    """Position of direction d relative to the planar cone spanned by a and b."""
    s1 = np.cross(a, d) @ n / np.linalg.norm(a)
    s2 = np.cross(d, b) @ n / np.linalg.norm(b)
    if s1 > tol and s2 > tol:
        return "in"
    if s1 > -tol and s2 > -tol:
        return "edge"
    return "out"


def _sector(t1, t2):
    """Planar sector ``(start, width)`` with width < pi between two rays."""
    width = (t2 - t1) % (2 * np.pi)
    if width > np.pi:
        t1, width = t2, 2 * np.pi - width
    return (t1, width)


def _ray_in_sector(theta, sec, margin):
    start, width = sec
    d = (theta - start + np.pi) % (2 * np.pi) - np.pi
    return margin < d < width - margin


def _check_embedded(verts, tris, eps):
    lo = verts[tris].min(axis=1) - eps
    hi = verts[tris].max(axis=1) + eps
    for t1 in range(len(tris)):
        cand = np.nonzero(np.all(lo[t1 + 1:] <= hi[t1], axis=1) & np.all(hi[t1 + 1:] >= lo[t1], axis=1))[0]
        for t2 in cand + t1 + 1:
            A, B = tris[t1].tolist(), tris[t2].tolist()
            shared = [(A.index(v), B.index(v)) for v in A if v in B]
            verdict = _tri_pair_verdict(verts[A], verts[B], shared, eps)
            if verdict == "intersect":
                raise SelfIntersecting(f"triangles {t1} and {t2} intersect")
            if verdict == "inconclusive":
                raise InconclusiveIntersection(f"triangles {t1} and {t2} touch within tolerance")


# cellulations -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cellulation:
    """Convex cells over the vertex table of ``mesh``.

    ``cells[i]`` is the sorted tuple of vertex indices of cell ``i`` and
    ``facets[i]`` the list of its facets, each a vertex-index tuple in
    counter-clockwise order seen from outside the cell.
    """

    mesh: SurfaceMesh
    cells: tuple
    facets: tuple

    @cached_property
    def volumes(self):
        return np.array([_cell_volume(self.mesh.vertices, f) for f in self.facets])

    @cached_property
    def edges(self):
        """All distinct cell edges, as sorted index pairs."""
        out = set()
        for cell_facets in self.facets:
            for f in cell_facets:
                for a, b in zip(f, f[1:] + f[:1]):
                    out.add((min(a, b), max(a, b)))
        return sorted(out)


def _cell_volume(vertices, facets):
    # facets are outward oriented polygons; fan each and apply divergence theorem
    total = 0.0
    for f in facets:
        p0 = vertices[f[0]]
        for a, b in zip(f[1:-1], f[2:]):
            total += p0 @ np.cross(vertices[a], vertices[b])
    return total / 6.0


def _cell_facets(points, idx, cell_no, eps_geo, eps_vol):
    """Extreme-point check and facet lattice of one convex cell."""
    if len(idx) < 4:
        raise NonConvexCell(f"cell {cell_no} has fewer than 4 vertices")
    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise NonConvexCell(f"cell {cell_no} is degenerate (flat)") from exc
    if hull.volume <= eps_vol:
        raise NonConvexCell(f"cell {cell_no} is degenerate (volume {hull.volume:.3g})")
    if len(hull.vertices) != len(idx):
        inner = sorted(set(range(len(idx))) - set(hull.vertices.tolist()))
        raise NonConvexCell(f"cell {cell_no}: vertex {idx[inner[0]]} is not an extreme point")

    facets = []
    seen = []
    for eq in hull.equations:
        n, d = eq[:3], eq[3]
        if any(np.linalg.norm(n - m) < 1e-9 and abs(d - e) < eps_geo for m, e in seen):
            continue
        seen.append((n, d))
        on = [k for k in range(len(idx)) if abs(points[k] @ n + d) <= eps_geo]
        centre = points[on].mean(axis=0)
        e1 = points[on[0]] - centre
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        ang = [np.arctan2((points[k] - centre) @ e2, (points[k] - centre) @ e1) for k in on]
        order = [on[k] for k in np.argsort(ang)]
        facets.append(tuple(int(idx[k]) for k in order))
    return facets


def _separation_margin(P, Q, shared_P, shared_Q):
    """Largest t such that a plane contains the shared points and separates the
    remaining points of P and Q by at least t (with |a|_inf <= 1)."""
    rest_P = np.delete(P, shared_P, axis=0)
    rest_Q = np.delete(Q, shared_Q, axis=0)
    S = P[shared_P]
    # variables a (3), b, t ; maximise t
    A_ub, b_ub = [], []
    for x in rest_P:
        A_ub.append([*x, -1.0, 1.0])
        b_ub.append(0.0)
    for x in rest_Q:
        A_ub.append([*(-x), 1.0, 1.0])
        b_ub.append(0.0)
    A_eq = [[*x, -1.0, 0.0] for x in S] or None
    b_eq = [0.0] * len(S) or None
    res = linprog(
        c=[0, 0, 0, 0, -1.0],
        A_ub=np.array(A_ub),
        b_ub=b_ub,
        A_eq=None if A_eq is None else np.array(A_eq),
        b_eq=b_eq,
        bounds=[(-1, 1)] * 3 + [(None, None), (None, 1.0)],
        method="highs",
    )
    return -res.fun if res.status == 0 else -np.inf


def validate_cellulation(mesh, cells):
    """Check a raw cell list against the mesh and build its facet lattice.

    ``cells`` holds, per cell, either vertex indices into ``mesh.vertices`` or
    explicit coordinates (matched to mesh vertices within ``eps_geo``).

    Raises:
        ForeignVertex, NonConvexCell, NotFaceToFace, VolumeMismatch
    """
    verts = mesh.vertices
    eps_geo, eps_vol = mesh.eps_geo, mesh.eps_vol
    index_cells = []
    for i, cell in enumerate(cells):
        arr = np.asarray(cell)
        if arr.ndim == 2:
            ids = []
            for p in arr.astype(float):
                d = np.linalg.norm(verts - p, axis=1)
                if d.min() > eps_geo:
                    raise ForeignVertex(f"cell {i} uses a point that is not a mesh vertex")
                ids.append(int(d.argmin()))
        else:
            ids = [int(k) for k in arr.tolist()]
            if any(k < 0 or k >= len(verts) for k in ids):
                raise ForeignVertex(f"cell {i} references a vertex index outside the mesh")
        if len(set(ids)) != len(ids):
            raise NonConvexCell(f"cell {i} repeats a vertex")
        index_cells.append(tuple(sorted(ids)))

    facets = tuple(
        tuple(_cell_facets(verts[list(c)], list(c), i, eps_geo, eps_vol)) for i, c in enumerate(index_cells)
    )

    diam = mesh.diameter
    scaled = verts / diam
    for i, j in combinations(range(len(index_cells)), 2):
        ci, cj = index_cells[i], index_cells[j]
        Pi, Pj = scaled[list(ci)], scaled[list(cj)]
        if np.any(Pi.min(axis=0) > Pj.max(axis=0) + REL_EPS_GEO) or np.any(
            Pj.min(axis=0) > Pi.max(axis=0) + REL_EPS_GEO
        ):
            continue
        common = sorted(set(ci) & set(cj))
        margin = _separation_margin(Pi, Pj, [ci.index(v) for v in common], [cj.index(v) for v in common])
        if margin <= REL_EPS_GEO:
            raise NotFaceToFace(f"cells {i} and {j} do not meet along a common face")

    cellulation = Cellulation(mesh, tuple(index_cells), facets)
    total = float(cellulation.volumes.sum())
    if abs(total - mesh.volume) > VOLUME_RTOL * abs(mesh.volume):
        raise VolumeMismatch(f"cells fill volume {total:.12g}, mesh encloses {mesh.volume:.12g}")
    return cellulation


# triangulations -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Triangulation(Cellulation):
    """A cellulation all of whose cells are tetrahedra."""

    @cached_property
    def tets(self):
        return np.array(self.cells, dtype=int)

    @property
    def n_tets(self):
        return len(self.cells)

    @cached_property
    def edge_list(self):
        """Distinct edges of the triangulation, shape (E, 2)."""
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    @cached_property
    def local_to_edge(self):
        """``(N, 6)`` map from (tet, local edge in TET_EDGES order) to edge index."""
        lookup = {e: k for k, e in enumerate(self.edges)}
        out = np.empty((self.n_tets, 6), dtype=int)
        for t, tet in enumerate(self.cells):
            for k, (a, b) in enumerate(TET_EDGES):
                out[t, k] = lookup[(tet[a], tet[b])]
        return out

    @cached_property
    def boundary_edge_ids(self):
        """Triangulation edge indices of the mesh edges, in ``mesh.edges`` order."""
        lookup = {e: k for k, e in enumerate(self.edges)}
        return np.array([lookup[tuple(e)] for e in self.mesh.edges.tolist()], dtype=int)

    @cached_property
    def interior_edge_ids(self):
        boundary = set(self.boundary_edge_ids.tolist())
        return np.array([k for k in range(len(self.edges)) if k not in boundary], dtype=int)

    def simplex_points(self, t, vertices=None):
        verts = self.mesh.vertices if vertices is None else vertices
        return verts[self.tets[t]]


def _fan(polygon):
    """Fan triangulation of a convex polygon from its smallest-index vertex."""
    k = polygon.index(min(polygon))
    p = polygon[k:] + polygon[:k]
    return [(p[0], p[m], p[m + 1]) for m in range(1, len(p) - 1)]


def triangulate_cellulation(c):
    """Subdivide every cell into tetrahedra without adding vertices.

    Each facet is fanned from its smallest-index vertex (which is the cell's
    smallest vertex whenever the facet contains it, and is the same from both
    sides of a shared facet); every facet triangle not containing the cell's
    smallest vertex ``w`` is then coned to ``w``.

    Raises:
        DegenerateSimplex: if a produced tetrahedron is flat.
    """
    verts = c.mesh.vertices
    tets = []
    facets = []
    for cell, cell_facets in zip(c.cells, c.facets):
        w = min(cell)
        for f in cell_facets:
            for tri in _fan(list(f)):
                if w in tri:
                    continue
                tet = (w,) + tri
                vol = tet_volume(*verts[list(tet)])
                if abs(vol) < c.mesh.eps_vol:
                    raise DegenerateSimplex(f"tetrahedron {tet} has volume {vol:.3g}")
                sorted_tet = tuple(sorted(tet))
                tets.append(sorted_tet)
                facets.append(_tet_facets(verts, sorted_tet))
    t = Triangulation(c.mesh, tuple(tets), tuple(facets))
    if abs(t.volumes.sum() - c.volumes.sum()) > 1e-10 * abs(c.volumes.sum()):
        raise DegenerateSimplex("volume changed during triangulation")
    return t


def _tet_facets(verts, tet):
    out = []
    for k in range(4):
        f = [tet[m] for m in range(4) if m != k]
        a, b, cc = verts[f]
        if np.cross(b - a, cc - a) @ (verts[tet[k]] - a) > 0:
            f = [f[0], f[2], f[1]]
        out.append(tuple(f))
    return out


def make_triangulation(mesh, tets):
    """Validate a tetrahedral cell list and return it as a :class:`Triangulation`."""
    cel = validate_cellulation(mesh, tets)
    if any(len(cell) != 4 for cell in cel.cells):
        raise ValueError("all cells must be tetrahedra; use triangulate_cellulation")
    return triangulate_cellulation(cel)


@dataclass
class CheckReport:
    """Outcome of a report-style hypothesis check."""

    passed: bool
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {"passed": self.passed, "violations": self.violations}


def hyperideal_check(t, eps=hypcore.EPS_CLASS):
    """All vertices outside the closed ball, all cell edges through the open ball."""
    violations = []
    verts = t.mesh.vertices
    used = sorted({v for cell in t.cells for v in cell})
    for v in used:
        r = float(np.linalg.norm(verts[v]))
        if r <= 1.0 + eps:
            violations.append({"kind": "VertexInsideBall", "vertex": v, "norm": r})
    for a, b in t.edges:
        d = hypcore.segment_distance_to_origin(verts[a], verts[b])
        if d >= 1.0 - eps:
            violations.append({"kind": "EdgeMissesBall", "edge": [a, b], "distance": d})
    return CheckReport(not violations, violations)


# file formats -------------------------------------------------------------


def _parse_off(text):
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            lines.append((no, s))
    if not lines or not lines[0][1].startswith("OFF"):
        raise ParseError("line 1: missing OFF header")
    header = lines[0][1][3:].split()
    body = lines[1:]
    if header:
        counts_line = (lines[0][0], " ".join(header))
    else:
        if not body:
            raise ParseError("missing counts line")
        counts_line, body = body[0], body[1:]
    try:
        nv, nf = (int(x) for x in counts_line[1].split()[:2])
    except ValueError as exc:
        raise ParseError(f"line {counts_line[0]}: bad counts line") from exc
    if len(body) < nv + nf:
        raise ParseError(f"expected {nv} vertices and {nf} faces, file is truncated")
    verts, tris = [], []
    for no, s in body[:nv]:
        try:
            xyz = [float(x) for x in s.split()[:3]]
        except ValueError as exc:
            raise ParseError(f"line {no}: bad vertex") from exc
        if len(xyz) != 3:
            raise ParseError(f"line {no}: vertex needs 3 coordinates")
        verts.append(xyz)
    for no, s in body[nv:nv + nf]:
        try:
            vals = [int(x) for x in s.split()]
        except ValueError as exc:
            raise ParseError(f"line {no}: bad face") from exc
        if not vals or vals[0] != 3 or len(vals) < 4:
            raise ParseError(f"line {no}: only triangular faces are supported")
        tris.append(vals[1:4])
    return verts, tris


def load_mesh(source, format=None, check_embedding=True):
    """Read a surface mesh from OFF or JSON text, bytes, a path or a file object."""
    text = _read_text(source)
    fmt = format or ("OFF" if text.lstrip().startswith("OFF") else "JSON")
    if fmt.upper() == "OFF":
        verts, tris = _parse_off(text)
    else:
        doc = _parse_json(text)
        verts, tris = doc.get("vertices"), doc.get("triangles")
        if verts is None or tris is None:
            raise ParseError("JSON instance needs 'vertices' and 'triangles'")
    return make_mesh(verts, tris, check_embedding=check_embedding)


def _read_text(source):
    if hasattr(source, "read"):
        data = source.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, str) and ("\n" in source or source.lstrip()[:1] in ("{", "O")):
        data = source
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


def _parse_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from exc


@dataclass
class Instance:
    """A full problem instance: mesh, optional raw cells and ellipsoid."""

    mesh: SurfaceMesh
    cells: list = None
    ellipsoid: object = None


def load_instance(source):
    """Parse the canonical JSON container (or a bare OFF surface)."""
    from .ellipsoid import Ellipsoid

    text = _read_text(source)
    if text.lstrip().startswith("OFF"):
        return Instance(load_mesh(text, "OFF"))
    doc = _parse_json(text)
    mesh = load_mesh(text, "JSON")
    ell = doc.get("ellipsoid")
    if ell is not None:
        try:
            ell = Ellipsoid(np.array(ell["A"], dtype=float), np.array(ell.get("c", [0, 0, 0]), dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad ellipsoid entry: {exc}") from exc
    return Instance(mesh, doc.get("cells"), ell)


def dump_instance(mesh, cells=None, ellipsoid=None):
    doc = {"vertices": mesh.vertices.tolist(), "triangles": mesh.triangles.tolist()}
    if cells is not None:
        doc["cells"] = [list(map(int, c)) for c in cells]
    if ellipsoid is not None:
        doc["ellipsoid"] = {"A": ellipsoid.A.tolist(), "c": ellipsoid.c.tolist()}
    return json.dumps(doc, indent=1)
