"""Hyperideal simplices.

A hyperideal simplex is given by four Klein-chart points outside the closed
unit ball whose six edges all cross the open ball. Edges are always indexed
in the order ``(e12, e13, e14, e23, e24, e34)``; dihedral angles are interior
angles, edge lengths are truncated lengths (distance between dual planes).

Volumes are hyperbolic volumes of the truncated polytope. Three quadratures
are provided:

``"boundary"``
    the density ``(1-|x|^2)^-2`` is the divergence of ``x artanh-type(|x|)``;
    integrating radially in closed form on every facet leaves a 1-D integral
    per facet edge, done adaptively. Accurate to ~1e-14, used by default.
``"tetra"``
    facet fans coned to the centroid, a conical Gauss-Jacobi product rule per
    tetrahedron and uniform red refinement with a Richardson error estimate.
``"adaptive"``
    the same rule with local refinement of the tetrahedra whose
    parent/children estimates disagree.
"""
from dataclasses import dataclass
from functools import lru_cache
import heapq

import numpy as np
from scipy.integrate import quad
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection, QhullError
from scipy.special import roots_jacobi, roots_legendre

from . import hypcore
from .errors import (
    DegenerateSimplex,
    DegenerateTruncation,
    EdgeMissesBall,
    NoConvergence,
    NotHyperideal,
    OutsidePolytope,
    QuadratureFailure,
)
from .mesh import TET_EDGES, tet_volume

REL_EPS_VOL = 1e-12
SCHLAFLI_HESSIAN_STEP = 1e-4
DEFAULT_VOLUME_TOL = 1e-9

#: vertex -> the three local edge indices incident to it
VERTEX_EDGES = tuple(tuple(k for k, e in enumerate(TET_EDGES) if v in e) for v in range(4))


def _opposite(i, j):
    return tuple(k for k in range(4) if k not in (i, j))


@dataclass(frozen=True, eq=False)
class HyperidealSimplex:
    vertices: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.shape != (4, 3):
            raise ValueError("a simplex needs 4 points in R^3")
        for k, v in enumerate(V):
            if hypcore.classify(v) != "hyperideal":
                raise NotHyperideal(f"vertex {k} has norm {np.linalg.norm(v):.12g}")
        for i, j in TET_EDGES:
            if not hypcore.edge_meets_ball(V[i], V[j]):
                raise EdgeMissesBall(f"edge e{i + 1}{j + 1} misses the open ball")
        diam = max(np.linalg.norm(V[i] - V[j]) for i, j in TET_EDGES)
        if abs(tet_volume(*V)) < REL_EPS_VOL * diam**3:
            raise DegenerateSimplex("flat simplex")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @classmethod
    def regular(cls, s):
        """Regular tetrahedron centred at the origin with vertices of norm ``s``."""
        T = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)
        return cls(s * T)

    @property
    def lifts(self):
        return np.array([hypcore.lift_hyperideal(v) for v in self.vertices])

    def isometric_image(self, M):
        return HyperidealSimplex(hypcore.apply_isometry(M, self.vertices))


def face_planes(S):
    """Outward unit polars ``N_k`` of the four faces, face ``k`` opposite vertex ``k``."""
    V = S.vertices if isinstance(S, HyperidealSimplex) else np.asarray(S, dtype=float)
    out = []
    for k in range(4):
        f = [m for m in range(4) if m != k]
        P = hypcore.plane_of_face(*V[f])
        if P.side(V[k]) > 0:
            P = P.flipped()
        out.append(P.N)
    return np.array(out)


def simplex_dihedrals(S):
    """Interior dihedral angles, in edge order."""
    N = face_planes(S)
    th = np.empty(6)
    for e, (i, j) in enumerate(TET_EDGES):
        k, l = _opposite(i, j)
        th[e] = hypcore.dihedral_angle(N[k], N[l])
    return th


def simplex_lengths(S):
    """Truncated edge lengths, in edge order."""
    V = S.vertices
    return np.array([hypcore.truncated_edge_length(V[i], V[j]) for i, j in TET_EDGES])


def vertex_margins(theta):
    """``sum over edges at s of (pi - theta) - 2 pi`` for the four vertices."""
    theta = np.asarray(theta, dtype=float)
    return np.array([np.sum(np.pi - theta[list(ids)]) - 2 * np.pi for ids in VERTEX_EDGES])


def in_angle_polytope(theta, margin=0.0):
    theta = np.asarray(theta, dtype=float)
    return bool(
        theta.shape == (6,)
        and np.all(theta > margin)
        and np.all(theta < np.pi - margin)
        and np.all(vertex_margins(theta) > margin)
    )


def schlafli_gradient(S):
    """Gradient of volume with respect to the interior dihedral angles, ``-L/2``."""
    return -0.5 * simplex_lengths(S)


# truncation ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TruncatedPolytope:
    """Compact polytope inside the ball.

    ``facets[k]`` lists vertex indices counter-clockwise seen from outside;
    ``planes[k] = (n, c)`` with unit outward ``n`` and ``x . n = c`` on the facet.
    ``kinds[k]`` is ``"face"`` or ``"truncation"``.
    """

    vertices: np.ndarray
    facets: tuple
    planes: tuple
    kinds: tuple

    def facet_area(self, k):
        f = self.vertices[list(self.facets[k])]
        n = self.planes[k][0]
        return 0.5 * sum(np.cross(f[m] - f[0], f[m + 1] - f[0]) @ n for m in range(1, len(f) - 1))


def _halfspaces(V):
    N = face_planes(V)
    rows, kinds = [], []
    for k in range(4):
        # region <X, N_k> <= 0  <=>  x . n - c <= 0
        n, c = N[k][:3], N[k][3]
        s = np.linalg.norm(n)
        rows.append(np.append(n / s, -c / s))
        kinds.append("face")
    for v in V:
        s = np.linalg.norm(v)
        rows.append(np.append(v / s, -1.0 / s))
        kinds.append("truncation")
    return np.array(rows), kinds


def truncate(S, eps=1e-9):
    """Cut the four ends of ``S`` along the dual planes of its vertices.

    Raises:
        DegenerateTruncation: a facet collapses or the result leaves the ball.
    """
    H, kinds = _halfspaces(S.vertices)
    # Chebyshev centre as interior point
    norms = np.linalg.norm(H[:, :3], axis=1)
    res = linprog(
        c=[0, 0, 0, -1.0],
        A_ub=np.column_stack([H[:, :3], norms]),
        b_ub=-H[:, 3],
        bounds=[(None, None)] * 3 + [(0, None)],
        method="highs",
    )
    if res.status != 0 or res.x[3] <= eps:
        raise DegenerateTruncation("truncated polytope has empty interior")
    try:
        hs = HalfspaceIntersection(H, res.x[:3])
    except QhullError as exc:
        raise DegenerateTruncation(str(exc)) from exc

    pts = []
    for p in hs.intersections:
        if not any(np.linalg.norm(p - q) < eps for q in pts):
            pts.append(p)
    pts = np.array(pts)
    if np.linalg.norm(pts, axis=1).max() >= 1.0:
        raise DegenerateTruncation("truncated polytope is not inside the ball")

    facets, planes, fkinds = [], [], []
    for row, kind in zip(H, kinds):
        n, c = row[:3], -row[3]
        on = np.nonzero(np.abs(pts @ n - c) <= 10 * eps)[0]
        if len(on) < 3:
            raise DegenerateTruncation(f"a {kind} facet collapsed")
        centre = pts[on].mean(axis=0)
        e1 = pts[on[0]] - centre
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        ang = np.arctan2((pts[on] - centre) @ e2, (pts[on] - centre) @ e1)
        facets.append(tuple(int(k) for k in on[np.argsort(ang)]))
        planes.append((n, c))
        fkinds.append(kind)
    T = TruncatedPolytope(pts, tuple(facets), tuple(planes), tuple(fkinds))
    for k in range(len(facets)):
        if T.facet_area(k) <= eps**2:
            raise DegenerateTruncation(f"a {fkinds[k]} facet has zero area")
    return T


# volume -------------------------------------------------------------------


def _K(r):
    """Radial antiderivative ``artanh(r) / (2 r)`` of the divergence potential."""
    r = np.asarray(r, dtype=float)
    small = r < 1e-6
    safe = np.where(small, 0.5, r)
    return np.where(small, 0.5 + r * r / 6.0, np.arctanh(safe) / (2 * safe))


def _boundary_volume(T, tol):
    total = 0.0
    for facet, (n, c) in zip(T.facets, T.planes):
        foot = c * n
        P = T.vertices[list(facet)] - foot
        e1 = P[0] / np.linalg.norm(P[0]) if np.linalg.norm(P[0]) > 0 else P[1] / np.linalg.norm(P[1])
        e2 = np.cross(n, e1)
        xy = np.column_stack([P @ e1, P @ e2])
        kc = float(_K(abs(c)))
        facet_sum = 0.0
        for a, b in zip(xy, np.roll(xy, -1, axis=0)):
            edge = b - a
            cross = a[0] * b[1] - a[1] * b[0]
            d = abs(cross) / np.linalg.norm(edge)
            if d < 1e-15:
                continue
            ta = np.arctan2(a[1], a[0])
            sweep = np.arctan2(cross, a @ b)
            # foot of perpendicular from the origin onto the edge line
            t_perp = -(a @ edge) / (edge @ edge)
            q = a + t_perp * edge
            tn = np.arctan2(q[1], q[0])
            f = lambda phi: float(_K(np.sqrt(c * c + (d / np.cos(phi - tn)) ** 2))) - kc
            val, err, *rest = quad(f, ta, ta + sweep, epsabs=tol * 1e-2, epsrel=tol * 1e-2, limit=200, full_output=1)
            if len(rest) > 1 and rest[0] == 1:
                raise QuadratureFailure("subdivision limit reached on a facet edge")
            facet_sum += val
        total += c * facet_sum
    return total


@lru_cache(maxsize=None)
def conical_rule(n):
    """Conical Gauss-Jacobi product rule on the unit tetrahedron (degree 2n-1).

    Returns ``(points (n^3, 3), weights (n^3,))`` with weights summing to 1/6.
    """
    xa, wa = roots_jacobi(n, 2, 0)
    xb, wb = roots_jacobi(n, 1, 0)
    xc, wc = roots_legendre(n)
    a, wa = (xa + 1) / 2, wa / 8
    b, wb = (xb + 1) / 2, wb / 4
    c, wc = (xc + 1) / 2, wc / 2
    A, B, C = np.meshgrid(a, b, c, indexing="ij")
    W = np.einsum("i,j,k->ijk", wa, wb, wc)
    u = A
    v = B * (1 - A)
    w = C * (1 - A) * (1 - B)
    return np.column_stack([u.ravel(), v.ravel(), w.ravel()]), W.ravel()


def _tet_batch_integral(tets, n):
    """Integral of the Klein volume density over each tetrahedron of a batch (M, 4, 3)."""
    xi, w = conical_rule(n)
    out = np.empty(len(tets))
    chunk = max(1, 2_000_000 // len(w))
    for a in range(0, len(tets), chunk):
        T = tets[a : a + chunk]
        E = T[:, 1:, :] - T[:, :1, :]
        X = T[:, None, 0, :] + np.einsum("qk,mkd->mqd", xi, E)
        out[a : a + chunk] = np.abs(np.linalg.det(E)) * (hypcore.klein_volume_density(X) @ w)
    return out


def _red_refine(tets):
    x0, x1, x2, x3 = (tets[:, k] for k in range(4))
    m01, m02, m03 = (x0 + x1) / 2, (x0 + x2) / 2, (x0 + x3) / 2
    m12, m13, m23 = (x1 + x2) / 2, (x1 + x3) / 2, (x2 + x3) / 2
    children = [
        (x0, m01, m02, m03),
        (m01, x1, m12, m13),
        (m02, m12, x2, m23),
        (m03, m13, m23, x3),
        (m01, m02, m03, m13),
        (m01, m02, m12, m13),
        (m02, m03, m13, m23),
        (m02, m12, m13, m23),
    ]
    return np.concatenate([np.stack(ch, axis=1) for ch in children])


def _polytope_tets(T):
    centre = T.vertices.mean(axis=0)
    out = []
    for facet in T.facets:
        f = list(facet)
        for m in range(1, len(f) - 1):
            out.append([centre, T.vertices[f[0]], T.vertices[f[m]], T.vertices[f[m + 1]]])
    return np.array(out)


def _tetra_volume(T, tol, n=6, max_level=5, max_tets=400_000):
    # the level-to-level difference is used as the (conservative) error
    # estimate; the extrapolated value assumes the asymptotic rate h^(2n)
    tets = _polytope_tets(T)
    order = 2 * n
    prev = _tet_batch_integral(tets, n).sum()
    for _ in range(max_level):
        if 8 * len(tets) > max_tets:
            break
        tets = _red_refine(tets)
        cur = _tet_batch_integral(tets, n).sum()
        if abs(cur - prev) <= tol * abs(cur):
            return cur + (cur - prev) / (2**order - 1)
        prev = cur
    raise QuadratureFailure(f"uniform refinement did not reach tol={tol:g} within {max_tets} tetrahedra")


def _adaptive_volume(T, tol, n=4, max_tets=400_000):
    tets = _polytope_tets(T)
    coarse = _tet_batch_integral(tets, n)
    estimate = coarse.sum()
    budget = tol * abs(estimate)
    total = 0.0
    active = tets
    active_vals = coarse
    count = len(tets)
    while len(active):
        kids = _red_refine(active)
        kid_vals = _tet_batch_integral(kids, n).reshape(8, len(active)).sum(axis=0)
        err = np.abs(kid_vals - active_vals)
        # distribute the error budget proportionally to Euclidean volume
        share = budget * np.abs(np.linalg.det(active[:, 1:] - active[:, :1])) / 6 / _polytope_volume(T)
        done = err <= share
        total += kid_vals[done].sum()
        nxt = np.nonzero(~done)[0]
        if not len(nxt):
            break
        sel = np.concatenate([nxt + k * len(active) for k in range(8)])
        active = kids[sel]
        active_vals = _tet_batch_integral(active, n)
        count += len(active)
        if count > max_tets:
            raise QuadratureFailure(f"adaptive refinement budget exceeded at tol={tol:g}")
    return total


def _polytope_volume(T):
    return float(np.sum(np.abs(np.linalg.det(_polytope_tets(T)[:, 1:] - _polytope_tets(T)[:, :1]))) / 6)


def simplex_volume(S, tol=DEFAULT_VOLUME_TOL, method="boundary"):
    """Hyperbolic volume of the truncated simplex, to relative accuracy ``tol``."""
    T = truncate(S)
    if method == "boundary":
        return _boundary_volume(T, tol)
    if method == "tetra":
        return _tetra_volume(T, tol)
    if method == "adaptive":
        return _adaptive_volume(T, tol)
    raise ValueError(f"unknown quadrature method {method!r}")


def lobachevsky(theta, terms=200_000):
    """Lobachevsky function by its Fourier series ``1/2 sum sin(2 k theta) / k^2``."""
    k = np.arange(1, terms + 1)
    return 0.5 * np.sum(np.sin(2 * k * theta) / k**2)


# angles -> simplex --------------------------------------------------------


def angle_gram(theta):
    """Gram matrix of the outward face polars: 1 on the diagonal, ``-cos`` off it."""
    G = np.eye(4)
    for e, (i, j) in enumerate(TET_EDGES):
        k, l = _opposite(i, j)
        G[k, l] = G[l, k] = -np.cos(theta[e])
    return G


def lengths_from_angles(theta):
    """Edge lengths of the simplex with the given angles, from the inverse Gram matrix."""
    C = np.linalg.inv(angle_gram(theta))
    return np.array([np.arccosh(-C[i, j] / np.sqrt(C[i, i] * C[j, j])) for i, j in TET_EDGES])


def check_angles(theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (6,):
        raise OutsidePolytope("need exactly six angles")
    if not np.all((theta > 0) & (theta < np.pi)):
        raise OutsidePolytope("angles must lie in (0, pi)")
    m = vertex_margins(theta)
    if np.any(m <= 1e-12):
        raise OutsidePolytope(f"vertex-sum condition fails at vertex {int(np.argmin(m)) + 1} (margin {m.min():.3g})")
    return theta


def _gram_realisation(theta):
    """Vertices realising ``theta``, from a Minkowski factorisation of the Gram matrix."""
    G = angle_gram(theta)
    w, U = np.linalg.eigh(G)
    if not (w[0] < 0 < w[1]):
        raise OutsidePolytope("angle Gram matrix does not have signature (3, 1)")
    order = [1, 2, 3, 0]
    Nrows = U[:, order] * np.sqrt(np.abs(w[order]))
    W = np.linalg.solve(G, Nrows)
    norms = hypcore.mink_inner(W, W)
    if np.any(norms <= 0):
        raise OutsidePolytope("a vertex is not hyperideal")
    V = -W / np.sqrt(norms)[:, None]
    if np.all(V[:, 3] < 0):
        V[:, 3] *= -1
    if np.any(V[:, 3] <= 0):
        raise OutsidePolytope("vertices do not lie in one chart")
    return V


def canonical_pose(lifts):
    """Isometric image of four de Sitter lifts in the gauge used by the solver.

    The Minkowski sum of the lifts is moved to the time axis, then v1 is put on
    the positive x3-axis, v2 in the x1x3 half-plane with x1 > 0 and v3 at x2 > 0.
    Returns chart coordinates.
    """
    V = np.asarray(lifts, dtype=float) @ hypcore.boost_to_origin(np.sum(lifts, axis=0)).T
    x = V[:, :3]
    a3 = x[0] / np.linalg.norm(x[0])
    a1 = x[1] - (x[1] @ a3) * a3
    a1 /= np.linalg.norm(a1)
    a2 = np.cross(a3, a1)
    R = np.array([a1, a2, a3])
    x = x @ R.T
    if x[2, 1] < 0:
        x[:, 1] *= -1
    return x / V[:, 3:4]


def _gauge_params(P):
    return np.array([P[0, 2], P[1, 0], P[1, 2], *P[2]])


def _gauge_points(p):
    a, b, c, d, e, f = p
    P3 = np.array([[0.0, 0.0, a], [b, 0.0, c], [d, e, f]])
    lift3 = [hypcore.lift_hyperideal(v) for v in P3]
    y = -sum(L[:3] for L in lift3)
    yy = y @ y
    if yy <= 1.0:
        raise NotHyperideal("gauge parameters leave the hyperideal region")
    return np.vstack([P3, y / np.sqrt(yy - 1.0)])


def solve_from_angles(target, tol=1e-12, max_iter=100, initial="gram"):
    """The hyperideal simplex with the prescribed interior dihedral angles.

    Newton iteration with step halving on the six gauge coordinates
    ``(v1_3, v2_1, v2_3, v3)``; ``v4`` follows from the gauge. ``initial`` is
    ``"gram"`` (vertices from the inverse Gram matrix, usually already exact)
    or ``"regular"`` (the regular simplex of norm 1.2).

    Raises:
        OutsidePolytope: vertex-sum condition violated or on its boundary.
        NoConvergence: residual did not drop below ``tol``.
    """
    theta = check_angles(target)
    if initial == "gram":
        p = _gauge_params(canonical_pose(_gram_realisation(theta)))
    elif initial == "regular":
        p = _gauge_params(canonical_pose(HyperidealSimplex.regular(1.2).lifts))
    else:
        raise ValueError(f"unknown initial guess {initial!r}")

    def residual(q):
        return simplex_dihedrals(_gauge_points(q)) - theta

    try:
        r = residual(p)
    except Exception as exc:
        raise NoConvergence(f"initial guess invalid: {exc}") from exc
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            return HyperidealSimplex(_gauge_points(p))
        h = 1e-7
        J = np.empty((6, 6))
        for k in range(6):
            dp = np.zeros(6)
            dp[k] = h
            J[:, k] = (residual(p + dp) - residual(p - dp)) / (2 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Newton system") from exc
        t = 1.0
        for _ in range(40):
            try:
                r_new = residual(p + t * step)
                if np.max(np.abs(r_new)) < np.max(np.abs(r)):
                    break
            except Exception:
                pass
            t /= 2
        else:
            raise NoConvergence("line search failed")
        p = p + t * step
        r = r_new
    if np.max(np.abs(r)) < tol:
        return HyperidealSimplex(_gauge_points(p))
    raise NoConvergence(f"residual {np.max(np.abs(r)):.3g} after {max_iter} iterations")


def length_angle_jacobian(S, h=SCHLAFLI_HESSIAN_STEP, tol=1e-13, symmetrize=True):
    """``dL/dtheta`` by central differences through :func:`solve_from_angles`.

    Richardson-extrapolated over steps ``h`` and ``h/2``.
    """
    theta = simplex_dihedrals(S)

    def col(k, step):
        e = np.zeros(6)
        e[k] = step
        Lp = simplex_lengths(solve_from_angles(theta + e, tol=tol))
        Lm = simplex_lengths(solve_from_angles(theta - e, tol=tol))
        return (Lp - Lm) / (2 * step)

    J = np.empty((6, 6))
    for k in range(6):
        J[:, k] = (4 * col(k, h / 2) - col(k, h)) / 3
    return (J + J.T) / 2 if symmetrize else J


def hessian_volume(S, h=SCHLAFLI_HESSIAN_STEP, symmetrize=True):
    """Hessian of the volume in angle coordinates, ``-1/2 dL/dtheta``."""
    return -0.5 * length_angle_jacobian(S, h=h, symmetrize=symmetrize)


def schlafli_residuals(S, direction, steps=(1e-4, 5e-5), tol=1e-13):
    """First-order Schlafli residuals ``|dV + 1/2 sum L_e dtheta_e|`` along ``direction``.

    For each step ``h`` the simplex with angles ``theta + h d`` is solved and
    its volume compared with the linear prediction from the base lengths.
    Returns ``(residuals, |dtheta|)`` arrays over the steps.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    theta = simplex_dihedrals(S)
    L = simplex_lengths(S)
    v0 = simplex_volume(S, tol=tol)
    res, sizes = [], []
    for h in steps:
        S1 = solve_from_angles(theta + h * d, tol=1e-14)
        dv = simplex_volume(S1, tol=tol) - v0
        res.append(abs(dv + 0.5 * L @ (h * d)))
        sizes.append(h)
    return np.array(res), np.array(sizes)


def random_simplex(rng, rmin=1.05, rmax=1.6, margin=0.05, max_tries=10_000):
    """Random hyperideal simplex with all edges at least ``margin`` inside the ball."""
    for _ in range(max_tries):
        u = rng.normal(size=(4, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        V = u * rng.uniform(rmin, rmax, size=(4, 1))
        if all(hypcore.segment_distance_to_origin(V[i], V[j]) < 1 - margin for i, j in TET_EDGES):
            diam = max(np.linalg.norm(V[i] - V[j]) for i, j in TET_EDGES)
            if abs(tet_volume(*V)) > 0.02 * diam**3:
                return HyperidealSimplex(V)
    raise RuntimeError("could not sample a hyperideal simplex")
