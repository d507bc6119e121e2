"""Minkowski space and Klein-model primitives.

Vectors of R^4_1 are plain ``(4,)`` float arrays with the time-like
coordinate last; the bilinear form has signature (+, +, +, -). Points of the
Klein chart ``{t = 1}`` are ``(3,)`` arrays. The open unit ball is H^3, the
exterior of the closed ball is the projective image of the positive de Sitter
hemisphere.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    DegenerateFace,
    EdgeMissesBall,
    NotHyperideal,
    NotInterior,
    PlaneMissesBall,
    PlanesDisjoint,
)

EPS_CLASS = 1e-9

#: signature matrix of R^4_1
SIGNATURE = np.diag([1.0, 1.0, 1.0, -1.0])


def mink_inner(X, Y):
    """Minkowski product ``x1 y1 + x2 y2 + x3 y3 - x4 y4`` (broadcasts)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return np.sum(X[..., :3] * Y[..., :3], axis=-1) - X[..., 3] * Y[..., 3]


def classify(v, eps=EPS_CLASS):
    """Return ``"interior"``, ``"ideal"`` or ``"hyperideal"`` for a chart point."""
    r = float(np.linalg.norm(v))
    if r < 1.0 - eps:
        return "interior"
    if r > 1.0 + eps:
        return "hyperideal"
    return "ideal"


def _require_hyperideal(v):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    if classify(v) != "hyperideal":
        raise NotHyperideal(f"|v| = {np.linalg.norm(v):.12g} is not > 1")
    return v


def _require_interior(x):
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {x.shape}")
    if classify(x) != "interior":
        raise NotInterior(f"|x| = {np.linalg.norm(x):.12g} is not < 1")
    return x


def lift_hyperideal(v):
    """De Sitter lift ``(v, 1) / sqrt(|v|^2 - 1)`` of a hyperideal point."""
    v = _require_hyperideal(v)
    return np.append(v, 1.0) / np.sqrt(v @ v - 1.0)


def lift_interior(x):
    """Hyperboloid lift ``(x, 1) / sqrt(1 - |x|^2)`` of a point of the ball."""
    x = _require_interior(x)
    return np.append(x, 1.0) / np.sqrt(1.0 - x @ x)


def to_chart(X):
    """Central projection of a vector with ``x4 != 0`` to the chart ``{t=1}``."""
    X = np.asarray(X, dtype=float)
    return X[..., :3] / X[..., 3:4]


@dataclass(frozen=True)
class HPlane:
    """Hyperbolic plane ``{X : <X, N> = 0}`` given by its unit space-like polar N.

    In the Klein chart the plane is ``{x : x . normal = offset}``. The sign of N
    is an orientation: ``<X, N> > 0`` on the side where ``x . normal > offset``.
    """

    N: np.ndarray

    @property
    def normal(self):
        return self.N[:3]

    @property
    def offset(self):
        return self.N[3]

    def side(self, x):
        """Signed chart value ``x . normal - offset``."""
        return np.asarray(x, dtype=float) @ self.normal - self.offset

    def flipped(self):
        return HPlane(-self.N)


def _hplane_from_chart(n, c, eps=EPS_CLASS):
    n = np.asarray(n, dtype=float)
    nn = np.linalg.norm(n)
    if abs(c) >= (1.0 - eps) * nn:
        raise PlaneMissesBall(f"plane at distance {abs(c) / nn:.12g} from the origin")
    m = np.append(n, c)
    return HPlane(m / np.sqrt(mink_inner(m, m)))


def dual_plane(v):
    """Polar plane ``{x . v = 1}`` of a hyperideal point.

    It meets every line through ``v`` orthogonally in the hyperbolic metric.
    """
    v = _require_hyperideal(v)
    return HPlane(lift_hyperideal(v))


def klein_metric(x):
    """Klein-model metric tensor at an interior point."""
    x = _require_interior(x)
    w = 1.0 - x @ x
    return np.eye(3) / w + np.outer(x, x) / w**2


def klein_volume_density(x):
    """Hyperbolic volume density ``(1 - |x|^2)^-2`` (square root of det of the metric)."""
    x = np.asarray(x, dtype=float)
    return (1.0 - np.sum(x * x, axis=-1)) ** -2


def hyp_distance(p, q):
    """Hyperbolic distance between two points of the ball."""
    P = lift_interior(p)
    Q = lift_interior(q)
    # <P - Q, P - Q> = 4 sinh^2(d / 2), accurate for nearby points
    D = P - Q
    return float(2.0 * np.arcsinh(0.5 * np.sqrt(max(0.0, mink_inner(D, D)))))


def segment_distance_to_origin(v, w):
    """Euclidean distance from the origin to the closed segment ``[v, w]``."""
    v = np.asarray(v, dtype=float)
    d = np.asarray(w, dtype=float) - v
    dd = d @ d
    t = 0.0 if dd == 0 else float(np.clip(-(v @ d) / dd, 0.0, 1.0))
    return float(np.linalg.norm(v + t * d))


def edge_meets_ball(v, w, eps=EPS_CLASS):
    return segment_distance_to_origin(v, w) < 1.0 - eps


def truncated_edge_length(v, w):
    """Length of a hyperideal edge: distance between the dual planes of its ends."""
    V = lift_hyperideal(v)
    W = lift_hyperideal(w)
    if not edge_meets_ball(v, w):
        raise EdgeMissesBall(
            f"segment at distance {segment_distance_to_origin(v, w):.12g} from the origin"
        )
    return float(np.arccosh(-mink_inner(V, W)))


def plane_of_face(p1, p2, p3, eps=EPS_CLASS):
    """Hyperbolic plane through three chart points.

    Oriented so that ``normal = (p2 - p1) x (p3 - p1)``.
    """
    p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p1, p2, p3))
    n = np.cross(p2 - p1, p3 - p1)
    scale = max(np.linalg.norm(p2 - p1), np.linalg.norm(p3 - p1), 1.0)
    if np.linalg.norm(n) <= eps * scale**2:
        raise DegenerateFace("points are collinear")
    return _hplane_from_chart(n, n @ p1, eps)


def dihedral_angle(N1, N2):
    """Angle ``arccos(-<N1, N2>)`` of the wedge whose outward conormals are N1, N2."""
    a = N1.N if isinstance(N1, HPlane) else np.asarray(N1, dtype=float)
    b = N2.N if isinstance(N2, HPlane) else np.asarray(N2, dtype=float)
    c = mink_inner(a, b)
    if abs(c) >= 1.0:
        raise PlanesDisjoint(f"<N1, N2> = {c:.12g}")
    return float(np.arccos(-c))


# isometries ---------------------------------------------------------------


def cross_matrix(b):
    """Matrix of ``x -> b x x``."""
    b1, b2, b3 = b
    return np.array([[0.0, -b3, b2], [b3, 0.0, -b1], [-b2, b1, 0.0]])


def so31_basis():
    """Basis of the Lie algebra so(3,1): three rotations, then three boosts.

    Each ``M`` satisfies ``M.T @ SIGNATURE + SIGNATURE @ M = 0``. Rotation ``k``
    is the infinitesimal rotation about axis ``e_k``; boost ``k`` mixes ``x_k``
    with the time coordinate.
    """
    basis = []
    for k in range(3):
        M = np.zeros((4, 4))
        M[:3, :3] = cross_matrix(np.eye(3)[k])
        basis.append(M)
    for k in range(3):
        M = np.zeros((4, 4))
        M[k, 3] = M[3, k] = 1.0
        basis.append(M)
    return basis


def random_isometry(rng, max_boost=1.0):
    """Random orientation-preserving isometry: a rotation composed with a boost."""
    basis = so31_basis()
    rot = sum(c * M for c, M in zip(rng.normal(size=3), basis[:3]))
    boost = sum(c * M for c, M in zip(rng.uniform(-max_boost, max_boost, size=3) / np.sqrt(3), basis[3:]))
    return expm(boost) @ expm(rot)


def boost_to_origin(T):
    """Isometry sending the future time-like vector ``T`` to the time axis."""
    T = np.asarray(T, dtype=float)
    u = T / np.sqrt(-mink_inner(T, T))
    if u[3] < 0:
        u = -u
    gamma = u[3]
    p = u[:3]
    L = np.eye(4)
    L[:3, :3] += np.outer(p, p) / (gamma + 1.0)
    L[:3, 3] = -p
    L[3, :3] = -p
    L[3, 3] = gamma
    return L


def apply_isometry(M, points):
    """Apply a Minkowski isometry to chart points (works inside and outside the ball)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    homo = np.hstack([pts, np.ones((len(pts), 1))])
    out = homo @ M.T
    if np.any(out[:, 3] <= 0):
        raise ValueError("isometry sends a point through the plane at infinity of the chart")
    res = out[:, :3] / out[:, 3:4]
    return res.reshape(np.shape(points))
