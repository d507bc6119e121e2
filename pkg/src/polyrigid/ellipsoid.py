"""Ellipsoids: hypothesis checks, normalisation to the unit ball, fitting."""
from dataclasses import dataclass

import numpy as np

from .errors import BadFactor, DegeneratePointSet
from .mesh import CheckReport


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """The surface ``(x - c)^T A (x - c) = 1`` with ``A`` symmetric positive definite."""

    A: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.shape != (3, 3) or not np.allclose(A, A.T, rtol=0, atol=1e-12 * np.abs(A).max()):
            raise ValueError("A must be a symmetric 3x3 matrix")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise ValueError("A must be positive definite")
        object.__setattr__(self, "A", (A + A.T) / 2)
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).reshape(3))

    @classmethod
    def sphere(cls, radius=1.0, center=(0.0, 0.0, 0.0)):
        return cls(np.eye(3) / radius**2, np.asarray(center, dtype=float))

    def value(self, x):
        """Quadratic form ``(x - c)^T A (x - c)``; < 1 inside, > 1 outside."""
        d = np.asarray(x, dtype=float) - self.c
        return np.einsum("...i,ij,...j->...", d, self.A, d)

    def semi_axes(self):
        return 1.0 / np.sqrt(np.linalg.eigvalsh(self.A))

    def segment_min_value(self, p, q):
        """Minimum of the quadratic form over the closed segment [p, q]."""
        p = np.asarray(p, dtype=float) - self.c
        d = np.asarray(q, dtype=float) - self.c - p
        dad = d @ self.A @ d
        t = 0.0 if dad == 0 else float(np.clip(-(p @ self.A @ d) / dad, 0.0, 1.0))
        x = p + t * d
        return float(x @ self.A @ x)


@dataclass(frozen=True)
class AffineMap:
    """``x -> matrix @ x + translation``."""

    matrix: np.ndarray
    translation: np.ndarray

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T + self.translation

    def inverse(self):
        inv = np.linalg.inv(self.matrix)
        return AffineMap(inv, -inv @ self.translation)


def ellipsoid_hypothesis_check(c, e):
    """No mesh vertex in the closed ellipsoid, every cell edge enters its interior.

    ``c`` is a :class:`~polyrigid.mesh.Cellulation` (triangulations included).
    """
    verts = c.mesh.vertices
    violations = []
    vals = e.value(verts)
    for v in np.nonzero(vals <= 1.0)[0]:
        violations.append({"kind": "VertexInEllipsoid", "vertex": int(v), "value": float(vals[v])})
    for a, b in c.edges:
        m = e.segment_min_value(verts[a], verts[b])
        if m >= 1.0:
            violations.append({"kind": "EdgeMissesEllipsoid", "edge": [int(a), int(b)], "min_value": m})
    return CheckReport(not violations, violations)


def normalize_to_ball(e):
    """Affine map ``x -> A^{1/2} (x - c)`` sending the ellipsoid onto the unit sphere."""
    w, U = np.linalg.eigh(e.A)
    root = (U * np.sqrt(w)) @ U.T
    return AffineMap(root, -root @ e.c)


def shrink(e, factor):
    """Same centre, semi-axes multiplied by ``factor`` in (0, 1)."""
    if not 0.0 < factor < 1.0:
        raise BadFactor(f"shrink factor must lie in (0, 1), got {factor}")
    return Ellipsoid(e.A / factor**2, e.c)


def _design_matrix(p):
    x, y, z = p.T
    return np.column_stack([x * x, y * y, z * z, x * y, x * z, y * z, x, y, z, np.ones(len(p))])


def _quadric_parts(coef):
    a, b, c, d, e, f, g, h, i, j = coef
    Q = np.array([[a, d / 2, e / 2], [d / 2, b, f / 2], [e / 2, f / 2, c]])
    return Q, np.array([g, h, i]), j


def fit_ellipsoid(points, null_rtol=1e-10):
    """Least-squares ellipsoid through a point cloud.

    The quadric ``x^T Q x + b^T x + d = 0`` is the smallest right singular
    vector of the 10-column design matrix. When fewer constraints than
    unknowns leave a multi-dimensional null space, the most isotropic quadric
    in it is chosen (smallest ``||Q - tr(Q)/3 I||`` at fixed trace), which
    returns the sphere whenever one passes through the points.

    Raises:
        DegeneratePointSet: fewer than 6 points, points in a plane, or the
            selected quadric is not an ellipsoid.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 6:
        raise DegeneratePointSet("need at least 6 points in R^3")
    mu = pts.mean(axis=0)
    centred = pts - mu
    scale = np.sqrt((centred**2).sum(axis=1).mean())
    sv = np.linalg.svd(centred, compute_uv=False)
    if scale == 0 or sv[-1] <= 1e-9 * sv[0]:
        raise DegeneratePointSet("points are coplanar")
    q = centred / scale

    D = _design_matrix(q)
    _, s, Vt = np.linalg.svd(D)
    s_full = np.concatenate([s, np.zeros(10 - len(s))])
    null = Vt[s_full <= null_rtol * s_full[0]] if len(s) else Vt
    if len(null) <= 1:
        coef = Vt[-1]
    else:
        coef = _most_isotropic(null.T)

    Q, b, d = _quadric_parts(coef)
    try:
        centre = -0.5 * np.linalg.solve(Q, b)
    except np.linalg.LinAlgError as exc:
        raise DegeneratePointSet("quadric has no centre") from exc
    k = centre @ Q @ centre - d
    if k == 0:
        raise DegeneratePointSet("quadric is a cone")
    A = Q / k
    if np.linalg.eigvalsh((A + A.T) / 2).min() <= 0:
        raise DegeneratePointSet("best-fit quadric is not an ellipsoid")
    return Ellipsoid(A / scale**2, mu + scale * centre)


def _most_isotropic(N):
    """Minimise the deviatoric norm of Q over span(N) subject to trace(Q) = 1."""
    def quad_of(coef):
        Q, _, _ = _quadric_parts(coef)
        return Q

    m = N.shape[1]
    # linear map y -> vec(Q - tr(Q)/3 I) and y -> tr(Q)
    dev = np.empty((9, m))
    tr = np.empty(m)
    for k in range(m):
        Q = quad_of(N[:, k])
        tr[k] = np.trace(Q)
        dev[:, k] = (Q - np.trace(Q) / 3 * np.eye(3)).ravel()
    K = np.block([[2 * dev.T @ dev, tr[:, None]], [tr[None, :], np.zeros((1, 1))]])
    rhs = np.concatenate([np.zeros(m), [1.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return N @ sol[:m]
