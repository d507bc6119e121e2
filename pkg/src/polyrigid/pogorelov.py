"""The Pogorelov map between de Sitter and Euclidean tangent vectors.

A point of the positive de Sitter hemisphere is ``X = (cosh(rho) e, sinh(rho))``
with ``e`` a unit 3-vector; its chart image is ``x = coth(rho) e`` and ``rho``
is the oriented distance to the plane ``{t = 0}``. The unit radial vector is
``N = (sinh(rho) e, cosh(rho))`` (time-like, ``<N, N> = -1``). A tangent vector
splits as ``v = f N + u`` with ``u`` lateral; its image is
``w = f e + dphi(u)`` at ``x``.
"""
import numpy as np

from . import hypcore
from .errors import NotHyperideal, NotPositiveHemisphere, NotSkew, StepTooLarge

H_DEFAULT = 1e-4


def _point(X):
    X = np.asarray(X, dtype=float)
    if X.shape != (4,) or X[3] <= 0:
        raise NotPositiveHemisphere("de Sitter point needs x4 > 0")
    return X


def phi_S(X):
    """Chart image ``(x1, x2, x3) / x4`` of a point of the positive hemisphere."""
    X = _point(X)
    return X[:3] / X[3]


def rho(X):
    """Oriented distance ``artanh(1 / |phi_S(X)|)`` to the plane ``{t = 0}``."""
    return float(np.arctanh(1.0 / np.linalg.norm(phi_S(X))))


def radial_vector(X):
    X = _point(X)
    r = rho(X)
    e = X[:3] / np.linalg.norm(X[:3])
    return np.append(np.sinh(r) * e, np.cosh(r))


def dphi(X, a):
    """Differential of the chart projection at X applied to the ambient vector a."""
    X = _point(X)
    a = np.asarray(a, dtype=float)
    return a[:3] / X[3] - X[:3] * a[3] / X[3] ** 2


def split(X, v):
    """Radial coefficient ``f`` and lateral part ``u`` of a tangent vector, ``v = f N + u``."""
    N = radial_vector(X)
    f = -hypcore.mink_inner(v, N)
    return float(f), np.asarray(v, dtype=float) - f * N


def pogorelov_push(X, v):
    """Image of the tangent vector ``v`` at ``X``: returns ``(x, w)``."""
    X = _point(X)
    x = X[:3] / X[3]
    f, u = split(X, v)
    return x, f * x / np.linalg.norm(x) + dphi(X, u)


def pogorelov_pull(x, w):
    """Inverse of :func:`pogorelov_push`: the tangent vector at the lift of ``x``."""
    x = np.asarray(x, dtype=float)
    if hypcore.classify(x) != "hyperideal":
        raise NotHyperideal(f"|x| = {np.linalg.norm(x):.12g} is not > 1")
    X = hypcore.lift_hyperideal(x)
    e = x / np.linalg.norm(x)
    w = np.asarray(w, dtype=float)
    f = w @ e
    lateral = w - f * e
    return f * radial_vector(X) + np.append(X[3] * lateral, 0.0)


def check_skew(M, atol=1e-12):
    M = np.asarray(M, dtype=float)
    G = hypcore.SIGNATURE
    if M.shape != (4, 4) or np.abs(M.T @ G + G @ M).max() > atol * max(1.0, np.abs(M).max()):
        raise NotSkew("matrix is not skew for the Minkowski form")
    return M


def desitter_killing(M, X):
    """Killing field ``X -> M X`` of the de Sitter metric, evaluated at X."""
    return check_skew(M) @ _point(X)


def desitter_field(M):
    M = check_skew(M)
    return lambda X: M @ X


def euclidean_killing_fields():
    """Three translations and three rotations ``b x x`` as callables."""
    fields = [lambda x, a=a: a.copy() for a in np.eye(3)]
    fields += [lambda x, b=b: np.cross(b, x) for b in np.eye(3)]
    return fields


def pushed(field):
    """Euclidean field ``x -> Phi_S(field(lift(x)))`` on the exterior of the ball."""
    def w(x):
        X = hypcore.lift_hyperideal(x)
        return pogorelov_push(X, field(X))[1]

    return w


def pulled(field):
    """De Sitter field ``X -> Phi_S^-1(field(phi_S(X)))``."""
    def v(X):
        return pogorelov_pull(phi_S(X), field(phi_S(X)))

    return v


def _normalize_ds(Y):
    q = hypcore.mink_inner(Y, Y)
    if q <= 0 or Y[3] <= 0:
        raise StepTooLarge("step leaves the positive de Sitter hemisphere")
    return Y / np.sqrt(q)


def _richardson(d, h):
    return (4 * d(h / 2) - d(h)) / 3


def _euclid_derivative(field, x, a, h, exterior):
    def d(step):
        p, m = x + step * a, x - step * a
        if exterior and (np.linalg.norm(p) <= 1 or np.linalg.norm(m) <= 1):
            raise StepTooLarge("step leaves the exterior of the ball")
        return (np.asarray(field(p)) - np.asarray(field(m))) / (2 * step)

    return _richardson(d, h)


def _desitter_derivative(field, X, a, h):
    def d(step):
        p, m = _normalize_ds(X + step * a), _normalize_ds(X - step * a)
        return (np.asarray(field(p)) - np.asarray(field(m))) / (2 * step)

    return _richardson(d, h)


def lie_derivative_residual(field, x, a, b, h=H_DEFAULT, metric="euclidean", exterior=False):
    """Finite-difference value of ``(L_v g)(a, b)`` at ``x``.

    ``metric="euclidean"``: ``x, a, b`` are 3-vectors and ``field`` maps chart
    points to vectors. ``metric="desitter"``: ``x`` is a de Sitter point,
    ``a, b`` are tangent 4-vectors and ``<D_a v, b> + <a, D_b v>`` is evaluated
    with the ambient form. Central differences, Richardson over ``h, h/2``.

    Raises:
        StepTooLarge: a sample point leaves the domain.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if metric == "euclidean":
        Da = _euclid_derivative(field, x, a, h, exterior)
        Db = _euclid_derivative(field, x, b, h, exterior)
        return float(Da @ b + a @ Db)
    if metric == "desitter":
        Da = _desitter_derivative(field, x, a, h)
        Db = _desitter_derivative(field, x, b, h)
        return float(hypcore.mink_inner(Da, b) + hypcore.mink_inner(a, Db))
    raise ValueError(f"unknown metric {metric!r}")


def tangent_basis(X):
    """Three tangent vectors at a de Sitter point: the radial N and two lateral ones."""
    X = _point(X)
    e = X[:3] / np.linalg.norm(X[:3])
    p = np.cross(e, np.eye(3)[np.argmin(np.abs(e))])
    p /= np.linalg.norm(p)
    q = np.cross(e, p)
    return [radial_vector(X), np.append(p, 0.0), np.append(q, 0.0)]


def euclidean_killing_residual(field, x, h=H_DEFAULT, exterior=True):
    """Max entry of the symmetrised derivative of ``field`` at ``x``."""
    E = np.eye(3)
    return max(
        abs(lie_derivative_residual(field, x, E[i], E[j], h, "euclidean", exterior))
        for i in range(3)
        for j in range(i, 3)
    )


def desitter_killing_residual(field, X, h=H_DEFAULT):
    B = tangent_basis(X)
    return max(
        abs(lie_derivative_residual(field, X, B[i], B[j], h, "desitter")) for i in range(3) for j in range(i, 3)
    )


def random_exterior_points(rng, n, rmin=1.05, rmax=4.0):
    u = rng.normal(size=(n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u * rng.uniform(rmin, rmax, size=(n, 1))


def killing_transfer_residuals(rng, n_points=50, h=H_DEFAULT):
    """Max Killing residuals of the 6 pushed so(3,1) generators and the 6 pulled
    Euclidean generators, over ``n_points`` random chart points."""
    pts = random_exterior_points(rng, n_points)
    forward = []
    for M in hypcore.so31_basis():
        w = pushed(desitter_field(M))
        forward.append(max(euclidean_killing_residual(w, x, h) for x in pts))
    backward = []
    for w in euclidean_killing_fields():
        v = pulled(w)
        backward.append(max(desitter_killing_residual(v, hypcore.lift_hyperideal(x), h) for x in pts))
    return {"forward": forward, "backward": backward}


def verify_eq_pogo(field, samples, h=H_DEFAULT, zero_tol=1e-7):
    """Compare ``(L_v g)(a, b)`` with ``sinh^2(rho) (L_w gbar)(dphi a, dphi b)``.

    ``field`` is a de Sitter field, ``w`` its push. ``samples`` holds tuples
    ``(X, a, b)`` of a de Sitter point and two tangent vectors. Samples where
    both sides are below ``zero_tol`` are skipped (Killing case).
    Returns ``{"max_rel_error", "used", "skipped", "max_abs"}``.
    """
    w = pushed(field)
    worst, used, skipped, max_abs = 0.0, 0, 0, 0.0
    for X, a, b in samples:
        lhs = lie_derivative_residual(field, X, a, b, h, "desitter")
        x = phi_S(X)
        rhs = lie_derivative_residual(w, x, dphi(X, a), dphi(X, b), h, "euclidean", exterior=True)
        max_abs = max(max_abs, abs(lhs), abs(rhs))
        if abs(lhs) < zero_tol and abs(rhs) < zero_tol:
            skipped += 1
            continue
        s2 = np.sinh(rho(X)) ** 2
        worst = max(worst, abs(lhs - s2 * rhs) / abs(s2 * rhs))
        used += 1
    return {"max_rel_error": worst, "used": used, "skipped": skipped, "max_abs": max_abs}


def radial_test_field(profile=None):
    """Non-Killing radial field ``f(rho) N``, by default ``f = rho``."""
    profile = profile or (lambda r: r)
    return lambda X: profile(rho(X)) * radial_vector(X)


def random_samples(rng, n, rmin=1.2, rmax=3.0):
    """Random ``(X, a, b)`` with tangent ``a, b`` mixing radial and lateral parts."""
    out = []
    for x in random_exterior_points(rng, n, rmin, rmax):
        X = hypcore.lift_hyperideal(x)
        B = tangent_basis(X)
        a, b = (sum(c * t for c, t in zip(rng.normal(size=3), B)) for _ in range(2))
        out.append((X, a, b))
    return out


# spheres ------------------------------------------------------------------


def _sphere_frame(theta, phi):
    e = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    e_t = np.array([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)])
    e_p = np.array([-np.sin(theta) * np.sin(phi), np.sin(theta) * np.cos(phi), 0.0])
    return e, (e_t, e_p)


def sphere_forms(t, theta, phi):
    """First and second fundamental forms at ``(theta, phi)`` of the chart sphere of
    radius ``t`` and of the de Sitter sphere ``{rho = artanh(1/t)}``.

    Forms are computed from the parametrisations ``x = t e`` and
    ``X = (cosh(rho) e, sinh(rho))`` with unit normals ``e`` and ``N``:
    ``I_ij = <d_i X, d_j X>``, ``II_ij = <d_i X, d_j n>``. Also returns the
    round metric ``can`` of the parameter sphere.
    """
    r = np.arctanh(1.0 / t)
    _, de = _sphere_frame(theta, phi)
    dx = [t * d for d in de]
    dn_bar = list(de)
    dX = [np.append(np.cosh(r) * d, 0.0) for d in de]
    dN = [np.append(np.sinh(r) * d, 0.0) for d in de]

    def form(u, v, inner):
        return np.array([[inner(u[i], v[j]) for j in range(2)] for i in range(2)])

    dot = np.dot
    return {
        "rho": r,
        "can": form(de, de, dot),
        "I_bar": form(dx, dx, dot),
        "II_bar": form(dx, dn_bar, dot),
        "I": form(dX, dX, hypcore.mink_inner),
        "II": form(dX, dN, hypcore.mink_inner),
    }


def sphere_remark_residual(t, n_samples=20, seed=0):
    """Max componentwise deviations of ``I - sinh^2 I_bar`` and ``II - sinh^2 II_bar``."""
    rng = np.random.default_rng(seed)
    worst_I = worst_II = 0.0
    for _ in range(n_samples):
        F = sphere_forms(t, rng.uniform(0.1, np.pi - 0.1), rng.uniform(0, 2 * np.pi))
        s2 = np.sinh(F["rho"]) ** 2
        worst_I = max(worst_I, np.abs(F["I"] - s2 * F["I_bar"]).max())
        worst_II = max(worst_II, np.abs(F["II"] - s2 * F["II_bar"]).max())
    return {"I": float(worst_I), "II": float(worst_II)}


# vertex fields --------------------------------------------------------------


def vertex_field_image(points, u):
    """Chart velocities of the de Sitter vertex field pulled back from ``u``.

    ``u`` is a Euclidean displacement field on hyperideal vertices (flat 3V);
    each ``u_i`` is pulled to a de Sitter tangent vector at the lift of ``p_i``
    and projected to the chart by ``dphi``.
    """
    P = np.asarray(points, dtype=float)
    U = np.asarray(u, dtype=float).reshape(P.shape)
    out = np.empty_like(P)
    for k, (p, w) in enumerate(zip(P, U)):
        out[k] = dphi(hypcore.lift_hyperideal(p), pogorelov_pull(p, w))
    return out.ravel()


def vertex_row_scaling(points, edges):
    """Positive factors ``sinh(rho_i) sinh(rho_j) / sinh(L_ij)`` linking the
    hyperbolic length Jacobian of the image field to the Euclidean rigidity matrix."""
    P = np.asarray(points, dtype=float)
    out = []
    for i, j in edges:
        si = np.sinh(rho(hypcore.lift_hyperideal(P[i])))
        sj = np.sinh(rho(hypcore.lift_hyperideal(P[j])))
        out.append(si * sj / np.sinh(hypcore.truncated_edge_length(P[i], P[j])))
    return np.array(out)
