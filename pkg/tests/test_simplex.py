from itertools import combinations
from math import factorial

import numpy as np
import pytest

from polyrigid import hypcore, simplex as sx
from polyrigid.errors import EdgeMissesBall, OutsidePolytope

# 3 L(pi/3), the regular ideal tetrahedron
IDEAL_REGULAR_VOLUME = 1.0149416064096536
# regular simplex with vertex norm 1.2, computed once from the closed forms
REGULAR_12_ANGLE = 0.9430755091369837
REGULAR_12_LENGTH = 1.883302831592261


def test_lobachevsky_oracle():
    assert abs(3 * sx.lobachevsky(np.pi / 3) - IDEAL_REGULAR_VOLUME) < 1e-9


@pytest.mark.parametrize("s", [1.05, 1.2, 1.6])
def test_regular_angles_equal_below_pi_over_3(s):
    th = sx.simplex_dihedrals(sx.HyperidealSimplex.regular(s))
    assert np.allclose(th, th[0]) and th[0] < np.pi / 3


def test_regular_frozen_values():
    S = sx.HyperidealSimplex.regular(1.2)
    assert np.allclose(sx.simplex_dihedrals(S), REGULAR_12_ANGLE, atol=1e-12)
    assert np.allclose(sx.simplex_lengths(S), REGULAR_12_LENGTH, atol=1e-12)


def test_ideal_limit_angles():
    gaps = [np.pi / 3 - sx.simplex_dihedrals(sx.HyperidealSimplex.regular(s))[0] for s in (1.01, 1.001, 1.0001)]
    assert np.all(np.diff(gaps) < 0) and gaps[-1] < 1e-4


def test_tangent_edges_rejected():
    with pytest.raises(EdgeMissesBall):
        sx.HyperidealSimplex.regular(np.sqrt(3))


def test_regular_lengths_cross_ratio():
    s = 2 / np.sqrt(3)
    S = sx.HyperidealSimplex.regular(s)
    L = sx.simplex_lengths(S)
    assert np.allclose(L, L[0]) and L[0] > 0
    v, w = S.vertices[0], S.vertices[1]
    d = w - v
    xs = [v + (1 - v @ v) / (d @ v) * d, v + (1 - v @ w) / (d @ w) * d]
    assert np.isclose(L[0], hypcore.hyp_distance(*xs), atol=1e-12)


def test_isometry_invariance(rng):
    for _ in range(5):
        S = sx.random_simplex(rng)
        M = hypcore.random_isometry(rng, max_boost=0.3)
        S2 = S.isometric_image(M)
        assert np.abs(sx.simplex_lengths(S2) - sx.simplex_lengths(S)).max() < 1e-10
        assert np.abs(sx.simplex_dihedrals(S2) - sx.simplex_dihedrals(S)).max() < 1e-10
        v1 = sx.simplex_volume(S, tol=1e-10)
        assert abs(sx.simplex_volume(S2, tol=1e-10) - v1) < 10 * 1e-10 * v1


def _brute_force_vertices(S):
    H, _ = sx._halfspaces(S.vertices)
    pts = []
    for rows in combinations(range(len(H)), 3):
        A = H[list(rows), :3]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, -H[list(rows), 3])
        if np.all(H[:, :3] @ x + H[:, 3] <= 1e-10) and not any(np.linalg.norm(x - p) < 1e-8 for p in pts):
            pts.append(x)
    return np.array(pts)


def test_truncation_combinatorics():
    S = sx.HyperidealSimplex.regular(1.2)
    T = sx.truncate(S)
    assert sorted(len(f) for f in T.facets) == [3, 3, 3, 3, 6, 6, 6, 6]
    brute = _brute_force_vertices(S)
    assert len(brute) == len(T.vertices) == 12
    for p in T.vertices:
        assert np.linalg.norm(brute - p, axis=1).min() < 1e-9
    assert np.linalg.norm(T.vertices, axis=1).max() < 1


def test_truncation_facets_shrink():
    areas = []
    for s in (1.1, 1.05, 1.01):
        T = sx.truncate(sx.HyperidealSimplex.regular(s))
        areas.append(max(T.facet_area(k) for k, kind in enumerate(T.kinds) if kind == "truncation"))
    assert np.all(np.diff(areas) < 0)


def test_conical_rule_exact():
    xi, w = sx.conical_rule(4)
    assert np.isclose(w.sum(), 1 / 6)
    for a, b, c in [(2, 1, 0), (3, 2, 2), (0, 0, 7), (1, 1, 1)]:
        exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3)
        assert np.isclose(w @ (xi[:, 0] ** a * xi[:, 1] ** b * xi[:, 2] ** c), exact, rtol=1e-13)


def test_volume_positive(rng):
    for _ in range(5):
        assert sx.simplex_volume(sx.random_simplex(rng)) > 0


def test_volume_strategies_agree():
    tol = 1e-7
    S = sx.HyperidealSimplex.regular(1.3)
    a = sx.simplex_volume(S, tol=tol, method="tetra")
    b = sx.simplex_volume(S, tol=tol, method="adaptive")
    c = sx.simplex_volume(S, tol=1e-12)
    assert abs(a - b) < 10 * tol * c
    assert abs(a - c) < 10 * tol * c and abs(b - c) < 10 * tol * c


def test_volume_strategies_agree_random(rng):
    tol = 1e-6
    S = sx.random_simplex(rng, rmin=1.15, rmax=1.5)
    a = sx.simplex_volume(S, tol=tol, method="tetra")
    b = sx.simplex_volume(S, tol=tol, method="adaptive")
    assert abs(a - b) < 10 * tol * abs(a)


def test_volume_ideal_trend():
    gaps = [sx.simplex_volume(sx.HyperidealSimplex.regular(s)) - IDEAL_REGULAR_VOLUME for s in (1.01, 1.001, 1.0001)]
    assert np.all(np.array(gaps) > 0) and np.all(np.diff(gaps) < 0) and gaps[-1] < 2e-3


def test_volume_matches_schlafli_integral():
    # V(1.01) - V(1.0001) equals the integral of -1/2 sum L dtheta along the regular family
    from scipy.integrate import quad

    def dv(s, h=1e-6):
        th = lambda u: sx.simplex_dihedrals(sx.HyperidealSimplex.regular(u))[0]
        return -3 * sx.simplex_lengths(sx.HyperidealSimplex.regular(s))[0] * (th(s + h) - th(s - h)) / (2 * h)

    integral = quad(dv, 1.0001, 1.01, epsrel=1e-10)[0]
    diff = sx.simplex_volume(sx.HyperidealSimplex.regular(1.01)) - sx.simplex_volume(sx.HyperidealSimplex.regular(1.0001))
    assert abs(integral - diff) < 1e-8


def test_schlafli_gradient_regular():
    S = sx.HyperidealSimplex.regular(1.2)
    g = sx.schlafli_gradient(S)
    assert np.allclose(g, -REGULAR_12_LENGTH / 2) and np.all(g < 0)


def test_schlafli_second_order(rng):
    S = sx.HyperidealSimplex.regular(1.2)
    r, _ = sx.schlafli_residuals(S, rng.normal(size=6))
    assert 3.5 <= r[0] / r[1] <= 4.5


def test_vertex_margins_decrease():
    m = [sx.vertex_margins(sx.simplex_dihedrals(sx.HyperidealSimplex.regular(s))).min() for s in (1.2, 1.05, 1.01)]
    assert np.all(np.array(m) > 0) and np.all(np.diff(m) < 0)


def test_gram_lengths(rng):
    S = sx.random_simplex(rng)
    assert np.abs(sx.lengths_from_angles(sx.simplex_dihedrals(S)) - sx.simplex_lengths(S)).max() < 1e-10


def test_solve_roundtrip(rng):
    for _ in range(5):
        S = sx.random_simplex(rng)
        S2 = sx.solve_from_angles(sx.simplex_dihedrals(S))
        assert np.abs(sx.simplex_lengths(S2) - sx.simplex_lengths(S)).max() < 1e-8


def test_solve_gauge(rng):
    V = sx.solve_from_angles(sx.simplex_dihedrals(sx.random_simplex(rng))).vertices
    assert np.allclose(V[0, :2], 0) and V[0, 2] > 0
    assert V[1, 1] == 0 and V[1, 0] > 0
    assert V[2, 1] > 0


def test_solve_regular_start_agrees(rng):
    th = sx.simplex_dihedrals(sx.random_simplex(rng, rmin=1.1, rmax=1.4))
    a = sx.solve_from_angles(th).vertices
    b = sx.solve_from_angles(th, initial="regular").vertices
    assert np.abs(a - b).max() < 1e-9


def test_solve_pi_over_4():
    S = sx.solve_from_angles(np.full(6, np.pi / 4), tol=1e-12)
    assert np.abs(sx.simplex_dihedrals(S) - np.pi / 4).max() < 1e-12
    n = np.linalg.norm(S.vertices, axis=1)
    assert np.allclose(n, n[0], rtol=1e-6)


def test_solve_rejects_ideal_boundary():
    with pytest.raises(OutsidePolytope):
        sx.solve_from_angles(np.full(6, np.pi / 3))
    with pytest.raises(OutsidePolytope):
        sx.solve_from_angles(np.full(6, 1.2))


@pytest.mark.parametrize("s", [1.1, 1.3, 1.6])
def test_hessian_negative_definite(s):
    S = sx.HyperidealSimplex.regular(s)
    H = sx.hessian_volume(S, symmetrize=False)
    assert np.linalg.norm(H - H.T) < 1e-6 * np.linalg.norm(H)
    assert np.linalg.eigvalsh((H + H.T) / 2).max() < -1e-6
    assert np.linalg.eigvalsh(sx.length_angle_jacobian(S)).min() > 0


def test_tetra_budget_raises():
    from polyrigid.errors import QuadratureFailure

    T = sx.truncate(sx.HyperidealSimplex.regular(1.2))
    with pytest.raises(QuadratureFailure):
        sx._tetra_volume(T, 1e-14, max_tets=2000)
