import numpy as np
import pytest

from polyrigid import angles as A, instances, mesh, rigidity, simplex as sx
from polyrigid.errors import EmptyFiber, IndexMismatch, LeftPolytope


@pytest.fixture(scope="module")
def octa(octa_tri):
    theta0 = A.base_point(octa_tri)
    return octa_tri, theta0, A.edge_sums(octa_tri, theta0)


def _perturbed(t, theta0, size, seed=3):
    Z = A.fiber_basis(t)
    d = Z @ np.random.default_rng(seed).normal(size=Z.shape[1])
    return theta0 + (size * d / np.linalg.norm(d)).reshape(theta0.shape)


def test_single_simplex_no_fiber():
    S = sx.HyperidealSimplex.regular(1.3)
    t = mesh.make_triangulation(mesh.make_mesh(S.vertices, instances.orient_from(S.vertices, [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)], S.vertices.mean(0))), [(0, 1, 2, 3)])
    F = A.incidence_matrix(t)
    assert np.allclose(F @ F.T, np.eye(6))
    assert A.fiber_basis(t).shape[1] == 0


def test_incidence_structure(octa):
    t, theta0, alpha = octa
    F = A.incidence_matrix(t)
    assert F.shape == (13, 24)
    assert np.all(F.sum(axis=0) == 1)
    # the diagonal sits in all four cells
    assert F.sum(axis=1).max() == 4
    assert np.abs(alpha[t.interior_edge_ids] - 2 * np.pi).max() < 1e-9


def test_index_mismatch(octa):
    t, theta0, _ = octa
    with pytest.raises(IndexMismatch):
        A.edge_sums(t, np.zeros(23))


def test_total_volume_is_sum(octa):
    t, theta0, _ = octa
    direct = sum(sx.simplex_volume(sx.HyperidealSimplex(t.mesh.vertices[c])) for c in t.tets)
    assert abs(A.total_volume(t, theta0) - direct) < 1e-8


def test_gradient_matches_fd(octa):
    t, theta0, _ = octa
    Z = A.fiber_basis(t)
    d = (Z @ np.random.default_rng(1).normal(size=Z.shape[1])).reshape(theta0.shape)
    h = 1e-4
    fd = (A.total_volume(t, theta0 + h * d, 1e-12) - A.total_volume(t, theta0 - h * d, 1e-12)) / (2 * h)
    assert abs(fd - np.sum(A.volume_gradient(t, theta0) * d)) < 1e-6


def test_shared_edges_agree_at_base(octa):
    t, theta0, _ = octa
    assert A.criticality_residual(t, theta0) < 1e-8
    g = A.volume_gradient(t, theta0).ravel()
    assert np.abs(A.fiber_basis(t).T @ g).max() < 1e-8


def test_perturbation_breaks_criticality(octa):
    t, theta0, _ = octa
    assert A.criticality_residual(t, _perturbed(t, theta0, 1e-2)) > 1e-4


def test_concave_along_fiber(octa):
    t, theta0, _ = octa
    a, b = _perturbed(t, theta0, 2e-2, 1), _perturbed(t, theta0, 2e-2, 2)
    mid = A.total_volume(t, (a + b) / 2, 1e-12)
    assert mid > (A.total_volume(t, a, 1e-12) + A.total_volume(t, b, 1e-12)) / 2


def test_fiber_hessian_negative_definite(octa):
    t, theta0, _ = octa
    assert np.linalg.eigvalsh(A.fiber_hessian(t, theta0)).max() < -1e-6


def test_maximize_returns_to_base(octa):
    t, theta0, alpha = octa
    sol = A.maximize_on_fiber(t, alpha, _perturbed(t, theta0, 1e-2))
    assert np.abs(sol.theta - theta0).max() < 1e-7
    assert sol.criticality < 1e-8
    again = A.maximize_on_fiber(t, alpha, _perturbed(t, theta0, 1e-2))
    assert np.array_equal(sol.theta, again.theta)
    assert A.maximize_on_fiber(t, alpha, theta0).iterations == 0


def test_empty_fiber(octa):
    t, theta0, alpha = octa
    bad = alpha.copy()
    bad[0] = -1.0
    with pytest.raises(EmptyFiber):
        A.maximize_on_fiber(t, bad, theta0)


def test_left_polytope(octa):
    t, theta0, alpha = octa
    with pytest.raises(LeftPolytope):
        A.maximize_on_fiber(t, alpha, _perturbed(t, theta0, 3.0))


def test_reduced_probe(octa):
    t, theta0, alpha = octa
    same = A.reduced_volume_probe(t, alpha, alpha, k=3)
    assert same["concave"] and not same["strict"]


def test_theorem_E_bipyramid(bipyramid_tri):
    rep = A.theorem_E_check(bipyramid_tri)
    assert rep["hypothesis"] and rep["chart_rank"] == 9
    assert max(rep["hessian_eigenvalues"]) < -1e-9 and rep["concave"]
    assert rep["linear_vs_fd"] < 1e-6 and rep["hessian_asymmetry"] < 1e-6


def test_theorem_E_octahedron(octa_tri):
    rep = A.theorem_E_check(octa_tri)
    assert rep["chart_rank"] == 12 and rep["concave"]


def test_theorem_E_reports_failed_hypothesis(bipyramid_tri):
    # a huge tolerance makes the angle verdict inconclusive
    rep = A.theorem_E_check(bipyramid_tri, sigma_tol=0.5)
    assert rep["hypothesis"] is False and "chart_rank" not in rep


def test_length_kernel_is_isometries(bipyramid_tri):
    P = bipyramid_tri.mesh.vertices
    J = rigidity.hyperbolic_length_jacobian(bipyramid_tri)
    K = np.linalg.svd(J)[2][np.sum(np.linalg.svd(J, compute_uv=False) > 1e-8):]
    T = rigidity.so31_trivial_motions(P)
    # every kernel vector lies in the span of the trivial motions
    coef = np.linalg.lstsq(T.T, K.T, rcond=None)[0]
    assert np.abs(T.T @ coef - K.T).max() < 1e-9
