import numpy as np
import pytest

from polyrigid import hypcore, pogorelov as pg
from polyrigid.errors import NotHyperideal, NotPositiveHemisphere, NotSkew, StepTooLarge


def test_phi_S():
    X = np.array([2, 0, 0, 1]) / np.sqrt(3)
    assert np.allclose(pg.phi_S(X), [2, 0, 0])
    with pytest.raises(NotPositiveHemisphere):
        pg.phi_S(-X)


def test_phi_roundtrip(rng):
    for x in pg.random_exterior_points(rng, 20):
        assert np.abs(pg.phi_S(hypcore.lift_hyperideal(x)) - x).max() < 1e-12


def test_rho():
    X = hypcore.lift_hyperideal([2.0, 0, 0])
    assert np.isclose(pg.rho(X), np.arctanh(0.5))
    assert pg.rho(hypcore.lift_hyperideal([1e6, 0, 0])) < 1e-5
    assert pg.rho(hypcore.lift_hyperideal([1 + 1e-8, 0, 0])) > 9


def test_radial_vector_geometry(rng):
    X = hypcore.lift_hyperideal(pg.random_exterior_points(rng, 1)[0])
    N = pg.radial_vector(X)
    assert np.isclose(hypcore.mink_inner(N, N), -1) and abs(hypcore.mink_inner(N, X)) < 1e-12


def test_push_radial():
    X = hypcore.lift_hyperideal([2.0, 1.0, 0])
    x, w = pg.pogorelov_push(X, pg.radial_vector(X))
    assert np.allclose(w, x / np.linalg.norm(x))


def test_push_rotation():
    X = hypcore.lift_hyperideal([2.0, 1.0, 0.5])
    M = hypcore.so31_basis()[2]
    x, w = pg.pogorelov_push(X, pg.desitter_killing(M, X))
    assert np.abs(w - np.cross([0, 0, 1], x)).max() < 1e-10


def test_push_pull_roundtrip(rng):
    for x in pg.random_exterior_points(rng, 10):
        X = hypcore.lift_hyperideal(x)
        v = rng.normal(size=4)
        v = v - hypcore.mink_inner(v, X) * X
        y, w = pg.pogorelov_push(X, v)
        assert np.abs(pg.pogorelov_pull(y, w) - v).max() < 1e-12


def test_radial_norm_preserved(rng):
    for x in pg.random_exterior_points(rng, 10):
        X = hypcore.lift_hyperideal(x)
        v = sum(c * t for c, t in zip(rng.normal(size=3), pg.tangent_basis(X)))
        f, _ = pg.split(X, v)
        _, w = pg.pogorelov_push(X, v)
        assert abs(abs(w @ x / np.linalg.norm(x)) - abs(f)) < 1e-12


def test_pull():
    x = np.array([2.0, 0, 0])
    v = pg.pogorelov_pull(x, [0, 1, 0])
    assert np.allclose(pg.pogorelov_push(hypcore.lift_hyperideal(x), v)[1], [0, 1, 0])
    X = hypcore.lift_hyperideal(x)
    assert np.allclose(pg.pogorelov_pull(x, x / 2), pg.radial_vector(X))
    with pytest.raises(NotHyperideal):
        pg.pogorelov_pull([0.5, 0, 0], [1, 0, 0])


def test_killing_rotation_lateral_and_boost_radial():
    X = hypcore.lift_hyperideal([2.0, 1.0, 0])
    B = hypcore.so31_basis()
    f_rot, _ = pg.split(X, pg.desitter_killing(B[2], X))
    f_boost, _ = pg.split(X, pg.desitter_killing(B[3], X))
    assert abs(f_rot) < 1e-14 and abs(f_boost) > 0.1
    with pytest.raises(NotSkew):
        pg.desitter_killing(np.eye(4), X)


def test_lie_derivative_euclidean(rng):
    rot = lambda x: np.cross([0.3, -1, 2], x)
    for _ in range(5):
        x, a, b = rng.normal(size=(3, 3))
        assert abs(pg.lie_derivative_residual(rot, x, a, b)) < 1e-9
    stretch = lambda x: np.array([x[0], 0, 0])
    e1 = np.eye(3)[0]
    assert np.isclose(pg.lie_derivative_residual(stretch, np.array([0.3, 0.2, 0.1]), e1, e1), 2.0)


def test_lie_derivative_step_too_large():
    with pytest.raises(StepTooLarge):
        pg.lie_derivative_residual(lambda x: x, np.array([1.01, 0, 0]), np.array([-1.0, 0, 0]), np.eye(3)[1], h=0.1, exterior=True)


def test_desitter_boost_killing(rng):
    v = pg.desitter_field(hypcore.so31_basis()[4])
    for X, a, b in pg.random_samples(rng, 20):
        assert abs(pg.lie_derivative_residual(v, X, a, b, metric="desitter")) < 1e-7


def test_killing_transfer(rng):
    res = pg.killing_transfer_residuals(rng, n_points=50)
    assert max(res["forward"]) < 1e-7 and max(res["backward"]) < 1e-7


def test_non_killing_pushes_to_non_killing(rng):
    w = pg.pushed(pg.radial_test_field())
    assert max(pg.euclidean_killing_residual(w, x) for x in pg.random_exterior_points(rng, 5)) > 1e-2


def test_eq_proportionality(rng):
    res = pg.verify_eq_pogo(pg.radial_test_field(), pg.random_samples(rng, 20))
    assert res["used"] == 20 and res["max_rel_error"] < 1e-4


def test_eq_killing_skipped(rng):
    res = pg.verify_eq_pogo(pg.desitter_field(hypcore.so31_basis()[3]), pg.random_samples(rng, 5))
    assert res["skipped"] == 5 and res["max_abs"] < 1e-7


def test_sphere_spot_values():
    F = pg.sphere_forms(2.0, 0.8, 0.4)
    s2 = np.sinh(F["rho"]) ** 2
    assert np.isclose(s2, 1 / 3)
    assert np.allclose(F["I_bar"], 4 * F["can"])
    assert np.allclose(F["I"], 4 / 3 * F["can"])
    assert np.allclose(F["I"], np.cosh(F["rho"]) ** 2 * F["can"])
    assert np.allclose(F["II"], np.sinh(F["rho"]) * np.cosh(F["rho"]) * F["can"])


@pytest.mark.parametrize("t", [1.5, 2.0, 3.0])
def test_sphere_remark(t):
    res = pg.sphere_remark_residual(t)
    assert res["I"] < 1e-9 and res["II"] < 1e-9
