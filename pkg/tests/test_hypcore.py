import numpy as np
import pytest

from polyrigid import hypcore as hc
from polyrigid.errors import (
    DegenerateFace,
    EdgeMissesBall,
    NotHyperideal,
    NotInterior,
    PlaneMissesBall,
    PlanesDisjoint,
)

LN3 = np.log(3.0)


def random_hyperideal(rng, rmin=1.1, rmax=3.0):
    u = rng.normal(size=3)
    return u / np.linalg.norm(u) * rng.uniform(rmin, rmax)


def random_interior(rng, rmax=0.9):
    u = rng.normal(size=3)
    return u / np.linalg.norm(u) * rng.uniform(0, rmax)


def test_mink_inner_signature():
    e1, e4 = np.eye(4)[0], np.eye(4)[3]
    assert hc.mink_inner(e1, e1) == 1
    assert hc.mink_inner(e4, e4) == -1
    n = np.array([1.0, 0, 0, 1])
    assert hc.mink_inner(n, n) == 0


def test_classify():
    assert hc.classify([0.5, 0, 0]) == "interior"
    assert hc.classify([1.0, 0, 0]) == "ideal"
    assert hc.classify([0, 0, 1.2]) == "hyperideal"


def test_lift_hyperideal():
    assert np.allclose(hc.lift_hyperideal([2, 0, 0]), np.array([2, 0, 0, 1]) / np.sqrt(3))
    assert np.allclose(hc.lift_hyperideal([0, 0, 1.2]), np.array([0, 0, 1.2, 1]) / np.sqrt(0.44))
    with pytest.raises(NotHyperideal):
        hc.lift_hyperideal([0.5, 0, 0])


def test_lift_roundtrip(rng):
    for _ in range(20):
        v = random_hyperideal(rng)
        V = hc.lift_hyperideal(v)
        assert abs(hc.mink_inner(V, V) - 1) < 1e-12 and V[3] > 0
        assert np.allclose(hc.to_chart(V), v, atol=1e-12)


def _metric_angle(x, a, b):
    g = hc.klein_metric(x)
    return np.arccos(a @ g @ b / np.sqrt((a @ g @ a) * (b @ g @ b)))


@pytest.mark.parametrize("v", [[2.0, 0, 0], [0, 0, 1.2]])
def test_dual_plane_is_polar(v):
    v = np.asarray(v)
    P = hc.dual_plane(v)
    k = int(np.argmax(np.abs(v)))
    # plane {x_k = 1 / v_k}
    assert np.allclose(P.normal / P.normal[k] * (1 / v[k]), np.eye(3)[k] / v[k])
    assert np.isclose(P.offset / P.normal[k], 1 / v[k])


def test_dual_plane_orthogonal_to_lines(rng):
    for _ in range(5):
        v = random_hyperideal(rng)
        P = hc.dual_plane(v)
        n = P.normal / np.linalg.norm(P.normal)
        for _ in range(20):
            # a line through v and a random interior point
            q = random_interior(rng, 0.5)
            d = q - v
            t = (P.offset - P.normal @ v) / (P.normal @ d)
            x = v + t * d
            if np.linalg.norm(x) >= 0.99:
                continue
            # tangent vectors of the plane at x
            p1 = np.cross(n, d)
            p2 = np.cross(n, p1)
            for p in (p1, p2):
                assert abs(_metric_angle(x, d, p) - np.pi / 2) < 1e-8


def test_dual_plane_rejects_sphere():
    with pytest.raises(NotHyperideal):
        hc.dual_plane([1.0, 0, 0])


def test_klein_metric():
    assert np.allclose(hc.klein_metric(np.zeros(3)), np.eye(3))
    r = 0.6
    w = 1 - r * r
    assert np.allclose(hc.klein_metric([r, 0, 0]), np.diag([1 / w**2, 1 / w, 1 / w]))
    with pytest.raises(NotInterior):
        hc.klein_metric([1.1, 0, 0])


def test_klein_metric_matches_distance(rng):
    # path length along a chord by quadrature of the metric
    p, q = random_interior(rng), random_interior(rng)
    s = np.linspace(0, 1, 4001)
    d = q - p
    speeds = [np.sqrt(d @ hc.klein_metric(p + t * d) @ d) for t in s]
    length = np.trapezoid(speeds, s) if hasattr(np, "trapezoid") else np.trapz(speeds, s)
    assert abs(length - hc.hyp_distance(p, q)) < 1e-6


def test_hyp_distance():
    assert hc.hyp_distance([0.1, 0.2, 0.3], [0.1, 0.2, 0.3]) == 0
    assert np.isclose(hc.hyp_distance([-0.5, 0, 0], [0.5, 0, 0]), LN3, atol=1e-12)
    ds = [hc.hyp_distance([-r, 0, 0], [r, 0, 0]) for r in (0.9, 0.99, 0.999, 0.9999)]
    assert np.all(np.diff(ds) > 0)


def test_hyp_distance_cross_ratio(rng):
    for _ in range(10):
        p, q = random_interior(rng), random_interior(rng)
        d = q - p
        # ideal endpoints of the chord
        a, b, c = d @ d, 2 * p @ d, p @ p - 1
        t1, t2 = sorted(np.roots([a, b, c]).real)
        cr = (1 - t1) * (0 - t2) / ((0 - t1) * (1 - t2))
        assert np.isclose(hc.hyp_distance(p, q), 0.5 * abs(np.log(cr)), atol=1e-10)


def test_hyp_distance_triangle_inequality(rng):
    for _ in range(100):
        a, b, c = (random_interior(rng) for _ in range(3))
        assert hc.hyp_distance(a, c) <= hc.hyp_distance(a, b) + hc.hyp_distance(b, c) + 1e-12


def test_truncated_edge_length():
    assert np.isclose(hc.truncated_edge_length([-2, 0, 0], [2, 0, 0]), LN3, atol=1e-12)
    # polar planes cross the segment at -+1/2
    assert np.isclose(hc.hyp_distance([-0.5, 0, 0], [0.5, 0, 0]), LN3)
    assert np.isclose(np.cosh(hc.truncated_edge_length([-2, 0, 0], [2, 0, 0])), 5 / 3)
    ds = [hc.truncated_edge_length([-d, 0, 0], [d, 0, 0]) for d in (1.5, 2, 3, 5)]
    assert np.all(np.diff(ds) < 0)
    with pytest.raises(EdgeMissesBall):
        hc.truncated_edge_length([2, 0, 0], [2, 0.1, 0])


def test_truncated_length_matches_plane_crossings(rng):
    for _ in range(10):
        v = random_hyperideal(rng)
        w = -v / np.linalg.norm(v) * rng.uniform(1.1, 3) + 0.1 * rng.normal(size=3)
        if not hc.edge_meets_ball(v, w):
            continue
        d = w - v
        # crossings of the segment with the polar planes x . v = 1 and x . w = 1
        s_v = (1 - v @ v) / (d @ v)
        s_w = (1 - v @ w) / (d @ w)
        xs = [v + s_v * d, v + s_w * d]
        assert np.isclose(hc.truncated_edge_length(v, w), hc.hyp_distance(*xs), atol=1e-10)


def test_length_isometry_invariant(rng):
    for _ in range(10):
        v = random_hyperideal(rng)
        w = -v + 0.2 * rng.normal(size=3)
        if not hc.edge_meets_ball(v, w):
            continue
        M = hc.random_isometry(rng, max_boost=0.5)
        assert abs(M.T @ hc.SIGNATURE @ M - hc.SIGNATURE).max() < 1e-12
        v2, w2 = hc.apply_isometry(M, np.array([v, w]))
        assert abs(hc.truncated_edge_length(v2, w2) - hc.truncated_edge_length(v, w)) < 1e-10


def test_plane_of_face():
    P = hc.plane_of_face([1, 0, 0.5], [0, 1, 0.5], [-1, -1, 0.5])
    assert np.allclose(P.normal / P.normal[2], [0, 0, 1])
    assert np.isclose(P.offset / P.normal[2], 0.5)
    with pytest.raises(DegenerateFace):
        hc.plane_of_face([0, 0, 0], [1, 1, 1], [2, 2, 2])
    with pytest.raises(PlaneMissesBall):
        hc.plane_of_face([1, 0, 2], [0, 1, 2], [-1, -1, 2])


def test_dihedral_angle():
    A = hc.HPlane(np.array([1.0, 0, 0, 0]))
    B = hc.HPlane(np.array([0, 1.0, 0, 0]))
    assert np.isclose(hc.dihedral_angle(A, B), np.pi / 2)
    c = np.cos(np.pi / 3)
    N2 = np.array([-c, np.sqrt(1 - c * c), 0, 0])
    assert np.isclose(hc.dihedral_angle(np.array([1.0, 0, 0, 0]), N2), np.pi / 3)
    with pytest.raises(PlanesDisjoint):
        hc.dihedral_angle(hc.dual_plane([2, 0, 0]), hc.dual_plane([-2, 0, 0]).flipped())


def test_dihedral_matches_metric_angle(rng):
    for _ in range(10):
        p = random_interior(rng, 0.3)
        q = random_interior(rng, 0.3)
        a, b = random_interior(rng, 0.5), random_interior(rng, 0.5)
        P1, P2 = hc.plane_of_face(p, q, a), hc.plane_of_face(p, q, b)
        # orient both conormals out of the wedge containing the other plane's third point
        if P1.side(b) > 0:
            P1 = P1.flipped()
        if P2.side(a) > 0:
            P2 = P2.flipped()
        theta = hc.dihedral_angle(P1, P2)
        x = 0.5 * (p + q)
        g = hc.klein_metric(x)
        t = q - p
        # directions inside each half-plane, g-orthogonal to the edge
        u1 = a - x
        u2 = b - x
        u1 = u1 - (u1 @ g @ t) / (t @ g @ t) * t
        u2 = u2 - (u2 @ g @ t) / (t @ g @ t) * t
        ang = np.arccos(u1 @ g @ u2 / np.sqrt((u1 @ g @ u1) * (u2 @ g @ u2)))
        assert abs(ang - theta) < 1e-8


def test_so31_basis_is_skew():
    for M in hc.so31_basis():
        assert np.abs(M.T @ hc.SIGNATURE + hc.SIGNATURE @ M).max() == 0


def test_boost_to_origin(rng):
    T = hc.lift_interior(random_interior(rng))
    L = hc.boost_to_origin(T)
    assert np.allclose(L @ T, [0, 0, 0, 1])
    assert np.allclose(L.T @ hc.SIGNATURE @ L, hc.SIGNATURE)
