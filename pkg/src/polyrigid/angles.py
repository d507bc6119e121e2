"""Angle structures on a hyperideal triangulation and concave volume maximisation.

An angle assignment is an ``(N, 6)`` array: six interior dihedral angles per
tetrahedron in ``TET_EDGES`` order. The edge-sum map ``F`` adds, for every
triangulation edge, the angles of all incident (tetrahedron, local edge)
pairs; a fiber is the set of assignments with prescribed edge sums.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag, null_space

from . import rigidity, simplex
from .errors import (
    ChartSingular,
    EmptyFiber,
    IndexMismatch,
    LeftPolytope,
    NoConvergence,
    OutsidePolytope,
)
from .simplex import (
    hessian_volume,
    in_angle_polytope,
    simplex_dihedrals,
    simplex_lengths,
    simplex_volume,
    solve_from_angles,
)

INTERIOR_MARGIN = 1e-6
COND_MAX = 1e12
EPS_H = 1e-9


def _as_assignment(t, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.size != 6 * t.n_tets:
        raise IndexMismatch(f"expected {6 * t.n_tets} angles, got {theta.size}")
    return theta.reshape(t.n_tets, 6)


def base_point(t, vertices=None):
    """Geometric dihedral angles of every cell."""
    P = t.mesh.vertices if vertices is None else vertices
    return np.array([simplex_dihedrals(P[tet]) for tet in t.tets])


def incidence_matrix(t):
    """Matrix of the linear map F, shape ``(E, 6N)``."""
    F = np.zeros((len(t.edges), 6 * t.n_tets))
    for k in range(t.n_tets):
        for e in range(6):
            F[t.local_to_edge[k, e], 6 * k + e] = 1.0
    return F


def edge_sums(t, theta):
    return incidence_matrix(t) @ _as_assignment(t, theta).ravel()


def solve_cells(t, theta, tol=1e-12):
    """Hyperideal simplex realising each cell's angles."""
    return [solve_from_angles(th, tol=tol) for th in _as_assignment(t, theta)]


def cell_lengths(t, theta):
    return np.array([simplex_lengths(S) for S in solve_cells(t, theta)])


def total_volume(t, theta, tol=1e-9):
    return float(sum(simplex_volume(S, tol=tol) for S in solve_cells(t, theta)))


def volume_gradient(t, theta):
    """``-L/2`` per (cell, local edge), shape ``(N, 6)``."""
    return -0.5 * cell_lengths(t, theta)


def criticality_residual(t, theta):
    """Largest disagreement between the lengths assigned to one edge by its cells."""
    L = cell_lengths(t, theta)
    lo = np.full(len(t.edges), np.inf)
    hi = np.full(len(t.edges), -np.inf)
    np.minimum.at(lo, t.local_to_edge.ravel(), L.ravel())
    np.maximum.at(hi, t.local_to_edge.ravel(), L.ravel())
    return float(np.max(hi - lo))


def fiber_basis(t):
    """Orthonormal basis (columns) of the kernel of F."""
    return null_space(incidence_matrix(t))


def volume_hessian(t, theta):
    """Block-diagonal Hessian of V in the 6N angle coordinates."""
    return block_diag(*[hessian_volume(S) for S in solve_cells(t, theta)])


def fiber_hessian(t, theta):
    Z = fiber_basis(t)
    return Z.T @ volume_hessian(t, theta) @ Z


def _interior(theta, margin=INTERIOR_MARGIN):
    return all(in_angle_polytope(th, margin) for th in theta)


@dataclass
class FiberSolution:
    theta: np.ndarray
    iterations: int
    grad_norm: float
    criticality: float

    def to_dict(self):
        return {
            "theta": self.theta.tolist(),
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "criticality": self.criticality,
        }


def _project_to_fiber(t, alpha, theta_init):
    F = incidence_matrix(t)
    x = _as_assignment(t, theta_init).ravel()
    corr = np.linalg.lstsq(F, alpha - F @ x, rcond=None)[0]
    x = x + corr
    if np.abs(F @ x - alpha).max() > 1e-10 * max(1.0, np.abs(alpha).max()):
        raise EmptyFiber("edge sums are not in the range of F")
    return x.reshape(-1, 6)


def maximize_on_fiber(t, alpha, theta_init, grad_tol=1e-9, max_iter=50):
    """Critical point of the volume on the fiber ``F^-1(alpha)``.

    Newton ascent in orthonormal null-space coordinates with backtracking on
    the projected gradient norm. When the reduced Hessian is ill-conditioned
    the step falls back to gradient ascent with Armijo backtracking on V.
    Every trial point must keep all angles and vertex margins ``1e-6`` inside
    the polytope.

    Raises:
        EmptyFiber: a non-positive edge sum or sums outside the range of F.
        LeftPolytope: the start (projected to the fiber) or every trial step
            leaves the polytope.
        NoConvergence: iteration budget exhausted.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (len(t.edges),):
        raise IndexMismatch(f"expected {len(t.edges)} edge sums, got {alpha.shape}")
    if np.any(alpha <= 0):
        raise EmptyFiber("edge sums must be positive")
    theta = _project_to_fiber(t, alpha, theta_init)
    if not _interior(theta):
        raise LeftPolytope("fiber point nearest to the start is outside the angle polytope")
    Z = fiber_basis(t)

    def reduced_grad(th):
        return Z.T @ volume_gradient(t, th).ravel()

    g = reduced_grad(theta)
    for it in range(max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm < grad_tol or Z.shape[1] == 0:
            return FiberSolution(theta, it, gnorm, criticality_residual(t, theta))
        if it == max_iter:
            break
        H = Z.T @ volume_hessian(t, theta) @ Z
        newton = np.linalg.cond(H) <= COND_MAX
        d = np.linalg.solve(H, -g) if newton else g
        step = 1.0
        v0 = None if newton else total_volume(t, theta, tol=1e-12)
        for _ in range(60):
            trial = theta + step * (Z @ d).reshape(-1, 6)
            if _interior(trial):
                try:
                    g_new = reduced_grad(trial)
                except (OutsidePolytope, NoConvergence):
                    g_new = None
                if g_new is not None:
                    if newton and np.linalg.norm(g_new) < gnorm:
                        break
                    if not newton and total_volume(t, trial, tol=1e-12) >= v0 + 1e-4 * step * (g @ d):
                        break
            step /= 2
        else:
            raise LeftPolytope("no admissible step inside the angle polytope")
        theta, g = trial, g_new
    raise NoConvergence(f"projected gradient {np.linalg.norm(g):.3g} after {max_iter} iterations")


def reduced_volume_probe(t, alpha1, alpha2, k=5, theta_init=None, tol=1e-12):
    """Sample ``V(maximize_on_fiber(alpha))`` along ``[alpha1, alpha2]`` and test concavity."""
    theta = base_point(t) if theta_init is None else _as_assignment(t, theta_init)
    a1, a2 = np.asarray(alpha1, dtype=float), np.asarray(alpha2, dtype=float)
    ss = np.linspace(0.0, 1.0, k)
    volumes = []
    for s in ss:
        sol = maximize_on_fiber(t, (1 - s) * a1 + s * a2, theta)
        theta = sol.theta
        volumes.append(total_volume(t, theta, tol=tol))
    volumes = np.array(volumes)
    second = volumes[:-2] - 2 * volumes[1:-1] + volumes[2:]
    noise = 100 * tol * np.abs(volumes).max()
    trivial = np.allclose(a1, a2)
    concave = bool(np.all(np.abs(second) <= noise)) if trivial else bool(np.all(second < -noise))
    return {
        "s": ss.tolist(),
        "volumes": volumes.tolist(),
        "second_differences": second.tolist(),
        "concave": concave,
        "strict": not trivial,
    }


# boundary-angle chart -------------------------------------------------------


def _slice_basis(P):
    T = rigidity.so31_trivial_motions(P)
    return null_space(T)


def _boundary_angles(t, P):
    return rigidity.total_dihedral_angles(t, P)[t.boundary_edge_ids]


def _boundary_lengths(t, P):
    return np.array([simplex.hypcore.truncated_edge_length(P[a], P[b]) for a, b in t.mesh.edges])


def realise_boundary_angles(t, beta, tol=1e-12, max_iter=50):
    """Vertex positions near the mesh with total boundary angles ``beta``.

    Newton iteration on the slice ``x0 + Q y`` transverse to the isometry
    orbit, using the analytic angle Jacobian.
    """
    P0 = t.mesh.vertices
    Q = _slice_basis(P0)
    y = np.zeros(Q.shape[1])
    for _ in range(max_iter):
        P = P0 + (Q @ y).reshape(P0.shape)
        r = _boundary_angles(t, P) - beta
        if np.max(np.abs(r)) < tol:
            return P
        J = rigidity.hyperbolic_angle_jacobian(t, vertices=P) @ Q
        y = y - np.linalg.lstsq(J, r, rcond=None)[0]
    raise NoConvergence("boundary-angle realisation did not converge")


def theorem_E_check(t, sigma_tol=rigidity.SIGMA_TOL, h=1e-4, eps_h=EPS_H):
    """Local chart and concavity checks for the volume in boundary-angle coordinates.

    Returns a report; ``hypothesis`` is False (and nothing else is decided)
    when the boundary edge count or the angle-rigidity verdict fails.

    Raises:
        ChartSingular: the angle map has rank below ``3V - 6`` modulo isometries.
    """
    P = t.mesh.vertices
    nv = t.mesh.n_vertices
    n_edges = len(t.mesh.edges)
    Jb = rigidity.hyperbolic_angle_jacobian(t)
    trivial = rigidity.so31_trivial_motions(P)
    verdict = rigidity.rigidity_verdict(Jb, trivial, sigma_tol, "hyperbolic-angle")
    report = {"boundary_edges": n_edges, "expected_rank": 3 * nv - 6, "angle_verdict": verdict.verdict}
    if n_edges != 3 * nv - 6 or verdict.verdict != "rigid":
        report["hypothesis"] = False
        return report
    report["hypothesis"] = True

    Q = null_space(trivial)
    JbQ = Jb @ Q
    s = np.linalg.svd(JbQ, compute_uv=False)
    rank = int(np.sum(s > sigma_tol * s[0]))
    report["chart_rank"] = rank
    if rank < 3 * nv - 6:
        raise ChartSingular(f"angle chart has rank {rank} < {3 * nv - 6}")

    JL = rigidity.hyperbolic_length_jacobian(t)
    H_lin = -0.5 * (JL @ Q) @ np.linalg.inv(JbQ)

    beta0 = _boundary_angles(t, P)

    def dL(k, step):
        e = np.zeros(n_edges)
        e[k] = step
        Lp = _boundary_lengths(t, realise_boundary_angles(t, beta0 + e))
        Lm = _boundary_lengths(t, realise_boundary_angles(t, beta0 - e))
        return (Lp - Lm) / (2 * step)

    D = np.column_stack([(4 * dL(k, h / 2) - dL(k, h)) / 3 for k in range(n_edges)])
    H_raw = -0.5 * D
    asym = float(np.linalg.norm(H_raw - H_raw.T) / np.linalg.norm(H_raw))
    H = (H_raw + H_raw.T) / 2
    eig = np.linalg.eigvalsh(H)
    report.update(
        {
            "hessian_eigenvalues": eig.tolist(),
            "hessian_asymmetry": asym,
            "linear_vs_fd": float(np.abs(H_lin - H_raw).max()),
            "concave": bool(eig.max() < -eps_h),
        }
    )
    return report
