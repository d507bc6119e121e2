"""``polyrigid`` command line.

Every subcommand prints one JSON document on stdout. Exit codes: 0 rigid or
pass, 2 flexible or fail, 3 inconclusive, 1 error.
"""
import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import angles, ellipsoid, hypcore, mesh, pogorelov, rigidity, simplex
from .errors import GeometryError, HypothesisViolated

EXIT = {"rigid": 0, "pass": 0, "flexible": 2, "fail": 2, "inconclusive": 3}


class _Timer:
    def __init__(self, enabled):
        self.enabled = enabled
        self.times = {}

    def __call__(self, name):
        timer = self

        class _Block:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.times[name] = time.perf_counter() - self.t0

        return _Block()


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _cellulation(inst):
    if not inst.cells:
        raise GeometryError("instance has no cells")
    return mesh.validate_cellulation(inst.mesh, inst.cells)


def _normalized_triangulation(inst, e):
    T = ellipsoid.normalize_to_ball(e)
    m = inst.mesh.transformed(T.matrix, T.translation)
    cel = mesh.validate_cellulation(m, inst.cells)
    return mesh.triangulate_cellulation(cel), T


def _overall(*verdicts):
    if all(v == "rigid" for v in verdicts):
        return "rigid"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "flexible"


# subcommands ----------------------------------------------------------------


def cmd_theorem_b(args, inst, timer):
    cel = _cellulation(inst)
    mode = args.ellipsoid or ("given" if inst.ellipsoid is not None else "auto")
    if mode == "given":
        if inst.ellipsoid is None:
            raise GeometryError("--ellipsoid=given but the instance has no ellipsoid")
        e = inst.ellipsoid
    else:
        with timer("fit"):
            e = ellipsoid.shrink(ellipsoid.fit_ellipsoid(inst.mesh.vertices), args.shrink)
    doc = {"ellipsoid": {"mode": mode, "A": e.A.tolist(), "c": e.c.tolist()}}
    check = ellipsoid.ellipsoid_hypothesis_check(cel, e)
    doc["ellipsoid_check"] = check.to_dict()
    if not check.passed:
        doc["verdict"] = "fail"
        doc["error"] = {"type": HypothesisViolated.__name__, "detail": check.violations}
        return doc, 2
    with timer("normalize"):
        t, T = _normalized_triangulation(inst, e)
    hyp = mesh.hyperideal_check(t)
    doc["hyperideal_check"] = hyp.to_dict()
    doc["tets"] = [list(c) for c in t.cells]
    if not hyp.passed:
        doc["verdict"] = "fail"
        doc["error"] = {"type": HypothesisViolated.__name__, "detail": hyp.violations}
        return doc, 2
    with timer("rigidity"):
        length, angle = rigidity.theorem_b_reports(t, args.sigma_tol)
    doc["reports"] = [length.to_dict(), angle.to_dict()]
    doc["verdict"] = _overall(length.verdict, angle.verdict)
    return doc, EXIT[doc["verdict"]]


def cmd_check_euclidean(args, inst, timer):
    m = inst.mesh
    with timer("rigidity"):
        rep = rigidity.rigidity_verdict(
            rigidity.euclidean_length_jacobian(m), rigidity.euclidean_trivial_motions(m), args.sigma_tol, "euclidean-length"
        )
    doc = {"reports": [rep.to_dict()], "verdict": rep.verdict}
    if rep.extra_kernel is not None:
        v, res, field = rigidity.localize_field(rep.extra_kernel, rigidity.euclidean_trivial_motions(m), m.n_vertices)
        doc["extra_kernel"] = {"vertex": v, "outside_residual": res, "displacement": field[3 * v : 3 * v + 3].tolist()}
    return doc, EXIT[rep.verdict]


def _harness_simplices(args):
    rng = np.random.default_rng(args.seed)
    out = [simplex.HyperidealSimplex.regular(args.scale)]
    out += [simplex.random_simplex(rng) for _ in range(args.random)]
    return out, rng


def cmd_schlafli_test(args, inst, timer):
    sims, rng = _harness_simplices(args)
    rows, ok = [], True
    for S in sims:
        r, h = simplex.schlafli_residuals(S, rng.normal(size=6), steps=(args.step, args.step / 2))
        ratio = float(r[0] / r[1])
        ok &= 3.5 <= ratio <= 4.5
        rows.append(
            {"vertices": S.vertices.tolist(), "residuals": r.tolist(), "relative": (r / h).tolist(), "halving_ratio": ratio}
        )
    return {"simplices": rows, "order_window": [3.5, 4.5], "verdict": "pass" if ok else "fail"}, 0 if ok else 2


def cmd_pogorelov_test(args, inst, timer):
    rng = np.random.default_rng(args.seed)
    kt = pogorelov.killing_transfer_residuals(rng, args.points)
    eq = pogorelov.verify_eq_pogo(pogorelov.radial_test_field(), pogorelov.random_samples(rng, 20))
    spheres = {str(t): pogorelov.sphere_remark_residual(t) for t in (1.5, 2.0, 3.0)}
    ok = (
        max(kt["forward"] + kt["backward"]) < 1e-7
        and eq["max_rel_error"] < 1e-4
        and all(max(v.values()) < 1e-9 for v in spheres.values())
    )
    doc = {"killing_transfer": kt, "eq_proportionality": eq, "spheres": spheres, "verdict": "pass" if ok else "fail"}
    return doc, 0 if ok else 2


def _instance_triangulation(inst):
    if inst.ellipsoid is not None:
        return _normalized_triangulation(inst, inst.ellipsoid)[0]
    return mesh.triangulate_cellulation(_cellulation(inst))


def cmd_angle_solve(args, inst, timer):
    t = _instance_triangulation(inst)
    theta0 = angles.base_point(t)
    alpha = angles.edge_sums(t, theta0)
    start = theta0
    if args.perturb:
        Z = angles.fiber_basis(t)
        d = Z @ np.random.default_rng(args.seed).normal(size=Z.shape[1])
        start = theta0 + (args.perturb * d / np.linalg.norm(d)).reshape(theta0.shape)
    with timer("solve"):
        sol = angles.maximize_on_fiber(t, alpha, start)
    doc = {
        "theta_c": sol.theta.tolist(),
        "V": angles.total_volume(t, sol.theta),
        "gradient_norm": sol.grad_norm,
        "criticality_residual": sol.criticality,
        "iterations": sol.iterations,
        "distance_to_base_point": float(np.abs(sol.theta - theta0).max()),
    }
    ok = sol.grad_norm < 1e-9 and sol.criticality < 1e-7
    doc["verdict"] = "pass" if ok else "fail"
    return doc, 0 if ok else 2


def _off_of_polytopes(polys):
    verts, faces = [], []
    for T in polys:
        base = len(verts)
        verts += T.vertices.tolist()
        faces += [[base + k for k in f] for f in T.facets]
    lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
    lines += [" ".join(f"{x:.17g}" for x in v) for v in verts]
    lines += [" ".join(map(str, [len(f), *f])) for f in faces]
    return "\n".join(lines) + "\n"


def cmd_volume(args, inst, timer):
    if inst is None:
        sims = [simplex.HyperidealSimplex.regular(args.scale)]
    else:
        t = _instance_triangulation(inst)
        sims = [simplex.HyperidealSimplex(t.mesh.vertices[c]) for c in t.tets]
    with timer("quadrature"):
        vols = [simplex.simplex_volume(S, tol=args.tol, method=args.method) for S in sims]
    if args.emit_off:
        with open(args.emit_off, "w") as fh:
            fh.write(_off_of_polytopes([simplex.truncate(S) for S in sims]))
    doc = {"method": args.method, "tol": args.tol, "volumes": vols, "total": float(sum(vols)), "verdict": "pass"}
    return doc, 0


def cmd_triangulate(args, inst, timer):
    t = mesh.triangulate_cellulation(_cellulation(inst))
    return {"tets": [list(c) for c in t.cells], "volume": float(t.volumes.sum()), "verdict": "pass"}, 0


def cmd_validate(args, inst, timer):
    m = inst.mesh
    doc = {
        "vertices": m.n_vertices,
        "edges": len(m.edges),
        "triangles": len(m.triangles),
        "euler_characteristic": m.euler_characteristic,
        "volume": m.volume,
    }
    if inst.cells:
        cel = _cellulation(inst)
        doc["cells"] = [list(c) for c in cel.cells]
        doc["cell_volume_sum"] = float(cel.volumes.sum())
        if inst.ellipsoid is not None:
            doc["ellipsoid_check"] = ellipsoid.ellipsoid_hypothesis_check(cel, inst.ellipsoid).to_dict()
    doc["verdict"] = "pass"
    return doc, 0


def cmd_fit_ellipsoid(args, inst, timer):
    e = ellipsoid.fit_ellipsoid(inst.mesh.vertices)
    res = np.abs(e.value(inst.mesh.vertices) - 1.0)
    doc = {"A": e.A.tolist(), "c": e.c.tolist(), "max_residual": float(res.max()), "verdict": "pass"}
    if args.shrink < 1.0:
        s = ellipsoid.shrink(e, args.shrink)
        doc["shrunk"] = {"factor": args.shrink, "A": s.A.tolist(), "c": s.c.tolist()}
    return doc, 0


COMMANDS = {
    "theorem-b": cmd_theorem_b,
    "check-euclidean": cmd_check_euclidean,
    "schlafli-test": cmd_schlafli_test,
    "pogorelov-test": cmd_pogorelov_test,
    "angle-solve": cmd_angle_solve,
    "volume": cmd_volume,
    "triangulate": cmd_triangulate,
    "validate": cmd_validate,
    "fit-ellipsoid": cmd_fit_ellipsoid,
}
NEEDS_INSTANCE = {"theorem-b", "check-euclidean", "angle-solve", "triangulate", "validate", "fit-ellipsoid"}


def build_parser():
    p = argparse.ArgumentParser(prog="polyrigid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("instance", nargs="?", help="instance JSON or OFF surface")
        s.add_argument("--sigma-tol", type=float, default=rigidity.SIGMA_TOL)
        s.add_argument("--no-timings", action="store_true", help="omit timings for byte-stable output")
        if name == "theorem-b":
            s.add_argument("--ellipsoid", choices=["auto", "given"])
        if name in ("theorem-b", "fit-ellipsoid"):
            s.add_argument("--shrink", type=float, default=0.99)
        if name in ("schlafli-test", "pogorelov-test", "angle-solve"):
            s.add_argument("--seed", type=int, default=0)
        if name in ("schlafli-test", "volume"):
            s.add_argument("--scale", type=float, default=1.2, help="regular simplex vertex norm")
        if name == "schlafli-test":
            s.add_argument("--random", type=int, default=5, help="number of random simplices")
            s.add_argument("--step", type=float, default=1e-4)
        if name == "pogorelov-test":
            s.add_argument("--points", type=int, default=50)
        if name == "angle-solve":
            s.add_argument("--perturb", type=float, default=0.0, help="in-fiber perturbation size of the start")
        if name == "volume":
            s.add_argument("--tol", type=float, default=simplex.DEFAULT_VOLUME_TOL)
            s.add_argument("--method", choices=["boundary", "tetra", "adaptive"], default="boundary")
            s.add_argument("--emit-off", metavar="PATH", help="write the truncated polytopes as OFF")
    return p


def run(argv=None):
    """Run a subcommand; returns ``(document, exit_code)``."""
    args = build_parser().parse_args(argv)
    timer = _Timer(not args.no_timings)
    doc = {"command": args.command}
    raw = b""
    try:
        inst = None
        if args.instance:
            raw = _read(args.instance)
            inst = mesh.load_instance(raw)
        elif args.command in NEEDS_INSTANCE:
            raise GeometryError(f"{args.command} needs an instance file")
        body, code = COMMANDS[args.command](args, inst, timer)
        doc.update(body)
    except (GeometryError, OSError) as exc:
        doc["error"] = {"type": type(exc).__name__, "message": str(exc)}
        doc["verdict"] = "error"
        print(f"polyrigid: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 1
    settings = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "instance", "no_timings")}
    doc["thresholds"] = settings
    doc["inputs_digest"] = hashlib.sha256(raw + json.dumps(settings, sort_keys=True).encode()).hexdigest()
    if timer.enabled:
        doc["timings"] = timer.times
    return doc, code


def main(argv=None):
    doc, code = run(argv)
    json.dump(doc, sys.stdout, indent=1, sort_keys=True, default=float)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
