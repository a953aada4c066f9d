"""Experiment runner.

Subcommands: ``sofw`` (second-order Frank-Wolfe run), ``pgd`` (projected
gradient descent run or basin sweep), ``stationarity`` (classify a
point), ``hardness`` (stable-set correspondence sweeps), ``verify``
(cross-check oracles, subsolvers, and the bundled constructions).

Exit codes: 0 success, 1 invariant or acceptance failure, 2 usage or
input error.  All randomness flows from explicit seeds; identical
invocations produce byte-identical outputs.  SADDLE_ESCAPE_THREADS caps
sweep parallelism (default 1).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import hardness as hd
from . import oracles as oc
from . import pgd as pg
from . import sofw as sw
from .geometry import Polytope, contains, project_polytope
from .stationarity import classify
from .subsolvers import brute_force_direction, solve_lmo, solve_qmo, solve_trs

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}: {exc}")


def _load_problem(path: str | None) -> oc.Problem:
    if path is None or path == "counterexample":
        return oc.counterexample_problem()
    if not os.path.exists(path):
        raise FileNotFoundError(f"problem file not found: {path}")
    return oc.load_problem(path)


def _thread_count() -> int:
    raw = os.environ.get("SADDLE_ESCAPE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_sofw(args) -> int:
    problem = _load_problem(args.problem)
    if args.x0 is not None:
        problem = oc.Problem(problem.oracle, problem.feasible_set, args.x0,
                             problem.f_min, kind=problem.kind)
    cfg = sw.SofwConfig.from_constants(problem.oracle.constants,
                                       eps_g=args.eps_g, eps_H=args.eps_H,
                                       max_iters=args.max_iters)
    trace = sw.run_sofw(problem, cfg)
    if args.trace:
        trace.to_csv(args.trace)
    final = trace.final
    violations = sw.verify_decrease(trace, cfg)
    fo_bound, joint_bound = sw.complexity_bound(cfg, trace.records[0].f, problem.f_min)
    steps = trace.effective_steps()
    n_rough = sum(1 for r in trace.records if r.x_measure > cfg.eps_g)
    feasible = all(contains(problem.feasible_set, r.x) for r in trace.records)
    bound_respected = steps <= joint_bound and n_rough <= fo_bound
    verdict = ("SOSP" if final.x_measure <= cfg.eps_g and final.psi_measure <= cfg.eps_H
               else "FOSP" if final.x_measure <= cfg.eps_g else "neither")
    _emit({
        "status": trace.status,
        "iters": steps,
        "final_x": [float(v) for v in final.x],
        "f": final.f,
        "X": final.x_measure,
        "psi": final.psi_measure,
        "verdict": verdict,
        "bound": joint_bound,
        "fo_bound": fo_bound,
        "bound_respected": bool(bound_respected),
        "decrease_violations": violations,
    }, args.summary)
    ok = (not violations) and feasible and bound_respected
    return EXIT_OK if ok else EXIT_FAIL


def cmd_pgd(args) -> int:
    if args.basin_sweep:
        if not pg.basin_condition(args.eps, args.alpha):
            print(f"basin condition fails for eps={args.eps}, alpha={args.alpha}",
                  file=sys.stderr)
            return EXIT_FAIL
        sweep = pg.basin_sweep(args.alpha, args.eps, args.samples, args.seed,
                               max_iters=args.max_iters)
        _emit({
            "alpha": args.alpha,
            "eps": args.eps,
            "samples": args.samples,
            "seed": args.seed,
            "converged": sweep.n_converged,
            "all_converged": sweep.all_converged,
            "all_first_steps_on_line": sweep.all_first_steps_on_line,
            "final_dists": [r.final_dist for r in sweep.runs],
        }, args.summary)
        return EXIT_OK if sweep.all_converged else EXIT_FAIL

    problem = _load_problem(args.problem)
    if args.x0 is not None:
        problem = oc.Problem(problem.oracle, problem.feasible_set, args.x0,
                             problem.f_min, kind=problem.kind)
    if args.alpha >= pg.LEMMA_ALPHA_MAX:
        print(f"warning: alpha={args.alpha} is outside the guarantee range "
              f"(0, 2/3); running anyway", file=sys.stderr)
    cfg = pg.PgdConfig(alpha=args.alpha, max_iters=args.max_iters,
                       stop_tol=args.stop_tol)
    trace = pg.run_pgd(problem, cfg)
    if args.trace:
        trace.to_csv(args.trace)
    final = trace.final
    _emit({
        "status": trace.status,
        "iters": len(trace.records) - 1,
        "final_x": [float(v) for v in final.x],
        "f": final.f,
        "dist_origin": final.dist_origin,
    }, args.summary)
    return EXIT_OK


def cmd_stationarity(args) -> int:
    problem = _load_problem(args.problem)
    x = args.x if args.x is not None else problem.x0
    if not contains(problem.feasible_set, x):
        print("point is infeasible", file=sys.stderr)
        return EXIT_USAGE
    report = classify(problem.oracle, problem.feasible_set, x,
                      args.eps_g, args.eps_H)
    _emit(report.to_dict(), args.summary)
    return EXIT_OK


def _correspondence_rows(instances) -> tuple[list, bool]:
    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda gt: hd.check_correspondence(*gt), instances))
    else:
        reports = [hd.check_correspondence(G, t) for G, t in instances]
    rows = [r.to_dict() for r in reports]
    ok = all(r.equivalence_holds and r.dichotomy_holds for r in reports)
    return rows, ok


def cmd_hardness(args) -> int:
    instances = []
    if args.graph:
        if not os.path.exists(args.graph):
            raise FileNotFoundError(f"graph file not found: {args.graph}")
        G = hd.load_graph(args.graph)
        if args.t is None:
            raise ValueError("--t is required with --graph")
        instances = [(G, args.t)]
    elif args.exhaustive_n:
        for n in range(1, args.exhaustive_n + 1):
            for G in hd.all_graphs(n):
                for t in range(1, n + 1):
                    instances.append((G, t))
    elif args.random_graphs:
        rng = np.random.default_rng(args.seed)
        sizes = [int(s) for s in args.sizes.split(",")]
        for i in range(args.random_graphs):
            n = sizes[i % len(sizes)]
            G = hd.random_graph(rng, n)
            for t in range(1, n + 1):
                instances.append((G, t))
    else:
        raise ValueError("choose one of --graph, --exhaustive-n, --random-graphs")

    rows, ok = _correspondence_rows(instances)
    payload = {
        "instances": len(rows),
        "all_hold": bool(ok),
        "rows": rows if (args.graph or args.full_rows) else rows[:10],
    }
    _emit(payload, args.summary)
    return EXIT_OK if ok else EXIT_FAIL


def _random_direction_instance(rng: np.random.Generator):
    n = int(rng.integers(1, 5))
    m = int(rng.integers(0, 4))
    A = rng.normal(size=(m, n))
    A = A[np.linalg.norm(A, axis=1) > 1e-6]
    m = len(A)
    x_free = rng.normal(size=n) * 0.5
    b = A @ x_free + rng.uniform(0.05, 1.0, size=m)
    P = Polytope(A, b) if m else Polytope(np.zeros((0, n)), np.zeros(0))
    if m and rng.random() < 0.5:
        x = project_polytope(P, x_free + rng.normal(size=n) * 2.0)
    else:
        x = x_free
    g = rng.normal(size=n) * float(rng.choice([0.0, 1.0, 2.0], p=[0.1, 0.6, 0.3]))
    B = rng.normal(size=(n, n))
    H = 0.5 * (B + B.T)
    return P, x, g, H


def _random_trs_instance(rng: np.random.Generator, hard: bool):
    k = int(rng.integers(1, 7))
    B = rng.normal(size=(k, k))
    Q = 0.5 * (B + B.T)
    radius = float(rng.uniform(0.1, 2.0))
    if hard:
        w, V = np.linalg.eigh(Q)
        if w[0] >= 0:
            w = w - (abs(w[0]) + 1.0)
            Q = V @ np.diag(w) @ V.T
            w, V = np.linalg.eigh(Q)
        c = V[:, 1:] @ rng.normal(size=k - 1) * 0.05 if k > 1 else np.zeros(k)
        c = c - V[:, :1] @ (V[:, :1].T @ c)  # no component on the min eigenspace
    else:
        c = rng.normal(size=k)
    return Q, np.asarray(c).reshape(-1), radius


def _verify_oracles(report, n_points: int, rng) -> bool:
    ok = True
    for name, problem in oc.bundled_problems().items():
        worst_g = 0.0
        worst_h = 0.0
        tested = 0
        while tested < n_points:
            x = problem.x0 + rng.normal(size=problem.x0.shape[0])
            if not contains(problem.feasible_set, x):
                continue
            tested += 1
            worst_g = max(worst_g, oc.fd_check_gradient(problem.oracle, x, 1e-5))
            worst_h = max(worst_h, oc.fd_check_hessian(problem.oracle, x, 1e-5))
        good = worst_g <= 1e-5 and worst_h <= 1e-4
        ok &= good
        report.append(f"oracle-fd {name}: {'pass' if good else 'FAIL'} "
                      f"(grad {worst_g:.3e}, hess {worst_h:.3e})")
    return ok


def _verify_problem_fixture(report, path: str, rng) -> bool:
    problem = oc.load_problem(path)
    const = problem.oracle.constants
    ok = oc.fd_check_gradient(problem.oracle, problem.x0, 1e-5) <= 1e-5
    # sampled Assumption-style bounds: Lipschitz constants and norm caps
    pts = []
    while len(pts) < 40:
        x = problem.x0 + rng.normal(size=problem.x0.shape[0])
        if contains(problem.feasible_set, x) and np.linalg.norm(x) <= 3.0:
            pts.append(x)
    for x in pts:
        gx = np.linalg.norm(problem.oracle.grad(x))
        hx = np.linalg.norm(problem.oracle.hess(x), 2)
        if gx > const.g_max * (1 + 1e-6) or hx > const.H_max * (1 + 1e-6):
            ok = False
    for x, y in zip(pts[::2], pts[1::2]):
        dg = np.linalg.norm(problem.oracle.grad(x) - problem.oracle.grad(y))
        dh = np.linalg.norm(problem.oracle.hess(x) - problem.oracle.hess(y), 2)
        dx = np.linalg.norm(x - y)
        if dg > const.L * dx * (1 + 1e-6) + 1e-12:
            ok = False
        if dh > const.rho * dx * (1 + 1e-6) + 1e-12:
            ok = False
        if problem.oracle.eval(x) < problem.f_min - 1e-9:
            ok = False
    report.append(f"fixture {os.path.basename(path)}: {'pass' if ok else 'FAIL'}")
    return ok


def _verify_subsolvers(report, instances: int, rng) -> bool:
    worst_l = worst_q = 0.0
    for _ in range(instances):
        P, x, g, H = _random_direction_instance(rng)
        s = solve_lmo(g, P, x)
        _, ref = brute_force_direction(lambda D: np.asarray(D) @ g, P, x,
                                       resolution=2e-2)
        worst_l = max(worst_l, abs(s.value - ref))
        d = solve_qmo(H, g, P, x)

        def qobj(D):
            D = np.asarray(D)
            if D.ndim == 2:
                return np.einsum("ij,jk,ik->i", D, H, D)
            return float(D @ H @ D)

        _, ref = brute_force_direction(qobj, P, x, grad_constraint=g,
                                       resolution=2e-2)
        worst_q = max(worst_q, abs(d.value - ref))
    good = worst_l <= 1e-3 and worst_q <= 1e-3
    report.append(f"subsolver-vs-oracle ({instances} instances): "
                  f"{'pass' if good else 'FAIL'} "
                  f"(lmo {worst_l:.3e}, qmo {worst_q:.3e})")
    return good


def _verify_trs(report, instances: int, rng) -> bool:
    worst_kkt = worst_comp = worst_lam = 0.0
    n_hard = max(20, instances // 10)
    for i in range(instances):
        Q, c, radius = _random_trs_instance(rng, hard=i < n_hard)
        sol = solve_trs(Q, c, radius)
        lam_min = float(np.linalg.eigvalsh(Q)[0])
        kkt = float(np.linalg.norm((Q + sol.lam * np.eye(Q.shape[0])) @ sol.u + c))
        comp = abs(sol.lam * (radius - float(np.linalg.norm(sol.u))))
        worst_kkt = max(worst_kkt, kkt)
        worst_comp = max(worst_comp, comp)
        worst_lam = max(worst_lam, max(0.0, -lam_min) - sol.lam)
    good = worst_kkt <= 1e-7 and worst_comp <= 1e-7 and worst_lam <= 1e-9
    report.append(f"trs-kkt ({instances} instances, {n_hard} hard-case): "
                  f"{'pass' if good else 'FAIL'} "
                  f"(stationarity {worst_kkt:.3e}, complementarity {worst_comp:.3e})")
    return good


def _verify_certificate(report) -> bool:
    problem = oc.counterexample_problem()
    rep = classify(problem.oracle, problem.feasible_set, np.zeros(2), 1e-4, 1e-4)
    gold = (np.sqrt(5.0) - 1.0) / 2.0
    good = rep.x_measure <= 1e-10 and abs(rep.psi_measure - gold) <= 1e-6
    v = np.array([-1.0, -1.0])
    H = problem.oracle.hess(np.zeros(2))
    good &= abs(float(v @ H @ v) + 1.0) == 0.0
    report.append(f"saddle-certificate: {'pass' if good else 'FAIL'} "
                  f"(X {rep.x_measure:.3e}, psi {rep.psi_measure:.12f})")
    return good


def _verify_dynamics(report, rng) -> bool:
    ok = pg.basin_condition(0.05, 0.5)
    sweep = pg.basin_sweep(0.5, 0.05, 5, int(rng.integers(0, 2 ** 31)))
    ok &= sweep.all_converged and sweep.all_first_steps_on_line
    line = pg.line_invariance_check(0.5, 0.5)
    ok &= line.passed
    problem = oc.quad1d_problem()
    cfg = sw.SofwConfig.from_constants(problem.oracle.constants, 1e-6, 1e-6)
    trace = sw.run_sofw(problem, cfg)
    ok &= trace.status == sw.STATUS_CONVERGED
    ok &= not sw.verify_decrease(trace, cfg)
    report.append(f"dynamics (basin, line, quad1d run): {'pass' if ok else 'FAIL'}")
    return bool(ok)


def _verify_hardness(report) -> bool:
    instances = []
    for n in range(1, 4):
        for G in hd.all_graphs(n):
            for t in range(1, n + 1):
                instances.append((G, t))
    _, ok = _correspondence_rows(instances)
    report.append(f"hardness n<=3 exhaustive ({len(instances)} instances): "
                  f"{'pass' if ok else 'FAIL'}")
    return ok


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    report: list[str] = []
    ok = _verify_oracles(report, 20 if args.fast else 100, rng)
    if args.problem:
        ok &= _verify_problem_fixture(report, args.problem, rng)
    ok &= _verify_subsolvers(report, max(5, args.instances // 5) if args.fast
                             else args.instances, rng)
    ok &= _verify_trs(report, args.instances, rng)
    ok &= _verify_certificate(report)
    ok &= _verify_dynamics(report, rng)
    ok &= _verify_hardness(report)
    for line in report:
        print(line)
    print("verify:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saddle-escape",
        description="constrained second-order stationarity toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sofw", help="run second-order Frank-Wolfe")
    p.add_argument("--problem", help="problem JSON (default: bundled counterexample)")
    p.add_argument("--x0", type=_parse_vector, help="override start, e.g. 0.5,-0.5")
    p.add_argument("--eps-g", type=float, default=1e-4, dest="eps_g")
    p.add_argument("--eps-H", type=float, default=1e-4, dest="eps_H")
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--trace", help="write per-iteration CSV here")
    p.add_argument("--summary", help="write summary JSON here")
    p.set_defaults(func=cmd_sofw)

    p = sub.add_parser("pgd", help="run projected gradient descent")
    p.add_argument("--problem", help="problem JSON (default: bundled counterexample)")
    p.add_argument("--x0", type=_parse_vector)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--max-iters", type=int, default=200000)
    p.add_argument("--stop-tol", type=float, default=1e-12)
    p.add_argument("--basin-sweep", action="store_true")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--trace", help="write per-iteration CSV here")
    p.add_argument("--summary", help="write summary JSON here")
    p.set_defaults(func=cmd_pgd)

    p = sub.add_parser("stationarity", help="classify a point")
    p.add_argument("--problem", help="problem JSON (default: bundled counterexample)")
    p.add_argument("--x", type=_parse_vector, help="point (default: problem x0)")
    p.add_argument("--eps-g", type=float, default=1e-4, dest="eps_g")
    p.add_argument("--eps-H", type=float, default=1e-4, dest="eps_H")
    p.add_argument("--summary", help="write report JSON here")
    p.set_defaults(func=cmd_stationarity)

    p = sub.add_parser("hardness", help="stable-set correspondence sweeps")
    p.add_argument("--graph", help="edge-list or JSON graph file")
    p.add_argument("--t", type=int, help="stable-set size for --graph")
    p.add_argument("--exhaustive-n", type=int,
                   help="check every graph with up to this many vertices")
    p.add_argument("--random-graphs", type=int,
                   help="check this many seeded random graphs")
    p.add_argument("--sizes", default="6,7,8", help="sizes for --random-graphs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-rows", action="store_true",
                   help="emit every instance row, not just the first 10")
    p.add_argument("--summary", help="write report JSON here")
    p.set_defaults(func=cmd_hardness)

    p = sub.add_parser("verify", help="oracle/subsolver/construction checks")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--problem", help="additionally validate this problem JSON")
    p.add_argument("--fast", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
