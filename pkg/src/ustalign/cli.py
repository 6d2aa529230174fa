"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical degeneracy.
Every subcommand is deterministic given its inputs, flags, and seed; seeds
are echoed in the output header.  The USTALIGN_TOL_SCALE environment
variable multiplies the residual thresholds of `verify` (default 1).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, bench, demo, io_formats, matching, reparam, varglobal
from .errors import (
    AngleNearPi,
    DegenerateSignal,
    IllConditioned,
    SingularWeightIntegral,
    UstAlignError,
)
from .metric_spaces import Signal, TimeGrid, scalar_space
from .synth import smooth_bump, smooth_scalar_signal, smooth_se3_signal, smooth_warp
from .varglobal import bootstrap as vb

_DEGENERACY = (AngleNearPi, DegenerateSignal, IllConditioned, SingularWeightIntegral)


def _emit(args, payload, text_lines):
    if getattr(args, "format", "text") == "structured":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


# --- reparam ------------------------------------------------------------------

def cmd_reparam(args):
    sig = io_formats.read_signal(args.input)
    result = reparam.ust(sig, samples=args.samples, strict=args.strict)
    io_formats.write_signal(result.resampled, args.output)
    # the warp itself is stored as a scalar signal tau(t) alongside
    warp_path = args.warp_out or args.output + ".warp"
    io_formats.write_signal(Signal(result.warp_star.values, scalar_space(),
                                   result.warp_star.grid), warp_path)
    _emit(args, {"total_length": result.total_length, "output": args.output,
                 "warp": warp_path, "samples": len(result.resampled)},
          [f"total_length {result.total_length:.17g}",
           f"wrote {args.output} and {warp_path}"])
    return 0


# --- compare ------------------------------------------------------------------

def cmd_compare(args):
    a = io_formats.read_signal(args.a)
    b = io_formats.read_signal(args.b)
    if args.method == "raw":
        report = matching.pointwise_distance(a, b)
    elif args.method == "ust":
        report = matching.ust_distance(a, b)
    else:
        report = matching.dtw_distance(a, b, keep_path=not args.no_path)
    if args.report:
        io_formats.write_report(report, args.report, format="structured")
    _emit(args, {"method": report.method, "distance": report.distance},
          [f"method {report.method}", f"distance {report.distance:.17g}"])
    return 0


# --- classify -----------------------------------------------------------------

def _load_query_and_templates(args):
    names = sorted(os.listdir(args.templates))
    if any(n.endswith(".traj.json") for n in names):
        load = io_formats.read_trajectory
        entries = [n for n in names if n.endswith(".traj.json")]
        strip = ".traj.json"
    else:
        load = io_formats.read_signal
        entries = [n for n in names if n.endswith(".sig")]
        strip = ".sig"
    if not entries:
        raise UstAlignError(f"no templates in {args.templates}")
    templates = [(n[: -len(strip)], load(os.path.join(args.templates, n)))
                 for n in entries]
    return load(args.query), templates


def cmd_classify(args):
    query, templates = _load_query_and_templates(args)
    if isinstance(query, matching.BodyTrajectory):
        label, score, scores = matching.classify_trajectory(
            query, templates, quotient=args.quotient, method=args.method,
            step=args.step)
    else:
        if args.quotient != "none":
            raise UstAlignError("quotient applies only to trajectory inputs")
        label, score, scores = matching.classify_nearest(
            query, templates, method=args.method)
    lines = [f"label {label}", f"score {score:.17g}"] + [
        f"  {name} {value:.17g}" for name, value in scores
    ]
    _emit(args, {"label": label, "score": score,
                 "scores": [[n, v] for n, v in scores]}, lines)
    return 0


# --- bench --------------------------------------------------------------------

def cmd_bench(args):
    print(f"# ustalign bench  seed={args.seed}  repeat={args.repeat}")
    payload = {"seed": args.seed, "repeat": args.repeat}
    for method, sizes in (("ust", args.sizes), ("dtw", args.dtw_sizes)):
        rows, slope = bench.run_bench(method, sizes, repeat=args.repeat, seed=args.seed)
        payload[method] = {"rows": rows, "slope": slope}
        for n, t in rows:
            print(f"{method}  n={n:<9d} median={t:.6f}s")
        print(f"{method}  fitted log-log slope {slope:.3f}")
    if args.format == "structured":
        print(json.dumps(payload, sort_keys=True))
    return 0


# --- demo ---------------------------------------------------------------------

def cmd_demo(args):
    print(f"# ustalign demo action-recognition  seed={args.seed}  "
          f"samples={args.samples}  instances={args.instances}  noise={args.noise}")
    templates, queries = demo.gesture_corpus(
        seed=args.seed, instances=args.instances, n=args.samples, noise=args.noise)

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, traj in templates:
            io_formats.write_trajectory(traj, os.path.join(args.out, f"template_{name}"))
        for idx, (name, traj) in enumerate(queries):
            io_formats.write_trajectory(
                traj, os.path.join(args.out, f"query_{idx:03d}_{name}"))

    table = {}
    for method in ("ust", "dtw"):
        correct = 0
        for true_label, q in queries:
            label, _, _ = matching.classify_trajectory(
                q, templates, quotient="relative", method=method)
            correct += label == true_label
        table[method] = correct / len(queries)
        print(f"accuracy quotient=relative method={method}: "
              f"{correct}/{len(queries)} = {table[method]:.3f}")
    if args.out:
        with open(os.path.join(args.out, "accuracy.json"), "w", newline="") as fh:
            json.dump({"seed": args.seed, "accuracy": table}, fh, sort_keys=True)
            fh.write("\n")
    return 0


# --- verify -------------------------------------------------------------------

class _Checks:
    def __init__(self, tol_scale):
        self.tol_scale = tol_scale
        self.failures = 0

    def check(self, name, value, threshold, kind="max"):
        threshold = threshold * self.tol_scale
        ok = value <= threshold if kind == "max" else value >= threshold
        sign = "<=" if kind == "max" else ">="
        print(f"{'PASS' if ok else 'FAIL'} {name:<44s} {value:.3e} {sign} {threshold:.3e}")
        self.failures += 0 if ok else 1


def _verify_theorem1(c, grid, seed, cases):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for k in range(cases):
        scalar = k % 2 == 0
        sig = (smooth_scalar_signal(seed + k, grid) if scalar
               else smooth_se3_signal(seed + k, grid))
        cand = smooth_warp(seed + 1000 + k, grid, strength=float(rng.uniform(0.2, 0.8)))
        res = reparam.ust(sig)
        j_opt = reparam.functional_cost(sig, res.warp_star)
        j_cand = reparam.functional_cost(sig, cand)
        worst = max(worst, (j_opt - j_cand * (1 + 1e-6) - 1e-9))
    c.check("theorem1.global_optimality_margin", worst, 0.0)

    t = TimeGrid(grid).times
    from .metric_spaces import Signal, scalar_space
    sig = Signal(t * t, scalar_space())
    res = reparam.ust(sig)
    c.check("theorem1.analytic_tau_sup_error",
            float(np.max(np.abs(res.warp_star.values - np.sqrt(t)))), 1e-3)
    c.check("theorem1.analytic_total_length", abs(res.total_length - 1.0), 1e-4)

    t2 = TimeGrid(2 * (grid - 1) + 1).times
    res2 = reparam.ust(Signal(t2 * t2, scalar_space()))
    e1 = float(np.max(np.abs(res.warp_star.values - np.sqrt(t))))
    e2 = float(np.max(np.abs(res2.warp_star.values - np.sqrt(t2))))
    c.check("theorem1.halving_error_ratio", e1 / e2, 1.8, kind="min")

    worst = 0.0
    for k in range(100):
        f = np.abs(np.random.default_rng(seed + k).normal(size=grid - 1)) + 0.1
        h = 1.0 / (grid - 1)
        worst = max(worst, (np.sum(f) * h) ** 2 - np.sum(f * f) * h)
    c.check("theorem1.cauchy_schwarz_margin", worst, 1e-12)

    form = vb.Theorem1Form(g=lambda x: 4 * x * x, dg=lambda x: 8 * x)
    r_coarse = vb.el_residual(form, np.sqrt(TimeGrid(grid).times))
    r_fine = vb.el_residual(form, np.sqrt(t2))
    c.check("theorem1.el_residual_convergence", r_coarse / r_fine, 1.8, kind="min")


def _random_bootstrap_problem(seed, n):
    rng = np.random.default_rng(seed)
    a1, a2 = rng.uniform(0.2, 0.8, 2)
    p1, p2 = rng.uniform(0, 2 * np.pi, 2)
    g = lambda x: 1.0 + a1 * np.sin(2 * np.pi * x + p1) ** 2 + a2 * x * x
    coup = lambda x: np.array([a2 * np.cos(2 * x + p2) + a1 * x])
    w_val = float(rng.uniform(0.5, 3.0))
    weight = lambda t: np.broadcast_to(w_val * np.eye(1), (len(t), 1, 1))
    return vb.BootstrapProblem(g, coup, weight, 1,
                               [float(rng.uniform(-1, 1))],
                               [float(rng.uniform(1, 2))], n_samples=n), w_val


def _verify_theorem2(c, grid, seed):
    worst_gain = -np.inf
    worst_res = 0.0
    worst_coupling = 0.0
    for k in range(20):
        problem, w_val = _random_bootstrap_problem(seed + k, grid)
        sol = vb.bootstrap_solution(problem)
        base = vb.bootstrap_cost(problem, sol.x_star, sol.s_star)
        worst_res = max(worst_res, vb.el_residual(problem, sol.x_star, sol.s_star))
        expected = 0.5 * float(sol.a[0] ** 2) / w_val
        worst_coupling = max(worst_coupling,
                             abs(vb.coupling_cost(problem, sol.x_star, sol.s_star) - expected))
        for j in range(5):
            bump_x = smooth_bump(seed + 31 * k + j, grid,
                                 amplitude=float(np.random.default_rng(seed + j).uniform(0.02, 0.08)))
            bump_s = smooth_bump(seed + 57 * k + j, grid, amplitude=0.1)
            cost = vb.bootstrap_cost(problem, sol.x_star + bump_x,
                                     sol.s_star + bump_s[:, None])
            worst_gain = max(worst_gain, base - cost)
    c.check("theorem2.perturbation_gain", worst_gain, 1e-9)
    c.check("theorem2.composite_el_residual", worst_res, 1e-6)
    c.check("theorem2.coupling_cost_identity", worst_coupling, 1e-8)


def _verify_theorem3(c, grid, seed):
    scenes = [
        ("bunched", varglobal.bunched_motion_scene(tau_samples=grid)),
        ("pulsing_se2", varglobal.pulsing_scene(seed=7, tau_samples=grid)),
    ]
    rng = np.random.default_rng(seed)
    for name, scene in scenes:
        seq = varglobal.theorem3_pipeline(scene)
        lag = seq.lagrangian
        c.check(f"theorem3.{name}.ep_free_residual",
                varglobal.ep_equation_residual(lag, seq.xi1_star), 1e-12)
        raw_schur = 0.5 * (lag.c - np.einsum(
            "ti,ti->t", lag.b, np.linalg.solve(lag.m, lag.b[..., None])[..., 0]))
        c.check(f"theorem3.{name}.schur_min", -float(np.min(raw_schur)), 1e-12)

        fine = varglobal.theorem3_pipeline(_rescaled_scene(scene, 2 * (grid - 1) + 1))
        r1c, r2c = varglobal.coupled_residuals(lag, seq.xi_combined, seq.tau2_star)
        r1f, r2f = varglobal.coupled_residuals(fine.lagrangian, fine.xi_combined,
                                               fine.tau2_star)
        c.check(f"theorem3.{name}.r1_halving_ratio", r1c / r1f, 1.8, kind="min")
        c.check(f"theorem3.{name}.r2_halving_ratio", r2c / r2f, 1.8, kind="min")

        c_seq = varglobal.group_flow_cost(lag, seq.xi_combined, seq.tau2_star)
        worst = -np.inf
        for k in range(50):
            w = smooth_warp(seed + 11 * k, grid, strength=float(rng.uniform(0.2, 0.7)))
            noise = np.stack(
                [smooth_bump(seed + 13 * k + d, grid, amplitude=0.4)
                 for d in range(lag.dim)], axis=1)
            cand_cost = varglobal.group_flow_cost(lag, seq.xi_combined + noise, w)
            worst = max(worst, c_seq - cand_cost)
        c.check(f"theorem3.{name}.sequential_cost_margin", worst, 1e-12)

        xi_r = rng.normal(size=(grid, lag.dim))
        td = rng.uniform(0.5, 1.5, grid)
        c.check(f"theorem3.{name}.completed_square",
                varglobal.completed_square_identity(lag, xi_r, td), 1e-12)


def _rescaled_scene(scene, tau_samples):
    return varglobal.GaussianBlobScene(
        scene.center_x, scene.center_y, scene.amplitude, scene.width,
        extent=scene.extent, grid=scene.grid, tau_samples=tau_samples,
        group_name=scene.group_name)


def cmd_verify(args):
    known = {"theorem1", "theorem2", "theorem3"}
    picks = args.theorems or sorted(known)
    unknown = set(picks) - known
    if unknown:
        raise UstAlignError(f"unknown theorem name(s): {sorted(unknown)}")
    tol_scale = float(os.environ.get("USTALIGN_TOL_SCALE", "1"))
    print(f"# ustalign verify  seed={args.seed}  grid={args.grid}  "
          f"tol_scale={tol_scale}")
    c = _Checks(tol_scale)
    if "theorem1" in picks:
        _verify_theorem1(c, args.grid, args.seed, args.cases)
    if "theorem2" in picks:
        _verify_theorem2(c, min(args.grid, 2001), args.seed)
    if "theorem3" in picks:
        # scene residual convergence is asymptotic only from ~257 tau samples
        _verify_theorem3(c, min(max(args.grid, 257), 513), args.seed)
    print(f"# {c.failures} failure(s)")
    return 1 if c.failures else 0


# --- entry point ---------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ustalign",
                                description="Universal-standard-timescale signal alignment")
    p.add_argument("--version", action="version", version=f"ustalign {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("reparam", help="reparameterize a signal onto the UST")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--warp-out", default=None)
    sp.add_argument("--strict", action="store_true")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=cmd_reparam)

    sp = sub.add_parser("compare", help="distance between two signals")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--method", choices=("raw", "ust", "dtw"), default="ust")
    sp.add_argument("--no-path", action="store_true")
    sp.add_argument("--report", default=None)
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("classify", help="nearest-template classification")
    sp.add_argument("--query", required=True)
    sp.add_argument("--templates", required=True)
    sp.add_argument("--method", choices=("raw", "ust", "dtw"), default="ust")
    sp.add_argument("--quotient", choices=("relative", "screw", "none"),
                    default="relative")
    sp.add_argument("--step", type=int, default=1,
                    help="delta lag for the screw quotient")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("bench", help="runtime scaling of ust vs dtw")
    sp.add_argument("--sizes", type=int, nargs="+", default=None)
    sp.add_argument("--dtw-sizes", type=int, nargs="+", default=None)
    sp.add_argument("--repeat", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("demo", help="synthetic action-recognition demo")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--samples", type=int, default=120)
    sp.add_argument("--instances", type=int, default=5)
    sp.add_argument("--noise", type=float, default=0.01)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_demo)

    sp = sub.add_parser("verify", help="numerical verification of the theorems")
    sp.add_argument("theorems", nargs="*",
                    help="any of theorem1 theorem2 theorem3 (default all)")
    sp.add_argument("--grid", type=int, default=2001,
                    help="sample count for theorem1/2 suites; theorem3 scenes "
                         "run at their design resolution (clamped to 257..513)")
    sp.add_argument("--cases", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _DEGENERACY as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UstAlignError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
