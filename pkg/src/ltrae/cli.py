"""Command-line front end: ``ltrae <subcommand> [flags]``.

Every subcommand prints a JSON summary on stdout.  With ``--out DIR`` the
data files are also written there (atomically); each one embeds the
resolved run configuration together with its hash.

Exit codes: 0 success / certified, 1 invalid input, 2 not converged or not
certified, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import decoding_curve
from .bounds import PI_OVER_4, d2_closed_form, lower_bound_gap, solve_d2
from .core import DegreeDistribution
from .errors import LTRAEError, ValidationError
from .io import dumps_json, trajectory_rows, write_csv, write_decoding_curve, write_json
from .optimizer import (KKT_TOL, SolverConfig, kkt_certificate, optimize_degree_distribution,
                        result_dist_from_dict)
from .quadrature import DEFAULT_ORDER, build_composite_rule
from .simulator import ARRIVAL_MODELS, average_decoding_curve, estimate_rae

EXIT_OK, EXIT_INVALID, EXIT_UNCERTIFIED, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("ltrae")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; here 2 means "not certified"
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    command: str
    params: dict
    version: str = __version__
    config_hash: str = field(default="", init=False)

    def __post_init__(self):
        blob = json.dumps({"command": self.command, "params": self.params,
                           "version": self.version}, sort_keys=True)
        self.config_hash = hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return asdict(self)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _add_solver_flags(p):
    p.add_argument("--quad-order", type=_positive_int, default=DEFAULT_ORDER,
                   help="Gauss-Legendre nodes per quadrature panel (default %(default)s)")
    p.add_argument("--tol", type=_positive_float, default=KKT_TOL,
                   help="KKT residual tolerance (default %(default)s)")


def _add_out(p):
    p.add_argument("--out", type=Path, metavar="DIR",
                   help="directory for data files; nothing is written without it")


def _add_source(p, required=False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--d", type=_positive_int, help="use the optimal distribution for this max degree")
    g.add_argument("--dist", type=Path, metavar="FILE", help="distribution JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ltrae", description="Optimal LT degree distributions for random access.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="optimal distribution for one max degree d")
    p.add_argument("--d", type=_positive_int, required=True, help="maximum degree (>= 2)")
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("sweep", help="optimal objective over a log-spaced list of d")
    p.add_argument("--d", type=_positive_int, nargs="+", help="explicit d values (overrides the grid)")
    p.add_argument("--d-max", type=_positive_int, default=1000, help="largest d of the grid (default %(default)s)")
    p.add_argument("--points", type=_positive_int, default=12, help="grid size (default %(default)s)")
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("curve", help="asymptotic decoding curve r -> 1 - s(r, p)")
    _add_source(p, required=True)
    p.add_argument("--r-max", type=_positive_float, help="right end of the r grid (default: curve below 1e-8)")
    p.add_argument("--points", type=_positive_int, default=501, help="grid size (default %(default)s)")
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("simulate", help="Monte Carlo decoding trajectories at finite k")
    _add_source(p, required=True)
    p.add_argument("--k", type=_positive_int, required=True, help="number of information symbols")
    p.add_argument("--trials", type=_positive_int, default=200, help="number of trials (default %(default)s)")
    p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    p.add_argument("--arrival", choices=ARRIVAL_MODELS, default="sequential",
                   help="arrival model (default %(default)s)")
    p.add_argument("--r-max", type=_positive_float, default=3.0, help="trajectory grid end (default %(default)s)")
    p.add_argument("--points", type=_positive_int, default=301, help="trajectory grid size (default %(default)s)")
    p.add_argument("--workers", type=_positive_int, default=1, help="worker processes (default %(default)s)")
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("d2", help="closed-form d = 2 optimum and its match to the optimizer")
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("verify", help="KKT certificate and lower-bound gap of a distribution file")
    p.add_argument("file", nargs="?", type=Path, help="distribution JSON (same as --dist)")
    p.add_argument("--dist", type=Path, metavar="FILE", help="distribution JSON file")
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("bound", help="pi/4 lower bound and the gap f(p) - pi/4")
    _add_source(p, required=False)
    _add_solver_flags(p)
    _add_out(p)
    return parser


# --------------------------------------------------------------------------- #

def _solver(args) -> SolverConfig:
    return SolverConfig(quad_order=args.quad_order, kkt_tol=args.tol)


def _load_dist(path: Path) -> DegreeDistribution:
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}, "
                              f"column {exc.colno}: {exc.msg}") from exc
    # optimize output stores p as a sparse degree -> value map
    if isinstance(data, dict) and isinstance(data.get("p"), dict):
        try:
            return result_dist_from_dict(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: bad result file field: {exc}") from exc
    try:
        return DegreeDistribution.from_dict(data)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _resolve(args, solver):
    """(distribution, description dict, optimization result or None)."""
    if getattr(args, "dist", None) is not None:
        dist = _load_dist(args.dist)
        return dist, {"dist": dist.to_dict()}, None
    res = optimize_degree_distribution(args.d, solver)
    if not res.converged:
        log.warning("optimizer did not certify d=%d: %s", args.d, res.message)
    return res.dist, {"d": args.d}, res


def _emit(summary: dict):
    sys.stdout.write(dumps_json(summary))


def cmd_optimize(args) -> int:
    solver = _solver(args)
    run = RunConfig("optimize", {"d": args.d, "solver": solver.to_dict()})
    res = optimize_degree_distribution(args.d, solver)
    out = res.to_dict()
    out["run"] = run.to_dict()
    if args.out:
        write_json(args.out / f"optimize_d{args.d}.json", out)
    _emit(out)
    if not res.converged:
        print(f"not certified: {res.message}; residual {res.residual:.3e}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    return EXIT_OK


def sweep_grid(d_max: int, points: int) -> list[int]:
    """Log-spaced integers in [2, d_max]; d = 10 is always included when in range."""
    if d_max < 2:
        raise UsageError("--d-max must be at least 2")
    grid = {int(round(x)) for x in np.geomspace(2, d_max, points)}
    grid |= {2, d_max}
    if d_max >= 10:
        grid.add(10)
    return sorted(grid)


def cmd_sweep(args) -> int:
    solver = _solver(args)
    ds = sorted(set(args.d)) if args.d else sweep_grid(args.d_max, args.points)
    if ds[0] < 2:
        raise UsageError("every d must be at least 2")
    run = RunConfig("sweep", {"d": ds, "solver": solver.to_dict()})
    rows, flagged = [], []
    for d in ds:
        res = optimize_degree_distribution(d, solver)
        log.info("d=%d f=%.10f residual=%.2e", d, res.objective, res.residual)
        rows.append((d, res.objective, res.residual, res.theorem2_ok))
        if not res.converged:
            flagged.append(d)
            print(f"d={d} not certified: {res.message}", file=sys.stderr)
    summary = {"pi_over_4": PI_OVER_4, "not_converged": flagged,
               "rows": [dict(zip(("d", "objective", "residual", "theorem2_ok"), r)) for r in rows],
               "run": run.to_dict()}
    if args.out:
        write_csv(args.out / "sweep.csv", ["d", "objective", "residual", "theorem2_ok"],
                  [(d, f, r, str(ok).lower()) for d, f, r, ok in rows])
        write_json(args.out / "sweep.json", summary)
    _emit(summary)
    return EXIT_UNCERTIFIED if flagged else EXIT_OK


def cmd_curve(args) -> int:
    solver = _solver(args)
    dist, src, _ = _resolve(args, solver)
    run = RunConfig("curve", {**src, "r_max": args.r_max, "points": args.points,
                              "solver": solver.to_dict()})
    curve = decoding_curve(dist, r_max=args.r_max, n_points=args.points, rule=solver.rule())
    summary = {"area": curve.area, "monotone": curve.monotone,
               "r_max": float(curve.r_grid[-1]), "points": int(curve.r_grid.size),
               "run": run.to_dict()}
    if args.out:
        stem = f"curve_d{args.d}" if args.d else f"curve_{args.dist.stem}"
        write_decoding_curve(args.out / f"{stem}.csv", curve, extra={"run": run.to_dict()})
    _emit(summary)
    return EXIT_OK


def cmd_simulate(args) -> int:
    solver = _solver(args)
    dist, src, _ = _resolve(args, solver)
    run = RunConfig("simulate", {**src, "k": args.k, "trials": args.trials, "seed": args.seed,
                                 "arrival": args.arrival, "r_max": args.r_max,
                                 "points": args.points, "solver": solver.to_dict()})
    r_grid = np.linspace(0.0, args.r_max, args.points)
    keep = args.out is not None
    if args.arrival == "sequential":
        stats = estimate_rae(dist, args.k, args.trials, args.seed, r_grid=r_grid,
                             keep_trajectories=keep, workers=args.workers)
    else:
        stats = average_decoding_curve(dist, args.k, args.trials, r_grid, args.seed,
                                       arrival_model="poissonized", keep_trajectories=keep,
                                       workers=args.workers)
    summary = stats.to_dict()
    summary["run"] = run.to_dict()
    if args.out:
        stem = f"simulate_{args.arrival}_k{args.k}"
        write_csv(args.out / f"{stem}_trajectories.csv", ["trial", "r", "undecoded"],
                  trajectory_rows(stats))
        write_csv(args.out / f"{stem}_mean.csv", ["r", "undecoded", "stderr"],
                  zip(stats.r_grid.tolist(), stats.mean_undecoded.tolist(),
                      stats.stderr_undecoded.tolist()))
        write_json(args.out / f"{stem}_stats.json", summary)
    _emit(summary)
    return EXIT_OK


def cmd_d2(args) -> int:
    solver = _solver(args)
    run = RunConfig("d2", {"solver": solver.to_dict()})
    p1, p2, f = solve_d2()
    cf = d2_closed_form(p2)
    res = optimize_degree_distribution(2, solver)
    summary = {
        "closed_form": {"p1": p1, "p2": p2, "f": f, "neg_df_dp1": cf.neg_df_dp1},
        "optimizer": {"p1": res.dist[1], "p2": res.dist[2], "f": res.objective,
                      "residual": res.residual, "converged": res.converged},
        "max_abs_diff": max(abs(p1 - res.dist[1]), abs(p2 - res.dist[2]),
                            abs(f - res.objective)),
        "run": run.to_dict(),
    }
    if args.out:
        write_json(args.out / "d2.json", summary)
    _emit(summary)
    return EXIT_OK if res.converged else EXIT_UNCERTIFIED


def cmd_verify(args) -> int:
    path = args.dist or args.file
    if path is None:
        raise UsageError("verify needs a distribution file (positional or --dist)")
    if args.dist and args.file:
        raise UsageError("give the distribution file once")
    solver = _solver(args)
    dist = _load_dist(path)
    rule = solver.rule()
    cert = kkt_certificate(dist, rule=rule, tol=solver.kkt_tol)
    run = RunConfig("verify", {"dist": dist.to_dict(), "solver": solver.to_dict()})
    summary = {
        "passing": cert.passing, "objective": cert.objective, "lambda": cert.lam,
        "residual_support": cert.residual_support,
        "residual_off_support": cert.residual_off_support,
        "complementary_slackness": cert.complementary_slackness,
        "lower_bound_gap": cert.objective - PI_OVER_4,
        "support": list(cert.support), "run": run.to_dict(),
    }
    if args.out:
        write_json(args.out / f"verify_{path.stem}.json", summary)
    _emit(summary)
    return EXIT_OK if cert.passing else EXIT_UNCERTIFIED


def cmd_bound(args) -> int:
    solver = _solver(args)
    summary = {"pi_over_4": PI_OVER_4}
    params = {"solver": solver.to_dict()}
    if args.d is not None or args.dist is not None:
        dist, src, _ = _resolve(args, solver)
        params.update(src)
        gap = lower_bound_gap(dist, build_composite_rule(args.quad_order))
        summary.update({"objective": gap + PI_OVER_4, "gap": gap, "holds": gap >= -1e-9})
    summary["run"] = RunConfig("bound", params).to_dict()
    if args.out:
        write_json(args.out / "bound.json", summary)
    _emit(summary)
    return EXIT_OK


COMMANDS = {"optimize": cmd_optimize, "sweep": cmd_sweep, "curve": cmd_curve,
            "simulate": cmd_simulate, "d2": cmd_d2, "verify": cmd_verify, "bound": cmd_bound}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, LTRAEError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
