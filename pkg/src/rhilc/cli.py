"""Command line front end.

    rhilc check   --config cfg.yaml
    rhilc run     --config cfg.yaml [--out DIR] [--seed N] [--ni N]
    rhilc sweep   --config cfg.yaml [--out DIR] [--seed N] [--ni 1,2,3]
    rhilc optimum --config cfg.yaml [--out DIR] [--ni N]

Exit codes: 0 on success, 1 on numerical or condition failure, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import parse_config
from .errors import ConfigError, DivergenceError, RhilcError
from .experiments import check_report, optimum_report, run_experiment, sweep_horizons


def _parse_ni(text):
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("--ni expects an integer or comma list")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("--ni values must be positive integers")
    return values


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rhilc",
        description="Receding-horizon iterative learning control experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "verify the stability and solvability conditions"),
        ("run", "run the closed loop and write trajectory/convergence/summary files"),
        ("sweep", "compare converged behavior across prediction horizon lengths"),
        ("optimum", "solve for the repeatable optimum and its residuals"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a YAML experiment config")
        p.add_argument("--out", default=None, help="output directory (default from config)")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--ni", type=_parse_ni, default=None,
                       help="override the horizon length (or comma list for sweep)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.seed is not None:
        config.seed = args.seed
        config.raw["seed"] = args.seed  # keep the summary's config echo honest
    if args.ni is not None:
        config.n_i = args.ni[0]
        config.n_i_sweep = args.ni
    out_dir = args.out if args.out is not None else config.output_dir

    try:
        if args.command == "check":
            report = check_report(config)
            print(f"spectral radius of A_z: {report['rho_A_z']:.12g} "
                  f"({'stable' if report['condition1_satisfied'] else 'UNSTABLE'})")
            print(f"min eigenvalue of Q_quad + W'W: {report['condition3_min_eigenvalue']:.12g} "
                  f"({'positive definite' if report['condition3_satisfied'] else 'NOT positive definite'})")
            return 0 if report["all_satisfied"] else 1

        if args.command == "run":
            summary = run_experiment(config, out_dir)
            dist = summary["distance_z_inf_to_z_opt"]
            print(f"wrote trajectory.csv, convergence.csv, summary.json to {out_dir}")
            print(f"rho(A_z) = {summary['rho_A_z']:.12g}")
            if dist is not None:
                print(f"||z_inf - z_opt|| = {dist:.12g}")
            return 0

        if args.command == "sweep":
            rows = sweep_horizons(config, out_dir)
            print(f"wrote sweep.csv to {out_dir}")
            for r in rows:
                dist = r["distance_z_inf_to_z_opt"]
                dist_text = "n/a" if dist is None else f"{dist:.12g}"
                print(f"  n_i={r['n_i']}: rho={r['rho_A_z']:.6g} "
                      f"||z_inf - z_opt||={dist_text}")
            if any(r["distance_z_inf_to_z_opt"] is None for r in rows):
                return 1
            return 0

        if args.command == "optimum":
            report = optimum_report(config, out_dir)
            print(f"wrote optimum.json to {out_dir}")
            print(f"min eigenvalue of Q_quad + W'W: {report['condition3_min_eigenvalue']:.12g}")
            if not report["condition3_satisfied"] or report["z_opt"] is None:
                print("condition for a well-posed optimum is violated", file=sys.stderr)
                return 1
            print(f"repeatability residual: {report['repeatability_residual']:.12g}")
            return 0
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 1
    except RhilcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
