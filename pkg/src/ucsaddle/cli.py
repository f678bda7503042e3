"""Command line: ``ucsaddle solve|validate|scaling <config>``."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import ConfigError, load_config, output_dir, run_scaling, run_solve, run_validate
from .problem import ProblemError

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2


def _cmd_solve(args) -> int:
    cfg = load_config(args.config)
    report, _ = run_solve(cfg)
    print(f"converged={report.converged} outer_iterations={report.outer_iterations} "
          f"stationarity={report.final_stationarity:.3e} g={report.g_value:.10g}")
    print(f"report: {output_dir(cfg) / 'report.json'}")
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = run_validate(cfg, samples=args.samples)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_NONCONVERGED


def _cmd_scaling(args) -> int:
    cfg = load_config(args.config)
    grid = [v for v in args.grid.split(",") if v.strip()]
    summary = run_scaling(cfg, args.sweep, grid)
    text = json.dumps(summary, indent=2)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"scaling_{args.sweep}.json", "w") as fh:
        fh.write(text + "\n")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucsaddle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="run the two-level solver")
    p.add_argument("config")
    p.set_defaults(func=_cmd_solve)
    p = sub.add_parser("validate", help="check declared constants by sampling")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=500)
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("scaling", help="sweep a parameter and fit the scaling law")
    p.add_argument("config")
    p.add_argument("--sweep", required=True, choices=["epsilon", "target_gap"])
    p.add_argument("--grid", required=True, help="comma separated values")
    p.set_defaults(func=_cmd_scaling)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ProblemError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
