"""Command line entry point: ``couplestress run <config> [options]``."""

import argparse
import sys

from .config import ConfigError, load_config
from .geometry import GeometryError
from .poly_fields import DegreeError
from .ritz import IllConditionedError, IndefiniteFormError, SingularSystemError
from .scenarios import run_scenario

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def build_parser():
    parser = argparse.ArgumentParser(prog="couplestress",
                                     description="Couple stress traction verification scenarios")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config", help="path to the scenario .ini file")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help="output directory (default: [output] dir)")
    run.add_argument("--tol-scale", type=float, default=1.0,
                     help="multiply every upper-bound tolerance by this factor")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.tol_scale <= 0:
        print("error: --tol-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, seed=args.seed)
        out = args.out or cfg.output_dir
        report = run_scenario(cfg, out_dir=out, tol_scale=args.tol_scale)
    except (ConfigError, DegreeError, GeometryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularSystemError, IllConditionedError, IndefiniteFormError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    path = report.write(out)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: {c.actual:.3e} {c.kind} {c.tol:.1e}")
    print(f"report written to {path}")
    return EXIT_OK if report.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
