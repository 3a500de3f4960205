"""Command-line entry point.

Verbs: fig2b, oracle-compare, gate-demo, sweep, ensemble.
Exit codes: 0 pass, 1 numerical-acceptance failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import OUTPUT_ENV_VAR, load_config
from .errors import CavityGateError, ConfigError
from .experiments import EXPERIMENTS

EXIT_PASS = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitygate",
        description="Single-photon reflection off a two-emitter cavity: "
                    "analytic results, time-domain oracle runs, and "
                    "polarization-gate demonstrations.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, runner in EXPERIMENTS.items():
        p = sub.add_parser(name, help=runner.__doc__.splitlines()[0].lower()
                           if runner.__doc__ else None)
        p.add_argument("--config", metavar="PATH",
                       help="key = value configuration file")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="Monte-Carlo seed")
        p.add_argument("--out", default=None, metavar="DIR",
                       help=f"output directory (default ${OUTPUT_ENV_VAR} "
                            "or ./cavitygate-out)")
        p.add_argument("--traj", type=int, default=None, metavar="N",
                       help="number of stochastic trajectories")
        p.add_argument("--quiet", action="store_true", default=None,
                       help="suppress the result summary on stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "out_dir": args.out,
        "n_traj": args.traj,
        "quiet": args.quiet,
    }
    try:
        cfg = load_config(args.experiment, args.config, overrides)
        report = EXPERIMENTS[args.experiment](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CavityGateError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if not cfg.quiet:
        print(json.dumps({
            "experiment": report.name,
            "passed": report.passed,
            "verdicts": report.verdicts,
            "manifest": str(report.manifest),
            "files": [str(p) for p in report.files],
        }, indent=2, sort_keys=True))
    return EXIT_PASS if report.passed else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
