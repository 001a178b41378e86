import argparse
import logging
import sys

from pydantic import ValidationError

from commands import geometries, interface, study, verify
from config import settings
from splinecomplex.errors import SplineComplexError

logger = logging.getLogger("splinecomplex")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splinecomplex",
        description="Multipatch spline de Rham complexes, commuting quasi-interpolants and convergence studies.",
    )
    parser.add_argument("--seed", type=int, default=None, help="seed of randomized checks (default: settings SEED)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # add commands
    study.register(subparsers)
    verify.register(subparsers)
    interface.register(subparsers)
    geometries.register(subparsers)
    return parser


def configure_logging(verbose: int):
    level = {0: settings.LOG_LEVEL, 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}")
        return 2
    except SplineComplexError as exc:
        print(f"error: {exc.detail}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
