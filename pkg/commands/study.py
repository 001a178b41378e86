import json
import logging
from pathlib import Path

from pydantic import ValidationError

from config import settings
from schemas.study_schema import StudyConfig
from splinecomplex.convergence import run_study, summarize, write_csv, write_summary
from splinecomplex.errors import ConformityError, SplineComplexError

logger = logging.getLogger(__name__)


def load_study(path) -> StudyConfig:
    return StudyConfig.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))


def print_conformity(report):
    for r in report.interfaces:
        state = "ok" if r.passed else "FAIL"
        print(
            f"  {r.interface}: {state} (parametrisation {r.parametrisation_match}, "
            f"knots {r.knot_match}, degrees {r.degree_match}, deviation {r.max_deviation:.2e})"
        )


def cmd_study(args) -> int:
    """
    Runs one convergence study and writes ``<name>.csv`` and ``<name>.json``.
    Exit 0 when every asserted order is met, 1 on a rate or residual failure,
    2 when the configuration is invalid.
    """
    try:
        config = load_study(args.config)
        if args.seed is not None:
            config = config.model_copy(update={"seed": args.seed})
        records = run_study(config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {args.config}: {exc}")
        return 2
    except ValidationError as exc:
        print(f"error: invalid study configuration:\n{exc}")
        return 2
    except ConformityError as exc:
        print(f"error: {exc.detail}")
        if exc.report is not None:
            print_conformity(exc.report)
        return exc.exit_code
    except SplineComplexError as exc:
        print(f"error: {exc.detail}")
        return exc.exit_code

    summary = summarize(config, records)
    out = Path(args.out or settings.OUTPUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(records, config.norms, out / f"{config.name}.csv")
    write_summary(summary, out / f"{config.name}.json")

    print(f"{config.name}: {config.geometry}, role {config.role}, degrees {config.degrees}")
    print(f"{'level':>5} {'h':>10} " + " ".join(f"{n:>12}" for n in config.norms))
    for r in records:
        print(f"{r.level:>5} {r.h:>10.4g} " + " ".join(f"{r.errors[n]:>12.4e}" for n in config.norms))
    for norm, s in summary.norms.items():
        final = "-" if s.final_rate is None else f"{s.final_rate:.3f}"
        print(f"  {norm}: rate {final}, expected {s.expected_order}, {s.status}")
    if summary.max_commuting_residual is not None:
        print(f"  max commuting residual {summary.max_commuting_residual:.2e}")
    print("PASS" if summary.passed else "FAIL")
    logger.info("wrote %s", out)
    return 0 if summary.passed else 1


def register(subparsers):
    parser = subparsers.add_parser("study", help="run a convergence study from a JSON configuration")
    parser.add_argument("config", help="path to a study configuration")
    parser.add_argument("--out", default=None, help="output directory (default: settings OUTPUT_DIR)")
    parser.set_defaults(func=cmd_study)
    return parser
