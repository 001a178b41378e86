import json
import logging

from pydantic import ValidationError

from commands.study import print_conformity
from config import settings
from schemas.report_schema import JumpReport
from splinecomplex.catalog import load_geometry_file
from splinecomplex.errors import SplineComplexError
from splinecomplex.multipatch import build_global_space, global_interpolant, interface_jump, validate_conformity
from splinecomplex.solutions import get_solution, reference_function

logger = logging.getLogger(__name__)


def jump_reports(geometry, discretisations, seed: int):
    """Trace jumps of the global interpolant of a random smooth solution, per role and interface."""
    solution = get_solution("random", seed)
    reports = []
    for role in range(geometry.dim):
        space = build_global_space(geometry, role, discretisations)
        data = [reference_function(solution, patch, role) for patch in geometry.patches]
        field = global_interpolant(space, [d.values for d in data])
        for iface in geometry.interfaces:
            reports.append(JumpReport(interface=iface, role=role, jump=interface_jump(space, field, iface)))
    return reports


def cmd_interface_check(args) -> int:
    """
    Reports the conformity of every interface of a geometry file, then the
    value and trace jumps of interpolated fields across them.
    """
    try:
        geometry, discretisations = load_geometry_file(args.geometry_file)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        print(f"error: cannot load {args.geometry_file}: {exc}")
        return 2
    except SplineComplexError as exc:
        print(f"error: {exc.detail}")
        return 2

    report = validate_conformity(geometry, discretisations)
    print(f"{geometry.name}: {geometry.n_patches} patches, {len(geometry.interfaces)} interfaces")
    print_conformity(report)
    if not report.passed:
        print(f"FAIL: {len(report.failures())} non-conforming interfaces")
        return 1

    seed = settings.SEED if args.seed is None else args.seed
    try:
        jumps = jump_reports(geometry, discretisations, seed)
    except SplineComplexError as exc:
        print(f"error: {exc.detail}")
        return 1

    ok = True
    for r in jumps:
        if r.jump is None:
            continue
        passed = r.jump <= settings.INTERFACE_TOLERANCE
        ok &= passed
        print(f"  role {r.role} {r.interface}: jump {r.jump:.3e} {'ok' if passed else 'FAIL'}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def register(subparsers):
    parser = subparsers.add_parser("interface-check", help="check interface conformity of a geometry file")
    parser.add_argument("geometry_file", help="path to a geometry description")
    parser.set_defaults(func=cmd_interface_check)
    return parser
