import logging

import numpy as np

from config import settings
from schemas.report_schema import ResidualReport
from splinecomplex.catalog import geometry_catalog
from splinecomplex.complex import build_complex, differential, random_field
from splinecomplex.errors import SplineComplexError
from splinecomplex.knots import KnotVector, make_knots, refine
from splinecomplex.multipatch import PatchDiscretisation, as_multipatch, global_commuting_residual
from splinecomplex.solutions import get_solution

logger = logging.getLogger(__name__)

DEFAULT_GEOMETRY = {2: "flat-square", 3: "unit-cube"}


def exactness_residuals(family, rng: np.random.Generator) -> dict:
    """``max |D(D f)|`` for random integer fields of every role with two successors."""
    out = {}
    for role in range(len(family) - 2):
        f = random_field(family[role], rng)
        out[f"{role}->{role + 2}"] = differential(differential(f)).max_abs()
    return out


def _knots(args, dim):
    if args.knots:
        interior = [float(t) for t in args.knots.split(",") if t.strip()]
        return [
            KnotVector(degree=p, knots=(0.0,) * (p + 1) + tuple(interior) + (1.0,) * (p + 1))
            for p in args.degree
        ]
    return [refine(make_knots(p, args.elements), args.levels) for p in args.degree]


def cmd_verify_complex(args) -> int:
    """
    Checks that the discrete sequence is a complex (exactly zero D∘D on
    integer fields) and that the quasi-interpolants commute with the complex
    operators on every patch of a catalog geometry.
    """
    geometry_name = args.geometry or DEFAULT_GEOMETRY[args.dim]
    try:
        geometry = as_multipatch(geometry_catalog(geometry_name))
        if geometry.dim != args.dim:
            print(f"error: {geometry_name} is {geometry.dim}D, not {args.dim}D")
            return 2
        if len(args.degree) == 1:
            args.degree = args.degree * args.dim
        if len(args.degree) != args.dim:
            print(f"error: need 1 or {args.dim} degrees")
            return 2
        knots = _knots(args, args.dim)
        family = build_complex(args.dim, args.degree, knots)
        seed = settings.SEED if args.seed is None else args.seed
        exact = exactness_residuals(family, np.random.default_rng(seed))
        disc = PatchDiscretisation(knots=tuple(knots))
        residuals = global_commuting_residual(geometry, disc, get_solution("sine-product"))
    except SplineComplexError as exc:
        print(f"error: {exc.detail}")
        return exc.exit_code

    ok = True
    print(f"{geometry_name}: degrees {args.degree}, {family[0].dimension} role-0 coefficients")
    for pair, value in exact.items():
        passed = value == 0.0
        ok &= passed
        print(f"  exactness {pair}: {value:.3e} {'ok' if passed else 'FAIL'}")
    for pair, value in residuals.items():
        passed = value < settings.COMMUTING_TOLERANCE
        ok &= passed
        print(f"  commuting {pair}: {value:.3e} {'ok' if passed else 'FAIL'}")
    report = ResidualReport(geometry=geometry_name, degrees=list(args.degree), residuals=residuals)
    logger.info("%s", report.model_dump_json())
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def register(subparsers):
    parser = subparsers.add_parser("verify-complex", help="check exactness and commuting diagrams")
    parser.add_argument("--dim", type=int, choices=(2, 3), default=2)
    parser.add_argument("--degree", type=int, nargs="+", default=[2], help="one degree, or one per axis")
    parser.add_argument("--elements", type=int, default=2, help="initial elements per axis")
    parser.add_argument("--levels", type=int, default=1, help="dyadic refinements of the initial mesh")
    parser.add_argument("--knots", default=None, help="comma separated interior knots, overrides --elements")
    parser.add_argument("--geometry", default=None, help="catalog geometry (default: flat-square / unit-cube)")
    parser.set_defaults(func=cmd_verify_complex)
    return parser
