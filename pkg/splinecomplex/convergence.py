"""Dyadic refinement studies and estimated orders of convergence."""
import csv
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from config import settings
from schemas.study_schema import ConvergenceRecord, NormSummary, StudyConfig, StudySummary
from splinecomplex.analysis import applicable_norms, error_norms, l2_project
from splinecomplex.catalog import geometry_catalog
from splinecomplex.errors import ConfigError, GeometryError
from splinecomplex.multipatch import (
    PatchDiscretisation,
    as_multipatch,
    build_global_space,
    global_commuting_residual,
    global_interpolant,
)
from splinecomplex.solutions import discrete_reference, get_solution, reference_function

logger = logging.getLogger(__name__)

PROJECTOR_KINDS = {"tilde-interpolant": "tilde", "plain-interpolant": "plain", "l2-projection": "tilde"}
EXACT_THRESHOLD = 1e-10


def theoretical_order(role: int, norm: str, degree: int) -> float:
    """Saturated order for smooth solutions; ``degree`` is the smallest primal degree."""
    if role == 0 and norm == "L2":
        return degree + 1
    return degree


def _initial_discretisation(config: StudyConfig, dim: int) -> PatchDiscretisation:
    if config.initial_knots is not None:
        if len(config.initial_knots) != dim:
            raise ConfigError(f"need {dim} initial knot vectors, got {len(config.initial_knots)}")
        return PatchDiscretisation(knots=tuple(config.initial_knots))
    if len(config.degrees) not in (1, dim):
        raise ConfigError(f"need 1 or {dim} degrees, got {len(config.degrees)}")
    return PatchDiscretisation.uniform(dim, config.degrees, config.initial_elements)


def run_study(config: StudyConfig) -> List[ConvergenceRecord]:
    seed = settings.SEED if config.seed is None else config.seed
    try:
        geometry = as_multipatch(geometry_catalog(config.geometry))
    except GeometryError as exc:
        raise ConfigError(exc.detail) from exc
    dim, role = geometry.dim, config.role
    if role > dim:
        raise ConfigError(f"role {role} does not exist on the {dim}D geometry {config.geometry}")
    for norm in config.norms:
        if norm not in applicable_norms(dim, role):
            raise ConfigError(f"norm {norm} does not apply to {dim}D role {role}")
    if config.projector == "plain-interpolant" and geometry.n_patches > 1:
        raise ConfigError("the plain interpolant is not conforming across patches; use a single patch")
    kind = PROJECTOR_KINDS[config.projector]

    base = _initial_discretisation(config, dim)
    initial = [base.refined(config.patch_refinements.get(j, 0)) for j in range(geometry.n_patches)]

    if config.solution == "discrete":
        # the coarsest interpolant of a smooth solution is reproduced on every finer level
        smooth = get_solution("sine-product", seed)
        space0 = build_global_space(geometry, role, initial)
        coarse = global_interpolant(space0, [reference_function(smooth, p, role) for p in geometry.patches], kind)
        exact = [discrete_reference(f) for f in coarse.patch_fields()]
        solution = None
    else:
        solution = get_solution(config.solution, seed)
        if not solution.smooth:
            logger.warning("solution %s has limited regularity; its rates are reported, not asserted", solution.name)
        exact = [reference_function(solution, p, role) for p in geometry.patches]

    records = []
    for level in range(config.levels):
        discs = [d.refined(level) for d in initial]
        space = build_global_space(geometry, role, discs)
        interpolant = global_interpolant(space, [e.values for e in exact], kind)
        reference_errors = None
        if config.projector == "l2-projection":
            approx = l2_project(space, [e.values for e in exact])
            reference_errors = error_norms(interpolant, exact, config.norms)
        else:
            approx = interpolant
        errors = error_norms(approx, exact, config.norms)

        residual = None
        if solution is not None:
            start = role if role < dim else role - 1
            residual = global_commuting_residual(geometry, discs, solution, kind, roles=[start])[
                f"{start}->{start + 1}"
            ]
        h = max(d.mesh_size for d in discs)
        records.append(ConvergenceRecord(
            level=level, h=h, errors=errors, commuting_residual=residual, reference_errors=reference_errors,
        ))
        logger.info("%s level %d h=%.4g %s", config.name, level, h,
                    " ".join(f"{k}={v:.3e}" for k, v in errors.items()))
        if reference_errors is not None:
            for norm, e in errors.items():
                if e > 0:
                    logger.info("  interpolant/projection %s ratio %.3f", norm, reference_errors[norm] / e)
    return records


def estimate_rates(records: Sequence[ConvergenceRecord], norms: Optional[Sequence[str]] = None) -> Dict[str, List[float]]:
    """EOC ``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` per norm; NaN where an error vanishes."""
    if len(records) < 2:
        raise ConfigError("rate estimation needs at least 2 records")
    norms = list(records[0].errors) if norms is None else list(norms)
    rates: Dict[str, List[float]] = {}
    for norm in norms:
        out = []
        for a, b in zip(records[:-1], records[1:]):
            ea, eb = a.errors[norm], b.errors[norm]
            if ea == 0.0 or eb == 0.0:
                out.append(math.nan)
            else:
                out.append(math.log(ea / eb) / math.log(a.h / b.h))
        rates[norm] = out
    return rates


def summarize(config: StudyConfig, records: Sequence[ConvergenceRecord]) -> StudySummary:
    seed = settings.SEED if config.seed is None else config.seed
    rates = estimate_rates(records, config.norms)
    degree = min(config.degrees) if config.initial_knots is None else min(kv.degree for kv in config.initial_knots)
    smooth = config.solution == "discrete" or get_solution(config.solution, seed).smooth

    norms = {}
    for norm in config.norms:
        expected = theoretical_order(config.role, norm, degree)
        values = rates[norm]
        final = values[-1]
        if config.solution == "discrete":
            exact = all(r.errors[norm] <= EXACT_THRESHOLD for r in records)
            status = "exact" if exact else "fail"
        elif all(math.isnan(v) for v in values):
            status = "exact"
        elif not smooth:
            status = "not-asserted"
        else:
            status = "pass" if abs(final - expected) <= settings.RATE_TOLERANCE else "fail"
        norms[norm] = NormSummary(
            expected_order=expected,
            rates=[None if math.isnan(v) else v for v in values],
            final_rate=None if math.isnan(final) else final,
            status=status,
        )

    residuals = [r.commuting_residual for r in records if r.commuting_residual is not None]
    max_residual = max(residuals) if residuals else None
    passed = all(s.status != "fail" for s in norms.values()) and (
        max_residual is None or max_residual < settings.COMMUTING_TOLERANCE
    )
    return StudySummary(
        name=config.name, seed=seed, config=config, records=list(records),
        norms=norms, max_commuting_residual=max_residual, passed=passed,
    )


def write_csv(records: Sequence[ConvergenceRecord], norms: Sequence[str], path: Path):
    rates = estimate_rates(records, norms)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "h"] + list(norms) + [f"rate_{n}" for n in norms] + ["commuting_residual"])
        for i, record in enumerate(records):
            row_rates = []
            for n in norms:
                if i == 0:
                    row_rates.append("")
                else:
                    r = rates[n][i - 1]
                    row_rates.append("exact" if math.isnan(r) else f"{r:.4f}")
            residual = "" if record.commuting_residual is None else f"{record.commuting_residual:.3e}"
            writer.writerow(
                [record.level, f"{record.h:.6g}"]
                + [f"{record.errors[n]:.6e}" for n in norms]
                + row_rates
                + [residual]
            )


def write_summary(summary: StudySummary, path: Path):
    Path(path).write_text(summary.model_dump_json(indent=2), encoding="utf-8")
