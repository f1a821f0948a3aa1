"""
One handler per subcommand.

A handler takes the RunConfig and returns ``(exit_code, report)``. The report
is either JSON-ready data or, for CSV output, the finished text. Reports that
describe a configuration or polygon carry it at top level, so ``--output``
files can be fed back through ``--input``.
"""
import csv
import io
import logging
from typing import Any, Dict, Tuple, Union

import numpy as np

from . import correspond, hyperpolygon, involution, minkowski, parser, selftest, ui
from .config import RunConfig
from .errors import ConfigError, NotZComponent, SchemaMismatch, ZeroVector
from .executor import CheckExecutor
from .gauge import SolverOptions, kempf_ness_normalize
from .hyperpolygon import HyperConfig, SubsetMask
from .involution import FixedKind
from .minkowski import MinkPolygon

logger = logging.getLogger(__name__)

Report = Union[Dict[str, Any], str]
Result = Tuple[int, Report]

BEND_COLUMNS = ("theta", "ell", "closure_inf_norm", "max_norm_error")
CENSUS_COLUMNS = ("label", "dimension", "compact", "poincare", "phi_floor")


def _load(run: RunConfig, *kinds: str) -> parser.Loaded:
    if not run.input_path:
        raise ConfigError(f"'{run.command}' needs --input")
    loaded = parser.load(run.input_path, run.genericity_margin)
    if loaded.kind not in kinds:
        raise SchemaMismatch(f"'{run.command}' expects a {' or '.join(kinds)} file, got {loaded.kind}")
    return loaded


def _alpha(loaded: parser.Loaded) -> np.ndarray:
    return loaded.value.alpha


def _solver_options(run: RunConfig) -> SolverOptions:
    return SolverOptions(tol=run.kn_tol, max_iters=run.max_iters)


def _require_json(run: RunConfig) -> None:
    if run.output_format != "json":
        raise ConfigError(f"'{run.command}' only writes json")


def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _with_config(cfg: HyperConfig, **extra: Any) -> Dict[str, Any]:
    report = parser.to_jsonable(cfg)
    report.update(parser.to_jsonable(extra))
    return report


def handle_census(run: RunConfig) -> Result:
    """Handler for the 'census' command."""
    loaded = _load(run, "weights", "hyperpolygon", "polygon")
    result = involution.census(_alpha(loaded), threads=run.threads, margin=run.genericity_margin)
    ui.display_census(result)

    if run.output_format == "csv":
        rows = [
            (c.label, c.dimension, int(c.compact),
             "" if c.poincare is None else " ".join(map(str, c.poincare)),
             "" if c.phi_floor is None else repr(c.phi_floor))
            for c in result.components
        ]
        return 0, _csv_text(CENSUS_COLUMNS, rows)

    report = parser.to_jsonable(result)
    report.update(compact=result.compact, noncompact=result.noncompact)
    return 0, report


def handle_stability(run: RunConfig) -> Result:
    """Handler for the 'stability' command; an unstable configuration exits 1."""
    _require_json(run)
    cfg = _load(run, "hyperpolygon").value
    verdict = hyperpolygon.is_alpha_stable(cfg, tol=run.prop_tol, margin=run.genericity_margin)
    try:
        straight = parser.to_jsonable(hyperpolygon.maximal_straight_sets(cfg, run.prop_tol))
    except ZeroVector:
        straight = None
    report = {
        "stable": verdict.stable,
        "reason": verdict.reason,
        "subset": parser.to_jsonable(verdict.subset),
        "straight_sets": straight,
    }
    ui.display_report("alpha-stable" if verdict else "not alpha-stable", report, verdict.stable)
    return (0 if verdict else 1), report


def handle_normalize(run: RunConfig) -> Result:
    """Handler for the 'normalize' command."""
    _require_json(run)
    cfg = _load(run, "hyperpolygon").value
    result = kempf_ness_normalize(cfg, _solver_options(run))
    report = _with_config(
        result.config,
        residual=result.residual,
        iterations=result.iterations,
        complex_residual=hyperpolygon.complex_residual(result.config),
        phi=hyperpolygon.phi(result.config),
    )
    ui.display_report("Kempf-Ness normalization", report)
    return 0, report


def handle_classify(run: RunConfig) -> Result:
    """Handler for the 'classify' command."""
    _require_json(run)
    cfg = _load(run, "hyperpolygon").value
    found = involution.classify_fixed(cfg, run.level_tol, run.genericity_margin)
    report: Dict[str, Any] = {
        "kind": found.kind.value,
        "fixed": found.fixed,
        "subset": parser.to_jsonable(found.subset),
        "phi": hyperpolygon.phi(cfg),
        "orbit_residual": involution.orbit_fixed_residual(cfg),
    }
    if found.kind is FixedKind.Z:
        report["phi_floor"] = involution.phi_floor(found.subset, cfg.alpha)
        # the identities hold to a multiple of the level-set residual
        residual = max(hyperpolygon.real_residual(cfg), hyperpolygon.complex_residual(cfg))
        tol = max(involution.IDENTITY_TOL, 2 * cfg.n * residual)
        report["identities"] = involution.check_zs_identities(cfg, found.subset, tol)
    ui.display_report(f"classified as {found.kind.value}", report)
    return 0, report


def _to_minkowski(run: RunConfig, cfg: HyperConfig) -> Dict[str, Any]:
    if run.subset:
        subset = SubsetMask.from_labels(run.subset, cfg.n)
    else:
        found = involution.classify_fixed(cfg, run.level_tol, run.genericity_margin)
        if found.kind is not FixedKind.Z:
            raise NotZComponent(f"point is classified as {found.kind.value}, not a point of some Z_S")
        subset = found.subset
    canon = involution.canonical_zs_form(cfg, subset)
    poly = correspond.zs_to_minkowski(canon.config, canon.subset)
    poly.order = canon.order
    checked = minkowski.validate(poly)
    report = parser.to_jsonable(poly)
    report.update(subset=list(subset.labels()), valid=checked.valid, closure_residual=checked.closure_residual)
    return report


def handle_convert(run: RunConfig) -> Result:
    """Handler for the 'convert' command (--to higgs | minkowski | hyper)."""
    _require_json(run)
    if run.to == "higgs":
        cfg = _load(run, "hyperpolygon").value
        data = correspond.to_higgs(cfg)
        report = parser.to_jsonable(data)
        report["structure_residuals"] = data.structure_residuals()
    elif run.to == "minkowski":
        report = _to_minkowski(run, _load(run, "hyperpolygon").value)
    elif run.to == "hyper":
        loaded = _load(run, "polygon")
        if not loaded.report.get("valid"):
            ui.display_report("invalid polygon", loaded.report, success=False)
            return 1, parser.to_jsonable(loaded.report)
        cfg = correspond.minkowski_to_zs(loaded.value)
        report = _with_config(
            cfg,
            real_residual=hyperpolygon.real_residual(cfg),
            complex_residual=hyperpolygon.complex_residual(cfg),
        )
    else:
        raise ConfigError("convert needs --to higgs, minkowski or hyper")
    ui.display_report(f"converted to {run.to}", report)
    return 0, report


def _normalized_for_bending(poly: MinkPolygon) -> MinkPolygon:
    # bending turns u_1, u_2 about the axis of u_1 + u_2
    pair = MinkPolygon(poly.sides, 2, poly.alpha)
    _, g = minkowski.normalize_su11(pair)
    return minkowski.act_polygon(poly, g)


def handle_bend(run: RunConfig) -> Result:
    """Handler for the 'bend' command."""
    loaded = _load(run, "polygon")
    if not loaded.report.get("valid"):
        ui.display_report("invalid polygon", loaded.report, success=False)
        return 1, parser.to_jsonable(loaded.report)
    poly = _normalized_for_bending(loaded.value)

    if run.sweep is None:
        _require_json(run)
        report = parser.to_jsonable(poly)
        report["ell"] = minkowski.diagonal_length(poly, 2)
        ui.display_report("normalized for bending", report)
        return 0, report

    rows = minkowski.bend_sweep(poly, run.sweep)
    if run.output_format == "csv":
        return 0, _csv_text(BEND_COLUMNS, [tuple(repr(float(x)) for x in row) for row in rows])
    ells = np.array([row[1] for row in rows])
    return 0, {"columns": list(BEND_COLUMNS), "rows": parser.to_jsonable(rows), "ell_spread": float(np.ptp(ells))}


def handle_witness(run: RunConfig) -> Result:
    """Handler for the 'witness' command."""
    _require_json(run)
    alpha = _alpha(_load(run, "weights", "polygon"))
    if run.k1 is None:
        raise ConfigError("witness needs --k1")
    polygons = minkowski.noncompact_witness(alpha, run.k1, run.m_max)
    ells = [minkowski.diagonal_length(p, 2) for p in polygons]
    report = {"k1": run.k1, "ell": ells, "polygons": parser.to_jsonable(polygons)}
    ui.display_report("non-compactness witness", {"k1": run.k1, "steps": len(polygons), "last ell": ells[-1]})
    return 0, report


def handle_sample(run: RunConfig) -> Result:
    """Handler for the 'sample' command."""
    _require_json(run)
    alpha = _alpha(_load(run, "weights", "hyperpolygon"))
    cfg = hyperpolygon.sample_complex_level(alpha, run.seed, margin=run.genericity_margin)
    report = _with_config(
        cfg,
        seed=run.seed,
        complex_residual=hyperpolygon.complex_residual(cfg),
        real_residual=hyperpolygon.real_residual(cfg),
    )
    ui.display_report("sampled point", report)
    return 0, report


def handle_selftest(run: RunConfig) -> Result:
    """Handler for the 'selftest' command."""
    _require_json(run)
    results = CheckExecutor().execute_checks(selftest.build_checks(run))
    ui.display_check_results(results)
    passed = all(r["success"] for r in results)
    return (0 if passed else 1), {"success": passed, "checks": parser.to_jsonable(results)}


HANDLERS = {
    "census": handle_census,
    "stability": handle_stability,
    "normalize": handle_normalize,
    "classify": handle_classify,
    "convert": handle_convert,
    "bend": handle_bend,
    "witness": handle_witness,
    "sample": handle_sample,
    "selftest": handle_selftest,
}
