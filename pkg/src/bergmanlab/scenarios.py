"""Scenario files: parsing, check execution, and report emission.

A scenario is a JSON document describing one configuration (measure, span,
one or two weights) plus the list of checks to run against it.  The runner
executes checks in declared order, collects pass/fail plus metrics per
check, and can emit the results as CSV files with fixed column contracts
or as a single JSON document.

CSV column contracts:
  comparison.csv  scenario_id, c, set_size, set_proper, lhs, rhs, margin,
                  verdict
  homotopy.csv    scenario_id, t, G, rhs26, rhs27, rhs28, fd, fd_step,
                  max_pairwise_dev
  tcz.csv         scenario_id, k, degree, n_eval_points, max_abs_dev,
                  mean_abs_dev

The rhs26/rhs27/rhs28 column names are part of the file contract and label
the three algebraic forms of G' in their fixed order (direct, symmetric,
sign-split).

Timings appear only in the summary document, never in CSV rows, so result
files are byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .comparison import (
    COMPARISON_TOL,
    MAXPRINCIPLE_COUNTEREXAMPLE,
    STRICT_MARGIN,
    VERDICT_STRICT,
    comparison_integrals,
    max_principle_check,
    sandwich_check,
    shifted_comparison_sweep,
    strictness_check,
)
from .errors import InvalidScenarioError
from .homotopy import (
    BOUND_STEPS,
    ENDPOINT_TOL,
    FD_MATCH_TOL,
    SIGN_SPLIT_FLOOR,
    STEP_TOL,
    THREE_FORM_RTOL,
    build_path,
    difference_quotient_bound_check,
    g_derivative_forms,
    l2_difference_bound_check,
)
from .kernels import (
    REPRODUCING_TOL,
    TRACE_TOL,
    bergman_density_from_space,
    build_space,
    density_integral,
    kernel_matrix,
    reproducing_residual,
)
from .measures import build_discrete_measure, build_disk_measure
from .quantization import (
    DEFAULT_K_LADDER,
    TCZ_DEV_FLOOR,
    TCZ_FINAL_DEV_LIMIT,
    TCZ_MONOTONE_SLACK,
    tcz_convergence_report,
)
from .spans import monomial_span, tabulated_span
from .weights import eval_weight, weight_family_from_dict

CHECK_NAMES = (
    "structural",
    "comparison",
    "sweep",
    "homotopy",
    "tcz",
    "maxprinciple",
)

DEFAULT_C_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0)

COMPARISON_COLUMNS = (
    "scenario_id",
    "c",
    "set_size",
    "set_proper",
    "lhs",
    "rhs",
    "margin",
    "verdict",
)
HOMOTOPY_COLUMNS = (
    "scenario_id",
    "t",
    "G",
    "rhs26",
    "rhs27",
    "rhs28",
    "fd",
    "fd_step",
    "max_pairwise_dev",
)
TCZ_COLUMNS = (
    "scenario_id",
    "k",
    "degree",
    "n_eval_points",
    "max_abs_dev",
    "mean_abs_dev",
)


@dataclass
class ScenarioConfig:
    """One parsed scenario: geometry, weights, and the checks to run."""

    scenario_id: str
    measure: object
    span: object
    phi: object
    psi: object
    checks: tuple
    c_grid: tuple = DEFAULT_C_GRID
    t_grid: tuple | None = None
    tau_list: tuple = BOUND_STEPS
    k_list: tuple = DEFAULT_K_LADDER
    omega: tuple | None = None
    interior_radius: float | None = None
    seed: int | None = None
    source: str = "<dict>"


def _fail(scenario_id, field_path, message):
    raise InvalidScenarioError(
        f"scenario {scenario_id!r}: field {field_path!r}: {message}"
    )


def _complex_pairs(raw, scenario_id, field_path):
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        _fail(scenario_id, field_path, "expected a list of [re, im] pairs")
    if arr.ndim != 2 or arr.shape[1] != 2:
        _fail(scenario_id, field_path, "expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _parse_measure(raw, scenario_id):
    if not isinstance(raw, dict):
        _fail(scenario_id, "measure", "expected an object")
    kind = raw.get("kind")
    if kind == "discrete":
        if "points" not in raw or "masses" not in raw:
            _fail(scenario_id, "measure", "discrete needs points and masses")
        points = _complex_pairs(raw["points"], scenario_id, "measure.points")
        return build_discrete_measure(points, raw["masses"])
    if kind == "disk-product":
        try:
            return build_disk_measure(
                float(raw["radius"]),
                int(raw["n_radial"]),
                int(raw["n_angular"]),
            )
        except KeyError as missing:
            _fail(scenario_id, f"measure.{missing.args[0]}", "required")
    _fail(scenario_id, "measure.kind", f"unknown kind {kind!r}")


def _parse_span(raw, measure, scenario_id):
    if not isinstance(raw, dict):
        _fail(scenario_id, "span", "expected an object")
    kind = raw.get("kind")
    if kind == "monomials":
        if "degree" not in raw:
            _fail(scenario_id, "span.degree", "required for monomials")
        return monomial_span(measure, int(raw["degree"]))
    if kind == "tabulated":
        if "values" not in raw:
            _fail(scenario_id, "span.values", "required for tabulated")
        rows = raw["values"]
        try:
            arr = np.asarray(rows, dtype=float)
            values = arr[..., 0] + 1j * arr[..., 1]
        except (TypeError, ValueError, IndexError):
            _fail(
                scenario_id,
                "span.values",
                "expected rows of [re, im] pairs, one row per node",
            )
        if values.shape[0] != measure.n:
            _fail(
                scenario_id,
                "span.values",
                f"{values.shape[0]} rows for a measure with {measure.n} nodes",
            )
        return tabulated_span(values)
    _fail(scenario_id, "span.kind", f"unknown kind {kind!r}")


def _parse_weight(raw, scenario_id, field_path):
    if not isinstance(raw, dict):
        _fail(scenario_id, field_path, "expected an object with a family")
    try:
        return weight_family_from_dict(raw)
    except KeyError as missing:
        _fail(scenario_id, f"{field_path}.{missing.args[0]}", "required")
    except Exception as exc:  # family errors carry their own message
        _fail(scenario_id, field_path, str(exc))


def parse_scenario(raw: dict, source: str = "<dict>") -> ScenarioConfig:
    """Validate a scenario dictionary, field by field."""
    if not isinstance(raw, dict):
        raise InvalidScenarioError(f"{source}: scenario must be an object")
    scenario_id = raw.get("id")
    if not isinstance(scenario_id, str) or not scenario_id:
        raise InvalidScenarioError(f"{source}: field 'id': nonempty string required")

    checks_raw = raw.get("checks")
    if not isinstance(checks_raw, (list, tuple)) or not checks_raw:
        _fail(scenario_id, "checks", "nonempty list required")
    for name in checks_raw:
        if name not in CHECK_NAMES:
            _fail(
                scenario_id,
                "checks",
                f"unknown check {name!r}; valid: {', '.join(CHECK_NAMES)}",
            )

    if "measure" not in raw:
        _fail(scenario_id, "measure", "required")
    measure = _parse_measure(raw["measure"], scenario_id)
    if "span" not in raw:
        _fail(scenario_id, "span", "required")
    span = _parse_span(raw["span"], measure, scenario_id)
    if "phi" not in raw:
        _fail(scenario_id, "phi", "required")
    phi = eval_weight(_parse_weight(raw["phi"], scenario_id, "phi"), measure)
    psi = None
    if "psi" in raw:
        psi = eval_weight(_parse_weight(raw["psi"], scenario_id, "psi"), measure)

    needs_psi = {"comparison", "sweep", "homotopy", "maxprinciple"}
    for name in checks_raw:
        if name in needs_psi and psi is None:
            _fail(scenario_id, "psi", f"required by check {name!r}")

    params = raw.get("params", {})
    if not isinstance(params, dict):
        _fail(scenario_id, "params", "expected an object")
    c_grid = tuple(float(c) for c in params.get("c_grid", DEFAULT_C_GRID))
    t_grid = params.get("t_grid")
    if t_grid is not None:
        t_grid = tuple(float(t) for t in t_grid)
        if any(t < 0.0 or t > 1.0 for t in t_grid):
            _fail(scenario_id, "params.t_grid", "values must lie in [0, 1]")
    tau_list = tuple(float(tau) for tau in params.get("tau_list", BOUND_STEPS))
    if any(tau <= 0.0 or tau > 1.0 for tau in tau_list):
        _fail(scenario_id, "params.tau_list", "steps must lie in (0, 1]")
    k_list = tuple(float(k) for k in params.get("k_list", DEFAULT_K_LADDER))
    interior_radius = params.get("interior_radius")
    if interior_radius is not None:
        interior_radius = float(interior_radius)

    omega = raw.get("omega")
    if omega is not None:
        omega = tuple(int(i) for i in omega)
        bad = [i for i in omega if i < 0 or i >= measure.n]
        if bad:
            _fail(scenario_id, "omega", f"node indices out of range: {bad}")
    if "maxprinciple" in checks_raw and omega is None:
        _fail(scenario_id, "omega", "required by check 'maxprinciple'")

    seed = raw.get("seed")
    if seed is not None:
        seed = int(seed)

    return ScenarioConfig(
        scenario_id=scenario_id,
        measure=measure,
        span=span,
        phi=phi,
        psi=psi,
        checks=tuple(checks_raw),
        c_grid=c_grid,
        t_grid=t_grid,
        tau_list=tau_list,
        k_list=k_list,
        omega=omega,
        interior_radius=interior_radius,
        seed=seed,
        source=source,
    )


def load_scenario_file(path: str) -> ScenarioConfig:
    """Parse one scenario JSON file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidScenarioError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise InvalidScenarioError(f"{path}: {exc.strerror or exc}") from exc
    return parse_scenario(raw, source=path)


@dataclass
class CheckResult:
    """Outcome of one named check on one scenario."""

    name: str
    passed: bool
    metrics: dict
    rows: list = field(default_factory=list)
    wall_seconds: float = 0.0


@dataclass
class RunReport:
    """All check outcomes for one scenario (or one battery run)."""

    scenario_id: str
    results: list

    @property
    def green(self) -> bool:
        return all(r.passed for r in self.results)


def _strictness_verdict(report, psi_rank_positive):
    return strictness_check(report, psi_rank_positive)


def _check_structural(config, tol_scale):
    metrics = {}
    passed = True
    weights = [("phi", config.phi)] + (
        [("psi", config.psi)] if config.psi is not None else []
    )
    for label, weight in weights:
        space = build_space(config.span, config.measure, weight)
        density = bergman_density_from_space(space)
        trace_err = abs(density_integral(density, config.measure) - space.rank) / max(
            1, space.rank
        )
        metrics[f"{label}_rank"] = space.rank
        metrics[f"{label}_trace_error"] = trace_err
        passed &= trace_err <= TRACE_TOL * tol_scale
        if config.measure.n <= 2048:
            resid = reproducing_residual(
                kernel_matrix(space), weight, config.measure
            )
            metrics[f"{label}_reproducing_residual"] = resid
            passed &= resid <= REPRODUCING_TOL * tol_scale
    return passed, metrics, []


def _comparison_row(config, report, verdict):
    return {
        "scenario_id": config.scenario_id,
        "c": report.shift,
        "set_size": report.set_size,
        "set_proper": report.set_proper,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "margin": report.margin,
        "verdict": verdict,
    }


def _check_comparison(config, tol_scale):
    report = comparison_integrals(
        config.phi, config.psi, config.span, config.measure
    )
    psi_space = build_space(config.span, config.measure, config.psi)
    verdict = _strictness_verdict(report, psi_space.rank >= 1)
    holds = report.margin >= -COMPARISON_TOL * tol_scale * (1.0 + abs(report.rhs))
    sandwich = sandwich_check(config.phi, config.psi, config.span, config.measure)
    strict_ok = (verdict == VERDICT_STRICT) or not report.strict_expected
    metrics = {
        "lhs": report.lhs,
        "rhs": report.rhs,
        "margin": report.margin,
        "verdict": verdict,
        "strict_expected": report.strict_expected,
        "sandwich_lhs": sandwich.lhs,
        "sandwich_mid": sandwich.mid,
        "sandwich_rhs": sandwich.rhs,
    }
    passed = holds and bool(sandwich) and strict_ok
    return passed, metrics, [_comparison_row(config, report, verdict)]


def _check_sweep(config, tol_scale):
    reports = shifted_comparison_sweep(
        config.phi, config.psi, config.span, config.measure, config.c_grid
    )
    psi_space = build_space(config.span, config.measure, config.psi)
    psi_nontrivial = psi_space.rank >= 1
    rows = []
    worst_margin_deficit = 0.0
    sizes = []
    for report in reports:
        verdict = _strictness_verdict(report, psi_nontrivial)
        rows.append(_comparison_row(config, report, verdict))
        allowance = COMPARISON_TOL * tol_scale * (1.0 + abs(report.rhs))
        worst_margin_deficit = max(worst_margin_deficit, -(report.margin + allowance))
        sizes.append(report.set_size)
    nested = all(sizes[i] <= sizes[i + 1] for i in range(len(sizes) - 1))
    metrics = {
        "n_shifts": len(reports),
        "worst_margin_deficit": worst_margin_deficit,
        "set_sizes_nested": nested,
    }
    return worst_margin_deficit <= 0.0 and nested, metrics, rows


def _check_homotopy(config, tol_scale):
    path = build_path(config.phi, config.psi, config.t_grid)
    rows = []
    worst_dev = 0.0
    min_split = math.inf
    worst_fd_ratio = 0.0
    g_values = []
    for t in path.t_grid:
        der = g_derivative_forms(path, t, config.span, config.measure)
        scale = 1.0 + max(
            abs(der.direct_form), abs(der.symmetric_form), abs(der.sign_split_form)
        )
        worst_dev = max(worst_dev, der.max_pairwise_dev / scale)
        min_split = min(min_split, der.sign_split_form)
        fd_ratio = abs(der.fd_estimate - der.sign_split_form) / (
            FD_MATCH_TOL * tol_scale * (1.0 + abs(der.sign_split_form))
        )
        worst_fd_ratio = max(worst_fd_ratio, fd_ratio)
        g_values.append(der.g_value)
        rows.append(
            {
                "scenario_id": config.scenario_id,
                "t": der.t,
                "G": der.g_value,
                "rhs26": der.direct_form,
                "rhs27": der.symmetric_form,
                "rhs28": der.sign_split_form,
                "fd": der.fd_estimate,
                "fd_step": der.fd_step,
                "max_pairwise_dev": der.max_pairwise_dev,
            }
        )
    drop = max(
        (g_values[i] - g_values[i + 1] for i in range(len(g_values) - 1)),
        default=0.0,
    )
    # The endpoint identity G(0) = lhs, G(1) = rhs only applies when the
    # grid actually reaches the endpoints.
    endpoint_dev = 0.0
    if path.t_grid[0] == 0.0 and path.t_grid[-1] == 1.0:
        endpoints = comparison_integrals(
            config.phi, config.psi, config.span, config.measure
        )
        endpoint_dev = max(
            abs(g_values[0] - endpoints.lhs), abs(g_values[-1] - endpoints.rhs)
        )
    mid_t = path.t_grid[len(path.t_grid) // 2]
    bounds_ok = all(
        difference_quotient_bound_check(
            path, mid_t, tau, config.span, config.measure
        )
        and l2_difference_bound_check(path, mid_t, tau, config.span, config.measure)
        for tau in config.tau_list
    )
    metrics = {
        "worst_three_form_dev": worst_dev,
        "min_sign_split": min_split,
        "worst_fd_ratio": worst_fd_ratio,
        "monotonicity_drop": drop,
        "endpoint_dev": endpoint_dev,
        "bounds_ok": bounds_ok,
    }
    passed = (
        worst_dev <= THREE_FORM_RTOL * tol_scale
        and min_split >= SIGN_SPLIT_FLOOR * tol_scale
        and worst_fd_ratio <= 1.0
        and drop <= STEP_TOL * tol_scale
        and endpoint_dev <= ENDPOINT_TOL * tol_scale
        and bounds_ok
    )
    return passed, metrics, rows


def _check_tcz(config, tol_scale):
    reports = tcz_convergence_report(
        config.phi,
        config.k_list,
        config.measure,
        interior_radius=config.interior_radius,
    )
    rows = []
    devs = []
    for rep in reports:
        rows.append(
            {
                "scenario_id": config.scenario_id,
                "k": rep.k,
                "degree": rep.degree,
                "n_eval_points": len(rep.eval_indices),
                "max_abs_dev": rep.max_abs_dev_from_1,
                "mean_abs_dev": rep.mean_abs_dev,
            }
        )
        devs.append(rep.max_abs_dev_from_1)
    finite = [d for d in devs if not math.isnan(d)]
    final_ok = bool(finite) and finite[-1] <= TCZ_FINAL_DEV_LIMIT * tol_scale
    monotone = all(
        devs[i + 1] <= TCZ_MONOTONE_SLACK * devs[i] + TCZ_DEV_FLOOR
        for i in range(len(devs) - 1)
        if not (math.isnan(devs[i]) or math.isnan(devs[i + 1]))
    )
    metrics = {
        "final_max_abs_dev": finite[-1] if finite else math.nan,
        "deviations_monotone": monotone,
        "n_skipped": reports[0].n_skipped if reports else 0,
    }
    return final_ok and monotone, metrics, rows


def _check_maxprinciple(config, tol_scale):
    mask = np.zeros(config.measure.n, dtype=bool)
    mask[list(config.omega)] = True
    verdict = max_principle_check(
        config.phi, config.psi, mask, config.span, config.measure
    )
    metrics = {"verdict": verdict, "omega_size": int(mask.sum())}
    return verdict != MAXPRINCIPLE_COUNTEREXAMPLE, metrics, []


_CHECK_TABLE = {
    "structural": _check_structural,
    "comparison": _check_comparison,
    "sweep": _check_sweep,
    "homotopy": _check_homotopy,
    "tcz": _check_tcz,
    "maxprinciple": _check_maxprinciple,
}


def run_scenario(config: ScenarioConfig, tol_scale: float = 1.0) -> RunReport:
    """Execute the scenario's checks in declared order."""
    results = []
    for name in config.checks:
        runner = _CHECK_TABLE[name]
        t0 = time.perf_counter()
        try:
            passed, metrics, rows = runner(config, tol_scale)
        except Exception as exc:
            raise type(exc)(f"scenario {config.scenario_id!r}: {exc}") from exc
        results.append(
            CheckResult(
                name=name,
                passed=bool(passed),
                metrics=metrics,
                rows=rows,
                wall_seconds=time.perf_counter() - t0,
            )
        )
    return RunReport(scenario_id=config.scenario_id, results=results)


def _csv_cell(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(row[c]) for c in columns])
    return path


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def report_document(reports, extra=None) -> dict:
    """The JSON structure mirroring a list of run reports."""
    from . import __version__

    doc = {
        "green": all(r.green for r in reports),
        "versions": {
            "bergmanlab": __version__,
            "numpy": np.__version__,
        },
        "tolerances": {
            "trace": TRACE_TOL,
            "reproducing": REPRODUCING_TOL,
            "comparison": COMPARISON_TOL,
            "three_form": THREE_FORM_RTOL,
            "sign_split_floor": SIGN_SPLIT_FLOOR,
            "fd_match": FD_MATCH_TOL,
            "monotonicity_step": STEP_TOL,
            "endpoint": ENDPOINT_TOL,
            "strict_margin": STRICT_MARGIN,
            "tcz_final_dev": TCZ_FINAL_DEV_LIMIT,
        },
        "scenarios": [
            {
                "scenario_id": r.scenario_id,
                "green": r.green,
                "checks": [
                    {
                        "name": c.name,
                        "passed": c.passed,
                        "metrics": _jsonable(c.metrics),
                        "wall_seconds": c.wall_seconds,
                    }
                    for c in r.results
                ],
            }
            for r in reports
        ],
    }
    if extra:
        doc.update(_jsonable(extra))
    return doc


def emit_report(reports, out_dir, format="csv", extra=None) -> list:
    """Write result artifacts; returns the list of file paths written.

    csv format: one file per check suite that has a column contract, plus
    summary.json.  json format: a single run_report.json.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    doc = report_document(reports, extra)
    if format == "json":
        path = os.path.join(out_dir, "run_report.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        return [path]
    if format != "csv":
        raise InvalidScenarioError(f"unknown report format {format!r}")

    suites = {
        "comparison.csv": (COMPARISON_COLUMNS, ("comparison", "sweep")),
        "homotopy.csv": (HOMOTOPY_COLUMNS, ("homotopy",)),
        "tcz.csv": (TCZ_COLUMNS, ("tcz",)),
    }
    for filename, (columns, sources) in suites.items():
        rows = []
        for report in reports:
            for result in report.results:
                if result.name in sources:
                    rows.extend(result.rows)
        if rows:
            written.append(
                _write_csv(os.path.join(out_dir, filename), columns, rows)
            )
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    written.append(path)
    return written
