"""Seeded random-instance battery exercising every engine invariant.

The battery draws discrete instances (nodes, masses, span, two weights),
guards them against ill-conditioned Gram spectra, and runs three groups of
checks per instance: structural kernel identities, the comparison sweep,
and the homotopy derivative machinery.  A report aggregates worst-case
metrics so a single run answers "does every invariant hold at tolerance
across the whole sample".  Failures are dumped as rerunnable scenario
dictionaries.

A separate randomized search drives the maximum principle contrapositively:
it manufactures weight pairs whose conclusion fails by construction and
confirms the premises never hold for them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .comparison import (
    COMPARISON_TOL,
    MAXPRINCIPLE_CONCLUSION_HOLDS,
    MAXPRINCIPLE_COUNTEREXAMPLE,
    MAXPRINCIPLE_PREMISES_FAIL,
    comparison_integrals,
    max_principle_check,
    sandwich_check,
    shifted_comparison_sweep,
)
from .homotopy import (
    BOUND_STEPS,
    ENDPOINT_TOL,
    FD_MATCH_TOL,
    ORDER_STEPS,
    SIGN_SPLIT_FLOOR,
    STEP_TOL,
    THREE_FORM_RTOL,
    build_path,
    difference_quotient_bound_check,
    g_derivative_forms,
    l2_difference_bound_check,
    monotonicity_sweep,
    weight_at,
)
from .kernels import (
    RANK_TOL,
    REPRODUCING_TOL,
    TRACE_TOL,
    assemble_gram,
    bergman_density_from_space,
    build_space,
    density_integral,
    kernel_matrix,
    reproducing_residual,
    retained_spread,
)
from .measures import build_discrete_measure
from .spans import KIND_MONOMIALS, monomial_span, tabulated_span
from .weights import eval_weight, tabulated_weight

# Gram spectra with a retained eigenvalue spread beyond this amplify
# eigensolver roundoff past the battery tolerances, so the generator
# resamples such draws.  The bound leaves roughly three orders of
# magnitude of headroom against the tightest (1e-12 relative) checks.
SPREAD_BOUND = 1e6

# Monomial node-value matrices need strictly more nodes than columns to
# stay away from the square-Vandermonde conditioning cliff.
MONOMIAL_NODE_MARGIN = 4

DEFAULT_SHIFTS = (-2.0, -1.0, 0.0, 1.0, 2.0)
DEFAULT_N_INSTANCES = 200
DERIVATIVE_T = 0.5

# Acceptable window for the measured convergence order of the central
# difference quotient, fitted across ORDER_STEPS on the whole battery.
ORDER_WINDOW = (1.8, 2.2)

# When every finite-difference error on the battery sits at or below this
# absolute level the quotient is exact to roundoff (G is affine in t, as
# for rank-0 spaces) and no convergence order is measurable.
ORDER_EXACT_FLOOR = 1e-14


@dataclass(frozen=True)
class SizeBounds:
    """Generator law for random instances.  All draws are rng-driven.

    zero_span replaces every span with identically-zero node values, which
    collapses all spaces to rank 0; useful for exercising the degenerate
    branch of every check.
    """

    max_nodes: int = 50
    max_dim: int = 10
    radius_range: tuple = (0.55, 1.45)
    weight_range: tuple = (-2.0, 2.0)
    mass_range: tuple = (0.1, 10.0)
    monomial_fraction: float = 0.5
    spread_bound: float = SPREAD_BOUND
    max_resamples: int = 100
    zero_span: bool = False


@dataclass
class BatteryInstance:
    """One generated instance plus the bookkeeping to rerun it."""

    index: int
    measure: object
    span: object
    phi: object
    psi: object
    span_kind: str
    resamples: int

    def scenario_dict(self, checks=("structural", "comparison", "homotopy")) -> dict:
        """A scenario-file dictionary that reruns this instance."""
        pts = self.measure.points
        span_desc: dict
        if self.span.kind == KIND_MONOMIALS:
            span_desc = {"kind": "monomials", "degree": self.span.degree}
        else:
            vals = self.span.basis_values
            span_desc = {
                "kind": "tabulated",
                "values": [
                    [[float(v.real), float(v.imag)] for v in row] for row in vals
                ],
            }
        return {
            "id": f"battery-instance-{self.index}",
            "measure": {
                "kind": "discrete",
                "points": [[float(z.real), float(z.imag)] for z in pts],
                "masses": [float(m) for m in self.measure.masses],
            },
            "span": span_desc,
            "phi": {"family": "tabulated", "values": self.phi.values.tolist()},
            "psi": {"family": "tabulated", "values": self.psi.values.tolist()},
            "checks": list(checks),
        }


def instance_spread(span, measure, weight, rank_tol: float = RANK_TOL) -> float:
    """Conditioning of one configuration's equilibrated, retained Gram."""
    return retained_spread(assemble_gram(span, measure, weight), rank_tol)


def generate_instance(rng, index: int, bounds: SizeBounds) -> BatteryInstance:
    """Draw one instance, resampling until the Gram spectra are tame.

    Conditioning is checked at both homotopy endpoints and the midpoint,
    since the derivative checks build spaces there.  Resampling keeps the
    stream deterministic: a given seed always yields the same instances.
    """
    lo_r, hi_r = bounds.radius_range
    lo_w, hi_w = bounds.weight_range
    lo_m, hi_m = bounds.mass_range
    for attempt in range(bounds.max_resamples):
        m = int(rng.integers(2, bounds.max_nodes + 1))
        d = int(rng.integers(1, bounds.max_dim + 1))
        radii = rng.uniform(lo_r, hi_r, m)
        angles = rng.uniform(0.0, 2.0 * math.pi, m)
        points = radii * np.exp(1j * angles)
        masses = np.exp(rng.uniform(math.log(lo_m), math.log(hi_m), m))
        measure = build_discrete_measure(points, masses)
        if bounds.zero_span:
            span = tabulated_span(np.zeros((m, d), dtype=complex))
            span_kind = "tabulated"
        elif rng.uniform() < bounds.monomial_fraction:
            d = min(d, max(1, m - MONOMIAL_NODE_MARGIN))
            span = monomial_span(measure, d - 1)
            span_kind = "monomials"
        else:
            vals = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
            span = tabulated_span(vals / math.sqrt(2.0))
            span_kind = "tabulated"
        phi = eval_weight(tabulated_weight(rng.uniform(lo_w, hi_w, m)), measure)
        psi = eval_weight(tabulated_weight(rng.uniform(lo_w, hi_w, m)), measure)
        path = build_path(phi, psi)
        tame = all(
            instance_spread(span, measure, weight_at(path, t))
            <= bounds.spread_bound
            for t in (0.0, DERIVATIVE_T, 1.0)
        )
        if tame:
            return BatteryInstance(
                index=index,
                measure=measure,
                span=span,
                phi=phi,
                psi=psi,
                span_kind=span_kind,
                resamples=attempt,
            )
    raise RuntimeError(
        f"instance {index}: no tame draw in {bounds.max_resamples} attempts"
    )


@dataclass
class InstanceMetrics:
    """Per-instance check outcomes.  failures lists the labels that broke."""

    index: int
    rank: int
    trace_error: float
    reproducing_residual_value: float
    comparison_deficit: float
    sandwich_ok: bool
    three_form_dev: float
    sign_split_value: float
    fd_match_ratio: float
    monotonicity_drop: float
    endpoint_dev: float
    bound_ok: bool
    order_errors: dict
    failures: list = field(default_factory=list)


def check_instance(
    inst: BatteryInstance,
    shifts=DEFAULT_SHIFTS,
    bound_steps=BOUND_STEPS,
    order_steps=ORDER_STEPS,
    tol_scale: float = 1.0,
) -> InstanceMetrics:
    """Run all three check groups on one instance.

    tol_scale multiplies every identity and agreement tolerance; the
    quotient-bound envelope is a fixed mathematical claim and is not
    scaled.
    """
    measure, span, phi, psi = inst.measure, inst.span, inst.phi, inst.psi

    space = build_space(span, measure, phi)
    kern = kernel_matrix(space)
    density = bergman_density_from_space(space)
    trace_error = abs(density_integral(density, measure) - space.rank) / max(
        1, space.rank
    )
    resid = reproducing_residual(kern, phi, measure)

    deficit = 0.0
    for rep in shifted_comparison_sweep(phi, psi, span, measure, shifts):
        allowance = COMPARISON_TOL * tol_scale * (1.0 + rep.rhs)
        deficit = max(deficit, -(rep.margin + allowance))
    sandwich_ok = bool(sandwich_check(phi, psi, span, measure))

    path = build_path(phi, psi)
    der = g_derivative_forms(path, DERIVATIVE_T, span, measure)
    scale = 1.0 + max(
        abs(der.direct_form), abs(der.symmetric_form), abs(der.sign_split_form)
    )
    three_form_dev = der.max_pairwise_dev / scale
    fd_match_ratio = abs(der.fd_estimate - der.sign_split_form) / (
        FD_MATCH_TOL * (1.0 + abs(der.sign_split_form))
    )

    sweep = monotonicity_sweep(path, span, measure)
    g_vals = [g for _, g in sweep]
    drop = max(
        (g_vals[i] - g_vals[i + 1] for i in range(len(g_vals) - 1)), default=0.0
    )
    endpoints = comparison_integrals(phi, psi, span, measure)
    endpoint_dev = max(
        abs(g_vals[0] - endpoints.lhs), abs(g_vals[-1] - endpoints.rhs)
    )

    bound_ok = all(
        difference_quotient_bound_check(path, DERIVATIVE_T, tau, span, measure)
        and l2_difference_bound_check(path, DERIVATIVE_T, tau, span, measure)
        for tau in bound_steps
    )

    order_errors = {}
    for tau in order_steps:
        d_tau = g_derivative_forms(path, DERIVATIVE_T, span, measure, fd_step=tau)
        order_errors[tau] = abs(d_tau.fd_estimate - d_tau.sign_split_form)

    metrics = InstanceMetrics(
        index=inst.index,
        rank=space.rank,
        trace_error=trace_error,
        reproducing_residual_value=resid,
        comparison_deficit=deficit,
        sandwich_ok=sandwich_ok,
        three_form_dev=three_form_dev,
        sign_split_value=der.sign_split_form,
        fd_match_ratio=fd_match_ratio,
        monotonicity_drop=drop,
        endpoint_dev=endpoint_dev,
        bound_ok=bound_ok,
        order_errors=order_errors,
    )
    if trace_error > TRACE_TOL * tol_scale:
        metrics.failures.append("trace")
    if resid > REPRODUCING_TOL * tol_scale:
        metrics.failures.append("reproducing")
    if deficit > 0.0:
        metrics.failures.append("comparison")
    if not sandwich_ok:
        metrics.failures.append("sandwich")
    if three_form_dev > THREE_FORM_RTOL * tol_scale:
        metrics.failures.append("three-form")
    if der.sign_split_form < SIGN_SPLIT_FLOOR * tol_scale:
        metrics.failures.append("sign-split")
    if fd_match_ratio > tol_scale:
        metrics.failures.append("fd-match")
    if drop > STEP_TOL * tol_scale:
        metrics.failures.append("monotonicity")
    if endpoint_dev > ENDPOINT_TOL * tol_scale:
        metrics.failures.append("endpoint")
    if not bound_ok:
        metrics.failures.append("bound")
    return metrics


@dataclass
class BatteryReport:
    """Aggregated worst-case metrics over a battery run."""

    n_instances: int
    seed: int
    worst_trace_error: float
    worst_reproducing_residual: float
    worst_comparison_deficit: float
    worst_three_form_dev: float
    min_sign_split: float
    worst_fd_match_ratio: float
    worst_monotonicity_drop: float
    worst_endpoint_dev: float
    bound_violations: int
    sandwich_failures: int
    order_slope: float
    order_max_errors: dict
    failures: list
    failure_dumps: list
    elapsed_seconds: float

    @property
    def order_exact(self) -> bool:
        """True when the FD errors are all at roundoff (no order to fit)."""
        return all(e <= ORDER_EXACT_FLOOR for e in self.order_max_errors.values())

    @property
    def all_green(self) -> bool:
        lo, hi = ORDER_WINDOW
        order_ok = self.order_exact or (
            math.isfinite(self.order_slope) and lo <= self.order_slope <= hi
        )
        return not self.failures and order_ok

    def summary_lines(self) -> list:
        """Human-readable one-line-per-metric summary."""
        lo, hi = ORDER_WINDOW
        rows = [
            ("trace identity", self.worst_trace_error, TRACE_TOL),
            ("reproducing residual", self.worst_reproducing_residual, REPRODUCING_TOL),
            ("comparison deficit", self.worst_comparison_deficit, 0.0),
            ("three-form deviation", self.worst_three_form_dev, THREE_FORM_RTOL),
            ("fd match ratio", self.worst_fd_match_ratio, 1.0),
            ("monotonicity drop", self.worst_monotonicity_drop, STEP_TOL),
            ("endpoint deviation", self.worst_endpoint_dev, ENDPOINT_TOL),
        ]
        lines = [
            f"battery: {self.n_instances} instances, seed {self.seed}, "
            f"{self.elapsed_seconds:.2f}s"
        ]
        for name, value, limit in rows:
            mark = "ok" if value <= limit else "FAIL"
            lines.append(f"  {name}: worst {value:.3e} (limit {limit:.1e}) {mark}")
        mark = "ok" if self.min_sign_split >= SIGN_SPLIT_FLOOR else "FAIL"
        lines.append(
            f"  sign-split floor: min {self.min_sign_split:.3e} "
            f"(floor {SIGN_SPLIT_FLOOR:.1e}) {mark}"
        )
        if self.order_exact:
            lines.append("  fd convergence order: exact to roundoff ok")
        else:
            mark = "ok" if lo <= self.order_slope <= hi else "FAIL"
            lines.append(
                f"  fd convergence order: {self.order_slope:.4f} "
                f"(window [{lo}, {hi}]) {mark}"
            )
        lines.append(
            f"  bound violations: {self.bound_violations}, "
            f"sandwich failures: {self.sandwich_failures}, "
            f"failing instances: {len(self.failures)}"
        )
        return lines


def fit_order_slope(order_max_errors: dict) -> float:
    """Least-squares slope of log(max error) against log(step).

    The per-step maximum over the battery is truncation-dominated (the
    largest third-derivative instances set it), which keeps the fit away
    from the roundoff floor that individual near-linear instances hit.
    """
    steps = sorted(order_max_errors)
    errs = [order_max_errors[s] for s in steps]
    if any(e <= 0.0 for e in errs) or len(steps) < 2:
        return float("nan")
    slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    return float(slope)


def run_battery(
    n_instances: int = DEFAULT_N_INSTANCES,
    seed: int = 0,
    size_bounds: SizeBounds = None,
    shifts=DEFAULT_SHIFTS,
    dump_dir=None,
    tol_scale: float = 1.0,
) -> BatteryReport:
    """Generate and check a full battery; optionally dump failures.

    dump_dir, when given, receives one rerunnable scenario JSON per
    failing instance.
    """
    import json
    import os

    bounds = size_bounds or SizeBounds()
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()

    worst = {
        "trace": 0.0,
        "reprod": 0.0,
        "deficit": 0.0,
        "threeform": 0.0,
        "fdratio": 0.0,
        "drop": -math.inf,
        "endpoint": 0.0,
    }
    min_sign_split = math.inf
    bound_violations = 0
    sandwich_failures = 0
    order_max = {tau: 0.0 for tau in ORDER_STEPS}
    failures = []
    dumps = []

    for i in range(n_instances):
        inst = generate_instance(rng, i, bounds)
        metrics = check_instance(inst, shifts=shifts, tol_scale=tol_scale)
        worst["trace"] = max(worst["trace"], metrics.trace_error)
        worst["reprod"] = max(worst["reprod"], metrics.reproducing_residual_value)
        worst["deficit"] = max(worst["deficit"], metrics.comparison_deficit)
        worst["threeform"] = max(worst["threeform"], metrics.three_form_dev)
        worst["fdratio"] = max(worst["fdratio"], metrics.fd_match_ratio)
        worst["drop"] = max(worst["drop"], metrics.monotonicity_drop)
        worst["endpoint"] = max(worst["endpoint"], metrics.endpoint_dev)
        min_sign_split = min(min_sign_split, metrics.sign_split_value)
        if not metrics.bound_ok:
            bound_violations += 1
        if not metrics.sandwich_ok:
            sandwich_failures += 1
        for tau, err in metrics.order_errors.items():
            order_max[tau] = max(order_max[tau], err)
        if metrics.failures:
            failures.append((i, list(metrics.failures)))
            if dump_dir is not None:
                os.makedirs(dump_dir, exist_ok=True)
                path = os.path.join(dump_dir, f"battery-failure-{i}.json")
                with open(path, "w") as fh:
                    json.dump(inst.scenario_dict(), fh, indent=1)
                dumps.append(path)

    return BatteryReport(
        n_instances=n_instances,
        seed=seed,
        worst_trace_error=worst["trace"],
        worst_reproducing_residual=worst["reprod"],
        worst_comparison_deficit=worst["deficit"],
        worst_three_form_dev=worst["threeform"],
        min_sign_split=min_sign_split if n_instances else 0.0,
        worst_fd_match_ratio=worst["fdratio"],
        worst_monotonicity_drop=worst["drop"] if n_instances else 0.0,
        worst_endpoint_dev=worst["endpoint"],
        bound_violations=bound_violations,
        sandwich_failures=sandwich_failures,
        order_slope=fit_order_slope(order_max),
        order_max_errors=order_max,
        failures=failures,
        failure_dumps=dumps,
        elapsed_seconds=time.perf_counter() - t0,
    )


@dataclass
class MaxPrincipleSearchReport:
    """Verdict tally of the randomized contrapositive search."""

    n_instances: int
    seed: int
    premises_fail: int
    conclusion_holds: int
    counterexamples: list
    elapsed_seconds: float

    @property
    def found_counterexample(self) -> bool:
        return bool(self.counterexamples)


def max_principle_search(
    n_instances: int = 10_000,
    seed: int = 0,
    max_nodes: int = 12,
    max_dim: int = 4,
) -> MaxPrincipleSearchReport:
    """Hunt for a maximum-principle counterexample over random instances.

    Four draw families interleave: fully random weight pairs; pairs with
    the off-region premise forced; pairs built to violate the conclusion
    inside the region (so a counterexample appears the moment the density
    premise holds for one of them); and constant-offset pairs that sit on
    the equality edge of the density premise.  The principle predicts the
    counterexample list stays empty.
    """
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    tally = {
        MAXPRINCIPLE_PREMISES_FAIL: 0,
        MAXPRINCIPLE_CONCLUSION_HOLDS: 0,
        MAXPRINCIPLE_COUNTEREXAMPLE: 0,
    }
    counterexamples = []

    for i in range(n_instances):
        m = int(rng.integers(2, max_nodes + 1))
        # The span must be a proper subspace of the node functions: with
        # dim = node count the kernel is diagonal, the density no longer
        # depends on the weight, and the principle's strictness mechanism
        # is vacuous.  That degenerate regime has no counterpart in the
        # function-space setting being modeled, so the search excludes it.
        d = int(rng.integers(1, min(max_dim, m - 1) + 1))
        radii = rng.uniform(0.55, 1.45, m)
        angles = rng.uniform(0.0, 2.0 * math.pi, m)
        measure = build_discrete_measure(
            radii * np.exp(1j * angles),
            np.exp(rng.uniform(math.log(0.1), math.log(10.0), m)),
        )
        if rng.uniform() < 0.5:
            span = monomial_span(measure, d - 1)
        else:
            vals = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
            span = tabulated_span(vals / math.sqrt(2.0))
        omega = np.zeros(m, dtype=bool)
        omega[rng.choice(m, size=int(rng.integers(1, m)), replace=False)] = True

        phi_vals = rng.uniform(-2.0, 2.0, m)
        family = int(rng.integers(0, 4))
        if family == 0:
            psi_vals = rng.uniform(-2.0, 2.0, m)
        elif family == 1:
            psi_vals = phi_vals + np.where(omega, 0.0, rng.uniform(0.0, 2.0, m))
        elif family == 2:
            lift = np.where(omega, 0.0, rng.uniform(0.0, 2.0, m))
            dent = np.where(omega, rng.uniform(0.0, 2.0, m), 0.0)
            psi_vals = phi_vals + lift - dent
        else:
            psi_vals = phi_vals + rng.uniform(-1.0, 1.0)

        phi = eval_weight(tabulated_weight(phi_vals), measure)
        psi = eval_weight(tabulated_weight(psi_vals), measure)
        verdict = max_principle_check(phi, psi, omega, span, measure)
        tally[verdict] += 1
        if verdict == MAXPRINCIPLE_COUNTEREXAMPLE:
            inst = BatteryInstance(
                index=i,
                measure=measure,
                span=span,
                phi=phi,
                psi=psi,
                span_kind=span.kind,
                resamples=0,
            )
            record = inst.scenario_dict(checks=("maxprinciple",))
            record["omega"] = [int(j) for j in np.flatnonzero(omega)]
            counterexamples.append(record)

    return MaxPrincipleSearchReport(
        n_instances=n_instances,
        seed=seed,
        premises_fail=tally[MAXPRINCIPLE_PREMISES_FAIL],
        conclusion_holds=tally[MAXPRINCIPLE_CONCLUSION_HOLDS],
        counterexamples=counterexamples,
        elapsed_seconds=time.perf_counter() - t0,
    )
