"""Scaling limit of the density of states under weight amplification.

For a smooth weight phi with positive Laplacian, the density of the space
built from the amplified weight k*phi over polynomials of growing degree
approaches the equilibrium profile

    (1/k) B_{k phi}(z) dmu  ->  Laplacian(phi)(z) / (4 pi) dA,

so the per-node ratio of the two sides tends to 1 as k grows.  This module
computes the limit density, the scaled spaces, and convergence reports on
a ladder of k values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError, UnsupportedWeightError
from .kernels import (
    RANK_TOL,
    BergmanDensity,
    WeightedSpace,
    bergman_density_from_space,
    build_space,
)
from .measures import KIND_DISK, QuadratureMeasure
from .spans import monomial_span
from .weights import WeightFunction, eval_weight, scaled_weight

SOURCE_ANALYTIC = "analytic"
SOURCE_FD = "finite-difference"

# Degree ladder: degree(k) = ceil(DEGREE_FACTOR * k * R^2), capped so the
# quadrature still integrates the span's Gram exactly.
DEGREE_FACTOR = 1.5
FD_STENCIL_STEP = 1e-4
DEFAULT_K_LADDER = (10, 20, 40)
# Positivity floor below which a limit-density node is skipped.
DENSITY_SKIP_TOL = 1e-12

# Pass limits for a convergence run: the deviation at the last rung of the
# ladder, and the slack factor allowed when requiring the per-rung maximum
# deviation to be nonincreasing.  The absolute floor keeps the monotonicity
# requirement meaningful once deviations reach quadrature noise.
TCZ_FINAL_DEV_LIMIT = 0.05
TCZ_MONOTONE_SLACK = 1.1
TCZ_DEV_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class MongeAmpereDensity:
    """Limit density Laplacian(phi) / (4 pi) per node, with its provenance."""

    values: np.ndarray
    source: str


@dataclass(frozen=True, eq=False)
class ScalingReport:
    """Convergence data for one amplification factor k."""

    k: float
    degree: int
    eval_indices: np.ndarray
    ratios: np.ndarray
    max_abs_dev_from_1: float
    mean_abs_dev: float
    n_skipped: int


def ma_density(
    weight: WeightFunction,
    measure: QuadratureMeasure,
    source: str = "auto",
    fd_step: float = FD_STENCIL_STEP,
) -> MongeAmpereDensity:
    """Limit density Laplacian(phi)/(4 pi) at the measure's nodes.

    source="analytic" uses the closed-form Laplacian of the weight family;
    source="finite-difference" applies a 5-point stencil to the closed form
    around each node.  Either way a closed form is required: tabulated-only
    weights on scattered nodes carry no off-node information.
    """
    weight = eval_weight(weight, measure)
    if weight.family is None:
        raise UnsupportedWeightError(
            "limit density needs a closed-form weight; tabulated-only values "
            "on scattered nodes are not supported"
        )
    z = measure.points
    if source in ("auto", SOURCE_ANALYTIC):
        lap = np.asarray(weight.family.laplacian(z), dtype=float)
        used = SOURCE_ANALYTIC
    elif source == SOURCE_FD:
        f = weight.family.evaluate
        h = fd_step
        lap = (
            f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f(z)
        ) / h**2
        used = SOURCE_FD
    else:
        raise InvalidConfigurationError(f"unknown laplacian source {source!r}")
    return MongeAmpereDensity(values=lap / (4.0 * math.pi), source=used)


def default_degree_rule(k: float, measure: QuadratureMeasure) -> int:
    """ceil(1.5 k R^2), capped at half the quadrature's exactness degree."""
    if measure.kind != KIND_DISK or measure.radius is None:
        raise InvalidConfigurationError(
            "the default degree rule needs a disk-product measure"
        )
    cap = measure.exactness_degree // 2
    return int(min(math.ceil(DEGREE_FACTOR * k * measure.radius**2), cap))


def build_scaled_space(
    phi: WeightFunction,
    k: float,
    degree: int,
    measure: QuadratureMeasure,
    rank_tol: float = RANK_TOL,
) -> WeightedSpace:
    """Space of polynomials up to the given degree under the weight k*phi.

    The quadrature must integrate every Gram entry's polynomial part, i.e.
    exactness_degree >= 2*degree; anything less is a configuration error.
    """
    if measure.exactness_degree is not None and 2 * degree > measure.exactness_degree:
        raise InvalidConfigurationError(
            f"degree {degree} needs exactness {2 * degree}, measure provides "
            f"{measure.exactness_degree}"
        )
    span = monomial_span(measure, degree)
    return build_space(span, measure, scaled_weight(phi, k), rank_tol)


def scaled_bergman(
    phi: WeightFunction,
    k: float,
    degree: int,
    measure: QuadratureMeasure,
    rank_tol: float = RANK_TOL,
) -> BergmanDensity:
    """Density of states of the k-amplified space."""
    return bergman_density_from_space(
        build_scaled_space(phi, k, degree, measure, rank_tol)
    )


def tcz_convergence_report(
    phi: WeightFunction,
    k_list,
    measure: QuadratureMeasure,
    degree_rule=None,
    interior_radius: float | None = None,
    rank_tol: float = RANK_TOL,
) -> list:
    """Scaled-density-to-limit ratios on interior nodes for each k.

    For every node z_j with |z_j| <= interior_radius (default half the disk
    radius) and positive limit density, the ratio (B_{k phi}(z_j)/k) /
    (Laplacian(phi)(z_j)/(4 pi)) is recorded; nodes where the limit density
    is nonpositive are skipped and counted.
    """
    if measure.kind != KIND_DISK:
        raise InvalidConfigurationError(
            "convergence reports need a disk-product measure"
        )
    if interior_radius is None:
        interior_radius = 0.5 * measure.radius
    rule = degree_rule if degree_rule is not None else default_degree_rule
    limit = ma_density(phi, measure)
    interior = np.abs(measure.points) <= interior_radius
    positive = limit.values > DENSITY_SKIP_TOL
    eval_mask = interior & positive
    n_skipped = int(np.count_nonzero(interior & ~positive))
    reports = []
    for k in k_list:
        degree = int(rule(k, measure)) if callable(rule) else int(rule)
        b = scaled_bergman(phi, k, degree, measure, rank_tol)
        ratios = (b.values[eval_mask] / k) / limit.values[eval_mask]
        devs = np.abs(ratios - 1.0)
        reports.append(
            ScalingReport(
                k=float(k),
                degree=degree,
                eval_indices=np.flatnonzero(eval_mask),
                ratios=ratios,
                max_abs_dev_from_1=float(devs.max()) if devs.size else math.nan,
                mean_abs_dev=float(devs.mean()) if devs.size else math.nan,
                n_skipped=n_skipped,
            )
        )
    return reports
