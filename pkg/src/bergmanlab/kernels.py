"""Reproducing kernels of weighted spaces over finite measures.

Given a span V (node values of d basis functions), a measure with masses w,
and a weight phi, the space carries the inner product

    <f, g> = sum_j f(z_j) conj(g(z_j)) w_j e^{-phi(z_j)}.

The Gram matrix of the span is orthonormalized through a Hermitian
eigendecomposition with relative rank truncation; the reproducing kernel on
node pairs is K = (V C)(V C)* where C maps the span basis to an orthonormal
one.  The density of states B(z) = K(z, z) e^{-phi(z)} integrates to the
rank of the space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError, InvalidMeasureError
from .measures import QuadratureMeasure
from .spans import FunctionSpan, evaluate_basis
from .weights import WeightFunction, eval_weight

# Relative eigenvalue cutoff below which a Gram direction counts as null.
RANK_TOL = 1e-12
# A Gram may dip this far (relative to its largest eigenvalue) below zero
# before it stops being PSD-up-to-roundoff.
PSD_TOL = 1e-13
# Residual allowances for the identities the engine guarantees.
ORTHO_TOL = 1e-10
TRACE_TOL = 1e-9
REPRODUCING_TOL = 1e-9
SHIFT_RTOL = 1e-12
MONOTONICITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WeightedSpace:
    """A span, a measure, and a weight, with the orthonormalization baked in.

    ortho_coeffs is the (d, rank) matrix C with C* G C = I on the retained
    spectrum; the functions e_l = sum_n C[n, l] basis_n form an orthonormal
    basis of the non-degenerate part of the span.
    """

    span: FunctionSpan
    measure: QuadratureMeasure
    weight: WeightFunction
    gram: np.ndarray
    ortho_coeffs: np.ndarray
    rank: int

    @property
    def measure_factor(self) -> np.ndarray:
        """w_j e^{-phi_j}, the discrete measure against which functions pair."""
        return self.measure.masses * np.exp(-self.weight.values)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Reproducing kernel tabulated on node pairs, K[i, j] = K(z_i, z_j)."""

    values: np.ndarray
    rank: int

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.values))


@dataclass(frozen=True, eq=False)
class BergmanDensity:
    """Density of states B(z_j) = K(z_j, z_j) e^{-phi(z_j)} per node."""

    values: np.ndarray
    rank: int


def assemble_gram(
    span: FunctionSpan, measure: QuadratureMeasure, weight: WeightFunction
) -> np.ndarray:
    """Gram matrix G[m, n] = <basis_n, basis_m>, Hermitian-symmetrized."""
    if span.n_nodes != measure.n:
        raise InvalidMeasureError(
            f"span tabulates {span.n_nodes} nodes, measure has {measure.n}"
        )
    weight = eval_weight(weight, measure)
    v = span.basis_values
    d = measure.masses * np.exp(-weight.values)
    g = v.conj().T @ (d[:, None] * v)
    return 0.5 * (g + g.conj().T)


def equilibration_scales(gram: np.ndarray) -> np.ndarray:
    """Per-direction scales 1/sqrt(G_ii), with null directions left alone.

    Rescaling the basis by these factors gives the Gram a unit diagonal.
    The rescaling does not change the span, so the kernel is unaffected;
    what changes is that the eigenvalue spread then reflects genuine
    angular degeneracy instead of disparate basis normalizations (monomial
    norms under a scaled weight vary over many decades, yet their Gram is
    perfectly behaved once equilibrated).
    """
    diag = np.real(np.diag(gram))
    positive = diag > 0.0
    return np.where(positive, 1.0 / np.sqrt(np.where(positive, diag, 1.0)), 1.0)


def equilibrated_spectrum(gram: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the unit-diagonal rescaling of a Gram."""
    scale = equilibration_scales(gram)
    return np.linalg.eigvalsh(gram * np.outer(scale, scale))


def retained_spread(gram: np.ndarray, rank_tol: float = RANK_TOL) -> float:
    """Spread (max/min) of the retained equilibrated Gram spectrum.

    This is the conditioning the orthonormalization actually faces after
    rank truncation; identity residuals scale with roundoff times this
    number.
    """
    lam = equilibrated_spectrum(gram)
    top = lam[-1] if lam.size else 0.0
    if top <= 0.0:
        return 1.0
    kept = lam[lam > rank_tol * top]
    return float(top / kept[0])


def orthonormal_basis(gram: np.ndarray, rank_tol: float = RANK_TOL):
    """Orthonormalize a Gram matrix by Hermitian eigendecomposition.

    Returns (C, rank) with C of shape (d, rank) and C* G C = I on the
    retained spectrum.  The Gram is equilibrated to unit diagonal first;
    eigenvalues of the rescaled matrix at or below rank_tol times its
    largest are truncated.  A Gram with no positive spectrum yields rank 0
    (not an error).
    """
    scale = equilibration_scales(gram)
    lam, u = np.linalg.eigh(gram * np.outer(scale, scale))
    lam_max = lam[-1] if lam.size else 0.0
    if lam_max <= 0.0:
        return np.zeros((gram.shape[0], 0), dtype=complex), 0
    if lam[0] < -PSD_TOL * lam_max:
        raise InvalidConfigurationError(
            f"gram is not PSD up to tolerance: min eigenvalue {lam[0]:.3e} "
            f"against max {lam_max:.3e} after equilibration"
        )
    keep = lam > rank_tol * lam_max
    c = scale[:, None] * (u[:, keep] / np.sqrt(lam[keep]))
    return c, int(np.count_nonzero(keep))


def build_space(
    span: FunctionSpan,
    measure: QuadratureMeasure,
    weight: WeightFunction,
    rank_tol: float = RANK_TOL,
) -> WeightedSpace:
    """Assemble the Gram and orthonormalize; the returned space is immutable."""
    weight = eval_weight(weight, measure)
    gram = assemble_gram(span, measure, weight)
    coeffs, rank = orthonormal_basis(gram, rank_tol)
    return WeightedSpace(
        span=span,
        measure=measure,
        weight=weight,
        gram=gram,
        ortho_coeffs=coeffs,
        rank=rank,
    )


def orthonormal_node_values(space: WeightedSpace) -> np.ndarray:
    """Values of the orthonormal basis at the nodes, shape (m, rank)."""
    return space.span.basis_values @ space.ortho_coeffs


def kernel_matrix(space: WeightedSpace) -> KernelMatrix:
    """Dense kernel on node pairs.  Rank 0 gives the zero kernel."""
    e = orthonormal_node_values(space)
    k = e @ e.conj().T
    return KernelMatrix(values=0.5 * (k + k.conj().T), rank=space.rank)


def kernel_eval_at(space: WeightedSpace, z, w=None) -> np.ndarray:
    """Kernel K(z_i, w_j) at arbitrary point arrays (monomial spans only).

    With w omitted the second argument equals the first, so the result's
    diagonal holds K(z_i, z_i).
    """
    ez = evaluate_basis(space.span, z) @ space.ortho_coeffs
    if w is None:
        ew = ez
    else:
        ew = evaluate_basis(space.span, w) @ space.ortho_coeffs
    return ez @ ew.conj().T


def bergman_density(
    kernel: KernelMatrix, weight: WeightFunction, measure: QuadratureMeasure
) -> BergmanDensity:
    """Density of states from a tabulated kernel: B_j = K[j, j] e^{-phi_j}."""
    weight = eval_weight(weight, measure)
    vals = kernel.diagonal * np.exp(-weight.values)
    return BergmanDensity(values=vals, rank=kernel.rank)


def bergman_density_from_space(space: WeightedSpace) -> BergmanDensity:
    """Density of states without forming the full node-pair kernel.

    Row norms of the orthonormal basis give the kernel diagonal directly;
    this is the path to use when the node count is large.
    """
    e = orthonormal_node_values(space)
    diag = np.einsum("ij,ij->i", e, e.conj()).real
    return BergmanDensity(values=diag * np.exp(-space.weight.values), rank=space.rank)


def bergman_density_at(space: WeightedSpace, z) -> np.ndarray:
    """Density of states at arbitrary points (monomial span, closed-form weight)."""
    pts = np.asarray(z, dtype=complex).reshape(-1)
    e = evaluate_basis(space.span, pts) @ space.ortho_coeffs
    diag = np.einsum("ij,ij->i", e, e.conj()).real
    phi = space.weight.evaluate_at(pts)
    return diag * np.exp(-phi)


def density_integral(density: BergmanDensity, measure: QuadratureMeasure) -> float:
    """Total integral of the density; equals the rank up to roundoff."""
    return float(np.dot(measure.masses, density.values))


def reproducing_residual(
    kernel: KernelMatrix, weight: WeightFunction, measure: QuadratureMeasure
) -> float:
    """Largest entry of |K D K - K| with D = diag(w e^{-phi}).

    The reproducing property makes this zero in exact arithmetic; the residual
    measures how far conditioning has eroded it.
    """
    weight = eval_weight(weight, measure)
    d = measure.masses * np.exp(-weight.values)
    k = kernel.values
    return float(np.max(np.abs((k * d[None, :]) @ k - k))) if k.size else 0.0


def kernel_monotonicity_check(
    space_lo: WeightedSpace,
    space_hi: WeightedSpace,
    tol: float = MONOTONICITY_TOL,
) -> bool:
    """Check K_lo(z, z) <= K_hi(z, z) at every node when phi_lo <= phi_hi.

    Raising the weight shrinks every norm, which can only raise the diagonal
    of the kernel.  The precondition phi_lo <= phi_hi is enforced; a failing
    node is reported in the error.
    """
    lo, hi = space_lo.weight.values, space_hi.weight.values
    bad = lo > hi
    if np.any(bad):
        j = int(np.argmax(bad))
        raise InvalidConfigurationError(
            f"weights are not ordered at node {j}: {lo[j]} > {hi[j]}"
        )
    e_lo = orthonormal_node_values(space_lo)
    e_hi = orthonormal_node_values(space_hi)
    k_lo = np.einsum("ij,ij->i", e_lo, e_lo.conj()).real
    k_hi = np.einsum("ij,ij->i", e_hi, e_hi.conj()).real
    return bool(np.all(k_lo <= k_hi + tol * (1.0 + k_hi)))
