"""Weight homotopies phi_t = phi + t u and kernel derivatives along them.

The central object is G(t), the density of the phi_t-space integrated against
an indicator (or a fixed profile rho).  With u = psi - phi and rho the
indicator of {u < 0}, G interpolates the two sides of the comparison
inequality: G(0) is the left side, G(1) the right, and G is nondecreasing.

Three algebraically equal expressions for G'(t) are implemented, writing
M[j, k] = |K_t(z_j, z_k)|^2 e^{-phi_t(z_j) - phi_t(z_k)} w_j w_k:

  direct form      -sum_j rho_j u_j K_t[j, j] e^{-phi_t(j)} w_j
                   + sum_{j,k} rho_j u_k M[j, k]
  symmetric form   (1/2) sum_{j,k} (rho_j - rho_k)(u_k - u_j) M[j, k]
  sign-split form  sum_{u_j < 0 <= u_k} (u_k - u_j) M[j, k]   (rho = 1_{u<0})

The sign-split form is a sum of nonnegative terms, which is how monotonicity
of G becomes visible.  Ties u = 0 are grouped with the nonnegative side,
matching the strict-inequality convention for sublevel sets.

The kernel's own t-derivative is K'_t(z, w) = integral u(v) K_t(z, v)
K_t(v, w) e^{-phi_t(v)} dmu(v); finite-difference quotients of the kernel
obey sup and L2 bounds with the envelope constant 2 u_sup e^{2 u_sup}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import (
    RANK_TOL,
    WeightedSpace,
    bergman_density_from_space,
    build_space,
    kernel_matrix,
    orthonormal_node_values,
)
from .measures import QuadratureMeasure
from .spans import FunctionSpan
from .weights import WeightFunction, eval_weight

DEFAULT_T_GRID = tuple(np.linspace(0.0, 1.0, 11))
FD_STEP = 1e-3
ORDER_STEPS = (1e-2, 1e-3, 1e-4)
BOUND_STEPS = (0.5, 0.1, 0.01)

THREE_FORM_RTOL = 1e-10
SIGN_SPLIT_FLOOR = -1e-12
FD_MATCH_TOL = 1e-6
STEP_TOL = 1e-12
ENDPOINT_TOL = 1e-12
# Absolute slack added to the quotient bounds so nodes with a vanishing
# kernel diagonal pass exactly.
BOUND_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class HomotopyPath:
    """Straight path of weights t -> phi + t u on a fixed node set."""

    base_values: np.ndarray
    direction: np.ndarray
    u_sup: float
    t_grid: tuple


@dataclass(frozen=True)
class DerivativeReport:
    """G, its three closed-form derivatives, and a finite-difference estimate
    at one parameter value."""

    t: float
    g_value: float
    direct_form: float
    symmetric_form: float
    sign_split_form: float
    fd_estimate: float
    fd_step: float

    @property
    def max_pairwise_dev(self) -> float:
        forms = (self.direct_form, self.symmetric_form, self.sign_split_form)
        return max(abs(a - b) for a in forms for b in forms)


def build_path(phi: WeightFunction, psi: WeightFunction, t_grid=None) -> HomotopyPath:
    """Path from phi to psi; the direction is u = psi - phi."""
    u = psi.values - phi.values
    return HomotopyPath(
        base_values=phi.values,
        direction=u,
        u_sup=float(np.max(np.abs(u))) if u.size else 0.0,
        t_grid=tuple(float(t) for t in (DEFAULT_T_GRID if t_grid is None else t_grid)),
    )


def weight_at(path: HomotopyPath, t: float) -> WeightFunction:
    """The weight phi + t u as a tabulated WeightFunction."""
    return WeightFunction(values=path.base_values + t * path.direction, family=None)


def space_at(
    path: HomotopyPath,
    t: float,
    span: FunctionSpan,
    measure: QuadratureMeasure,
    rank_tol: float = RANK_TOL,
) -> WeightedSpace:
    return build_space(span, measure, weight_at(path, t), rank_tol)


def negative_direction_indicator(path: HomotopyPath) -> np.ndarray:
    """The profile 1_{u < 0} that turns G into the comparison interpolant."""
    return (path.direction < 0.0).astype(float)


def _rho_values(path: HomotopyPath, rho) -> np.ndarray:
    if rho is None:
        return negative_direction_indicator(path)
    if callable(rho):
        return np.asarray(rho(path.direction), dtype=float)
    if hasattr(rho, "indicator"):
        return rho.indicator()
    return np.asarray(rho, dtype=float)


def g_of_t(
    path: HomotopyPath,
    rho,
    t: float,
    span: FunctionSpan,
    measure: QuadratureMeasure,
    rank_tol: float = RANK_TOL,
) -> float:
    """G(t) = integral of rho times the density of the phi_t-space.

    rho may be None (indicator of {u < 0}), a SublevelSet, an array of node
    values, or a callable applied to u.
    """
    rho_vals = _rho_values(path, rho)
    space = space_at(path, t, span, measure, rank_tol)
    b = bergman_density_from_space(space).values
    return float(np.sum(rho_vals * measure.masses * b))


def kernel_derivative_matrix(path: HomotopyPath, space_t: WeightedSpace) -> np.ndarray:
    """Matrix of K'_t on node pairs: K diag(u w e^{-phi_t}) K."""
    k = kernel_matrix(space_t).values
    d = path.direction * space_t.measure_factor
    return (k * d[None, :]) @ k


def kernel_derivative_rhs(
    path: HomotopyPath, t: float, i: int, j: int, space_t: WeightedSpace
) -> complex:
    """Single entry of the kernel derivative at parameter t.

    The space passed in must be the one built at the same t (it carries the
    weight phi_t in its measure factor).
    """
    e = orthonormal_node_values(space_t)
    d = path.direction * space_t.measure_factor
    row_i = e[i] @ (e.conj().T * d[None, :])  # K(z_i, .) weighted
    return complex(row_i @ (e @ e[j].conj()))


def kernel_fd(
    path: HomotopyPath,
    t: float,
    tau: float,
    span: FunctionSpan,
    measure: QuadratureMeasure,
    rank_tol: float = RANK_TOL,
) -> np.ndarray:
    """Central finite difference of the node-pair kernel in t."""
    k_plus = kernel_matrix(space_at(path, t + tau, span, measure, rank_tol)).values
    k_minus = kernel_matrix(space_at(path, t - tau, span, measure, rank_tol)).values
    return (k_plus - k_minus) / (2.0 * tau)


def sup_bound_constant(u_sup: float) -> float:
    """Envelope constant 2 u_sup e^{2 u_sup} for the quotient bounds."""
    return 2.0 * u_sup * np.exp(2.0 * u_sup)


def difference_quotient_bound_check(
    path: HomotopyPath,
    t: float,
    tau: float,
    span: FunctionSpan,
    measure: QuadratureMeasure,
    node: int | None = None,
    rank_tol: float = RANK_TOL,
) -> bool:
    """|K_{t+tau}(z, z) - K_t(z, z)| / |tau| <= C_u K_t(z, z) at the nodes.

    C_u = 2 u_sup e^{2 u_sup}; requires |tau| <= 1.  With node=None every
    node is checked.
    """
    e_t = orthonormal_node_values(space_at(path, t, span, measure, rank_tol))
    e_s = orthonormal_node_values(space_at(path, t + tau, span, measure, rank_tol))
    diag_t = np.einsum("ij,ij->i", e_t, e_t.conj()).real
    diag_s = np.einsum("ij,ij->i", e_s, e_s.conj()).real
    quotient = np.abs(diag_s - diag_t) / abs(tau)
    floor = BOUND_FLOOR * (1.0 + float(diag_t.max(initial=0.0)))
    bound = sup_bound_constant(path.u_sup) * diag_t + floor
    if node is not None:
        return bool(quotient[node] <= bound[node])
    return bool(np.all(quotient <= bound))


def l2_difference_bound_check(
    path: HomotopyPath,
    t: float,
    tau: float,
    span: FunctionSpan,
    measure: QuadratureMeasure,
    node: int | None = None,
    rank_tol: float = RANK_TOL,
) -> bool:
    """Weighted L2 norm of the kernel increment row against C_u |tau| K_t(z, z).

    For each node i the quantity sum_k |K_{t+tau} - K_t|^2(i, k) w_k
    e^{-phi_t(k)} must stay below C_u |tau| K_t(z_i, z_i).
    """
    space_t = space_at(path, t, span, measure, rank_tol)
    e_t = orthonormal_node_values(space_t)
    e_s = orthonormal_node_values(space_at(path, t + tau, span, measure, rank_tol))
    # The increment K_{t+tau} - K_t factors through the stacked frame
    # U = [e_s | e_t] with signature (+1, -1), so the weighted row norms
    # come from a small cross-Gram instead of the full node-pair matrix.
    u_frame = np.concatenate([e_s, e_t], axis=1)
    signs = np.concatenate(
        [np.ones(e_s.shape[1]), -np.ones(e_t.shape[1])]
    )
    d = space_t.measure_factor
    w_gram = u_frame.conj().T @ (d[:, None] * u_frame)
    core = signs[:, None] * w_gram * signs[None, :]
    lhs = np.einsum("ia,ab,ib->i", u_frame, core, u_frame.conj()).real
    diag_t = np.einsum("ij,ij->i", e_t, e_t.conj()).real
    floor = BOUND_FLOOR * (1.0 + float(diag_t.max(initial=0.0)))
    bound = sup_bound_constant(path.u_sup) * abs(tau) * diag_t + floor
    if node is not None:
        return bool(lhs[node] <= bound[node])
    return bool(np.all(lhs <= bound))


def g_derivative_forms(
    path: HomotopyPath,
    t: float,
    span: FunctionSpan,
    measure: QuadratureMeasure,
    rho=None,
    fd_step: float = FD_STEP,
    rank_tol: float = RANK_TOL,
) -> DerivativeReport:
    """Evaluate G, its three derivative expressions, and a central FD at t.

    The direct and symmetric forms accept any profile rho; the sign-split
    form is specific to rho = 1_{u < 0} (the default) and is reported for
    that profile regardless of the rho passed in.
    """
    rho_vals = _rho_values(path, rho)
    u = path.direction
    space = space_at(path, t, span, measure, rank_tol)
    e = orthonormal_node_values(space)
    d = space.measure_factor
    diag = np.einsum("ij,ij->i", e, e.conj()).real

    # Quadratic forms x' M y with M = |K|^2 (d x d) reduce to traces of
    # small cross-Grams: sum_jk x_j |K_jk|^2 y_k = tr(A(x d) A(y d)) where
    # A(v) = e* diag(v) e.  This keeps the cost at O(nodes x rank^2), so
    # dense quadrature measures never materialize a node-pair matrix.
    def cross_gram(v):
        return e.conj().T @ (v[:, None] * e)

    def pair_sum(x, y):
        return float(np.trace(cross_gram(x * d) @ cross_gram(y * d)).real)

    rho_m_u = pair_sum(rho_vals, u)
    direct = float(-np.sum(rho_vals * u * diag * d) + rho_m_u)
    symmetric = rho_m_u - pair_sum(rho_vals * u, np.ones_like(u))

    neg = u < 0.0
    pos = ~neg
    sign_split = pair_sum(neg.astype(float), u * pos) - pair_sum(
        u * neg, pos.astype(float)
    )

    g_plus = g_of_t(path, rho_vals, t + fd_step, span, measure, rank_tol)
    g_minus = g_of_t(path, rho_vals, t - fd_step, span, measure, rank_tol)

    return DerivativeReport(
        t=float(t),
        g_value=g_of_t(path, rho_vals, t, span, measure, rank_tol),
        direct_form=direct,
        symmetric_form=symmetric,
        sign_split_form=sign_split,
        fd_estimate=float((g_plus - g_minus) / (2.0 * fd_step)),
        fd_step=float(fd_step),
    )


def monotonicity_sweep(
    path: HomotopyPath,
    span: FunctionSpan,
    measure: QuadratureMeasure,
    rank_tol: float = RANK_TOL,
) -> list:
    """(t, G(t)) along the path's grid with rho = 1_{u < 0}.

    G must be nondecreasing up to STEP_TOL per step, with G at the endpoints
    equal to the two comparison integrals.
    """
    rho_vals = negative_direction_indicator(path)
    return [
        (t, g_of_t(path, rho_vals, t, span, measure, rank_tol)) for t in path.t_grid
    ]
