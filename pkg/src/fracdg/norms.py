"""Error measurement in four norms plus interpolation and order utilities.

The DG energy-norm integrates the broken gradient with a high-order rule;
the discrete energy-norm samples it only at the k Gauss points of each
element, which is where the derivative error superconverges.  Both share the
weight beta drawn from the coefficient minima and the penalty jump terms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dg import DGFunction, DGSpace
from .errors import ArgumentContractError
from .fractional import L1Coefficients
from .quadrature import basis_eval_many, gauss_rule
from .stepper import SemilinearProblemSpec

LINF_SAMPLES_PER_DEGREE = 10


@dataclass(frozen=True)
class NormReport:
    """The four error norms of one comparison, plus the weight used."""

    l2: float
    linf: float
    dg_energy: float
    discrete_energy: float
    beta: float

    def value(self, name: str) -> float:
        try:
            return {
                "l2": self.l2,
                "linf": self.linf,
                "dg": self.dg_energy,
                "discrete": self.discrete_energy,
            }[name]
        except KeyError:
            raise ArgumentContractError(f"unknown norm name {name!r}") from None


def beta_weight(problem, space: DGSpace, l1: L1Coefficients) -> float:
    """Energy-norm weight beta = min(p* a*, p* b*) from sampled coefficient minima.

    p* is taken over the mesh times and a*, b* over the volume quadrature
    points.  If the reaction minimum is zero the degenerate norm is avoided
    by substituting the minimum of the full reaction coefficient
    p(t_n) b + L1 diagonal, with a warning.  Semilinear problems use the
    zero-state slope b_u(y, 0) as the reaction sample.
    """
    times = l1.mesh.times
    pv = np.broadcast_to(np.asarray(problem.p(times), dtype=float), times.shape)
    yq = space.volume_points_phys
    av = np.broadcast_to(np.asarray(problem.a(yq), dtype=float), yq.shape)
    if isinstance(problem, SemilinearProblemSpec):
        bv = np.asarray(problem.b_u(yq, np.zeros_like(yq)), dtype=float)
    else:
        bv = np.asarray(problem.b(yq), dtype=float)
    bv = np.broadcast_to(bv, yq.shape)
    p_star, a_star, b_star = float(pv.min()), float(av.min()), float(bv.min())
    beta = min(p_star * a_star, p_star * b_star)
    if beta > 0.0:
        return beta
    diag_min = math.inf
    for n in range(2, l1.mesh.N + 2):
        diag_min = min(diag_min, float(l1.row(n)[-1]))
    fallback = min(p_star * a_star, float((pv[1:, None, None] * bv[None]).min(axis=0).min()) + diag_min)
    warnings.warn(
        "reaction coefficient minimum is zero; using the L1 diagonal as the norm weight",
        stacklevel=2,
    )
    return fallback


def _jump_sq(u_h: DGFunction, exact_fn) -> float:
    """Sum over nodes of sigma_m [e]^2 for e = exact - u_h.

    The exact solution is continuous, so interior jumps of e are those of
    u_h with opposite sign; the boundary terms use the one-sided conventions.
    """
    space = u_h.space
    sig = space.sigma
    ell = space.mesh.ell
    total = sig[0] * (float(exact_fn(0.0)) - u_h.coeffs[0, 0]) ** 2
    total += sig[-1] * (u_h.coeffs[-1, -1] - float(exact_fn(ell))) ** 2
    inner = u_h.interior_jumps()
    total += float(np.sum(sig[1:-1] * inner * inner))
    return float(total)


def error_norms(u_h: DGFunction, exact, space: DGSpace, beta: float) -> NormReport:
    """Measure exact - u_h in all four norms at one time level.

    exact must be a (value, derivative) pair of y-callables; the analytic
    derivative feeds the energy norms.  L2 and the DG gradient use a
    (k+5)-point Gauss rule, the discrete gradient the k-point rule with the
    h/2 element Jacobian, and the max norm a dense per-element sample grid.
    """
    if space is not u_h.space:
        raise ArgumentContractError("space does not match the measured function")
    try:
        exact_fn, exact_dy = exact
    except (TypeError, ValueError):
        raise ArgumentContractError("exact must be a (value, derivative) pair") from None
    if exact_fn is None or exact_dy is None:
        raise ArgumentContractError("energy norms require the analytic derivative")

    mesh = space.mesh
    h = mesh.h
    rule = gauss_rule(space.k + 5)
    phi, dphi = basis_eval_many(space.basis, rule.nodes)
    ypts = mesh.midpoints[:, None] + 0.5 * h * rule.nodes[None, :]

    uh = u_h.coeffs @ phi.T
    duh = (2.0 / h) * (u_h.coeffs @ dphi.T)
    e = np.asarray(exact_fn(ypts), dtype=float) - uh
    de = np.asarray(exact_dy(ypts), dtype=float) - duh
    w = rule.weights[None, :]
    l2_sq = 0.5 * h * float(np.sum(w * e * e))
    grad_sq = 0.5 * h * float(np.sum(w * de * de))

    duh_g = (2.0 / h) * (u_h.coeffs @ space.dphi_gauss.T)
    de_g = np.asarray(exact_dy(space.gauss_points_phys), dtype=float) - duh_g
    wg = space.gauss_rule.weights[None, :]
    disc_grad_sq = 0.5 * h * float(np.sum(wg * de_g * de_g))

    jumps = _jump_sq(u_h, exact_fn)
    dg_energy = math.sqrt(beta * (grad_sq + l2_sq) + jumps)
    discrete = math.sqrt(beta * disc_grad_sq + beta * l2_sq + jumps)

    zs = np.linspace(-1.0, 1.0, LINF_SAMPLES_PER_DEGREE * (space.k + 1) + 1)
    phis, _ = basis_eval_many(space.basis, zs)
    ys = mesh.midpoints[:, None] + 0.5 * h * zs[None, :]
    diff = np.asarray(exact_fn(ys), dtype=float) - u_h.coeffs @ phis.T
    linf = float(np.max(np.abs(diff)))

    return NormReport(math.sqrt(l2_sq), linf, dg_energy, discrete, beta)


def lobatto_interpolant(exact_fn, space: DGSpace) -> DGFunction:
    """Piecewise interpolant taking the exact values at mapped Lobatto nodes."""
    vals = np.asarray(exact_fn(space.element_nodes), dtype=float)
    return DGFunction(space, np.broadcast_to(vals, space.element_nodes.shape).copy())


def convergence_order(errors) -> list:
    """Pairwise log2 ratios along a doubling resolution chain."""
    pairs = list(errors)
    if len(pairs) < 2:
        raise ArgumentContractError("need at least two (resolution, error) pairs")
    orders = []
    for (res_a, err_a), (res_b, err_b) in zip(pairs, pairs[1:]):
        if abs(res_b - 2.0 * res_a) > 1e-12 * max(abs(res_b), 1.0):
            raise ArgumentContractError(
                f"resolutions must double, got {res_a!r} then {res_b!r}"
            )
        if not (err_a > 0.0 and err_b > 0.0):
            raise ArgumentContractError("errors must be positive to take log ratios")
        orders.append(math.log2(err_a / err_b))
    return orders
