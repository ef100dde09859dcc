"""Gamma function, Gauss and Lobatto quadrature, and nodal Lagrange bases.

Quadrature nodes are found by damped Newton iteration on the Legendre
three-term recurrence, starting from Chebyshev-type initial guesses.  The
Lagrange basis on Lobatto nodes is evaluated with the barycentric formula,
which is exact at the nodes and stable between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentContractError

MAX_GAUSS_POINTS = 32
_MAX_NEWTON_ITERATIONS = 100
_NODE_GUARD = 1e-14


def gamma(x: float) -> float:
    """Gamma function for positive real arguments.

    Delegates to the C library implementation, which is accurate to a few
    ulps on the (0, 50] range used by the fractional-derivative kernels.
    """
    if not x > 0.0:
        raise ArgumentContractError(f"gamma requires x > 0, got {x!r}")
    return math.gamma(x)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a quadrature rule on the reference interval [-1, 1].

    A ``gauss`` rule with n points integrates polynomials up to degree 2n-1
    exactly; a ``lobatto`` rule with n points (which includes both endpoints)
    is exact up to degree 2n-3.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    npoints: int


def _legendre(n: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Value and first derivative of the degree-n Legendre polynomial."""
    z = np.asarray(z, dtype=float)
    p_prev = np.ones_like(z)
    if n == 0:
        return p_prev, np.zeros_like(z)
    p = z.copy()
    for j in range(2, n + 1):
        p_prev, p = p, ((2 * j - 1) * z * p - (j - 1) * p_prev) / j
    # The interior formula divides by z^2 - 1; endpoints get the exact value.
    den = z * z - 1.0
    at_end = den == 0.0
    dp = n * (z * p - p_prev) / np.where(at_end, 1.0, den)
    if np.any(at_end):
        end_dp = z ** (n - 1) * (0.5 * n * (n + 1))
        dp = np.where(at_end, end_dp, dp)
    return p, dp


def _newton_roots(guess: np.ndarray, fun) -> np.ndarray:
    """Damped Newton iteration driving fun's residual to roundoff level.

    fun(z) must return (residual, derivative).  Steps are capped so an
    aggressive first iterate cannot jump across a neighbouring root.
    """
    z = np.asarray(guess, dtype=float).copy()
    if z.size == 0:
        return z
    max_step = 0.49 * np.min(np.diff(np.sort(z))) if z.size > 1 else 0.5
    for _ in range(_MAX_NEWTON_ITERATIONS):
        res, der = fun(z)
        step = res / der
        np.clip(step, -max_step, max_step, out=step)
        z -= step
        if np.max(np.abs(step)) < 1e-15:
            break
    else:
        raise RuntimeError("quadrature node iteration did not converge")
    return z


def gauss_rule(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 32."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise ArgumentContractError(f"gauss_rule requires 1 <= n <= {MAX_GAUSS_POINTS}, got {n!r}")
    n = int(n)
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]), "gauss", 1)
    i = np.arange(n)
    guess = np.cos(np.pi * (4 * i + 3) / (4 * n + 2))
    z = _newton_roots(np.sort(guess), lambda x: _legendre(n, x))
    _, dp = _legendre(n, z)
    w = 2.0 / ((1.0 - z * z) * dp * dp)
    # Roots of an even/odd polynomial come in mirrored pairs; symmetrize to
    # pin the mirror property down to the last bit.
    z = 0.5 * (z - z[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(z, w, "gauss", n)


def lobatto_rule(n: int) -> QuadratureRule:
    """n-point Gauss-Lobatto rule on [-1, 1], 2 <= n <= 33.

    Interior nodes are the roots of the derivative of the degree-(n-1)
    Legendre polynomial; the endpoints -1 and 1 are always included.
    """
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= MAX_GAUSS_POINTS + 1:
        raise ArgumentContractError(
            f"lobatto_rule requires 2 <= n <= {MAX_GAUSS_POINTS + 1}, got {n!r}"
        )
    n = int(n)
    m = n - 1

    def dp_and_d2p(z):
        p, dp = _legendre(m, z)
        d2p = (2.0 * z * dp - m * (m + 1) * p) / (1.0 - z * z)
        return dp, d2p

    if n == 2:
        interior = np.empty(0)
    else:
        interior = _newton_roots(np.cos(np.pi * np.arange(m - 1, 0, -1) / m), dp_and_d2p)
    z = np.concatenate(([-1.0], interior, [1.0]))
    p, _ = _legendre(m, z)
    w = 2.0 / (m * (m + 1) * p * p)
    z = 0.5 * (z - z[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(z, w, "lobatto", n)


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    return w / np.max(np.abs(w))


def _differentiation_matrix(nodes: np.ndarray, bary: np.ndarray) -> np.ndarray:
    # D[i, j] is the derivative of basis function j at node i.
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -np.sum(d, axis=1))
    return d


@dataclass(frozen=True)
class LagrangeBasis:
    """Nodal Lagrange basis of degree k on the k+1 Lobatto points of [-1, 1]."""

    degree: int
    nodes: np.ndarray
    bary_weights: np.ndarray
    diff_matrix: np.ndarray = field(repr=False)


def lagrange_basis(k: int) -> LagrangeBasis:
    """Build the degree-k Lobatto-node Lagrange basis."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ArgumentContractError(f"lagrange_basis requires degree k >= 1, got {k!r}")
    nodes = lobatto_rule(int(k) + 1).nodes
    bary = _barycentric_weights(nodes)
    return LagrangeBasis(int(k), nodes, bary, _differentiation_matrix(nodes, bary))


def basis_eval(basis: LagrangeBasis, z: float) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of all k+1 basis polynomials at one point z.

    Within 1e-14 of a node the exact nodal values are returned, which keeps
    the barycentric ratios away from 0/0.
    """
    z = float(z)
    if not -1.0 - 1e-12 <= z <= 1.0 + 1e-12:
        raise ArgumentContractError(f"basis_eval requires z in [-1, 1], got {z!r}")
    nodes = basis.nodes
    dist = z - nodes
    hit = np.abs(dist) < _NODE_GUARD
    if np.any(hit):
        i = int(np.argmax(hit))
        values = np.zeros_like(nodes)
        values[i] = 1.0
        return values, basis.diff_matrix[i].copy()
    ratios = basis.bary_weights / dist
    values = ratios / np.sum(ratios)
    derivs = values * (np.sum(1.0 / dist) - 1.0 / dist)
    return values, derivs


def basis_eval_many(basis: LagrangeBasis, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tabulate basis values and derivatives at an array of points.

    Returns arrays of shape (len(z), k+1).  Used to build the evaluation
    caches of a DG space.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    values = np.empty((z.size, basis.nodes.size))
    derivs = np.empty_like(values)
    for i, zi in enumerate(z):
        values[i], derivs[i] = basis_eval(basis, zi)
    return values, derivs
