"""Fully discrete time marching: L1 in time, interior-penalty DG in space.

solve_linear runs the plain march for linear reaction terms.  solve_semilinear
wraps the same march in a global-in-time Newton linearization: each outer
iterate freezes the previous space-time solution, solves the resulting linear
problem over all levels, and stops when the nodal increment falls below the
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dg import DGFunction, DGSpace, assemble_full, load_vector, project_initial
from .errors import ArgumentContractError, CoefficientError, SolverError
from .fractional import L1Coefficients, history_weights, l1_coefficients
from .meshes import GradedTimeMesh, graded_mesh, uniform_mesh
from .quadrature import gamma

NEWTON_TOL = 1e-7
NEWTON_MAX_OUTER = 25


def _check_extents(alpha: float, ell: float, T: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ArgumentContractError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not ell > 0.0:
        raise ArgumentContractError(f"ell must be positive, got {ell!r}")
    if not T > 0.0:
        raise ArgumentContractError(f"T must be positive, got {T!r}")


def _check_compatibility(g, ell: float) -> None:
    scale = 1.0 + max(abs(float(g(0.25 * ell))), abs(float(g(0.5 * ell))))
    worst = max(abs(float(g(0.0))), abs(float(g(ell))))
    if worst > 1e-12 * scale:
        raise CoefficientError(f"initial data must vanish at both endpoints, got {worst:.3e}")


@dataclass
class LinearProblemSpec:
    """One linear IBVP: Caputo derivative in time, diffusion-reaction in space.

    The operator is p(t) [-(a(y) u_y)_y + b(y) u] with a, p > 0 and b >= 0;
    g is the initial profile and must vanish at both endpoints.  exact and
    exact_dy, when given, are (y, t) callables used for error measurement.
    """

    alpha: float
    ell: float
    T: float
    a: Callable
    b: Callable
    p: Callable
    f: Callable
    g: Callable
    exact: Optional[Callable] = None
    exact_dy: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        _check_extents(self.alpha, self.ell, self.T)
        _check_compatibility(self.g, self.ell)


@dataclass
class SemilinearProblemSpec:
    """As LinearProblemSpec but with reaction b(y, u) and derivative b_u >= 0."""

    alpha: float
    ell: float
    T: float
    a: Callable
    b: Callable
    b_u: Callable
    p: Callable
    f: Callable
    g: Callable
    exact: Optional[Callable] = None
    exact_dy: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        _check_extents(self.alpha, self.ell, self.T)
        _check_compatibility(self.g, self.ell)


@dataclass
class SolveResult:
    """Solution history plus run diagnostics.

    levels[n-1] is the DG solution at time level n (1-based); residuals are
    the per-level linear-solve residual norms.  For semilinear runs
    newton_iterations counts the outer iterates and newton_increments holds
    the nodal increment of each.  stability holds (lhs, rhs) pairs of the
    per-level L2 bound when the march was run with stability_check.
    """

    space: DGSpace
    tmesh: GradedTimeMesh
    l1: L1Coefficients
    levels: list
    residuals: np.ndarray
    converged: bool = True
    newton_iterations: Optional[int] = None
    newton_increments: Optional[list] = None
    stability: Optional[np.ndarray] = None
    coeff_history: np.ndarray = field(default=None, repr=False)

    def final(self) -> DGFunction:
        return self.levels[-1]


def _l2_of_coeffs(space: DGSpace, coeffs: np.ndarray) -> float:
    return float(np.sqrt(np.einsum("mi,ij,mj->", coeffs, space.mass_block, coeffs)))


def _march(space, tmesh, l1, diffusion_at, reaction_at, source_at, u1_coeffs, stability_check):
    """Advance all time levels of one linear problem.

    diffusion_at(n, y), reaction_at(n, y) and source_at(n, y) give the
    spatial coefficient and load samples of level n; the L1 diagonal is added
    to the reaction here.  Returns the coefficient history, per-level solve
    residuals and optional stability pairs.
    """
    N = tmesh.N
    M, k = space.mesh.M, space.k
    hist = np.empty((N + 1, M, k + 1))
    hist[0] = u1_coeffs
    residuals = np.zeros(N + 1)
    pairs = np.zeros((N + 1, 2)) if stability_check else None
    g2ma = gamma(2.0 - l1.alpha)

    for n in range(2, N + 2):
        tn = tmesh.times[n - 1]
        diag, weights = history_weights(l1, n)
        matrix = assemble_full(
            space,
            lambda y: diffusion_at(n, y),
            lambda y, _d=diag: reaction_at(n, y) + _d,
        )
        summed = np.tensordot(weights, hist[0 : n - 1], axes=(0, 0))
        combo = DGFunction(space, summed)
        rhs = load_vector(space, lambda y: source_at(n, y), [(1.0, combo)])
        x = matrix.solve(rhs)
        residuals[n - 1] = np.linalg.norm(matrix.matvec(x) - rhs)
        hist[n - 1] = x
        if stability_check:
            w = space.volume_rule.weights
            fv = np.asarray(source_at(n, space.volume_points_phys), dtype=float)
            fnorm = np.sqrt(0.5 * space.mesh.h * np.sum(w[None, :] * fv * fv))
            hist_norms = np.array([_l2_of_coeffs(space, hist[j]) for j in range(n - 1)])
            bound = tmesh.steps[n - 2] ** l1.alpha * g2ma * (fnorm + weights @ hist_norms)
            pairs[n - 1] = (_l2_of_coeffs(space, hist[n - 1]), bound)
    return hist, residuals, pairs


def _wrap_levels(space: DGSpace, hist: np.ndarray) -> list:
    return [DGFunction(space, hist[i]) for i in range(hist.shape[0])]


def solve_linear(
    problem: LinearProblemSpec,
    M: int,
    N: int,
    k: int,
    r: float,
    sigma=1.0,
    stability_check: bool = False,
) -> SolveResult:
    """March the linear problem over all N+1 levels.

    Level 1 is the L2 projection of g; every later level assembles the
    operator with K^n = p(t_n) a and c^n = p(t_n) b + L1 diagonal, applies
    the accumulated history weights, and solves.
    """
    tmesh = graded_mesh(problem.T, N, r)
    space = DGSpace(uniform_mesh(problem.ell, M), k, sigma)
    l1 = l1_coefficients(tmesh, problem.alpha)

    pvals = problem.p(tmesh.times)
    pvals = np.broadcast_to(np.asarray(pvals, dtype=float), tmesh.times.shape)
    if not np.all(pvals > 0.0):
        n_bad = int(np.argmax(~(pvals > 0.0))) + 1
        raise CoefficientError(f"p(t) must be positive, violated at level {n_bad}")

    def diffusion_at(n, y):
        return pvals[n - 1] * problem.a(y)

    def reaction_at(n, y):
        return pvals[n - 1] * problem.b(y)

    def source_at(n, y):
        return problem.f(y, tmesh.times[n - 1])

    u1 = project_initial(space, problem.g)
    hist, residuals, pairs = _march(
        space, tmesh, l1, diffusion_at, reaction_at, source_at, u1.coeffs, stability_check
    )
    return SolveResult(
        space, tmesh, l1, _wrap_levels(space, hist), residuals,
        stability=pairs, coeff_history=hist,
    )


def solve_semilinear(
    problem: SemilinearProblemSpec,
    M: int,
    N: int,
    k: int,
    r: float,
    sigma=1.0,
    tol: float = NEWTON_TOL,
    max_outer: int = NEWTON_MAX_OUTER,
) -> SolveResult:
    """Newton linearization around successive space-time iterates.

    Starting from the zero iterate, each outer pass solves the linear problem
    with frozen reaction slope b_u(y, u_prev) and source
    f - p(t) [b(y, u_prev) - b_u(y, u_prev) u_prev], keeping g as the initial
    profile of every pass.  Convergence is measured as the maximum nodal
    change over all elements and levels.
    """
    if not tol > 0.0:
        raise ArgumentContractError(f"tolerance must be positive, got {tol!r}")
    tmesh = graded_mesh(problem.T, N, r)
    space = DGSpace(uniform_mesh(problem.ell, M), k, sigma)
    l1 = l1_coefficients(tmesh, problem.alpha)

    pvals = problem.p(tmesh.times)
    pvals = np.broadcast_to(np.asarray(pvals, dtype=float), tmesh.times.shape)
    if not np.all(pvals > 0.0):
        n_bad = int(np.argmax(~(pvals > 0.0))) + 1
        raise CoefficientError(f"p(t) must be positive, violated at level {n_bad}")

    def diffusion_at(n, y):
        return pvals[n - 1] * problem.a(y)

    u1 = project_initial(space, problem.g)
    prev = np.zeros((N + 1, space.mesh.M, space.k + 1))
    increments: list[float] = []
    result_hist = None
    residuals = None

    for _ in range(max_outer):
        frozen = [DGFunction(space, prev[i]) for i in range(N + 1)]

        def reaction_at(n, y, _frozen=frozen):
            uq = _frozen[n - 1].eval(y)
            slope = np.asarray(problem.b_u(y, uq), dtype=float)
            if np.any(slope < 0.0):
                raise CoefficientError("reaction slope b_u must be nonnegative")
            return pvals[n - 1] * slope

        def source_at(n, y, _frozen=frozen):
            uq = _frozen[n - 1].eval(y)
            tn = tmesh.times[n - 1]
            return problem.f(y, tn) - pvals[n - 1] * (
                problem.b(y, uq) - problem.b_u(y, uq) * uq
            )

        result_hist, residuals, _ = _march(
            space, tmesh, l1, diffusion_at, reaction_at, source_at, u1.coeffs, False
        )
        increment = float(np.max(np.abs(result_hist - prev)))
        increments.append(increment)
        prev = result_hist
        if increment <= tol:
            return SolveResult(
                space, tmesh, l1, _wrap_levels(space, result_hist), residuals,
                converged=True,
                newton_iterations=len(increments),
                newton_increments=increments,
                coeff_history=result_hist,
            )

    raise SolverError(
        f"Newton linearization did not reach {tol:.1e} within {max_outer} iterations",
        history=increments,
    )
