"""Tests for the fully discrete march and its Newton wrapper.

The end-to-end accuracy check uses a manufactured solution that both
discretizations represent exactly: linear in time (where the piecewise-linear
history formula is exact) and quadratic in space (inside the degree-2 DG
space), so the solver must reproduce it to rounding.
"""

import numpy as np
import pytest

from fracdg.dg import DGSpace, project_initial
from fracdg.errors import ArgumentContractError, CoefficientError, SolverError
from fracdg.fractional import caputo_power
from fracdg.meshes import uniform_mesh
from fracdg.problems import registry_lookup
from fracdg.stepper import (
    LinearProblemSpec,
    SemilinearProblemSpec,
    solve_linear,
    solve_semilinear,
)

ELL = 1.0


def linear_in_time_problem(alpha=0.5):
    """Exact solution t * y(ell - y) with unit coefficients."""
    w = lambda y: y * (ELL - y)
    return LinearProblemSpec(
        alpha=alpha,
        ell=ELL,
        T=1.0,
        a=lambda y: np.ones_like(y),
        b=lambda y: np.ones_like(y),
        p=lambda t: np.ones_like(t),
        f=lambda y, t: caputo_power(alpha, 1.0, t) * w(y) + t * (2.0 + w(y)),
        g=lambda y: np.zeros_like(y),
        exact=lambda y, t: t * w(y),
        exact_dy=lambda y, t: t * (ELL - 2.0 * y),
    )


def zero_problem(alpha=0.5):
    return LinearProblemSpec(
        alpha=alpha,
        ell=ELL,
        T=1.0,
        a=lambda y: np.ones_like(y),
        b=lambda y: np.ones_like(y),
        p=lambda t: np.ones_like(t),
        f=lambda y, t: np.zeros_like(y),
        g=lambda y: np.zeros_like(y),
    )


# ---------------------------------------------------------------------------
# Linear march


def test_zero_data_stays_zero():
    result = solve_linear(zero_problem(), M=4, N=4, k=1, r=2.0)
    for level in result.levels:
        assert np.max(np.abs(level.coeffs)) <= 1e-12


def test_exactly_representable_solution_is_reproduced():
    problem = linear_in_time_problem()
    result = solve_linear(problem, M=3, N=6, k=2, r=2.0)
    nodes = result.space.element_nodes
    for n, level in enumerate(result.levels):
        t = result.tmesh.times[n]
        np.testing.assert_allclose(level.coeffs, problem.exact(nodes, t), atol=1e-9)


def test_level_bookkeeping():
    problem = linear_in_time_problem()
    result = solve_linear(problem, M=4, N=5, k=1, r=2.0)
    assert len(result.levels) == 6
    initial = project_initial(DGSpace(uniform_mesh(ELL, 4), 1), problem.g)
    np.testing.assert_array_equal(result.levels[0].coeffs, initial.coeffs)
    assert result.converged is True
    assert result.final() is result.levels[-1]


def test_march_is_deterministic():
    problem = registry_lookup("example1-constant", 0.4)
    a = solve_linear(problem, M=5, N=6, k=1, r=2.0)
    b = solve_linear(problem, M=5, N=6, k=1, r=2.0)
    assert np.array_equal(a.coeff_history, b.coeff_history)


def test_solve_residuals_are_small():
    result = solve_linear(registry_lookup("example1-constant", 0.5), M=6, N=8, k=2, r=3.0)
    assert result.residuals[0] == 0.0
    assert np.all(result.residuals[1:] <= 1e-8)


def test_stability_bound_holds_per_level():
    result = solve_linear(
        registry_lookup("example1-constant", 0.5), M=6, N=8, k=1, r=3.0, stability_check=True
    )
    assert result.stability.shape == (9, 2)
    lhs, rhs = result.stability[1:, 0], result.stability[1:, 1]
    assert np.all(lhs <= rhs * (1.0 + 1e-12))


def test_sigma_reaches_the_space():
    result = solve_linear(zero_problem(), M=4, N=2, k=1, r=1.0, sigma=3.5)
    assert np.all(result.space.sigma == 3.5)


# ---------------------------------------------------------------------------
# Argument and coefficient guards


def test_spec_rejects_bad_extents():
    with pytest.raises(ArgumentContractError, match="alpha"):
        zero = zero_problem()
        LinearProblemSpec(
            alpha=1.2, ell=zero.ell, T=zero.T, a=zero.a, b=zero.b, p=zero.p, f=zero.f, g=zero.g
        )


def test_spec_rejects_nonvanishing_initial_data():
    zero = zero_problem()
    with pytest.raises(CoefficientError, match="vanish"):
        LinearProblemSpec(
            alpha=0.5, ell=1.0, T=1.0, a=zero.a, b=zero.b, p=zero.p, f=zero.f,
            g=lambda y: np.cos(y),
        )


def test_solve_rejects_zero_elements():
    with pytest.raises(ArgumentContractError):
        solve_linear(zero_problem(), M=0, N=4, k=1, r=2.0)


def test_nonpositive_time_weight_rejected():
    zero = zero_problem()
    problem = LinearProblemSpec(
        alpha=0.5, ell=1.0, T=1.0, a=zero.a, b=zero.b,
        p=lambda t: np.asarray(t, dtype=float), f=zero.f, g=zero.g,
    )
    with pytest.raises(CoefficientError, match="level 1"):
        solve_linear(problem, M=4, N=4, k=1, r=2.0)


# ---------------------------------------------------------------------------
# Newton wrapper


def semilinear_twin(alpha=0.5):
    """Reaction u with unit slope: the linearization is exact in one pass."""
    base = linear_in_time_problem(alpha)
    return SemilinearProblemSpec(
        alpha=alpha,
        ell=base.ell,
        T=base.T,
        a=base.a,
        b=lambda y, u: u,
        b_u=lambda y, u: np.ones_like(np.asarray(u, dtype=float)),
        p=base.p,
        f=base.f,
        g=base.g,
    )


def test_unit_slope_reaction_converges_in_two_passes():
    linear = solve_linear(linear_in_time_problem(), M=3, N=4, k=2, r=2.0)
    semi = solve_semilinear(semilinear_twin(), M=3, N=4, k=2, r=2.0)
    assert semi.converged is True
    assert semi.newton_iterations == 2
    assert semi.newton_increments[-1] <= 1e-12
    np.testing.assert_allclose(semi.coeff_history, linear.coeff_history, atol=1e-12)


def test_semilinear_example_converges():
    problem = registry_lookup("example3-semilinear", 0.5)
    result = solve_semilinear(problem, M=8, N=8, k=2, r=2.0)
    assert result.converged is True
    assert result.newton_iterations <= 10
    assert len(result.newton_increments) == result.newton_iterations
    assert result.newton_increments[-1] <= 1e-7


def test_newton_iteration_cap_raises_with_history():
    problem = registry_lookup("example3-semilinear", 0.5)
    with pytest.raises(SolverError) as excinfo:
        solve_semilinear(problem, M=4, N=4, k=1, r=2.0, max_outer=1)
    assert len(excinfo.value.history) == 1


def test_newton_tolerance_must_be_positive():
    with pytest.raises(ArgumentContractError, match="tolerance"):
        solve_semilinear(semilinear_twin(), M=3, N=4, k=1, r=2.0, tol=0.0)


def test_negative_reaction_slope_rejected():
    base = linear_in_time_problem()
    problem = SemilinearProblemSpec(
        alpha=0.5, ell=base.ell, T=base.T, a=base.a,
        b=lambda y, u: -u,
        b_u=lambda y, u: -np.ones_like(np.asarray(u, dtype=float)),
        p=base.p, f=base.f, g=base.g,
    )
    with pytest.raises(CoefficientError, match="slope"):
        solve_semilinear(problem, M=3, N=4, k=1, r=2.0)
