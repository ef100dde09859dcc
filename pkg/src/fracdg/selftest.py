"""Built-in property suites guarding the numerical core.

Each check exercises an exact identity or a frozen reference value, so a
pass is meaningful on any platform.  The whole battery must finish within
a minute; every run is deterministic (fixed seeds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dg import DGFunction, DGSpace, assemble_full
from .fractional import (
    caputo_power,
    history_weights,
    l1_apply,
    l1_coefficients,
    theta_multipliers,
)
from .meshes import graded_mesh, uniform_mesh
from .norms import error_norms
from .problems import REGISTRY_IDS, registry_lookup, residual_oracle_terms
from .quadrature import gamma, gauss_rule, lobatto_rule
from .stepper import LinearProblemSpec, solve_linear

# Reference values for the multiplier recursion, fixed mesh and order.
THETA_BOUNDS_N4_UNIFORM_A05 = np.array([
    1.0641895835477563,
    1.4371128121258129,
    1.7449661124414350,
    2.0207685826182809,
])
THETA_BOUND_MAX_N8_R3_A04 = 1.8048268726053152


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _gauss_exactness() -> str:
    worst = 0.0
    for n in range(1, 17):
        rule = gauss_rule(n)
        for j in range(0, 2 * n):
            exact = 2.0 / (j + 1) if j % 2 == 0 else 0.0
            got = float(rule.weights @ rule.nodes**j)
            worst = max(worst, abs(got - exact))
    for n in range(2, 17):
        rule = lobatto_rule(n)
        for j in range(0, 2 * n - 2):
            exact = 2.0 / (j + 1) if j % 2 == 0 else 0.0
            got = float(rule.weights @ rule.nodes**j)
            worst = max(worst, abs(got - exact))
    if worst > 1e-12:
        raise AssertionError(f"monomial integration off by {worst:.3e}")
    return f"max monomial defect {worst:.1e}"


def _gamma_recurrence() -> str:
    xs = np.linspace(0.1, 10.0, 100)
    worst = 0.0
    for x in xs:
        lhs = gamma(x + 1.0)
        rhs = x * gamma(x)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    if worst > 1e-12:
        raise AssertionError(f"recurrence defect {worst:.3e}")
    return f"max relative defect {worst:.1e}"


def _l1_structure() -> str:
    worst_mono, worst_tel, worst_lin = 0.0, 0.0, 0.0
    for alpha, r, N in ((0.5, 3.0, 64), (0.4, 1.0, 32), (0.8, 2.0, 48)):
        mesh = graded_mesh(1.0, N, r)
        c = l1_coefficients(mesh, alpha)
        for n in range(2, N + 2):
            row = c.row(n)
            if row.min() <= 0.0:
                raise AssertionError(f"nonpositive coefficient at level {n}")
            worst_mono = max(worst_mono, float(np.max(-np.diff(row), initial=0.0)))
            diag, weights = history_weights(c, n)
            worst_tel = max(worst_tel, abs(weights.sum() - diag) / diag)
        # The scheme differentiates u(t) = t exactly.
        samples = mesh.times.copy()
        for n in range(2, N + 2):
            got = l1_apply(c, samples, n)
            want = caputo_power(alpha, 1.0, mesh.times[n - 1])
            worst_lin = max(worst_lin, abs(got - want) / abs(want))
    if worst_mono > 0.0:
        raise AssertionError(f"monotonicity violated by {worst_mono:.3e}")
    if worst_tel > 1e-12 or worst_lin > 1e-12:
        raise AssertionError(f"telescoping {worst_tel:.3e}, linear u {worst_lin:.3e}")
    return f"telescoping {worst_tel:.1e}, linear reproduction {worst_lin:.1e}"


def _theta_bound() -> str:
    mesh = graded_mesh(1.0, 4, 1.0)
    c = l1_coefficients(mesh, 0.5)
    th = theta_multipliers(c)
    tri = th.table[np.tril_indices_from(th.table)]
    if np.any(th.table < 0.0):
        raise AssertionError("negative multiplier entry")
    if min(th.theta(n, n) for n in range(1, 6)) <= 0.0 or tri.min() < 0.0:
        raise AssertionError("multiplier positivity violated")
    bounds = th.level_bound_values(mesh.steps)
    defect = float(np.max(np.abs(bounds - THETA_BOUNDS_N4_UNIFORM_A05)))
    if defect > 1e-8:
        raise AssertionError(f"uniform-mesh bound values off by {defect:.3e}")

    mesh2 = graded_mesh(1.0, 8, 3.0)
    c2 = l1_coefficients(mesh2, 0.4)
    th2 = theta_multipliers(c2)
    if np.any(th2.table < 0.0):
        raise AssertionError("negative multiplier entry on graded mesh")
    top = float(th2.level_bound_values(mesh2.steps).max())
    if top > THETA_BOUND_MAX_N8_R3_A04 * (1.0 + 1e-8):
        raise AssertionError(f"graded-mesh bound {top:.12f} above reference")
    return f"uniform defect {defect:.1e}, graded max {top:.6f}"


def _coercivity() -> str:
    rng = np.random.default_rng(20240521)
    worst = -np.inf
    for k, M in ((1, 16), (2, 9)):
        ell = math.pi
        sigma = np.abs(np.sin(1.0 + np.arange(M + 1)))
        sigma[1] = 0.0  # include a penalty-free node
        space = DGSpace(uniform_mesh(ell, M), k, sigma)
        Kfun = lambda y: 1.0 + y
        cfun = lambda y: 2.0 + np.cos(y)
        matrix = assemble_full(space, Kfun, cfun)
        pts = space.volume_points_phys
        beta = min(float(Kfun(pts).min()), float(cfun(pts).min()))
        w = space.volume_rule.weights
        half_h = 0.5 * space.mesh.h
        for _ in range(250):
            coeffs = rng.standard_normal((M, k + 1))
            v = DGFunction(space, coeffs)
            vv = v.sample_reference(space.volume_rule.nodes)
            dv = v.derivative_reference(space.volume_rule.nodes)
            vol = half_h * float(np.sum(w[None, :] * (dv * dv + vv * vv)))
            jumps = (
                sigma[0] * v.left_traces()[0] ** 2
                + sigma[M] * v.right_traces()[-1] ** 2
                + float(sigma[1:M] @ v.interior_jumps() ** 2)
            )
            norm_sq = beta * vol + jumps
            bvv = float(coeffs.ravel() @ matrix.matvec(coeffs.ravel()))
            worst = max(worst, (norm_sq - bvv) / max(norm_sq, 1e-300))
        if worst > 1e-10:
            raise AssertionError(f"coercivity deficit {worst:.3e} (k={k})")
    return f"max relative deficit {worst:.1e} over 500 samples"


def _norm_coincidence() -> str:
    rng = np.random.default_rng(77)
    worst = 0.0
    zero_pair = (lambda y: np.zeros_like(y), lambda y: np.zeros_like(y))
    for k, M in ((1, 12), (2, 7), (3, 5)):
        space = DGSpace(uniform_mesh(1.0, M), k, 0.7)
        for _ in range(67):
            v = DGFunction(space, rng.standard_normal((M, k + 1)))
            report = error_norms(v, zero_pair, space, beta=1.3)
            gap = abs(report.dg_energy - report.discrete_energy)
            worst = max(worst, gap / max(report.dg_energy, 1e-300))
    if worst > 1e-10:
        raise AssertionError(f"norms disagree on V^k by {worst:.3e}")
    return f"max relative gap {worst:.1e} over 201 samples"


def _zero_data() -> str:
    zero = lambda y: np.zeros_like(np.asarray(y, dtype=float))
    spec = LinearProblemSpec(
        alpha=0.5, ell=1.0, T=1.0,
        a=lambda y: 1.0 + y,
        b=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        p=lambda t: 1.0 + np.asarray(t, dtype=float) ** 2,
        f=lambda y, t: zero(y),
        g=zero,
        name="zero-data",
    )
    result = solve_linear(spec, M=8, N=8, k=2, r=2.0, sigma=1.0)
    mass = result.space.mass_block
    worst = max(
        math.sqrt(max(float(np.einsum("mi,ij,mj->", f.coeffs, mass, f.coeffs)), 0.0))
        for f in result.levels
    )
    if worst > 1e-12:
        raise AssertionError(f"zero data produced L2 norm {worst:.3e}")
    return f"max level L2 norm {worst:.1e}"


def _residual_oracle() -> str:
    worst = 0.0
    for problem_id in REGISTRY_IDS:
        for alpha in (0.4, 0.7):
            spec = registry_lookup(problem_id, alpha)
            caputo, elliptic = residual_oracle_terms(problem_id, alpha)
            ys = np.linspace(0.0, spec.ell, 200)
            for t in np.linspace(spec.T / 50.0, spec.T, 50):
                res = caputo(ys, t) + elliptic(ys, t) - spec.f(ys, t)
                worst = max(worst, float(np.max(np.abs(res))))
    if worst > 1e-9:
        raise AssertionError(f"manufactured-source residual {worst:.3e}")
    return f"max residual {worst:.1e} on 200x50 grids"


_CHECKS = (
    ("quadrature exactness", _gauss_exactness),
    ("gamma recurrence", _gamma_recurrence),
    ("L1 coefficient structure", _l1_structure),
    ("stability multiplier bound", _theta_bound),
    ("coercivity", _coercivity),
    ("norm coincidence on V^k", _norm_coincidence),
    ("zero-data uniqueness", _zero_data),
    ("manufactured-source residual", _residual_oracle),
)


def run_selftest() -> list:
    """Run every property suite and collect per-check results."""
    results = []
    for name, check in _CHECKS:
        try:
            detail = check()
            results.append(CheckResult(name, True, detail))
        except Exception as exc:
            results.append(CheckResult(name, False, f"{exc.__class__.__name__}: {exc}"))
    return results
