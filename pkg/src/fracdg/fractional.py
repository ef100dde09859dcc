"""L1 discretization of the Caputo derivative on a graded mesh.

Provides the coefficient table T-hat_{n,j}, the per-level history weights of
the semi-discrete system, the stability multipliers used by the refinement
diagnostics, and analytic Caputo derivatives of power functions for
manufactured solutions and truncation probes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentContractError
from .meshes import GradedTimeMesh
from .quadrature import gamma

# Full row caching is cheap at desk scale; above this the closed formula is
# evaluated on demand.
CACHE_LIMIT = 4096


class L1Coefficients:
    """Accessor for the L1 coefficients T-hat_{n,j} on a graded mesh.

    For 2 <= n <= N+1 and 1 <= j <= n-1,

        T-hat_{n,j} = [(t_n - t_j)^(1-alpha) - (t_n - t_{j+1})^(1-alpha)]
                      / (tau_j * Gamma(2 - alpha)).

    Rows are monotone, T-hat_{n,j} >= T-hat_{n,j-1}, and strictly positive.
    """

    def __init__(self, mesh: GradedTimeMesh, alpha: float):
        if not 0.0 < alpha < 1.0:
            raise ArgumentContractError(f"alpha must lie in (0, 1), got {alpha!r}")
        self.mesh = mesh
        self.alpha = float(alpha)
        self._gamma2ma = gamma(2.0 - self.alpha)
        self._rows: dict[int, np.ndarray] | None = {} if mesh.N <= CACHE_LIMIT else None

    def _check_level(self, n: int) -> None:
        if not 2 <= n <= self.mesh.N + 1:
            raise ArgumentContractError(f"level index {n} outside 2..{self.mesh.N + 1}")

    def row(self, n: int) -> np.ndarray:
        """T-hat_{n,j} for j = 1..n-1 (entry j-1 of the returned array)."""
        self._check_level(n)
        if self._rows is not None and n in self._rows:
            return self._rows[n]
        times, steps = self.mesh.times, self.mesh.steps
        tn = times[n - 1]
        expo = 1.0 - self.alpha
        left = (tn - times[0 : n - 1]) ** expo
        right = np.empty(n - 1)
        right[:-1] = (tn - times[1 : n - 1]) ** expo
        right[-1] = 0.0  # t_{j+1} = t_n exactly for j = n-1
        row = (left - right) / (steps[0 : n - 1] * self._gamma2ma)
        if self._rows is not None:
            self._rows[n] = row
        return row

    def that(self, n: int, j: int) -> float:
        """Single coefficient T-hat_{n,j}, 1 <= j <= n-1."""
        self._check_level(n)
        if not 1 <= j <= n - 1:
            raise ArgumentContractError(f"index j={j} outside 1..{n - 1}")
        return float(self.row(n)[j - 1])


def l1_coefficients(mesh: GradedTimeMesh, alpha: float) -> L1Coefficients:
    """Build the L1 coefficient accessor for order alpha in (0, 1)."""
    return L1Coefficients(mesh, alpha)


def history_weights(c: L1Coefficients, n: int) -> tuple[float, np.ndarray]:
    """Diagonal coefficient and history weights of time level n.

    Returns (diag, weights) with diag = T-hat_{n,n-1} and weights[j-1] the
    factor multiplying level j in the right-hand side: T-hat_{n,1} for j = 1
    and T-hat_{n,j} - T-hat_{n,j-1} for j = 2..n-1.  The weights are
    nonnegative and telescope to the diagonal.
    """
    row = c.row(n)
    weights = np.empty_like(row)
    weights[0] = row[0]
    weights[1:] = np.diff(row)
    return float(row[-1]), weights


def caputo_power(alpha: float, gamma_exp: float, t):
    """Caputo derivative of order alpha of t**gamma_exp, gamma_exp > 0.

    Returns Gamma(gamma_exp + 1) / Gamma(gamma_exp + 1 - alpha) * t**(gamma_exp - alpha)
    for scalar or array t >= 0.  At t = 0 the limit is 0 for gamma_exp > alpha
    and Gamma(alpha + 1) for gamma_exp = alpha; for gamma_exp < alpha the
    value is unbounded there and must not be requested.
    """
    if not gamma_exp > 0.0:
        raise ArgumentContractError(f"caputo_power requires exponent > 0, got {gamma_exp!r}")
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0):
        raise ArgumentContractError(f"caputo_power requires t >= 0, got {t!r}")
    if gamma_exp < alpha and np.any(arr == 0.0):
        raise ArgumentContractError(
            "caputo_power is unbounded at t = 0 for exponents below alpha"
        )
    # 0**0 evaluates to 1, which gives the correct limit for gamma_exp == alpha.
    out = gamma(gamma_exp + 1.0) / gamma(gamma_exp + 1.0 - alpha) * arr ** (gamma_exp - alpha)
    return out if arr.ndim else float(out)


def l1_apply(c: L1Coefficients, samples, n: int):
    """Apply the discrete Caputo operator at level n to sampled history.

    samples holds u(t_j) for j = 1..n along the leading axis; extra trailing
    axes (for example nodal values in space) broadcast through.  The result is

        T-hat_{n,n-1} u^n + sum_{j=2}^{n-1} (T-hat_{n,j-1} - T-hat_{n,j}) u^j
        - T-hat_{n,1} u^1.
    """
    c._check_level(n)
    u = np.asarray(samples, dtype=float)
    if u.shape[0] < n:
        raise ArgumentContractError(f"need samples at levels 1..{n}, got {u.shape[0]}")
    diag, weights = history_weights(c, n)
    history = np.tensordot(weights, u[0 : n - 1], axes=(0, 0))
    result = diag * u[n - 1] - history
    return float(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class ThetaMultipliers:
    """Stability multipliers defined by the telescoping recursion.

    theta_{n,n} = 1 and, with T-hat_{n,0} taken as 0,

        theta_{n,j} = sum_{k=1}^{n-j} tau_{n-k}^alpha theta_{n-k,j}
                      [T-hat_{n,n-k} - T-hat_{n,n-k-1}].

    ``table[n, j]`` is theta_{n,j} with 1-based indices; unused slots are 0.
    """

    alpha: float
    table: np.ndarray = field(repr=False)

    def theta(self, n: int, j: int) -> float:
        if not (1 <= j <= n <= self.table.shape[0] - 1):
            raise ArgumentContractError(f"theta index (n={n}, j={j}) out of range")
        return float(self.table[n, j])

    def level_bound_values(self, steps: np.ndarray) -> np.ndarray:
        """tau_{n-1}^alpha * sum_j theta_{n,j} for n = 2..N+1.

        These are the quantities bounded by C * T^alpha in the refinement
        diagnostics; steps must be the mesh steps the table was built from.
        """
        nmax = self.table.shape[0] - 1
        sums = self.table[2 : nmax + 1].sum(axis=1)
        return steps[0 : nmax - 1] ** self.alpha * sums


def theta_multipliers(c: L1Coefficients) -> ThetaMultipliers:
    """Evaluate the multiplier recursion for every level of the mesh.

    Cost grows like N^3, so this is a diagnostic for moderate N rather than
    part of the solver hot path.
    """
    N = c.mesh.N
    steps_a = c.mesh.steps**c.alpha
    table = np.zeros((N + 2, N + 2))
    table[1, 1] = 1.0
    for n in range(2, N + 2):
        _, weights = history_weights(c, n)
        coefs = steps_a[0 : n - 1] * weights
        table[n, 1:n] = coefs @ table[1:n, 1:n]
        table[n, n] = 1.0
    return ThetaMultipliers(c.alpha, table)
