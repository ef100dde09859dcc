"""Graded temporal meshes and uniform spatial partitions.

Level indexing is 1-based throughout the package: t_1 = 0 is the initial
level and t_{N+1} = T is the final one, so ``times[n-1]`` holds t_n.  Nodes
are always computed from the closed formula, never by accumulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentContractError


@dataclass(frozen=True)
class GradedTimeMesh:
    """Temporal mesh t_n = T((n-1)/N)^r with N steps and N+1 levels."""

    T: float
    N: int
    r: float
    times: np.ndarray
    steps: np.ndarray

    def time(self, n: int) -> float:
        """t_n for a 1-based level index n in 1..N+1."""
        if not 1 <= n <= self.N + 1:
            raise ArgumentContractError(f"level index {n} outside 1..{self.N + 1}")
        return float(self.times[n - 1])

    def step(self, n: int) -> float:
        """tau_n = t_{n+1} - t_n for n in 1..N."""
        if not 1 <= n <= self.N:
            raise ArgumentContractError(f"step index {n} outside 1..{self.N}")
        return float(self.steps[n - 1])


@dataclass(frozen=True)
class SpatialMesh:
    """Uniform partition of (0, ell) into M elements of width h = ell/M."""

    ell: float
    M: int
    h: float
    nodes: np.ndarray

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


def graded_mesh(T: float, N: int, r: float) -> GradedTimeMesh:
    """Build the graded temporal mesh with grading exponent r >= 1."""
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise ArgumentContractError(f"graded_mesh requires integer N >= 1, got {N!r}")
    if not r >= 1.0:
        raise ArgumentContractError(f"graded_mesh requires r >= 1, got {r!r}")
    if not T > 0.0:
        raise ArgumentContractError(f"graded_mesh requires T > 0, got {T!r}")
    times = T * (np.arange(N + 1, dtype=float) / N) ** float(r)
    return GradedTimeMesh(float(T), int(N), float(r), times, np.diff(times))


def uniform_mesh(ell: float, M: int) -> SpatialMesh:
    """Build the uniform spatial mesh with nodes y_m = (m-1)h."""
    if not (isinstance(M, (int, np.integer)) and M >= 1):
        raise ArgumentContractError(f"uniform_mesh requires integer M >= 1, got {M!r}")
    if not ell > 0.0:
        raise ArgumentContractError(f"uniform_mesh requires ell > 0, got {ell!r}")
    h = ell / M
    nodes = np.arange(M + 1, dtype=float) * h
    nodes[-1] = ell
    return SpatialMesh(float(ell), int(M), h, nodes)
