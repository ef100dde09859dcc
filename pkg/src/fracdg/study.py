"""Convergence-study orchestration and result emission.

A study solves one benchmark problem over a grid of fractional orders and
mesh resolutions, measures the requested error norms, and attaches observed
orders along the mesh-doubling direction.  Results go to a CSV table plus
optional gnuplot-ready data files and rendered figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dg import DGFunction
from .errors import ArgumentContractError, FracDGError, OutputError
from .norms import beta_weight, error_norms
from .problems import registry_lookup
from .stepper import (
    NEWTON_MAX_OUTER,
    NEWTON_TOL,
    SemilinearProblemSpec,
    SolveResult,
    solve_linear,
    solve_semilinear,
)

ARTIFACT_VERSION = "1.0.0"

NORM_NAMES = ("l2", "linf", "dg", "discrete")
REDUCTIONS = ("final-time", "max-over-levels")

CSV_HEADER = "problem,alpha,M,N,k,r,sigma,reduction,norm,error,order"


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one convergence study."""

    problem: str
    alphas: tuple
    Ms: tuple
    k: int = 1
    r_policy: object = "optimal"
    n_policy: object = "coupled"
    sigma: float = 1.0
    norms: tuple = NORM_NAMES
    reduction: str = "final-time"
    newton_tol: float = NEWTON_TOL
    newton_max_outer: int = NEWTON_MAX_OUTER

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "Ms", tuple(int(m) for m in self.Ms))
        object.__setattr__(self, "norms", tuple(self.norms))
        if not self.alphas:
            raise ArgumentContractError("config needs at least one alpha")
        if not self.Ms:
            raise ArgumentContractError("config needs at least one M")
        for name in self.norms:
            if name not in NORM_NAMES:
                raise ArgumentContractError(
                    f"unknown norm {name!r}; expected one of {', '.join(NORM_NAMES)}"
                )
        if self.reduction not in REDUCTIONS:
            raise ArgumentContractError(
                f"unknown reduction {self.reduction!r}; expected one of {', '.join(REDUCTIONS)}"
            )
        if isinstance(self.n_policy, (list, tuple)):
            object.__setattr__(self, "n_policy", tuple(int(n) for n in self.n_policy))
            if len(self.n_policy) != len(self.Ms):
                raise ArgumentContractError(
                    f"explicit N list has {len(self.n_policy)} entries for {len(self.Ms)} Ms"
                )
        elif self.n_policy not in ("coupled", "equal"):
            raise ArgumentContractError(
                f"N policy must be coupled, equal, or an explicit list, got {self.n_policy!r}"
            )


@dataclass(frozen=True)
class ResultRow:
    """One CSV row: a measured error and the order toward the next row."""

    problem: str
    alpha: float
    M: int
    N: int
    k: int
    r: float
    sigma: float
    reduction: str
    norm: str
    error: float
    order: object = None


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def resolve_r(alpha: float, policy) -> float:
    if policy == "optimal":
        return (2.0 - alpha) / alpha
    r = float(policy)
    if r < 1.0:
        raise ArgumentContractError(f"grading exponent must be >= 1, got {r}")
    return r


def resolve_N(M: int, alpha: float, policy, index: int) -> int:
    if isinstance(policy, tuple):
        return policy[index]
    if policy == "coupled":
        return int(math.floor(M ** (2.0 / (2.0 - alpha))))
    return M


def _exact_pair(spec, t: float):
    return (lambda y: spec.exact(y, t), lambda y: spec.exact_dy(y, t))


def _solve_cell(spec, config: ExperimentConfig, M: int, N: int, r: float) -> SolveResult:
    if isinstance(spec, SemilinearProblemSpec):
        return solve_semilinear(
            spec, M, N, config.k, r, config.sigma,
            tol=config.newton_tol, max_outer=config.newton_max_outer,
        )
    return solve_linear(spec, M, N, config.k, r, config.sigma)


def _measure(spec, config: ExperimentConfig, result: SolveResult) -> dict:
    beta = beta_weight(spec, result.space, result.l1)
    if config.reduction == "final-time":
        report = error_norms(result.final(), _exact_pair(spec, spec.T), result.space, beta)
        return {name: report.value(name) for name in config.norms}
    worst = {name: 0.0 for name in config.norms}
    for n, fn in enumerate(result.levels, start=1):
        report = error_norms(fn, _exact_pair(spec, result.tmesh.times[n - 1]), result.space, beta)
        for name in config.norms:
            worst[name] = max(worst[name], report.value(name))
    return worst


def run_convergence(config: ExperimentConfig) -> ResultTable:
    """Solve every (alpha, M) cell and tabulate errors with observed orders.

    Orders are log2(E_M / E_2M) attached to the coarser row of each
    consecutive doubling; the last row of a chain has none.  Upstream errors
    are re-raised with the failing cell identified.
    """
    table = ResultTable(metadata={
        "problem": config.problem,
        "artifact_version": ARTIFACT_VERSION,
        "reduction": config.reduction,
    })
    for alpha in config.alphas:
        spec = registry_lookup(config.problem, alpha)
        r = resolve_r(alpha, config.r_policy)
        cells = []
        for i, M in enumerate(config.Ms):
            N = resolve_N(M, alpha, config.n_policy, i)
            try:
                result = _solve_cell(spec, config, M, N, r)
                errors = _measure(spec, config, result)
            except FracDGError as exc:
                note = exc.args[0] if exc.args else exc.__class__.__name__
                exc.args = (f"alpha={alpha} M={M} N={N}: {note}",)
                raise
            cells.append((M, N, errors))
        for name in config.norms:
            for i, (M, N, errors) in enumerate(cells):
                order = None
                if i + 1 < len(cells) and cells[i + 1][0] == 2 * M:
                    nxt = cells[i + 1][2][name]
                    if errors[name] > 0.0 and nxt > 0.0:
                        order = math.log2(errors[name] / nxt)
                table.rows.append(ResultRow(
                    problem=spec.name, alpha=alpha, M=M, N=N, k=config.k, r=r,
                    sigma=float(config.sigma), reduction=config.reduction,
                    norm=name, error=errors[name], order=order,
                ))
    return table


def sample_grid(space) -> tuple:
    """Plot grid: k+1 uniform points per element, half open, plus the end.

    Returns (y values, reference coordinates of the per-element points).
    """
    k = space.k
    zs = -1.0 + 2.0 * np.arange(k + 1) / (k + 1)
    ys = (space.mesh.midpoints[:, None] + 0.5 * space.mesh.h * zs[None, :]).ravel()
    return np.append(ys, space.mesh.ell), zs


def _grid_values(fn: DGFunction, zs: np.ndarray) -> np.ndarray:
    return np.append(fn.sample_reference(zs).ravel(), fn.coeffs[-1, -1])


def _fmt(x: float) -> str:
    return "%.15e" % x


def _open_out(path):
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_results_csv(table: ResultTable, path) -> None:
    with _open_out(path) as out:
        out.write(CSV_HEADER + "\n")
        for row in table.rows:
            order = "" if row.order is None else _fmt(row.order)
            out.write(",".join([
                row.problem, _fmt(row.alpha), str(row.M), str(row.N), str(row.k),
                _fmt(row.r), _fmt(row.sigma), row.reduction, row.norm,
                _fmt(row.error), order,
            ]) + "\n")


def write_surface_data(solution: SolveResult, path) -> np.ndarray:
    """Rows (y, t, u_h) in increasing (t, y) order, blank line between levels."""
    ys, zs = sample_grid(solution.space)
    with _open_out(path) as out:
        for n, fn in enumerate(solution.levels):
            t = solution.tmesh.times[n]
            for y, u in zip(ys, _grid_values(fn, zs)):
                out.write(f"{_fmt(y)} {_fmt(t)} {_fmt(u)}\n")
            if n + 1 < len(solution.levels):
                out.write("\n")
    return ys


def write_error_curve(solution: SolveResult, exact_final, path) -> tuple:
    """Rows (y, u(y,T) - u_h(y,T)) on the plot grid at the final time."""
    ys, zs = sample_grid(solution.space)
    diff = np.asarray(exact_final(ys), dtype=float) - _grid_values(solution.final(), zs)
    with _open_out(path) as out:
        for y, e in zip(ys, diff):
            out.write(f"{_fmt(y)} {_fmt(e)}\n")
    return ys, diff


def emit_outputs(
    table: ResultTable,
    solution,
    out_dir,
    csv_name: str = "results.csv",
    write_surface: bool = False,
    write_curve: bool = False,
    make_figures: bool = False,
    exact_final=None,
) -> dict:
    """Write the study artifacts into out_dir and return their paths.

    The CSV is always written.  Surface and error-curve data need a solution
    (the error curve also needs the exact final-time profile).  Figures are
    rendered next to the data they display.
    """
    import os

    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out_dir}: {exc}") from exc

    paths = {}
    csv_path = os.path.join(out_dir, csv_name)
    write_results_csv(table, csv_path)
    paths["results"] = csv_path

    if make_figures and table.rows:
        from . import plots

        fig_path = os.path.join(out_dir, "convergence.png")
        if plots.plot_convergence(table, fig_path):
            paths["convergence_figure"] = fig_path

    if solution is not None and write_surface:
        surf_path = os.path.join(out_dir, "surface.dat")
        ys = write_surface_data(solution, surf_path)
        paths["surface"] = surf_path
        if make_figures:
            from . import plots

            fig_path = os.path.join(out_dir, "surface.png")
            plots.plot_surface(solution, ys, fig_path)
            paths["surface_figure"] = fig_path

    if solution is not None and write_curve and exact_final is not None:
        curve_path = os.path.join(out_dir, "error_curve.dat")
        ys, diff = write_error_curve(solution, exact_final, curve_path)
        paths["error_curve"] = curve_path
        if make_figures:
            from . import plots

            fig_path = os.path.join(out_dir, "error_curve.png")
            plots.plot_error_curve(ys, diff, fig_path)
            paths["error_curve_figure"] = fig_path

    return paths
