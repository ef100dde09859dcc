"""Figure rendering for study outputs.  File-only backend, no display."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import OutputError

_NORM_LABELS = {
    "l2": r"$L^2$",
    "linf": r"$L^\infty$",
    "dg": "DG energy",
    "discrete": "discrete energy",
}


def _save(fig, path) -> None:
    try:
        fig.savefig(path, dpi=150, bbox_inches="tight")
    except OSError as exc:
        raise OutputError(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)


def plot_convergence(table, path) -> bool:
    """Log-log error vs M, one line per (alpha, norm) chain.

    Returns False without writing when no chain has two points.
    """
    chains = {}
    for row in table.rows:
        chains.setdefault((row.alpha, row.norm), []).append((row.M, row.error))
    chains = {key: val for key, val in chains.items() if len(val) >= 2}
    if not chains:
        return False

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for (alpha, norm), points in sorted(chains.items()):
        points = sorted(points)
        ms = np.array([p[0] for p in points], dtype=float)
        errs = np.array([p[1] for p in points], dtype=float)
        label = rf"$\alpha={alpha:g}$, {_NORM_LABELS.get(norm, norm)}"
        ax.loglog(ms, errs, marker="o", label=label)
    ax.set_xlabel("M")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    _save(fig, path)
    return True


def plot_surface(solution, ys, path) -> None:
    """Heat map of the numerical solution over the space-time grid."""
    from .study import sample_grid

    _, zs = sample_grid(solution.space)
    values = np.array([
        np.append(fn.sample_reference(zs).ravel(), fn.coeffs[-1, -1])
        for fn in solution.levels
    ])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    mesh = ax.pcolormesh(ys, solution.tmesh.times, values, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="u")
    ax.set_xlabel("y")
    ax.set_ylabel("t")
    _save(fig, path)


def plot_error_curve(ys, diff, path) -> None:
    """Pointwise error against position at the final time."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot(ys, diff, lw=1.2)
    ax.axhline(0.0, color="black", lw=0.6, alpha=0.5)
    ax.set_xlabel("y")
    ax.set_ylabel("u - u_h")
    _save(fig, path)
