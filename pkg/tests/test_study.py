"""Tests for study orchestration, policies, and the output artifacts."""

import math
import re

import numpy as np
import pytest

from fracdg.errors import ArgumentContractError
from fracdg.stepper import solve_linear
from fracdg.problems import registry_lookup
from fracdg.study import (
    ARTIFACT_VERSION,
    CSV_HEADER,
    ExperimentConfig,
    ResultTable,
    emit_outputs,
    resolve_N,
    resolve_r,
    run_convergence,
    sample_grid,
    write_error_curve,
    write_results_csv,
    write_surface_data,
)

SCIENTIFIC = re.compile(r"^-?\d\.\d{15}e[+-]\d{2,3}$")


def small_config(**overrides):
    base = dict(
        problem="example1-constant",
        alphas=(0.4,),
        Ms=(4, 8),
        k=1,
        r_policy=2.0,
        n_policy=(4, 4),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# Policies


def test_resolve_r_optimal_grading():
    assert resolve_r(0.4, "optimal") == pytest.approx(4.0)
    assert resolve_r(0.8, "optimal") == pytest.approx(1.5)


def test_resolve_r_explicit_value():
    assert resolve_r(0.4, 3.0) == 3.0
    assert resolve_r(0.4, "2.5") == 2.5


def test_resolve_r_rejects_below_one():
    with pytest.raises(ArgumentContractError, match="grading exponent"):
        resolve_r(0.4, 0.5)


def test_resolve_n_coupled_floor():
    assert resolve_N(20, 0.4, "coupled", 0) == 42
    assert resolve_N(20, 0.6, "coupled", 0) == 72


def test_resolve_n_equal_and_explicit():
    assert resolve_N(20, 0.4, "equal", 0) == 20
    assert resolve_N(20, 0.4, (5, 9), 1) == 9


def test_resolved_n_is_nondecreasing_in_alpha():
    # The exponent 2/(2 - alpha) grows with alpha, so the matched time mesh
    # can only get finer for fixed M.
    values = [resolve_N(16, a, "coupled", 0) for a in np.linspace(0.1, 0.9, 17)]
    assert all(b >= a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# Config validation


def test_config_normalizes_types():
    config = small_config(alphas=["0.4"], Ms=["4", "8"], n_policy=["4", "4"])
    assert config.alphas == (0.4,)
    assert config.Ms == (4, 8)
    assert config.n_policy == (4, 4)


@pytest.mark.parametrize(
    "overrides,message",
    [
        ({"alphas": ()}, "at least one alpha"),
        ({"Ms": ()}, "at least one M"),
        ({"norms": ("l2", "h1")}, "unknown norm"),
        ({"reduction": "average"}, "unknown reduction"),
        ({"n_policy": (4,)}, "explicit N list"),
        ({"n_policy": "matched"}, "N policy"),
    ],
)
def test_config_rejects_bad_values(overrides, message):
    with pytest.raises(ArgumentContractError, match=message):
        small_config(**overrides)


# ---------------------------------------------------------------------------
# Orchestration


def test_run_convergence_row_layout():
    table = run_convergence(small_config())
    assert len(table.rows) == 8
    assert table.metadata["problem"] == "example1-constant"
    assert table.metadata["artifact_version"] == ARTIFACT_VERSION
    assert table.metadata["reduction"] == "final-time"
    by_norm = {}
    for row in table.rows:
        by_norm.setdefault(row.norm, []).append(row)
        assert row.problem == "example1-constant"
        assert row.alpha == 0.4 and row.k == 1 and row.r == 2.0
        assert row.N == 4 and row.reduction == "final-time"
        assert row.error > 0.0
    for norm, rows in by_norm.items():
        assert [r.M for r in rows] == [4, 8]
        assert isinstance(rows[0].order, float)
        assert rows[1].order is None
        expected = math.log2(rows[0].error / rows[1].error)
        assert rows[0].order == pytest.approx(expected)


def test_orders_need_doubled_resolutions():
    table = run_convergence(small_config(Ms=(4, 12), n_policy=(4, 4)))
    assert all(row.order is None for row in table.rows)


def test_failing_cell_is_identified():
    with pytest.raises(ArgumentContractError, match=r"alpha=0.4 M=4 N=4"):
        run_convergence(small_config(sigma=-1.0))


def test_max_over_levels_dominates_final_time():
    final = run_convergence(small_config(norms=("l2",)))
    worst = run_convergence(small_config(norms=("l2",), reduction="max-over-levels"))
    for a, b in zip(final.rows, worst.rows):
        assert b.error >= a.error * (1.0 - 1e-12)


# ---------------------------------------------------------------------------
# CSV contract


def test_csv_layout(tmp_path):
    table = run_convergence(small_config())
    path = tmp_path / "results.csv"
    write_results_csv(table, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + len(table.rows)
    for line in lines[1:]:
        fields = line.split(",")
        assert len(fields) == 11
        assert fields[0] == "example1-constant"
        for index in (1, 5, 6, 9):
            assert SCIENTIFIC.match(fields[index]), fields[index]
        assert fields[10] == "" or SCIENTIFIC.match(fields[10])
    orders = [line.split(",")[10] for line in lines[1:]]
    assert orders.count("") == 4


def test_csv_is_reproducible_byte_for_byte(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results_csv(run_convergence(small_config()), first)
    write_results_csv(run_convergence(small_config()), second)
    assert first.read_bytes() == second.read_bytes()


def test_empty_table_writes_header_only(tmp_path):
    paths = emit_outputs(ResultTable(), None, tmp_path, make_figures=True)
    assert set(paths) == {"results"}
    assert (tmp_path / "results.csv").read_text(encoding="utf-8") == CSV_HEADER + "\n"


# ---------------------------------------------------------------------------
# Plot-grid data files


def test_sample_grid_layout():
    solution = solve_linear(registry_lookup("example1-constant", 0.5), M=4, N=2, k=2, r=1.0)
    ys, zs = sample_grid(solution.space)
    assert ys.shape == (4 * 3 + 1,)
    assert np.all(np.diff(ys) > 0.0)
    assert ys[0] == 0.0 and ys[-1] == pytest.approx(math.pi)
    np.testing.assert_allclose(zs, [-1.0, -1.0 / 3.0, 1.0 / 3.0], atol=1e-15)


def test_surface_data_layout(tmp_path):
    solution = solve_linear(registry_lookup("example1-constant", 0.5), M=3, N=2, k=1, r=2.0)
    path = tmp_path / "surface.dat"
    ys = write_surface_data(solution, path)
    assert ys[-1] == pytest.approx(math.pi)
    lines = path.read_text(encoding="utf-8").splitlines()
    blanks = [i for i, line in enumerate(lines) if not line]
    assert len(lines) == 3 * 7 + 2
    assert blanks == [7, 15]
    previous_t = -1.0
    for block in range(3):
        rows = [lines[block * 8 + j].split() for j in range(7)]
        t_vals = {row[1] for row in rows}
        assert len(t_vals) == 1
        t = float(next(iter(t_vals)))
        assert t > previous_t or (block == 0 and t == 0.0)
        previous_t = t
        y_vals = [float(row[0]) for row in rows]
        assert y_vals == sorted(y_vals)


def test_error_curve_file_matches_return_value(tmp_path):
    spec = registry_lookup("example1-constant", 0.5)
    solution = solve_linear(spec, M=4, N=4, k=1, r=2.0)
    path = tmp_path / "error_curve.dat"
    ys, diff = write_error_curve(solution, lambda y: spec.exact(y, spec.T), path)
    rows = [line.split() for line in path.read_text(encoding="utf-8").splitlines()]
    assert len(rows) == len(ys) == 9
    np.testing.assert_allclose([float(r[0]) for r in rows], ys, atol=1e-14)
    np.testing.assert_allclose([float(r[1]) for r in rows], diff, atol=1e-14)
    expected = spec.exact(ys, spec.T) - solution.final().eval(ys)
    # The grid endpoint samples the last element from inside, matching eval.
    np.testing.assert_allclose(diff, expected, atol=1e-12)


def test_emit_outputs_full_set(tmp_path):
    spec = registry_lookup("example1-constant", 0.5)
    solution = solve_linear(spec, M=4, N=4, k=1, r=2.0)
    table = run_convergence(small_config())
    paths = emit_outputs(
        table, solution, tmp_path, write_surface=True, write_curve=True,
        make_figures=True, exact_final=lambda y: spec.exact(y, spec.T),
    )
    expected = {
        "results", "convergence_figure", "surface", "surface_figure",
        "error_curve", "error_curve_figure",
    }
    assert set(paths) == expected
    import os

    for label, path in paths.items():
        assert os.path.getsize(path) > 0, label
    assert paths["convergence_figure"].endswith(".png")
