"""Graded temporal meshes and uniform spatial partitions."""

import numpy as np
import pytest

from fracdg import ArgumentContractError, graded_mesh, uniform_mesh


def test_graded_mesh_power_law():
    mesh = graded_mesh(1.0, 8, 3.0)
    assert mesh.T == 1.0
    assert mesh.N == 8
    assert mesh.r == 3.0
    assert mesh.times.shape == (9,)
    assert mesh.steps.shape == (8,)
    np.testing.assert_allclose(mesh.times, (np.arange(9) / 8.0) ** 3, atol=1e-15)
    assert mesh.times[0] == 0.0
    assert mesh.times[-1] == 1.0


def test_graded_mesh_steps_partition():
    mesh = graded_mesh(2.5, 17, 2.2)
    assert np.all(mesh.steps > 0)
    assert float(mesh.steps.sum()) == pytest.approx(2.5, rel=1e-14)
    np.testing.assert_allclose(mesh.steps, np.diff(mesh.times), atol=1e-16)
    # Graded steps grow monotonically away from t = 0.
    assert np.all(np.diff(mesh.steps) > 0)


def test_graded_mesh_uniform_limit():
    mesh = graded_mesh(1.0, 10, 1.0)
    np.testing.assert_allclose(mesh.steps, np.full(10, 0.1), atol=1e-15)


def test_time_and_step_accessors():
    mesh = graded_mesh(1.0, 4, 2.0)
    for n in range(1, 6):
        assert mesh.time(n) == pytest.approx(((n - 1) / 4.0) ** 2, abs=1e-15)
    for n in range(1, 5):
        assert mesh.step(n) == pytest.approx(mesh.times[n] - mesh.times[n - 1], abs=1e-16)
    with pytest.raises(ArgumentContractError):
        mesh.time(0)
    with pytest.raises(ArgumentContractError):
        mesh.time(6)
    with pytest.raises(ArgumentContractError):
        mesh.step(5)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"T": 1.0, "N": 0, "r": 2.0},
        {"T": 1.0, "N": 4, "r": 0.5},
        {"T": 0.0, "N": 4, "r": 2.0},
        {"T": -1.0, "N": 4, "r": 2.0},
    ],
)
def test_graded_mesh_rejects_bad_arguments(kwargs):
    with pytest.raises(ArgumentContractError):
        graded_mesh(kwargs["T"], kwargs["N"], kwargs["r"])


def test_uniform_mesh_nodes():
    mesh = uniform_mesh(3.0, 6)
    assert mesh.ell == 3.0
    assert mesh.M == 6
    assert mesh.h == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(mesh.nodes, np.linspace(0.0, 3.0, 7), atol=1e-15)
    assert mesh.nodes[0] == 0.0
    assert mesh.nodes[-1] == 3.0
    # Spacing is uniform to near machine precision of ell.
    assert float(np.max(np.abs(np.diff(mesh.nodes) - 0.5))) <= 1e-15 * 3.0


def test_uniform_mesh_midpoints():
    mesh = uniform_mesh(1.0, 4)
    np.testing.assert_allclose(mesh.midpoints, [0.125, 0.375, 0.625, 0.875], atol=1e-15)


def test_uniform_mesh_rejects_bad_arguments():
    with pytest.raises(ArgumentContractError):
        uniform_mesh(1.0, 0)
    with pytest.raises(ArgumentContractError):
        uniform_mesh(-2.0, 4)
