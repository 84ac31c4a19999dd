import numpy as np
import pytest
import scipy.linalg as sla

from torsionlab.linalg_core import (
    LinalgError,
    branch_arg,
    contour_projector,
    generalized_eigenspaces,
    invariant_projector,
    log_det_agmon,
    null_space,
    numerical_rank,
    operator_norm,
    power_iteration_norm,
    spectrum_multiset_distance,
)


def _summary(data):
    return sorted((round(d.value.real, 6), d.alg_mult, d.jordan_blocks) for d in data)


def test_diagonal_clusters():
    data = generalized_eigenspaces(np.diag([2.0, 2.0, 5.0]))
    assert _summary(data) == [(2.0, 2, (1, 1)), (5.0, 1, (1,))]


def test_nilpotent_block():
    data = generalized_eigenspaces(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert _summary(data) == [(0.0, 2, (2,))]


@pytest.mark.parametrize("seed", range(5))
def test_similar_jordan_form_recovered(seed):
    rng = np.random.default_rng(seed)
    J = sla.block_diag(
        np.array([[1.5, 1, 0], [0, 1.5, 1], [0, 0, 1.5]]),
        np.array([[-2.0 + 1j, 1], [0, -2.0 + 1j]]),
        np.array([[4.0]]),
    )
    S = rng.standard_normal(J.shape) + 1j * rng.standard_normal(J.shape) + 3 * np.eye(J.shape[0])
    M = S @ J @ np.linalg.inv(S)
    # a 3-block splits into a ring of radius ~eps^(1/3); cluster at 1e-4
    data = generalized_eigenspaces(M, tol=1e-4)
    got = {d.alg_mult: d for d in data}
    assert sorted(got) == [1, 2, 3]
    assert abs(got[3].value - 1.5) < 1e-8 and got[3].jordan_blocks == (3,)
    assert abs(got[2].value - (-2 + 1j)) < 1e-8 and got[2].jordan_blocks == (2,)
    assert abs(got[1].value - 4.0) < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_projectors_are_spectral(seed):
    rng = np.random.default_rng(100 + seed)
    M = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    data = generalized_eigenspaces(M)
    total = np.zeros_like(M)
    for d in data:
        P = d.projector
        assert np.linalg.norm(P @ P - P) < 1e-8
        assert round(np.trace(P).real) == d.alg_mult
        # (M - value)^block annihilates the image
        N = np.linalg.matrix_power(M - d.value * np.eye(6), d.jordan_blocks[0])
        assert np.linalg.norm(N @ P) < 1e-6 * max(1.0, np.linalg.norm(M)) ** d.jordan_blocks[0]
        total = total + P
    assert np.linalg.norm(total - np.eye(6)) < 1e-8


def test_invariant_projector_matches_contour():
    rng = np.random.default_rng(7)
    M = np.diag([0.5, 0.7, 3.0, 4.0]) + 0.1 * np.triu(rng.standard_normal((4, 4)), 1)
    P = invariant_projector(M, lambda z: abs(z) < 2)
    Q = contour_projector(M, 0.0, 2.0, nodes=512)
    assert np.linalg.norm(P - Q) < 1e-8


@pytest.mark.parametrize(
    "values, theta, expected",
    [([1.0, 1.0], -np.pi / 2, 0j), ([-1.0], -np.pi / 4, 1j * np.pi), ([1j], -np.pi / 2, 0.5j * np.pi)],
)
def test_log_det_agmon_examples(values, theta, expected):
    assert abs(log_det_agmon(values, theta) - expected) < 1e-14


def test_log_det_rejects_cut_and_zero():
    with pytest.raises(LinalgError):
        branch_arg(np.exp(-0.5j), -0.5)
    with pytest.raises(LinalgError):
        log_det_agmon([0.0], -1.0)


def test_operator_norm_examples():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0)
    assert operator_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(2.0)


@pytest.mark.parametrize("seed", range(5))
def test_operator_norm_vs_power_iteration(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    assert abs(operator_norm(M) - power_iteration_norm(M)) < 1e-10 * operator_norm(M)


def test_rank_and_kernel():
    A = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    assert numerical_rank(A) == 1
    K = null_space(A)
    assert K.shape == (3, 2) and np.linalg.norm(A @ K) < 1e-12
    assert null_space(np.zeros((0, 3)), ncols=3).shape == (3, 3)


def test_multiset_distance():
    assert spectrum_multiset_distance([1, 2, 2], [2, 1, 2]) == 0.0
    assert spectrum_multiset_distance([1], [1, 2]) == float("inf")
