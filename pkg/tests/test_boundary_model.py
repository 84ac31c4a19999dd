import numpy as np
import pytest

from torsionlab.boundary_model import (
    BoundaryModel,
    BoundaryModelError,
    boundary_spectral_model,
    build_projections,
    check_assumptions,
    collar_chirality,
    decomposition_dims,
    direct_sum,
    domain_intertwining_check,
    duality_check,
    eigenspace_orthogonality,
    intersection_dim,
    jordan_boundary_model,
    lagrangian_split,
    random_boundary_model,
    random_hermitian_boundary,
)


@pytest.fixture
def swap_model():
    # nabla = [[0, 0], [1, 0]] on C^1 + C^1, Gamma swaps the two lines
    return BoundaryModel((1, 1), ([[1.0]],), ([[1.0]], [[1.0]]))


def zero_model(dims=(1, 2, 1)):
    n = len(dims) - 1
    nab = tuple(np.zeros((dims[p + 1], dims[p])) for p in range(n))
    gam = [np.eye(dims[p]) for p in range(n + 1)]
    mid = n // 2
    gam[mid] = np.diag([1.0] * (dims[mid] // 2) + [-1.0] * (dims[mid] // 2))
    return BoundaryModel(dims, nab, tuple(gam))


def test_swap_model_projections(swap_model):
    tri = build_projections(swap_model)
    assert np.allclose(tri.minus_single, np.diag([0, 1]))
    assert np.allclose(tri.plus_single, np.diag([1, 0]))
    assert np.allclose(tri.harmonic_single, 0)


def test_swap_model_signature_is_identity(swap_model):
    assert np.allclose(swap_model.signature(), np.eye(2))
    rep = check_assumptions(swap_model)
    assert rep.A and rep.dims["kernel"] == [0, 0]


def test_zero_differential_everything_harmonic():
    M = zero_model()
    tri = build_projections(M)
    assert np.allclose(tri.minus_single, 0) and np.allclose(tri.plus_single, 0)
    assert np.allclose(tri.harmonic_single, np.eye(4))
    rep = check_assumptions(M)
    assert rep.A and rep.B


def test_invertible_square_has_no_harmonic_part():
    M = jordan_boundary_model(2.0 * np.eye(2))
    assert np.allclose(build_projections(M).harmonic_single, 0)
    assert check_assumptions(M).A


def test_projections_sum_to_identity():
    M = random_boundary_model(np.random.default_rng(3), 5)
    tri = build_projections(M)
    n = M.total_dim
    total = tri.minus_single + tri.plus_single + tri.harmonic_single
    assert np.allclose(total, np.eye(n), atol=1e-9)
    for P in (tri.minus_single, tri.plus_single, tri.harmonic_single):
        assert np.allclose(P @ P, P, atol=1e-9)


def test_jordan_block_overlapping_image_fails_A():
    M = jordan_boundary_model(np.array([[0.0, 1.0], [0.0, 0.0]]))
    rep = check_assumptions(M)
    assert not rep.A
    # independent oracle: rank of ker(B^2) on degree 0 against Im(nabla dual) there
    B2 = M.signature_sq()
    s = M.degree_slice(0)
    ker = np.linalg.svd(B2[s, s])[2].conj().T[:, np.linalg.svd(B2[s, s])[1] < 1e-9]
    assert ker.shape[1] == 1
    assert max(rep.dims["kernel_meets_image"] + rep.dims["kernel_meets_dual_image"]) >= 1
    with pytest.raises(BoundaryModelError, match="Assumption A"):
        lagrangian_split(M)


def test_unbalanced_middle_fails_B():
    M = BoundaryModel((2,), (), (np.eye(2),))
    rep = check_assumptions(M)
    assert rep.A and not rep.B
    with pytest.raises(BoundaryModelError, match="Assumption B"):
        lagrangian_split(M)


def test_two_dim_lagrangian():
    M = BoundaryModel((2,), (), (np.diag([1.0, -1.0]),))
    data = lagrangian_split(M)
    assert intersection_dim(data.K, np.array([[1.0], [1.0]])) == 1
    assert intersection_dim(data.gamma_K, np.array([[1.0], [-1.0]])) == 1
    assert np.linalg.matrix_rank(np.hstack([data.K, data.gamma_K])) == 2
    assert duality_check(data)["holds"]
    assert data.isotropy < 1e-12


def test_no_harmonics_reduces_to_plain_projections(swap_model):
    data = lagrangian_split(swap_model)
    assert data.K.shape[1] == 0
    assert np.allclose(data.P_minus_L0, data.projections.minus)
    assert duality_check(data)["holds"]


def test_custom_lagrangian_rejected_when_not_complementary():
    M = BoundaryModel((2,), (), (np.diag([1.0, -1.0]),))
    with pytest.raises(BoundaryModelError, match="direct sum"):
        lagrangian_split(M, K=np.array([[1.0], [0.0]]))


def test_bad_inputs():
    with pytest.raises(BoundaryModelError, match="square to zero"):
        BoundaryModel((1, 1, 1), ([[1.0]], [[1.0]]), ([[1.0]], [[1.0]], [[1.0]]))
    with pytest.raises(BoundaryModelError, match="involution"):
        BoundaryModel((1,), (), ([[2.0]],))
    with pytest.raises(BoundaryModelError, match="shape"):
        BoundaryModel((1, 2), (np.ones((1, 1)),), (np.ones((2, 1)), np.ones((1, 2))))


@pytest.mark.parametrize("seed", range(20))
def test_duality_sweep(seed):
    rng = np.random.default_rng(seed)
    M = random_boundary_model(rng, [3, 5][seed % 2])
    rep = check_assumptions(M)
    assert rep.A and rep.B
    data = lagrangian_split(M)
    assert duality_check(data)["holds"]
    assert domain_intertwining_check(data)["holds"]


@pytest.mark.parametrize("seed", range(8))
def test_eigenspace_orthogonality(seed):
    M = random_boundary_model(np.random.default_rng(100 + seed), 5)
    assert eigenspace_orthogonality(M) < 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_decompositions_are_direct(seed):
    M = random_boundary_model(np.random.default_rng(seed), 5)
    d = decomposition_dims(M)
    for name in ("mixed", "plain", "primed"):
        assert d[name]["direct"], name
        assert [sum(t) for t in d[name]["dims"]] == list(M.dims)


def test_hermitian_generator_is_self_dual():
    M = random_hermitian_boundary(np.random.default_rng(1), 5)
    assert M.is_hermitian()
    assert np.allclose(M.nabla_dual_full(), M.nabla_full())


def test_collar_chirality_is_involution():
    M = random_boundary_model(np.random.default_rng(7), 5)
    G = collar_chirality(M)
    assert np.allclose(G @ G, np.eye(G.shape[0]), atol=1e-10)


def test_direct_sum_dims():
    rng = np.random.default_rng(5)
    a, b = random_boundary_model(rng, 3), random_boundary_model(rng, 3)
    s = direct_sum(a, b)
    assert s.dims == tuple(x + y for x, y in zip(a.dims, b.dims))
    assert check_assumptions(s).A


def test_spectral_model_counts_match_harmonics():
    M = random_boundary_model(np.random.default_rng(11), 5)
    data = lagrangian_split(M)
    spec = boundary_spectral_model(M, data)
    hdims = check_assumptions(M).dims["harmonic"]
    assert [a + b for a, b in zip(spec.l_minus, spec.l_plus)] == hdims
    for p in range(M.top + 1):
        im = M.image_parts()[0][p]
        assert spec.zeta_count("minus", p) == (im.shape[1] if im.size else 0)
