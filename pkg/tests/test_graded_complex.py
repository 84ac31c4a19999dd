import numpy as np
import pytest

from torsionlab.graded_complex import (
    ComplexError,
    GradedChainComplex,
    SectorModel,
    admissible_windows,
    cohomology_dims,
    random_complex,
    random_hermitian_complex,
    sector_bound_check,
    signature_operator,
    spectral_window,
    validate,
    window_contour_oracle,
)
from torsionlab.linalg_core import spectrum_multiset_distance
from conftest import make_two_term


def test_two_term_valid(two_term):
    assert validate(two_term).valid


def test_non_involutive_chirality_located():
    one = np.eye(1)
    C = GradedChainComplex((1, 1), (2 * one,), (one, 2 * one))
    rep = validate(C)
    assert not rep.valid
    assert any("chirality not involutive" in v.message for v in rep.violations)
    with pytest.raises(ComplexError, match="degree"):
        rep.raise_if_invalid()


def test_nabla_squared_violation():
    C = GradedChainComplex((1, 1, 1), (np.ones((1, 1)), np.ones((1, 1))))
    rep = validate(C)
    assert not rep.valid and rep.violations[0].location == "degree 0"


def test_shape_errors():
    with pytest.raises(ComplexError):
        GradedChainComplex((1, 2), (np.ones((1, 1)),))


@pytest.mark.parametrize("seed", range(6))
def test_random_generators_valid(seed):
    rng = np.random.default_rng(seed)
    m = [1, 3, 5][seed % 3]
    assert validate(random_complex(rng, m)).valid
    assert validate(random_hermitian_complex(rng, m)).valid


def test_two_term_signature_operator(two_term):
    op = signature_operator(two_term)
    assert np.allclose(op.B_even, [[2.0]])
    # Gamma nabla returns degree 0 to degree 0; nabla Gamma does the same on degree 1
    assert np.allclose(op.B, np.diag([2.0, 2.0]))


def test_zero_differential_gives_zero_operator():
    one = np.eye(1)
    C = GradedChainComplex((1, 1), (0 * one,), (one, one))
    assert np.count_nonzero(signature_operator(C).B) == 0


@pytest.mark.parametrize("seed", range(5))
def test_hermitian_model_self_adjoint(seed):
    C = random_hermitian_complex(np.random.default_rng(seed), 3)
    B = signature_operator(C).B
    G = C.gram_full()
    assert np.linalg.norm(G @ B - B.conj().T @ G) < 1e-9
    assert np.max(np.abs(np.linalg.eigvals(B).imag)) < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_B_commutes_with_square(seed):
    op = signature_operator(random_complex(np.random.default_rng(seed), 3))
    assert np.linalg.norm(op.B @ op.B_sq - op.B_sq @ op.B) < 1e-9 * max(1.0, np.linalg.norm(op.B_sq))


def test_window_examples():
    D = np.diag([1.0, 3.0])
    assert np.allclose(spectral_window(D, 2.0), np.diag([1.0, 0.0]))
    assert np.allclose(spectral_window(D, 4.0), np.eye(2))


def test_window_jordan_block_vs_contour():
    J = np.array([[0.5, 1.0], [0.0, 0.5]])
    P = spectral_window(J, 1.0)
    assert np.allclose(P, np.eye(2))
    assert np.linalg.norm(P - window_contour_oracle(J, 1.0)) < 1e-8
    M = np.array([[0.5, 1.0, 0.3], [0.0, 0.5, 0.2], [0.0, 0.0, 4.0]])
    assert np.linalg.norm(spectral_window(M, 1.0) - window_contour_oracle(M, 1.0)) < 1e-8


def test_window_boundary_collision():
    from torsionlab.linalg_core import LinalgError

    with pytest.raises(LinalgError):
        spectral_window(np.diag([1.0, 3.0]), 3.0)


@pytest.mark.parametrize("seed", range(8))
def test_finite_hodge(seed):
    rng = np.random.default_rng(seed)
    m = [1, 3, 5][seed % 3]
    C = random_hermitian_complex(rng, m)
    op = signature_operator(C)
    h = cohomology_dims(C)
    for q in range(m + 1):
        ev = np.linalg.eigvals(op.block(q)) if C.dims[q] else np.zeros(0)
        assert int(np.sum(np.abs(ev) < 1e-8)) == h[q]


@pytest.mark.parametrize("seed", range(6))
def test_eigenspaces_intertwined(seed):
    rng = np.random.default_rng(seed)
    C = random_complex(rng, 3, acyclic=False)
    op = signature_operator(C)
    N = C.nabla_full()
    for lam in admissible_windows(op, 3)[1:]:
        P = np.zeros_like(op.B_sq)
        for q in range(C.m + 1):
            s = C.degree_slice(q)
            P[s, s] = spectral_window(op.block(q), lam)
        for X in (N, C.gamma_full() @ N, N @ C.gamma_full()):
            assert np.linalg.norm(X @ P - P @ X) < 1e-9 * max(1.0, np.linalg.norm(X))


@pytest.mark.parametrize("seed", range(8))
def test_square_spectra_shift_degree(seed):
    rng = np.random.default_rng(200 + seed)
    m = [3, 5][seed % 2]
    C = random_complex(rng, m)
    plus, minus = signature_operator(C).splitting(None)
    Mp, Mm = plus.matrix @ plus.matrix, minus.matrix @ minus.matrix
    for q in range(m):
        ip = np.nonzero(plus.degrees == q)[0]
        im = np.nonzero(minus.degrees == q + 1)[0]
        a = np.linalg.eigvals(Mp[np.ix_(ip, ip)]) if ip.size else np.zeros(0)
        b = np.linalg.eigvals(Mm[np.ix_(im, im)]) if im.size else np.zeros(0)
        assert spectrum_multiset_distance(a, b) < 1e-9 * max(1.0, np.max(np.abs(a), initial=1.0))


def test_even_spectrum_transported_by_chirality():
    rng = np.random.default_rng(5)
    C = random_complex(rng, 3)
    op = signature_operator(C)
    ev_even = np.linalg.eigvals(op.B_even)
    ev_odd = np.linalg.eigvals(op.B_odd)
    # odd forms are the chirality image of even forms when m = 3: same spectrum
    assert spectrum_multiset_distance(ev_even, ev_odd) < 1e-9


def test_sector_self_adjoint():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 4))
    rep = sector_bound_check(SectorModel(A + A.T))
    assert rep.N0 == pytest.approx(0.0, abs=1e-12) and rep.holds


def test_sector_random_identity_weight():
    rng = np.random.default_rng(1)
    B = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    rep = sector_bound_check(SectorModel(B))
    skew = 0.5 * (B - B.conj().T)
    assert rep.N0 == pytest.approx(3 * np.linalg.norm(skew, 2))
    assert rep.holds and rep.imag_margin >= 0 and rep.parabola_margin >= 0


def test_sector_weight_precondition():
    with pytest.raises(ComplexError):
        sector_bound_check(SectorModel(np.eye(2), 0.1 * np.eye(2)))
