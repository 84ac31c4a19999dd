import numpy as np
import pytest

from torsionlab.det_line import (
    CohomologyBasis,
    DetLineElement,
    c_gamma,
    chirality_extend,
    cohomology_basis,
    normalization_exponent,
    phi_iso,
    refined_torsion_element,
)
from torsionlab.graded_complex import ComplexError, GradedChainComplex, random_complex, signature_operator
from torsionlab.zeta_eta import graded_determinant
from conftest import make_two_term


def test_normalization_examples():
    assert normalization_exponent([1, 1]) == 0
    assert normalization_exponent([1, 2, 2, 1]) == 2


def test_chirality_extend_scaling():
    assert chirality_extend(np.eye(1), np.eye(1)).coefficient == 1
    assert chirality_extend(2 * np.eye(1), np.eye(1)).coefficient == 2


def test_chirality_extend_is_block_determinant():
    rng = np.random.default_rng(0)
    G = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    c = rng.standard_normal((3, 3))
    # Leibniz expansion as the oracle
    from itertools import permutations

    img = G @ c
    det = 0j
    for p in permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[list(p)])
        det += sign * img[0, p[0]] * img[1, p[1]] * img[2, p[2]]
    assert abs(chirality_extend(G, c).coefficient - det) < 1e-12 * abs(det)


def test_rebase_covariance():
    e = DetLineElement.for_complex(3.0, None, 1)
    d = 5.0
    assert e.rebase(0, d * np.eye(1)).coefficient == pytest.approx(3.0 / d)
    assert e.rebase(1, d * np.eye(1)).coefficient == pytest.approx(3.0 * d)


@pytest.mark.parametrize("seed", range(5))
def test_chirality_element_choice_free(seed):
    rng = np.random.default_rng(seed)
    C = random_complex(rng, 3)
    choices = {q: rng.standard_normal((C.dims[q],) * 2) + 3 * np.eye(C.dims[q]) for q in range(C.r)}
    assert abs(c_gamma(C).coefficient - c_gamma(C, choices).coefficient) < 1e-10 * abs(c_gamma(C).coefficient)
    scaled = {0: 5 * np.eye(C.dims[0])}
    assert abs(c_gamma(C, scaled).coefficient - c_gamma(C).coefficient) < 1e-12


def test_singular_choice_rejected():
    C = make_two_term(2.0)
    with pytest.raises(ComplexError):
        c_gamma(C, {0: np.zeros((1, 1))})


def test_fusion_on_zero_differential_is_identity():
    rng = np.random.default_rng(3)
    dims = (2, 1, 1, 2)
    g0 = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    C = GradedChainComplex(dims, tuple(np.zeros((dims[q + 1], dims[q])) for q in range(3)), (g0, np.eye(1), np.eye(1), g0.T))
    h = CohomologyBasis(tuple(np.eye(d) for d in dims))
    e = DetLineElement.for_complex(2.5 - 1j, None, 3)
    assert phi_iso(C, e, h).coefficient == pytest.approx(2.5 - 1j)


@pytest.mark.parametrize("a", [2.0, -0.7, 1.5 + 2j])
def test_two_term_fusion(a):
    C = make_two_term(a)
    h = cohomology_basis(C)
    e = DetLineElement.for_complex(1.0, None, 1)
    assert abs(phi_iso(C, e, h).coefficient - a) < 1e-12
    assert abs(refined_torsion_element(C).coefficient - a) < 1e-12


@pytest.mark.parametrize("seed", range(6))
def test_fusion_choice_independence(seed):
    rng = np.random.default_rng(seed)
    C = random_complex(rng, [1, 3, 5][seed % 3], acyclic=False)
    h = cohomology_basis(C)
    e = c_gamma(C)
    ref = phi_iso(C, e, h).coefficient
    alt = phi_iso(C, e, h, rng=np.random.default_rng(seed + 50)).coefficient
    assert abs(alt - ref) < 1e-10 * abs(ref)


def test_bad_cohomology_basis():
    C = make_two_term(2.0)
    with pytest.raises(ComplexError):
        phi_iso(C, c_gamma(C), CohomologyBasis((np.ones((1, 1)), np.zeros((1, 0)))))


@pytest.mark.parametrize("seed", range(8))
def test_acyclic_torsion_equals_graded_determinant(seed):
    rng = np.random.default_rng(300 + seed)
    C = random_complex(rng, [1, 3, 5][seed % 3])
    plus, minus = signature_operator(C).even_splitting(None)
    det = graded_determinant(plus, minus, -np.pi / 4)
    rho = refined_torsion_element(C).coefficient
    assert abs(rho - det) < 1e-9 * abs(det)


@pytest.mark.parametrize("seed", range(5))
def test_torsion_independent_of_rescaled_choices(seed):
    rng = np.random.default_rng(seed)
    C = random_complex(rng, 3, acyclic=False)
    h = cohomology_basis(C)
    base = phi_iso(C, c_gamma(C), h).coefficient
    choices = {q: rng.uniform(0.5, 3.0) * np.eye(C.dims[q]) for q in range(C.r)}
    assert abs(phi_iso(C, c_gamma(C, choices), h).coefficient - base) < 1e-10 * abs(base)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_square_two_term_fusion_carries_middle_rank_sign(n):
    from torsionlab.det_line import DetLineElement, cohomology_basis, phi_iso

    rng = np.random.default_rng(n)
    D = rng.standard_normal((n, n)) + 3 * np.eye(n)
    C = GradedChainComplex((n, n), (D,), (np.eye(n), np.eye(n)))
    out = phi_iso(C, DetLineElement.for_complex(1.0, None, 1), cohomology_basis(C))
    assert out.coefficient == pytest.approx((-1) ** (n * (n - 1) // 2) * np.linalg.det(D))
