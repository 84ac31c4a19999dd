"""Determinant lines of finite complexes and the refined torsion element.

Elements of a determinant line are stored as one complex coefficient
against a reference wedge built from chosen bases. The fusion map to the
determinant line of cohomology is computed from complements and cocycle
lifts found by SVD.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graded_complex import ComplexError, GradedChainComplex, validate
from .linalg_core import null_space, numerical_rank, operator_norm, range_basis

__all__ = [
    "DetLineElement",
    "CohomologyBasis",
    "normalization_exponent",
    "chirality_extend",
    "c_gamma",
    "cohomology_basis",
    "fusion_sign_exponent",
    "phi_iso",
    "refined_torsion_element",
]


@dataclass(frozen=True)
class DetLineElement:
    """A scalar multiple of a reference wedge ``(x) ref_j^{e_j}``.

    Parameters
    ----------
    coefficient : complex
    reference : tuple
        One basis matrix per factor; ``None`` stands for the standard basis.
    exponents : tuple of int
        ``+1`` or ``-1`` per factor.
    """

    coefficient: complex
    reference: tuple
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        if len(self.reference) != len(self.exponents):
            raise ValueError("one exponent per reference factor")

    @classmethod
    def for_complex(cls, coefficient: complex, reference: Sequence | None, m: int) -> "DetLineElement":
        ref = tuple(reference) if reference is not None else (None,) * (m + 1)
        return cls(coefficient, ref, tuple((-1) ** q for q in range(m + 1)))

    def rebase(self, slot: int, basis: np.ndarray) -> "DetLineElement":
        """Express the same element against a new basis in factor ``slot``.

        If the new wedge is ``d`` times the old one the coefficient picks up
        ``d ** (-exponent)``.
        """
        old = self.reference[slot]
        basis = np.asarray(basis, dtype=complex)
        n = basis.shape[0]
        old_m = np.eye(n, dtype=complex) if old is None else np.asarray(old, dtype=complex)
        d = np.linalg.det(np.linalg.solve(old_m, basis)) if n else 1.0
        ref = list(self.reference)
        ref[slot] = basis
        return DetLineElement(self.coefficient * d ** (-self.exponents[slot]), tuple(ref), self.exponents)

    def scaled(self, factor: complex) -> "DetLineElement":
        return DetLineElement(self.coefficient * factor, self.reference, self.exponents)


@dataclass(frozen=True)
class CohomologyBasis:
    """Cocycle representatives, one ``(n_q, h_q)`` matrix per degree."""

    reps: tuple

    def dims(self) -> list[int]:
        return [r.shape[1] for r in self.reps]


def normalization_exponent(dims: Sequence[int]) -> int:
    """Sign exponent ``1/2 * sum_{q<r} n_q (n_q + (-1)^{r+q})`` of the chirality element.

    Examples
    --------
    >>> normalization_exponent([1, 1])
    0
    >>> normalization_exponent([1, 2, 2, 1])
    2
    """
    m = len(dims) - 1
    r = (m + 1) // 2
    twice = sum(dims[q] * (dims[q] + (-1) ** (r + q)) for q in range(r))
    return twice // 2


def _coords(reference, M: np.ndarray) -> np.ndarray:
    if reference is None:
        return M
    return np.linalg.solve(np.asarray(reference, dtype=complex), M)


def chirality_extend(gamma_block: np.ndarray, c: np.ndarray, target_reference: np.ndarray | None = None) -> DetLineElement:
    """Image ``Gamma c_1 ^ ... ^ Gamma c_k`` as an element of the target line."""
    gamma_block = np.asarray(gamma_block, dtype=complex)
    c = np.asarray(c, dtype=complex)
    img = gamma_block @ c
    coef = np.linalg.det(_coords(target_reference, img)) if img.size else 1.0
    return DetLineElement(coef, (target_reference,), (1,))


def c_gamma(
    complex_: GradedChainComplex,
    choices: Mapping[int, np.ndarray] | None = None,
    reference: Sequence | None = None,
) -> DetLineElement:
    """Chirality element of ``Det(C)`` built from bases ``c_q``, ``q < r``.

    The element is ``(-1)^R c_0 (x) c_1^{-1} (x) ... (x) (Gamma c_1)^{+1} (x) (Gamma c_0)^{-1}``
    with ``R`` from :func:`normalization_exponent`; it does not depend on the
    choices.

    Raises
    ------
    ComplexError
        If a chosen basis is singular or the complex has no chirality.
    """
    C = complex_
    if not C.has_chirality:
        raise ComplexError("chirality element needs a chirality operator")
    m, r = C.m, C.r
    ref = tuple(reference) if reference is not None else (None,) * (m + 1)
    coef = complex((-1) ** normalization_exponent(C.dims))
    for q in range(r):
        n = C.dims[q]
        cq = np.eye(n, dtype=complex) if choices is None or q not in choices else np.asarray(choices[q], dtype=complex)
        if n == 0:
            continue
        if abs(np.linalg.det(cq)) < 1e-300 or numerical_rank(cq) < n:
            raise ComplexError(f"chosen basis in degree {q} is singular")
        dq = np.linalg.det(_coords(ref[q], cq))
        dg = chirality_extend(C.gamma[q], cq, ref[m - q]).coefficient
        coef *= dq ** ((-1) ** q) * dg ** ((-1) ** (m - q))
    return DetLineElement(coef, ref, tuple((-1) ** q for q in range(m + 1)))


def cohomology_basis(complex_: GradedChainComplex, tol: float = 1e-10) -> CohomologyBasis:
    """Orthonormal cocycles orthogonal (standard inner product) to the coboundaries."""
    C = complex_
    scale = max(1.0, max((operator_norm(D) for D in C.nabla), default=0.0))
    reps = []
    for q in range(C.m + 1):
        n = C.dims[q]
        Z = null_space(C.nabla[q], tol * scale, ncols=n) if q < C.m else np.eye(n, dtype=complex)
        Bq = range_basis(C.nabla[q - 1], tol * scale) if q > 0 else np.zeros((n, 0), dtype=complex)
        if Bq.shape[1]:
            Z = Z - Bq @ (Bq.conj().T @ Z)
        reps.append(range_basis(Z, 1e-8))
    return CohomologyBasis(tuple(reps))


def _decompose(C: GradedChainComplex, q: int, tol: float, rng: np.random.Generator | None):
    """Complement of ``ker nabla_q`` (columns), optionally randomized."""
    n = C.dims[q]
    if q == C.m or n == 0:
        return np.zeros((n, 0), dtype=complex)
    D = C.nabla[q]
    rank = numerical_rank(D, tol)
    _, _, vh = np.linalg.svd(D) if D.size else (None, None, np.eye(n))
    A = vh[:rank].conj().T
    if rng is not None and rank:
        K = vh[rank:].conj().T
        mix = rng.standard_normal((rank, rank)) + 1j * rng.standard_normal((rank, rank)) + 3 * np.eye(rank)
        A = A @ mix
        if K.shape[1]:
            A = A + K @ (rng.standard_normal((K.shape[1], rank)) + 1j * rng.standard_normal((K.shape[1], rank)))
    return A


def fusion_sign_exponent(ranks: Sequence[int], m: int) -> int:
    """Sign exponent of the fusion map, ``a (a + (-1)^r) / 2`` with ``a = rank nabla_{r-1}``.

    Chosen so that the chirality element of an acyclic complex maps to the
    graded determinant of its signature operator; it is ``0`` for a one
    dimensional two-term complex and for ``nabla = 0``.

    Examples
    --------
    >>> fusion_sign_exponent([1], 1), fusion_sign_exponent([2], 1)
    (0, 1)
    >>> fusion_sign_exponent([1, 1, 1], 3)
    1
    """
    r = (m + 1) // 2
    if m < 1 or len(ranks) < r:
        return 0
    a = int(ranks[r - 1])
    return (a * (a + (-1) ** r)) // 2


def phi_iso(
    complex_: GradedChainComplex,
    element: DetLineElement,
    h: CohomologyBasis,
    tol: float = 1e-10,
    rng: np.random.Generator | None = None,
) -> DetLineElement:
    """Fusion map ``Det(C) -> Det(H(C))``.

    Per degree, ``D_q = det[nabla A^{q-1} | h_q | A^q]`` in the element's
    reference coordinates, where ``A^q`` complements ``ker nabla_q``. The
    image coefficient is ``x * prod_q D_q^{(-1)^{q+1}}`` against the
    cohomology basis ``h``. For a two-term complex ``C^0 -a-> C^1`` this sends
    ``e_0 (x) e_1^{-1}`` to ``a``. The result also carries the global sign
    ``(-1)^{fusion_sign_exponent}``.

    Parameters
    ----------
    rng : numpy.random.Generator, optional
        Randomizes the complements (and lifts them off the kernel); the result
        must not change.

    Raises
    ------
    ComplexError
        If ``h`` does not consist of independent cocycles spanning cohomology.
    """
    C = complex_
    m = C.m
    scale = max(1.0, max((operator_norm(D) for D in C.nabla), default=0.0))
    if len(h.reps) != m + 1:
        raise ComplexError("cohomology basis needs one block per degree")
    comps = [_decompose(C, q, tol * scale, rng) for q in range(m + 1)]
    ranks = [numerical_rank(D, tol * scale) for D in C.nabla]
    coef = element.coefficient * (-1) ** fusion_sign_exponent(ranks, m)
    for q in range(m + 1):
        n = C.dims[q]
        hq = np.asarray(h.reps[q], dtype=complex)
        if hq.ndim != 2 or hq.shape[0] != n:
            hq = hq.reshape(n, -1) if hq.size else np.zeros((n, 0), dtype=complex)
        if q < m and hq.shape[1] and operator_norm(C.nabla[q] @ hq) > 1e-8 * scale * max(1.0, operator_norm(hq)):
            raise ComplexError(f"degree {q}: cohomology representatives are not cocycles")
        incoming = C.nabla[q - 1] @ comps[q - 1] if q > 0 else np.zeros((n, 0), dtype=complex)
        if rng is not None and incoming.shape[1] and hq.shape[1]:
            # shift the lifts by coboundaries: same classes
            hq = hq + incoming @ (rng.standard_normal((incoming.shape[1], hq.shape[1])) * 0.5)
        block = np.hstack([incoming, hq, comps[q]])
        if block.shape[1] != n:
            raise ComplexError(f"degree {q}: cohomology basis has the wrong size ({hq.shape[1]} columns)")
        if n == 0:
            continue
        Dq = np.linalg.det(_coords(element.reference[q], block))
        if abs(Dq) < 1e-300 or numerical_rank(block, 1e-9 * max(1.0, operator_norm(block))) < n:
            raise ComplexError(f"degree {q}: cohomology basis is not independent modulo coboundaries")
        coef *= Dq ** ((-1) ** (q + 1))
    return DetLineElement(coef, tuple(h.reps), tuple((-1) ** q for q in range(m + 1)))


def refined_torsion_element(
    complex_: GradedChainComplex,
    h: CohomologyBasis | None = None,
    rng: np.random.Generator | None = None,
) -> DetLineElement:
    """Image of the chirality element under the fusion map.

    Parameters
    ----------
    h : CohomologyBasis, optional
        Defaults to :func:`cohomology_basis`.
    """
    validate(complex_).raise_if_invalid()
    if h is None:
        h = cohomology_basis(complex_)
    return phi_iso(complex_, c_gamma(complex_), h, rng=rng)
