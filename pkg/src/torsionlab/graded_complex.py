"""Finite cochain complexes with a chirality involution.

A complex carries differentials ``nabla[q] : C^q -> C^{q+1}`` and, when it
is a chirality complex, blocks ``gamma[q] : C^q -> C^{m-q}`` with
``gamma[m-q] @ gamma[q] = I``. From these we build the odd signature
operator ``B = Gamma nabla + nabla Gamma``, its even/odd and kernel-type
splittings, spectral windows of ``B^2`` and the sector bounds for
non-normal perturbations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg_core import (
    LinalgError,
    as_complex_matrix,
    contour_projector,
    invariant_projector,
    null_space,
    numerical_rank,
    operator_norm,
    range_basis,
)

__all__ = [
    "ComplexError",
    "GradedChainComplex",
    "Violation",
    "ValidationReport",
    "validate",
    "SignatureOperator",
    "SplitPart",
    "signature_operator",
    "spectral_window",
    "window_gap",
    "window_contour_oracle",
    "admissible_windows",
    "cohomology_dims",
    "SectorModel",
    "SectorReport",
    "sector_bound_check",
    "random_complex",
    "random_hermitian_complex",
    "conjugate_complex",
]


class ComplexError(ValueError):
    """Raised when a complex violates a structural requirement."""


@dataclass(frozen=True)
class GradedChainComplex:
    """Finite cochain complex ``C^0 -> ... -> C^m``.

    Parameters
    ----------
    dims : sequence of int
        ``dim C^q`` for ``q = 0..m``.
    nabla : sequence of (n_{q+1}, n_q) arrays
        Differentials, ``m`` of them.
    gamma : sequence of (n_{m-q}, n_q) arrays, optional
        Chirality blocks, one per degree. ``None`` for a plain complex.
    inner : sequence of (n_q, n_q) arrays, optional
        Hermitian positive definite Gram matrices; identity when omitted.
    """

    dims: tuple
    nabla: tuple
    gamma: tuple | None = None
    inner: tuple | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0 or min(dims) < 0:
            raise ComplexError("dims must be a non-empty list of non-negative integers")
        object.__setattr__(self, "dims", dims)
        m = len(dims) - 1
        if len(self.nabla) != m:
            raise ComplexError(f"expected {m} differentials, got {len(self.nabla)}")
        nab = []
        for q, D in enumerate(self.nabla):
            A = np.asarray(D, dtype=complex).reshape(dims[q + 1], dims[q]) if np.size(D) == 0 else as_complex_matrix(D, f"nabla[{q}]")
            if A.shape != (dims[q + 1], dims[q]):
                raise ComplexError(f"nabla[{q}] has shape {A.shape}, expected {(dims[q + 1], dims[q])}")
            nab.append(A)
        object.__setattr__(self, "nabla", tuple(nab))
        if self.gamma is not None:
            if len(self.gamma) != m + 1:
                raise ComplexError(f"expected {m + 1} chirality blocks, got {len(self.gamma)}")
            gam = []
            for q, G in enumerate(self.gamma):
                shape = (dims[m - q], dims[q])
                A = np.zeros(shape, dtype=complex) if np.size(G) == 0 else as_complex_matrix(G, f"gamma[{q}]")
                if A.shape != shape:
                    raise ComplexError(f"gamma[{q}] has shape {A.shape}, expected {shape}")
                gam.append(A)
            object.__setattr__(self, "gamma", tuple(gam))
        if self.inner is not None:
            if len(self.inner) != m + 1:
                raise ComplexError("one inner product per degree is required")
            inn = []
            for q, G in enumerate(self.inner):
                A = np.zeros((dims[q], dims[q]), dtype=complex) if np.size(G) == 0 else as_complex_matrix(G, f"inner[{q}]")
                if A.shape != (dims[q], dims[q]):
                    raise ComplexError(f"inner[{q}] has wrong shape {A.shape}")
                inn.append(A)
            object.__setattr__(self, "inner", tuple(inn))

    # ----- basic structure -------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.dims) - 1

    @property
    def r(self) -> int:
        return (self.m + 1) // 2

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def has_chirality(self) -> bool:
        return self.gamma is not None

    def offsets(self) -> list[int]:
        out = [0]
        for d in self.dims:
            out.append(out[-1] + d)
        return out

    def degree_slice(self, q: int) -> slice:
        off = self.offsets()
        return slice(off[q], off[q + 1])

    def degree_of_index(self) -> np.ndarray:
        return np.concatenate([np.full(d, q, dtype=int) for q, d in enumerate(self.dims)]) if self.total_dim else np.zeros(0, int)

    def gram(self, q: int) -> np.ndarray:
        if self.inner is None:
            return np.eye(self.dims[q], dtype=complex)
        return self.inner[q]

    def nabla_full(self) -> np.ndarray:
        n = self.total_dim
        N = np.zeros((n, n), dtype=complex)
        for q, D in enumerate(self.nabla):
            N[self.degree_slice(q + 1), self.degree_slice(q)] = D
        return N

    def gamma_full(self) -> np.ndarray:
        if self.gamma is None:
            raise ComplexError("complex has no chirality operator")
        n = self.total_dim
        G = np.zeros((n, n), dtype=complex)
        for q, blk in enumerate(self.gamma):
            G[self.degree_slice(self.m - q), self.degree_slice(q)] = blk
        return G

    def gram_full(self) -> np.ndarray:
        n = self.total_dim
        G = np.zeros((n, n), dtype=complex)
        for q in range(self.m + 1):
            s = self.degree_slice(q)
            G[s, s] = self.gram(q)
        return G

    def adjoint_nabla_full(self) -> np.ndarray:
        """Adjoint of the differential with respect to the inner products."""
        G = self.gram_full()
        N = self.nabla_full()
        return np.linalg.solve(G, N.conj().T @ G) if G.size else N

    def dual_nabla_full(self) -> np.ndarray:
        """Dual differential ``Gamma nabla^* Gamma``."""
        Gm = self.gamma_full()
        return Gm @ self.adjoint_nabla_full() @ Gm

    def even_indices(self) -> np.ndarray:
        deg = self.degree_of_index()
        return np.nonzero(deg % 2 == 0)[0]

    def odd_indices(self) -> np.ndarray:
        deg = self.degree_of_index()
        return np.nonzero(deg % 2 == 1)[0]


@dataclass(frozen=True)
class Violation:
    location: str
    message: str
    residual: float


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`."""

    valid: bool
    violations: tuple
    checks: dict

    def raise_if_invalid(self) -> None:
        if not self.valid:
            first = self.violations[0]
            raise ComplexError(f"{first.location}: {first.message} (residual {first.residual:.3e})")


def validate(complex_: GradedChainComplex, tol: float = 1e-10) -> ValidationReport:
    """Check every structural invariant of a complex.

    Differentials must square to zero; chirality blocks must pair degrees
    ``q`` and ``m - q``, square to the identity, and require odd ``m``; inner
    products must be Hermitian positive definite.

    Parameters
    ----------
    complex_ : GradedChainComplex
    tol : float
        Relative tolerance on residual norms.

    Returns
    -------
    ValidationReport
    """
    C = complex_
    viol: list[Violation] = []
    checks: dict = {}
    scale_n = max(1.0, max((operator_norm(D) for D in C.nabla), default=0.0))
    for q in range(C.m - 1):
        res = operator_norm(C.nabla[q + 1] @ C.nabla[q])
        checks[f"nabla_squared[{q}]"] = res
        if res > tol * scale_n ** 2:
            viol.append(Violation(f"degree {q}", "differential does not square to zero", res))
    if C.gamma is not None:
        if C.m % 2 == 0:
            viol.append(Violation("complex", "chirality requires an odd top degree", float(C.m)))
        for q in range(C.m + 1):
            if C.dims[q] != C.dims[C.m - q]:
                viol.append(Violation(f"degree {q}", "chirality needs dim C^q = dim C^(m-q)", abs(C.dims[q] - C.dims[C.m - q])))
        if not viol:
            for q in range(C.m + 1):
                prod = C.gamma[C.m - q] @ C.gamma[q]
                res = operator_norm(prod - np.eye(C.dims[q]))
                checks[f"gamma_squared[{q}]"] = res
                if res > tol * max(1.0, operator_norm(C.gamma[q])) ** 2:
                    viol.append(Violation(f"degree {q}", "chirality not involutive", res))
    if C.inner is not None:
        for q, G in enumerate(C.inner):
            if G.size == 0:
                continue
            herm = operator_norm(G - G.conj().T)
            checks[f"inner_hermitian[{q}]"] = herm
            if herm > tol * max(1.0, operator_norm(G)):
                viol.append(Violation(f"degree {q}", "inner product not Hermitian", herm))
                continue
            lam = float(np.min(np.linalg.eigvalsh((G + G.conj().T) / 2)))
            checks[f"inner_min_eig[{q}]"] = lam
            if lam <= 0:
                viol.append(Violation(f"degree {q}", "inner product not positive definite", -lam))
    return ValidationReport(not viol, tuple(viol), checks)


def cohomology_dims(complex_: GradedChainComplex, tol: float = 1e-10) -> list[int]:
    """``dim H^q`` from SVD ranks with relative tolerance ``tol * ||nabla||``."""
    C = complex_
    scale = max(1.0, max((operator_norm(D) for D in C.nabla), default=0.0))
    ranks = [numerical_rank(D, tol * scale) for D in C.nabla]
    out = []
    for q, n in enumerate(C.dims):
        r_out = ranks[q] if q < C.m else 0
        r_in = ranks[q - 1] if q > 0 else 0
        out.append(n - r_out - r_in)
    return out


# ----- signature operator ----------------------------------------------------

@dataclass(frozen=True)
class SplitPart:
    """Restriction of ``B`` to an invariant subspace with a degree-adapted basis.

    Attributes
    ----------
    basis : (N, k) array
        Orthonormal columns, each supported in a single degree.
    degrees : (k,) int array
        Degree carrying each column.
    matrix : (k, k) array
        ``B`` in these coordinates.
    """

    basis: np.ndarray
    degrees: np.ndarray
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.basis.shape[1]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix) if self.size else np.zeros(0, complex)

    def restrict_degrees(self, keep) -> "SplitPart":
        """Sub-block on the columns whose degree satisfies ``keep``.

        Only meaningful when those columns span a ``B``-invariant subspace.
        """
        idx = np.nonzero([keep(int(d)) for d in self.degrees])[0]
        return SplitPart(self.basis[:, idx], self.degrees[idx], self.matrix[np.ix_(idx, idx)])


@dataclass(frozen=True)
class SignatureOperator:
    """Odd signature operator of a chirality complex.

    Attributes
    ----------
    complex : GradedChainComplex
    B : ndarray
        ``Gamma nabla + nabla Gamma`` on the whole space.
    B_sq : ndarray
        ``B @ B``; preserves degrees.
    """

    complex: GradedChainComplex
    B: np.ndarray
    B_sq: np.ndarray

    @property
    def B_even(self) -> np.ndarray:
        idx = self.complex.even_indices()
        return self.B[np.ix_(idx, idx)]

    @property
    def B_odd(self) -> np.ndarray:
        idx = self.complex.odd_indices()
        return self.B[np.ix_(idx, idx)]

    def block(self, q: int) -> np.ndarray:
        """``B^2`` restricted to degree ``q``."""
        s = self.complex.degree_slice(q)
        return self.B_sq[s, s]

    def window_projectors(self, lam: float | None) -> list[np.ndarray]:
        """Per-degree ``Pi_[0, lam]``; ``None`` means the empty window."""
        C = self.complex
        if lam is None:
            return [np.zeros((n, n), dtype=complex) for n in C.dims]
        return [spectral_window(self.block(q), lam) for q in range(C.m + 1)]

    def complement_bases(self, lam: float | None) -> list[np.ndarray]:
        """Orthonormal bases of the ``(lam, inf)`` generalized eigenspaces per degree."""
        out = []
        for q, P in enumerate(self.window_projectors(lam)):
            n = self.complex.dims[q]
            out.append(range_basis(np.eye(n) - P, 1e-8) if n else np.zeros((0, 0), dtype=complex))
        return out

    def splitting(self, lam: float | None = None, tol: float = 1e-10) -> tuple[SplitPart, SplitPart]:
        """The two kernel-type parts of ``B`` on the ``(lam, inf)`` subspace.

        Returns
        -------
        plus, minus : SplitPart
            ``plus`` lives on ``ker(Gamma nabla Gamma)`` where ``B = Gamma nabla``;
            ``minus`` on ``ker(nabla)`` where ``B = nabla Gamma``.

        Raises
        ------
        ComplexError
            When the two kernels do not split the subspace (the zero
            generalized eigenspace meets both kernels).
        """
        C = self.complex
        N = C.nabla_full()
        Gm = C.gamma_full()
        dual = Gm @ N @ Gm
        scale = max(1.0, operator_norm(N))
        plus_cols, plus_deg, minus_cols, minus_deg = [], [], [], []
        for q, U in enumerate(self.complement_bases(lam)):
            if U.shape[1] == 0:
                continue
            s = C.degree_slice(q)
            emb = np.zeros((C.total_dim, U.shape[1]), dtype=complex)
            emb[s] = U
            Vm = emb @ null_space(N @ emb, tol * scale, ncols=U.shape[1])
            Vp = emb @ null_space(dual @ emb, tol * scale, ncols=U.shape[1])
            if Vm.shape[1] + Vp.shape[1] != U.shape[1] or numerical_rank(np.hstack([Vm, Vp]), 1e-8) != U.shape[1]:
                raise ComplexError(
                    f"degree {q}: ker(nabla) and ker(Gamma nabla Gamma) do not split the space "
                    "(the zero eigenspace of B^2 meets both kernels)"
                )
            minus_cols.append(Vm)
            minus_deg.extend([q] * Vm.shape[1])
            plus_cols.append(Vp)
            plus_deg.extend([q] * Vp.shape[1])

        def part(cols, degs):
            if not cols:
                return SplitPart(np.zeros((C.total_dim, 0), complex), np.zeros(0, int), np.zeros((0, 0), complex))
            V = np.hstack(cols)
            # orthonormal within each degree but not across: solve for coordinates
            coords = np.linalg.lstsq(V, self.B @ V, rcond=None)[0]
            return SplitPart(V, np.asarray(degs, dtype=int), coords)

        return part(plus_cols, plus_deg), part(minus_cols, minus_deg)

    def even_splitting(self, lam: float | None = None) -> tuple[SplitPart, SplitPart]:
        """``(B^+_even, B^-_even)`` on the ``(lam, inf)`` subspace."""
        plus, minus = self.splitting(lam)
        even = lambda d: d % 2 == 0  # noqa: E731
        return plus.restrict_degrees(even), minus.restrict_degrees(even)


def signature_operator(complex_: GradedChainComplex) -> SignatureOperator:
    """Assemble ``B = Gamma nabla + nabla Gamma`` and ``B^2``.

    Raises
    ------
    ComplexError
        If the complex is invalid or has no chirality.
    """
    if not complex_.has_chirality:
        raise ComplexError("signature operator needs a chirality operator")
    validate(complex_).raise_if_invalid()
    N = complex_.nabla_full()
    G = complex_.gamma_full()
    B = G @ N + N @ G
    return SignatureOperator(complex_, B, B @ B)


# ----- spectral windows -----------------------------------------------------

def window_gap(B_sq, lam: float) -> float:
    """Distance from ``lam`` to the nearest ``|mu|`` over eigenvalues ``mu``."""
    A = as_complex_matrix(B_sq)
    if A.shape[0] == 0:
        return float("inf")
    return float(np.min(np.abs(np.abs(np.linalg.eigvals(A)) - lam)))


def spectral_window(B_sq, lam: float, boundary_tol: float = 1e-8) -> np.ndarray:
    """Projector onto generalized eigenspaces with ``|mu| <= lam``.

    Parameters
    ----------
    B_sq : (n, n) array_like
    lam : float
        Window radius, ``lam >= 0``.
    boundary_tol : float
        Relative distance below which an eigenvalue counts as sitting on the
        window boundary.

    Raises
    ------
    LinalgError
        If an eigenvalue modulus lies within ``boundary_tol * max(1, lam)``
        of ``lam``.

    Examples
    --------
    >>> np.real(spectral_window(np.diag([1.0, 3.0]), 2.0))
    array([[1., 0.],
           [0., 0.]])
    """
    if lam < 0:
        raise LinalgError("window radius must be non-negative")
    A = as_complex_matrix(B_sq)
    if A.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    eig = np.linalg.eigvals(A)
    if np.any(np.abs(np.abs(eig) - lam) <= boundary_tol * max(1.0, lam)) and lam > 0:
        raise LinalgError(f"an eigenvalue of B^2 sits on the window boundary |mu| = {lam}")
    return invariant_projector(A, lambda z: abs(z) <= lam)


def window_contour_oracle(B_sq, lam: float, nodes: int = 512) -> np.ndarray:
    """Contour-quadrature version of :func:`spectral_window` for cross-checks.

    The circle radius sits halfway across the gap above ``lam``.
    """
    A = as_complex_matrix(B_sq)
    mods = np.abs(np.linalg.eigvals(A))
    above = mods[mods > lam]
    eps = 0.5 * (np.min(above) - lam) if above.size else 1.0
    return contour_projector(A, 0.0, lam + eps, nodes)


def admissible_windows(op: SignatureOperator, count: int = 2, include_zero: bool = True) -> list[float]:
    """Window radii placed in the middle of gaps of ``|Spec B^2|``.

    Returns up to ``count`` radii in increasing order, spread across the
    available gaps. The zero window (radius 0) is offered first when 0 is not
    an eigenvalue and ``include_zero`` is set; the result may be shorter than
    ``count`` when the spectrum has too few gaps.
    """
    mods = np.sort(np.abs(np.linalg.eigvals(op.B_sq))) if op.B_sq.size else np.zeros(0)
    cands = []
    if include_zero and (mods.size == 0 or mods[0] > 1e-8):
        cands.append(0.0)
    for a, b in zip(mods[:-1], mods[1:]):
        if b - a > 1e-3 * max(1.0, b):
            cands.append(0.5 * (a + b))
    if mods.size:
        cands.append(mods[-1] + 1.0)
    if len(cands) <= count:
        return cands
    pick = np.linspace(0, len(cands) - 1, count).round().astype(int)
    return [cands[i] for i in sorted(set(pick))]


# ----- sector bounds ---------------------------------------------------------

@dataclass(frozen=True)
class SectorModel:
    """Non-normal operator with a positive weight used for the sector bound.

    Parameters
    ----------
    B : (n, n) array
    T : (n, n) array, optional
        Self-adjoint weight with smallest eigenvalue at least 1/3; identity by
        default.
    """

    B: np.ndarray
    T: np.ndarray | None = None

    def weight(self) -> np.ndarray:
        return np.eye(self.B.shape[0], dtype=complex) if self.T is None else np.asarray(self.T, dtype=complex)

    def parts(self) -> tuple[np.ndarray, np.ndarray, float]:
        """``(U, F, N0)`` with ``U`` weighted-symmetric and ``F`` the defect."""
        B = np.asarray(self.B, dtype=complex)
        T = self.weight()
        pulled = np.linalg.solve(T, B.conj().T @ T)
        U = 0.5 * (B + pulled)
        F = 0.5 * (B - pulled)
        return U, F, 3.0 * operator_norm(F) * operator_norm(T)


@dataclass(frozen=True)
class SectorReport:
    N0: float
    imag_margin: float
    parabola_margin: float
    holds: bool
    eigenvalues: np.ndarray = field(repr=False)


def sector_bound_check(model: SectorModel, tol: float = 1e-9) -> SectorReport:
    """Verify the strip bound for ``B`` and the parabola bound for ``B^2``.

    Every eigenvalue ``lam`` of ``B`` must satisfy ``|Im lam| <= N0`` and every
    eigenvalue ``mu`` of ``B^2`` must satisfy
    ``Re mu >= (Im mu)^2 / (4 N0^2) - N0^2``. For ``N0 = 0`` the conditions
    read ``Im lam = 0`` and ``mu >= 0``.

    Margins are the minimum slack over the spectrum, so a non-negative margin
    (up to ``tol`` times the spectral scale) means the bound holds.

    Raises
    ------
    ComplexError
        If the weight is not self-adjoint or its smallest eigenvalue is below 1/3.
    """
    T = model.weight()
    if operator_norm(T - T.conj().T) > 1e-12 * max(1.0, operator_norm(T)):
        raise ComplexError("weight must be self-adjoint")
    if T.size and float(np.min(np.linalg.eigvalsh(T))) < 1.0 / 3.0 - 1e-14:
        raise ComplexError("weight must be bounded below by 1/3")
    _, _, N0 = model.parts()
    lam = np.linalg.eigvals(np.asarray(model.B, dtype=complex))
    mu = lam ** 2
    mu_direct = np.linalg.eigvals(np.asarray(model.B, dtype=complex) @ np.asarray(model.B, dtype=complex))
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    if lam.size == 0:
        return SectorReport(N0, 0.0, 0.0, True, lam)
    imag_margin = float(np.min(N0 - np.abs(lam.imag)))
    if N0 > 0:
        parab = mu_direct.real - (mu_direct.imag ** 2 / (4 * N0 ** 2) - N0 ** 2)
        parab_exact = mu.real - (mu.imag ** 2 / (4 * N0 ** 2) - N0 ** 2)
        parabola_margin = float(min(np.min(parab), np.min(parab_exact)))
    else:
        parabola_margin = float(min(np.min(mu_direct.real), -np.max(np.abs(mu_direct.imag))))
    holds = imag_margin >= -tol * scale and parabola_margin >= -tol * scale ** 2
    return SectorReport(N0, imag_margin, parabola_margin, holds, lam)


# ----- generators ------------------------------------------------------------

def _well_conditioned(rng: np.random.Generator, n: int, spread: float = 0.4) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    Q = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]
    return Q @ (np.eye(n) + spread * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n))


def _random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _boundary_ranks(m: int, ranks_low: Sequence[int], harm: Sequence[int]) -> tuple[list[int], list[int]]:
    """Extend lower-half ranks and harmonic counts to a symmetric profile."""
    r = (m + 1) // 2
    k = [0] * m
    for q in range(r - 1):
        k[q] = ranks_low[q]
        k[m - 1 - q] = ranks_low[q]
    k[r - 1] = ranks_low[r - 1] if len(ranks_low) >= r else 0
    h = [0] * (m + 1)
    for q in range(r):
        h[q] = harm[q]
        h[m - q] = harm[q]
    return k, h


def random_complex(
    rng: np.random.Generator,
    m: int,
    max_dim: int = 4,
    acyclic: bool = True,
    max_tries: int = 200,
) -> GradedChainComplex:
    """Seeded random chirality complex.

    Ranks of the differentials and harmonic dimensions are drawn so that
    ``dim C^q = dim C^{m-q} <= max_dim``; the differentials are conjugated by
    well-conditioned random bases and the chirality is a random invertible
    block paired with its inverse.

    Parameters
    ----------
    rng : numpy.random.Generator
    m : int
        Odd top degree.
    max_dim : int
    acyclic : bool
        When true, no cohomology and ``B`` invertible (redrawn otherwise).
    """
    if m % 2 == 0 or m < 1:
        raise ComplexError("chirality complexes need odd m >= 1")
    r = (m + 1) // 2
    for _ in range(max_tries):
        ranks_low = [int(rng.integers(1, max_dim + 1))]
        for q in range(1, r):
            ranks_low.append(int(rng.integers(0, max_dim + 1)))
        harm = [0] * r if acyclic else [int(rng.integers(0, 2)) for _ in range(r)]
        k, h = _boundary_ranks(m, ranks_low, harm)
        dims = [(k[q - 1] if q > 0 else 0) + h[q] + (k[q] if q < m else 0) for q in range(m + 1)]
        if max(dims) > max_dim:
            continue
        C = _assemble_random(rng, m, dims, k, h)
        op = signature_operator(C)
        if acyclic:
            ev = np.linalg.eigvals(op.B_sq)
            if ev.size == 0 or np.min(np.abs(ev)) < 1e-2:
                continue
        return C
    raise ComplexError("could not draw a complex with the requested properties")


def _assemble_random(rng, m, dims, k, h) -> GradedChainComplex:
    S = [_well_conditioned(rng, n) for n in dims]
    nab = []
    for q in range(m):
        E = np.zeros((dims[q + 1], dims[q]), dtype=complex)
        src0 = (k[q - 1] if q > 0 else 0) + h[q]
        for j in range(k[q]):
            E[j, src0 + j] = 1.0
        nab.append(S[q + 1] @ E @ np.linalg.inv(S[q]) if dims[q] and dims[q + 1] else E)
    gam = [None] * (m + 1)
    r = (m + 1) // 2
    for q in range(r):
        G = _well_conditioned(rng, dims[q], 0.6)
        gam[q] = G
        gam[m - q] = np.linalg.inv(G) if dims[q] else G
    return GradedChainComplex(tuple(dims), tuple(nab), tuple(gam))


def random_hermitian_complex(
    rng: np.random.Generator,
    m: int,
    max_dim: int = 4,
    harmonic: bool = True,
) -> GradedChainComplex:
    """Seeded random complex with unitary chirality and ``Gamma nabla^* Gamma = nabla``.

    With the standard inner product this makes ``B`` self-adjoint. The lower
    differentials are random of prescribed rank; the middle one is
    ``Gamma M`` with ``M`` Hermitian and supported off the incoming image,
    and the upper ones follow from the symmetry.
    """
    if m % 2 == 0:
        raise ComplexError("odd m required")
    r = (m + 1) // 2
    while True:
        dims_low = [int(rng.integers(1, max_dim + 1)) for _ in range(r)]
        dims = dims_low + dims_low[::-1]
        ranks = []
        ok = True
        prev = 0
        for q in range(r - 1):
            avail = dims[q] - prev
            top = min(avail, dims[q + 1])
            if top < 0:
                ok = False
                break
            kq = int(rng.integers(0 if harmonic else top, top + 1))
            ranks.append(kq)
            prev = kq
        if not ok:
            continue
        avail_mid = dims[r - 1] - prev
        if avail_mid < 0:
            continue
        mid_rank = int(rng.integers(0 if harmonic else avail_mid, avail_mid + 1))
        break
    gam = [None] * (m + 1)
    for q in range(r):
        U = _random_unitary(rng, dims[q])
        gam[q] = U
        gam[m - q] = U.conj().T
    nab = [None] * m
    # build lower differentials with exact nilpotency via shared bases
    bases = [_well_conditioned(rng, d) for d in dims]
    for q in range(r - 1):
        E = np.zeros((dims[q + 1], dims[q]), dtype=complex)
        src0 = ranks[q - 1] if q > 0 else 0
        for j in range(ranks[q]):
            E[j, src0 + j] = 1.0
        nab[q] = bases[q + 1] @ E @ np.linalg.inv(bases[q])
    n_mid = dims[r - 1]
    if r >= 2:
        img = range_basis(nab[r - 2])
    else:
        img = np.zeros((n_mid, 0), dtype=complex)
    perp = null_space(img.conj().T, ncols=n_mid) if img.shape[1] else np.eye(n_mid, dtype=complex)
    W = perp[:, :mid_rank] if mid_rank <= perp.shape[1] else perp
    D = np.diag(rng.choice([-1.0, 1.0], W.shape[1]) * rng.uniform(0.5, 2.0, W.shape[1]))
    Mherm = W @ D @ W.conj().T
    nab[r - 1] = gam[r - 1] @ Mherm
    for q in range(r - 1):
        # nabla_{m-1-q} = Gamma_q nabla_q^* Gamma_{m-1-q}
        nab[m - 1 - q] = gam[q] @ nab[q].conj().T @ gam[m - 1 - q]
    return GradedChainComplex(tuple(dims), tuple(nab), tuple(gam))


def conjugate_complex(complex_: GradedChainComplex, S: Sequence[np.ndarray]) -> GradedChainComplex:
    """Change of basis ``x -> S x`` degree by degree.

    Inner products transform so that the result is isometric to the input.
    """
    C = complex_
    Sinv = [np.linalg.inv(s) if s.size else s for s in S]
    nab = tuple(S[q + 1] @ C.nabla[q] @ Sinv[q] for q in range(C.m))
    gam = None
    if C.gamma is not None:
        gam = tuple(S[C.m - q] @ C.gamma[q] @ Sinv[q] for q in range(C.m + 1))
    inner = tuple(Sinv[q].conj().T @ C.gram(q) @ Sinv[q] for q in range(C.m + 1))
    return GradedChainComplex(C.dims, nab, gam, inner)
