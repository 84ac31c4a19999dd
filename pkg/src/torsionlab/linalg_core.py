"""Dense complex linear algebra shared by the rest of the package.

Generalized eigenstructure with spectral projectors, operator norms and
branch-aware logarithmic determinants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

__all__ = [
    "SpectralDatum",
    "LinalgError",
    "as_complex_matrix",
    "generalized_eigenspaces",
    "invariant_projector",
    "contour_projector",
    "branch_arg",
    "log_det_agmon",
    "operator_norm",
    "power_iteration_norm",
    "numerical_rank",
    "null_space",
    "range_basis",
    "eigenvalues_of",
]


class LinalgError(ValueError):
    """Raised for invalid input or numerically ill-posed requests."""


@dataclass(frozen=True)
class SpectralDatum:
    """One generalized eigenvalue of a square matrix.

    Attributes
    ----------
    value : complex
        Eigenvalue (cluster mean when several computed eigenvalues merge).
    alg_mult : int
        Algebraic multiplicity.
    jordan_blocks : tuple of int
        Jordan block sizes in decreasing order, summing to ``alg_mult``.
    projector : ndarray or None
        Idempotent onto the generalized eigenspace along the others.
    """

    value: complex
    alg_mult: int
    jordan_blocks: tuple = field(default=())
    projector: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.alg_mult <= 0:
            raise LinalgError("multiplicity must be positive")
        blocks = self.jordan_blocks or (1,) * self.alg_mult
        if sum(blocks) != self.alg_mult or min(blocks) <= 0:
            raise LinalgError("Jordan blocks must be positive and sum to the multiplicity")
        object.__setattr__(self, "jordan_blocks", tuple(sorted(blocks, reverse=True)))
        object.__setattr__(self, "value", complex(self.value))


def as_complex_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-d complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise LinalgError(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise LinalgError(f"{name} has non-finite entries")
    return A


def _require_square(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise LinalgError(f"square matrix required, got shape {A.shape}")


def numerical_rank(A: np.ndarray, tol: float | None = None) -> int:
    """Rank by singular values above ``tol`` (default relative 1e-10)."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if tol is None:
        tol = 1e-10 * max(1.0, s[0])
    return int(np.sum(s > tol))


def null_space(A: np.ndarray, tol: float | None = None, ncols: int | None = None) -> np.ndarray:
    """Orthonormal basis of the kernel of ``A`` (columns).

    ``ncols`` is the width of ``A``; it is needed only when ``A`` has no rows.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[1] if ncols is None else ncols
    if A.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    if tol is None:
        tol = 1e-10 * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def range_basis(A: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the column space of ``A``."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    if tol is None:
        tol = 1e-10 * max(1.0, s[0])
    return u[:, : int(np.sum(s > tol))]


def invariant_projector(M: np.ndarray, select) -> np.ndarray:
    """Spectral projector onto the eigenvalues picked by ``select``.

    Parameters
    ----------
    M : (n, n) array_like
    select : callable
        Maps a complex eigenvalue to ``True`` when it belongs to the target
        group.

    Returns
    -------
    ndarray
        Oblique projector commuting with ``M``.

    Notes
    -----
    The Schur form is reordered so the selected eigenvalues lead, then the
    remaining off-diagonal block is removed with a Sylvester solve.
    """
    A = as_complex_matrix(M)
    _require_square(A)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    T, Z, k = sla.schur(A, output="complex", sort=lambda z: bool(select(z)))
    return _projector_from_schur(T, Z, k)


def _projector_from_schur(T: np.ndarray, Z: np.ndarray, k: int) -> np.ndarray:
    n = T.shape[0]
    if k == 0:
        return np.zeros((n, n), dtype=complex)
    if k == n:
        return np.eye(n, dtype=complex)
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    Y = sla.solve_sylvester(T11, -T22, -T12)
    core = np.zeros((n, n), dtype=complex)
    core[:k, :k] = np.eye(k)
    core[:k, k:] = -Y
    return Z @ core @ Z.conj().T


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters with relative radius ``tol * max(1, |z|)``."""
    order = sorted(range(len(values)), key=lambda i: (round(values[i].real, 12), round(values[i].imag, 12)))
    parent = list(range(len(values)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            i, j = order[a], order[b]
            scale = tol * max(1.0, abs(values[i]), abs(values[j]))
            if abs(values[i] - values[j]) <= scale:
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in order:
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: (np.mean(values[g]).real, np.mean(values[g]).imag))


def _jordan_sizes(N: np.ndarray, tol: float) -> tuple:
    """Jordan block sizes of a (numerically) nilpotent matrix from rank drops."""
    k = N.shape[0]
    ranks = [k]
    P = np.eye(k, dtype=complex)
    while ranks[-1] > 0 and len(ranks) <= k:
        P = P @ N
        ranks.append(numerical_rank(P, tol))
        if ranks[-1] == ranks[-2]:
            break
    # blocks of size >= j number ranks[j-1] - ranks[j]
    at_least = [ranks[j - 1] - ranks[j] for j in range(1, len(ranks))]
    sizes = []
    for j, count in enumerate(at_least, start=1):
        nxt = at_least[j] if j < len(at_least) else 0
        sizes.extend([j] * (count - nxt))
    if sum(sizes) != k:
        # rank sequence stalled above zero: treat the remainder as one block each
        sizes.extend([1] * (k - sum(sizes)))
    return tuple(sorted(sizes, reverse=True))


def generalized_eigenspaces(M, tol: float = 1e-6) -> list[SpectralDatum]:
    """Generalized eigenvalues, multiplicities, Jordan sizes and projectors.

    Parameters
    ----------
    M : (n, n) array_like
        Square complex matrix.
    tol : float, optional
        Eigenvalues closer than ``tol * max(1, |z|)`` are merged into a single
        datum. Jordan structure is decided with the same relative tolerance.

    Returns
    -------
    list of SpectralDatum
        Sorted by real part, then imaginary part, of the cluster means.

    Raises
    ------
    LinalgError
        For non-square input or when the Schur reordering fails.
    """
    A = as_complex_matrix(M)
    _require_square(A)
    n = A.shape[0]
    if n == 0:
        return []
    if tol <= 0:
        raise LinalgError("tol must be positive")
    try:
        T, _ = sla.schur(A, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover - LAPACK failure
        raise LinalgError(f"Schur decomposition failed: {exc}") from exc
    eigs = np.diag(T).copy()
    scale = max(1.0, operator_norm(A))
    out = []
    for group in _cluster(eigs, tol):
        members = eigs[group]
        center = complex(np.mean(members))

        def select(z, members=members):
            return bool(np.min(np.abs(members - z)) <= 1e-10 * scale)

        try:
            Tg, Zg, k = sla.schur(A, output="complex", sort=select)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise LinalgError(f"Schur reordering failed: {exc}") from exc
        if k != len(group):
            raise LinalgError("ill-conditioned spectrum: cluster could not be isolated")
        proj = _projector_from_schur(Tg, Zg, k)
        N = Tg[:k, :k] - center * np.eye(k)
        blocks = _jordan_sizes(N, tol * scale)
        out.append(SpectralDatum(center, k, blocks, proj))
    return out


def eigenvalues_of(spectrum) -> np.ndarray:
    """Flatten a spectrum given as data or raw values into an array with multiplicity."""
    vals = []
    for item in spectrum:
        if isinstance(item, SpectralDatum):
            vals.extend([item.value] * item.alg_mult)
        else:
            vals.append(complex(item))
    return np.asarray(vals, dtype=complex)


def contour_projector(M, center: complex, radius: float, nodes: int = 256) -> np.ndarray:
    """Riesz projector for the disc ``|z - center| < radius`` by trapezoid quadrature.

    Used as an independent check of :func:`invariant_projector`; converges
    geometrically when the circle stays away from the spectrum.
    """
    A = as_complex_matrix(M)
    _require_square(A)
    n = A.shape[0]
    P = np.zeros((n, n), dtype=complex)
    I = np.eye(n)
    for k in range(nodes):
        w = radius * np.exp(2j * np.pi * k / nodes)
        P += w * np.linalg.solve((center + w) * I - A, I)
    return P / nodes


def branch_arg(z: complex, theta: float, guard: float = 1e-12) -> float:
    """Argument of ``z`` taken in the open interval ``(theta, theta + 2 pi)``.

    Raises
    ------
    LinalgError
        If ``z`` lies (within ``guard`` radians) on the cut ray at angle ``theta``.
    """
    offset = (np.angle(z) - theta) % (2 * np.pi)
    if offset < guard or offset > 2 * np.pi - guard:
        raise LinalgError(f"eigenvalue {z} lies on the cut ray at angle {theta}")
    return theta + offset


def log_det_agmon(spectrum: Iterable, theta: float, zero_tol: float = 1e-13) -> complex:
    """Logarithm of the determinant with the branch cut along angle ``theta``.

    Parameters
    ----------
    spectrum : iterable of SpectralDatum or complex
        Eigenvalues; data entries contribute ``alg_mult`` copies.
    theta : float
        Cut direction in radians.
    zero_tol : float, optional
        Absolute threshold below which an eigenvalue counts as zero.

    Returns
    -------
    complex
        ``sum(log|z| + 1j * arg(z))`` with ``arg`` in ``(theta, theta + 2 pi)``.
        The empty spectrum gives 0.

    Examples
    --------
    >>> log_det_agmon([-1.0], -np.pi / 4)
    3.141592653589793j
    """
    total = 0j
    for z in eigenvalues_of(spectrum):
        if abs(z) <= zero_tol:
            raise LinalgError("zero eigenvalue: determinant of a non-invertible operator")
        total += np.log(abs(z)) + 1j * branch_arg(z, theta)
    return complex(total)


def operator_norm(M) -> float:
    """Largest singular value (0 for empty matrices)."""
    A = np.asarray(M, dtype=complex)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def power_iteration_norm(M, iters: int = 2000, seed: int = 0, rtol: float = 1e-15) -> float:
    """Largest singular value by power iteration on ``M^H M`` (reference oracle)."""
    A = as_complex_matrix(M)
    if A.size == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    H = A.conj().T @ A
    for _ in range(iters):
        y = H @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        if abs(ny - est) <= rtol * ny:
            est = ny
            break
        est = ny
    return float(np.sqrt(est))


def spectrum_multiset_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Bottleneck-style distance between two finite multisets of equal size.

    Returns ``inf`` when sizes differ. Uses an optimal assignment.
    """
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


__all__.append("spectrum_multiset_distance")
