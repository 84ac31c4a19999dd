"""Principal symbols on ``Lambda(R^k) (x) C^n`` and the Seeley-type well-posedness test.

The exterior algebra basis is indexed by increasing subsets of
``{0, ..., k-1}``, ordered first by size and then lexicographically. The
doubled fiber (tangential and normal slot) is ``Lambda (x) C^n`` twice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .linalg_core import null_space, numerical_rank, range_basis

__all__ = [
    "SymbolSpace",
    "as_covector",
    "exterior_basis",
    "exterior_multiplication",
    "interior_multiplication",
    "wedge_symbol",
    "contract_symbol",
    "tangential_symbol",
    "cauchy_symbol_space",
    "boundary_projection_symbol",
    "WellposednessReport",
    "wellposedness_check",
    "wellposedness_sweep",
]


@dataclass(frozen=True)
class SymbolSpace:
    """Fiber ``Lambda(R^base_dim) (x) C^bundle_rank``, doubled.

    Examples
    --------
    >>> SymbolSpace(2, 1).fiber_dim
    8
    """

    base_dim: int
    bundle_rank: int = 1

    def __post_init__(self):
        if self.base_dim < 1 or self.bundle_rank < 1:
            raise ValueError("base_dim and bundle_rank must be positive")

    @property
    def form_dim(self) -> int:
        return (2 ** self.base_dim) * self.bundle_rank

    @property
    def fiber_dim(self) -> int:
        return 2 * self.form_dim


@lru_cache(maxsize=None)
def exterior_basis(k: int) -> tuple:
    """Increasing index subsets of ``range(k)``, by size then lexicographic."""
    return tuple(s for p in range(k + 1) for s in combinations(range(k), p))


def as_covector(xi, space: SymbolSpace | None = None) -> np.ndarray:
    v = np.asarray(xi, dtype=float).ravel()
    if space is not None and v.size != space.base_dim:
        raise ValueError(f"covector needs {space.base_dim} components, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("covector has non-finite components")
    return v


@lru_cache(maxsize=None)
def _basic_wedge(k: int, j: int) -> np.ndarray:
    """Matrix of ``e_j ^`` on ``Lambda(R^k)``."""
    basis = exterior_basis(k)
    index = {s: i for i, s in enumerate(basis)}
    M = np.zeros((len(basis), len(basis)))
    for col, s in enumerate(basis):
        if j in s:
            continue
        target = tuple(sorted(s + (j,)))
        sign = (-1) ** sum(1 for x in s if x < j)
        M[index[target], col] = sign
    M.setflags(write=False)
    return M


def exterior_multiplication(xi, n: int = 1) -> np.ndarray:
    """``omega -> xi ^ omega`` on ``Lambda(R^k) (x) C^n`` (no factor ``i``)."""
    xi = as_covector(xi)
    k = xi.size
    M = sum(xi[j] * _basic_wedge(k, j) for j in range(k))
    return np.kron(M, np.eye(n)).astype(complex)


def interior_multiplication(xi, n: int = 1) -> np.ndarray:
    """``omega -> xi _| omega``; the adjoint of exterior multiplication."""
    return exterior_multiplication(xi, n).conj().T


def wedge_symbol(xi, n: int = 1) -> np.ndarray:
    """Symbol ``omega -> i xi ^ omega``.

    Examples
    --------
    >>> W = wedge_symbol([1.0, 0.0])
    >>> complex(W[1, 0])   # the 0-form 1 goes to i e_1
    1j
    """
    return 1j * exterior_multiplication(xi, n)


def contract_symbol(xi, n: int = 1) -> np.ndarray:
    """Symbol ``omega -> -i xi _| omega``."""
    return -1j * interior_multiplication(xi, n)


def _nonzero(xi) -> np.ndarray:
    xi = as_covector(xi)
    if np.linalg.norm(xi) == 0.0:
        raise ValueError("zero covector")
    return xi


def tangential_symbol(xi, n: int = 1) -> np.ndarray:
    """Block matrix ``[[0, S], [S, 0]]`` with ``S = -i (xi ^ - xi _|)``.

    ``S`` is Hermitian with ``S^2 = |xi|^2``, so the symbol has eigenvalues
    ``+-|xi|`` with equal multiplicities.

    Raises
    ------
    ValueError
        For the zero covector.
    """
    xi = _nonzero(xi)
    S = -1j * (exterior_multiplication(xi, n) - interior_multiplication(xi, n))
    Z = np.zeros_like(S)
    return np.block([[Z, S], [S, Z]])


def _kernel_of_contraction(xi, n: int) -> np.ndarray:
    return null_space(interior_multiplication(xi, n))


def cauchy_symbol_space(xi, n: int = 1) -> np.ndarray:
    """Columns spanning the ``+|xi|`` eigenspace of :func:`tangential_symbol`.

    For each ``omega`` in an orthonormal basis of ``ker(xi _|)`` the columns
    ``(|xi| w - i xi^w, |xi| w - i xi^w)`` and
    ``(|xi| w + i xi^w, -|xi| w - i xi^w)`` are produced.
    """
    xi = _nonzero(xi)
    norm = float(np.linalg.norm(xi))
    E = exterior_multiplication(xi, n)
    K = _kernel_of_contraction(xi, n)
    cols = []
    for j in range(K.shape[1]):
        w = K[:, j]
        a = norm * w - 1j * (E @ w)
        b = norm * w + 1j * (E @ w)
        cols.append(np.concatenate([a, a]))
        cols.append(np.concatenate([b, -b]))
    return np.column_stack(cols)


def _orth_projector(V: np.ndarray) -> np.ndarray:
    Q = range_basis(V)
    return Q @ Q.conj().T


def boundary_projection_symbol(xi, which: str, n: int = 1) -> np.ndarray:
    """Principal symbol of the boundary projection on the doubled fiber.

    ``which="minus"`` projects orthogonally onto ``{xi ^ w : xi _| w = 0}``
    and ``which="plus"`` onto ``{w : xi _| w = 0}``, in both slots.
    """
    xi = _nonzero(xi)
    K = _kernel_of_contraction(xi, n)
    if which == "minus":
        p = _orth_projector(exterior_multiplication(xi, n) @ K)
    elif which == "plus":
        p = _orth_projector(K)
    else:
        raise ValueError("which must be 'minus' or 'plus'")
    Z = np.zeros_like(p)
    return np.block([[p, Z], [Z, p]])


@dataclass(frozen=True)
class WellposednessReport:
    """Result of the symbol test for one covector."""

    which: str
    well_posed: bool
    rank_on_cauchy: int
    rank_projection: int
    cauchy_dim: int


def wellposedness_check(xi, which: str = "minus", n: int = 1, tol: float = 1e-10) -> WellposednessReport:
    """Does the projection symbol map the Cauchy-data symbol space onto its range injectively?

    Both conditions reduce to ranks: ``rank(P N) = dim N`` (injective) and
    ``rank(P N) = rank(P)`` (onto the range of ``P``).

    Examples
    --------
    >>> rep = wellposedness_check([1.0, 0.0], "minus")
    >>> rep.well_posed, rep.rank_on_cauchy
    (True, 4)
    """
    P = boundary_projection_symbol(xi, which, n)
    N = cauchy_symbol_space(xi, n)
    rank_pn = numerical_rank(P @ N, tol)
    rank_p = numerical_rank(P, tol)
    dim_n = numerical_rank(N, tol)
    ok = rank_pn == dim_n == rank_p
    return WellposednessReport(which, bool(ok), int(rank_pn), int(rank_p), int(dim_n))


def wellposedness_sweep(
    rng: np.random.Generator,
    count: int,
    shapes=((2, 1), (2, 2), (4, 1)),
    which=("minus", "plus"),
) -> list[dict]:
    """Random unit covectors over the given ``(base_dim, n)`` shapes."""
    rows = []
    for k, n in shapes:
        for _ in range(count):
            xi = rng.standard_normal(k)
            xi /= np.linalg.norm(xi)
            for w in which:
                rep = wellposedness_check(xi, w, n)
                rows.append({"base_dim": k, "n": n, "which": w, "xi": xi.tolist(), "well_posed": rep.well_posed,
                             "rank_on_cauchy": rep.rank_on_cauchy, "rank_projection": rep.rank_projection})
    return rows
