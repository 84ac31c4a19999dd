"""Cochains of a finite simplicial complex with coefficients in a flat bundle.

Simplices are increasing vertex tuples. A cochain assigns a vector in
``C^n`` to each simplex, read in the fiber over the simplex's first vertex.
Edge holonomies ``hol[(u, v)]`` (``u < v``) transport the fiber over ``v``
to the one over ``u``; edges without an entry carry the identity, so a
spanning-tree gauge is just a sparse holonomy table. The coboundary is

``(delta f)(s) = hol(s_0, s_1) f(d_0 s) + sum_{i >= 1} (-1)^i f(d_i s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .graded_complex import ComplexError, GradedChainComplex
from .linalg_core import null_space, numerical_rank, operator_norm, range_basis

__all__ = [
    "TwistedComplexError",
    "TwistedComplexSpec",
    "build_twisted_complex",
    "restrict_complex",
    "relative_complex",
    "CohomologyReport",
    "cohomology_report",
    "middle_dim_check",
    "twisted_cohomology_dims",
    "exact_rank",
    "circle_spec",
    "torus_spec",
    "solid_torus_spec",
    "closure",
]


class TwistedComplexError(ComplexError):
    """Inconsistent cells, non-flat holonomy or a bad subcomplex."""


def _simplex(s) -> tuple:
    t = tuple(int(v) for v in s)
    if list(t) != sorted(set(t)):
        raise TwistedComplexError(f"simplex {s} must list distinct vertices in increasing order")
    return t


def closure(top_simplices: Sequence[Sequence[int]]) -> list[list[tuple]]:
    """All faces of the given simplices, grouped by dimension and sorted."""
    faces: dict[int, set] = {}
    for s in top_simplices:
        s = tuple(sorted(int(v) for v in s))
        for k in range(1, len(s) + 1):
            faces.setdefault(k - 1, set()).update(combinations(s, k))
    top = max(faces) if faces else -1
    return [sorted(faces.get(q, ())) for q in range(top + 1)]


def _as_matrix(value, n: int) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        arr = arr * np.eye(n, dtype=complex)
    if arr.shape != (n, n):
        raise TwistedComplexError(f"holonomy must be {n}x{n}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class TwistedComplexSpec:
    """Simplicial complex, flat bundle of rank ``rank`` and optional subcomplex.

    Parameters
    ----------
    cells : sequence of sequences of vertex tuples
        ``cells[q]`` lists the ``q``-simplices. Faces must be present.
    rank : int
        Fiber dimension ``n``.
    holonomy : mapping ``(u, v) -> (n, n)`` matrix
        Non-identity edge holonomies; scalars are promoted to ``c I``.
    subcomplex : sequence of vertex tuples, optional
        Simplices of ``L``; must be closed under faces.
    """

    cells: tuple
    rank: int = 1
    holonomy: Mapping = field(default_factory=dict)
    subcomplex: tuple = ()

    def __post_init__(self):
        cells = tuple(tuple(_simplex(s) for s in level) for level in self.cells)
        for q, level in enumerate(cells):
            if any(len(s) != q + 1 for s in level):
                raise TwistedComplexError(f"cells[{q}] must contain {q}-simplices")
            if len(set(level)) != len(level):
                raise TwistedComplexError(f"cells[{q}] has repeated simplices")
        object.__setattr__(self, "cells", cells)
        n = int(self.rank)
        if n < 1:
            raise TwistedComplexError("rank must be positive")
        object.__setattr__(self, "rank", n)
        edges = set(cells[1]) if len(cells) > 1 else set()
        hol = {}
        for e, M in dict(self.holonomy).items():
            e = _simplex(e)
            if e not in edges:
                raise TwistedComplexError(f"holonomy given on {e}, which is not an edge")
            hol[e] = _as_matrix(M, n)
            if abs(np.linalg.det(hol[e])) < 1e-12:
                raise TwistedComplexError(f"holonomy on {e} is not invertible")
        object.__setattr__(self, "holonomy", hol)
        sub = tuple(sorted({_simplex(s) for s in self.subcomplex}, key=lambda s: (len(s), s)))
        object.__setattr__(self, "subcomplex", sub)
        index = self.index()
        for q in range(1, len(cells)):
            for s in cells[q]:
                for f in combinations(s, q):
                    if f not in index[q - 1]:
                        raise TwistedComplexError(f"face {f} of {s} is missing")
        subset = set(sub)
        for s in sub:
            if len(s) - 1 >= len(cells) or s not in index[len(s) - 1]:
                raise TwistedComplexError(f"subcomplex cell {s} is not a cell of the complex")
            for k in range(1, len(s)):
                for f in combinations(s, k):
                    if f not in subset:
                        raise TwistedComplexError(f"subcomplex is not closed: face {f} of {s} missing")

    @property
    def dim(self) -> int:
        return len(self.cells) - 1

    def index(self) -> list[dict]:
        return [{s: i for i, s in enumerate(level)} for level in self.cells]

    def hol(self, u: int, v: int) -> np.ndarray:
        return self.holonomy.get((u, v), np.eye(self.rank, dtype=complex))

    def euler_characteristic(self) -> int:
        return sum((-1) ** q * len(level) for q, level in enumerate(self.cells))

    def incidence(self, q: int) -> dict:
        """Untwisted incidence numbers ``[q+1-cell : q-cell]`` as a dict."""
        idx = self.index()
        out = {}
        for s in self.cells[q + 1]:
            for i in range(q + 2):
                out[(s, s[:i] + s[i + 1:])] = (-1) ** i
        return out

    def flatness_defect(self) -> float:
        """Largest ``||hol(a,b) hol(b,c) - hol(a,c)||`` over 2-simplices."""
        if self.dim < 2:
            return 0.0
        return max((operator_norm(self.hol(a, b) @ self.hol(b, c) - self.hol(a, c)) for a, b, c in self.cells[2]), default=0.0)

    def with_holonomy(self, holonomy: Mapping) -> "TwistedComplexSpec":
        return TwistedComplexSpec(self.cells, self.rank, holonomy, self.subcomplex)

    def subcomplex_spec(self) -> "TwistedComplexSpec":
        """``L`` as a complex in its own right, with the restricted holonomy."""
        top = max((len(s) for s in self.subcomplex), default=0)
        cells = [[s for s in self.subcomplex if len(s) == q + 1] for q in range(top)]
        edges = set(cells[1]) if len(cells) > 1 else set()
        hol = {e: M for e, M in self.holonomy.items() if e in edges}
        return TwistedComplexSpec(tuple(map(tuple, cells)), self.rank, hol, ())

    def to_dict(self) -> dict:
        return {
            "kind": "twisted_complex",
            "rank": self.rank,
            "cells": [[list(s) for s in level] for level in self.cells],
            "holonomy": [
                {"edge": list(e), "matrix": [[[z.real, z.imag] for z in row] for row in M]}
                for e, M in sorted(self.holonomy.items())
            ],
            "subcomplex": [list(s) for s in self.subcomplex],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TwistedComplexSpec":
        n = int(d.get("rank", 1))
        hol = {}
        for item in d.get("holonomy", []):
            M = np.array([[complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in row] for row in item["matrix"]])
            hol[tuple(item["edge"])] = M
        return cls(tuple(tuple(tuple(s) for s in level) for level in d["cells"]), n, hol, tuple(tuple(s) for s in d.get("subcomplex", [])))


def _coboundary_blocks(spec: TwistedComplexSpec, q: int, rows: Sequence[tuple], cols: Sequence[tuple]) -> np.ndarray:
    n = spec.rank
    col_index = {s: i for i, s in enumerate(cols)}
    D = np.zeros((n * len(rows), n * len(cols)), dtype=complex)
    for a, s in enumerate(rows):
        for i in range(q + 2):
            f = s[:i] + s[i + 1:]
            b = col_index.get(f)
            if b is None:
                continue
            block = spec.hol(s[0], s[1]) if i == 0 else np.eye(n)
            D[a * n:(a + 1) * n, b * n:(b + 1) * n] += (-1) ** i * block
    return D


def _build(spec: TwistedComplexSpec, cells: Sequence[Sequence[tuple]], tol: float) -> GradedChainComplex:
    defect = spec.flatness_defect()
    if defect > tol:
        raise TwistedComplexError(f"holonomy is not flat (defect {defect:.3g})")
    n = spec.rank
    dims = [n * len(level) for level in cells]
    nabla = [_coboundary_blocks(spec, q, cells[q + 1], cells[q]) for q in range(len(cells) - 1)]
    C = GradedChainComplex(tuple(dims), tuple(nabla))
    scale = max(1.0, max((operator_norm(D) for D in nabla), default=0.0))
    for q in range(len(nabla) - 1):
        res = operator_norm(nabla[q + 1] @ nabla[q])
        if res > tol * scale:
            raise TwistedComplexError(f"coboundary does not square to zero in degree {q} ({res:.3g})")
    return C


def build_twisted_complex(spec: TwistedComplexSpec, tol: float = 1e-10) -> GradedChainComplex:
    """Twisted cochain complex ``C^q(K, rho)``.

    Raises
    ------
    TwistedComplexError
        For non-flat holonomy or when ``delta delta != 0``.

    Examples
    --------
    >>> from torsionlab.graded_complex import cohomology_dims
    >>> cohomology_dims(build_twisted_complex(circle_spec()))
    [1, 1]
    >>> cohomology_dims(build_twisted_complex(circle_spec(2.0)))
    [0, 0]
    """
    return _build(spec, spec.cells, tol)


def relative_complex(spec: TwistedComplexSpec, tol: float = 1e-10) -> GradedChainComplex:
    """``C^q(K, L, rho)``: cochains vanishing on the subcomplex."""
    sub = set(spec.subcomplex)
    cells = [[s for s in level if s not in sub] for level in spec.cells]
    return _build(spec, cells, tol)


def restrict_complex(spec: TwistedComplexSpec, tol: float = 1e-10) -> GradedChainComplex:
    """``C^q(L, rho|_L)`` over the cells of ``K``'s dimension range."""
    sub = set(spec.subcomplex)
    cells = [[s for s in level if s in sub] for level in spec.cells]
    return _build(spec, cells, tol)


def exact_rank(M) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination.

    Raises
    ------
    ValueError
        If an entry is not a (finite) real rational.
    """
    A = np.asarray(M)
    if A.size == 0:
        return 0
    if np.iscomplexobj(A):
        if np.any(A.imag != 0):
            raise ValueError("exact mode needs real rational entries")
        A = A.real
    rows = [[Fraction(float(x)) if not isinstance(x, Fraction) else x for x in row] for row in A.tolist()]
    rank = 0
    ncols = len(rows[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][c]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c] / p
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _ranks(C: GradedChainComplex, tol: float, exact: bool) -> list[int]:
    scale = max(1.0, max((operator_norm(D) for D in C.nabla), default=0.0))
    return [exact_rank(D) if exact else numerical_rank(D, tol * scale) for D in C.nabla]


def twisted_cohomology_dims(C: GradedChainComplex, tol: float = 1e-10, exact: bool = False) -> list[int]:
    """``dim H^q`` with tolerance ``tol * ||delta||`` or exactly over the rationals."""
    ranks = _ranks(C, tol, exact)
    return [n - (ranks[q] if q < C.m else 0) - (ranks[q - 1] if q > 0 else 0) for q, n in enumerate(C.dims)]


@dataclass(frozen=True)
class CohomologyReport:
    """Cohomology of ``M``, of ``(M, Y)`` and of ``Y`` with the maps of the pair.

    ``rank_restriction[q]`` is the rank of ``H^q(M) -> H^q(Y)``,
    ``rank_extension[q]`` that of ``H^q(M, Y) -> H^q(M)``; the connecting
    ranks follow from exactness at ``H^q(Y)``.
    """

    absolute: tuple
    relative: tuple
    boundary: tuple
    rank_restriction: tuple
    rank_extension: tuple
    middle_degree: int
    euler_ok: bool
    les_ok: bool
    les_defects: tuple

    @property
    def rank_jstar(self) -> int:
        q = self.middle_degree
        return self.rank_restriction[q] if 0 <= q < len(self.rank_restriction) else 0

    def as_dict(self) -> dict:
        return {
            "absolute": list(self.absolute),
            "relative": list(self.relative),
            "boundary": list(self.boundary),
            "rank_restriction": list(self.rank_restriction),
            "rank_extension": list(self.rank_extension),
            "middle_degree": self.middle_degree,
            "rank_jstar": self.rank_jstar,
            "euler_ok": self.euler_ok,
            "les_ok": self.les_ok,
            "les_defects": list(self.les_defects),
        }


def _map_rank(source_cocycles: np.ndarray, target_coboundaries: np.ndarray, tol: float) -> int:
    """Rank of the induced map on cohomology: ``rank[S | B] - rank B``."""
    if source_cocycles.shape[1] == 0:
        return 0
    both = np.hstack([source_cocycles, target_coboundaries])
    return numerical_rank(both, tol) - numerical_rank(target_coboundaries, tol)


def _cocycles(C: GradedChainComplex, q: int, tol: float) -> np.ndarray:
    n = C.dims[q]
    if q == C.m:
        return np.eye(n, dtype=complex)
    return null_space(C.nabla[q], tol, ncols=n)


def _coboundaries(C: GradedChainComplex, q: int, tol: float) -> np.ndarray:
    if q == 0:
        return np.zeros((C.dims[0], 0), dtype=complex)
    return range_basis(C.nabla[q - 1], tol)


def _selector(spec: TwistedComplexSpec, q: int, chosen: set, inside: bool) -> np.ndarray:
    """Columns embedding the chosen ``q``-cells into all ``q``-cochains."""
    n = spec.rank
    level = spec.cells[q]
    picks = [i for i, s in enumerate(level) if (s in chosen) == inside]
    S = np.zeros((n * len(level), n * len(picks)), dtype=complex)
    for j, i in enumerate(picks):
        S[i * n:(i + 1) * n, j * n:(j + 1) * n] = np.eye(n)
    return S


def cohomology_report(
    spec_m: TwistedComplexSpec,
    spec_y: TwistedComplexSpec | None = None,
    holonomy: Mapping | None = None,
    tol: float = 1e-10,
) -> CohomologyReport:
    """Absolute, relative and boundary cohomology and the maps between them.

    Parameters
    ----------
    spec_m : TwistedComplexSpec
        The manifold; ``spec_m.subcomplex`` is the boundary unless ``spec_y``
        is given.
    spec_y : TwistedComplexSpec, optional
        The boundary as its own complex; its cells must be cells of ``spec_m``.
        Its holonomy is ignored: the boundary always carries ``rho|_Y``.
    holonomy : mapping, optional
        Replaces the holonomy of ``spec_m``.

    Raises
    ------
    TwistedComplexError
        If the boundary is not a subcomplex.
    """
    if spec_y is not None:
        cells = [s for level in spec_y.cells for s in level]
        spec_m = TwistedComplexSpec(spec_m.cells, spec_m.rank, spec_m.holonomy, tuple(cells))
    if holonomy is not None:
        spec_m = spec_m.with_holonomy(holonomy)
    m = spec_m.dim
    CM = build_twisted_complex(spec_m, tol)
    CR = relative_complex(spec_m, tol)
    CY = restrict_complex(spec_m, tol)
    scale = max(1.0, max((operator_norm(D) for D in CM.nabla), default=0.0))
    t = tol * scale
    hM = tuple(twisted_cohomology_dims(CM, tol))
    hR = tuple(twisted_cohomology_dims(CR, tol))
    hY = tuple(twisted_cohomology_dims(CY, tol))
    sub = set(spec_m.subcomplex)
    r_j, r_i = [], []
    for q in range(m + 1):
        restrict = _selector(spec_m, q, sub, True).conj().T
        r_j.append(_map_rank(restrict @ _cocycles(CM, q, t), _coboundaries(CY, q, t), t) if CY.dims[q] else 0)
        extend = _selector(spec_m, q, sub, False)
        r_i.append(_map_rank(extend @ _cocycles(CR, q, t), _coboundaries(CM, q, t), t) if CR.dims[q] else 0)
    defects = []
    for q in range(m + 1):
        conn = hY[q] - r_j[q]
        defects.append(r_i[q] + r_j[q] - hM[q])
        if q + 1 <= m:
            defects.append(conn + r_i[q + 1] - hR[q + 1])
        else:
            defects.append(conn)
    defects.insert(0, hR[0] - r_i[0])
    chi = spec_m.rank * spec_m.euler_characteristic()
    euler_ok = sum((-1) ** q * h for q, h in enumerate(hM)) == chi
    alternating = sum((-1) ** q * (hR[q] - hM[q] + hY[q]) for q in range(m + 1))
    les_ok = alternating == 0 and all(d == 0 for d in defects)
    r = (m + 1) // 2
    return CohomologyReport(hM, hR, hY, tuple(r_j), tuple(r_i), r - 1, bool(euler_ok), bool(les_ok), tuple(defects))


def middle_dim_check(report: CohomologyReport, r: int | None = None) -> bool:
    """``dim H^{r-1}(Y) == 2 rank(H^{r-1}(M) -> H^{r-1}(Y))``.

    Examples
    --------
    >>> middle_dim_check(cohomology_report(solid_torus_spec()), 2)
    True
    """
    q = report.middle_degree if r is None else r - 1
    dim_y = report.boundary[q] if 0 <= q < len(report.boundary) else 0
    rank = report.rank_restriction[q] if 0 <= q < len(report.rank_restriction) else 0
    return dim_y == 2 * rank


# ----- fixtures --------------------------------------------------------------

def _generator_power(gens: Sequence[np.ndarray], w: Sequence[int]) -> np.ndarray:
    out = np.eye(gens[0].shape[0], dtype=complex)
    for g, k in zip(gens, w):
        if k:
            out = out @ np.linalg.matrix_power(g, k) if k > 0 else out @ np.linalg.matrix_power(np.linalg.inv(g), -k)
    return out


def _periodic_holonomy(edges, coords, period: int, gens) -> dict:
    """Holonomy of a representation of ``Z^k`` on a periodic grid.

    Each edge is lifted to the short step in the cover; the number of
    times that step wraps around each period gives the generator power.
    """
    hol = {}
    for u, v in edges:
        cu, cv = np.asarray(coords[u]), np.asarray(coords[v])
        d = (cv - cu + 1) % period - 1
        w = (cu + d - cv) // period
        if np.any(w):
            hol[(u, v)] = _generator_power(gens, [int(x) for x in w])
    return hol


def _gens(values, n: int | None) -> tuple[list[np.ndarray], int]:
    mats = [np.atleast_2d(np.asarray(v, dtype=complex)) for v in values]
    n = mats[0].shape[0] if n is None else n
    mats = [M * np.eye(n) if M.shape == (1, 1) and n > 1 else M for M in mats]
    for a in mats:
        for b in mats:
            if operator_norm(a @ b - b @ a) > 1e-10 * max(1.0, operator_norm(a) * operator_norm(b)):
                raise TwistedComplexError("generators of an abelian fundamental group must commute")
    return mats, n


def circle_spec(generator=1.0, rank: int | None = None) -> TwistedComplexSpec:
    """Circle with 3 vertices and 3 edges; the loop has holonomy ``generator``."""
    gens, n = _gens([generator], rank)
    cells = closure([(0, 1), (1, 2), (0, 2)])
    coords = {v: (v,) for v in range(3)}
    return TwistedComplexSpec(tuple(map(tuple, cells)), n, _periodic_holonomy(cells[1], coords, 3, gens))


def torus_spec(a=1.0, b=1.0, rank: int | None = None) -> TwistedComplexSpec:
    """3x3 grid triangulation of the torus (9 vertices, 18 triangles)."""
    gens, n = _gens([a, b], rank)
    vid = lambda i, j: 3 * (i % 3) + (j % 3)
    tris = []
    for i in range(3):
        for j in range(3):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)))
    cells = closure(tris)
    coords = {3 * i + j: (i, j) for i in range(3) for j in range(3)}
    return TwistedComplexSpec(tuple(map(tuple, cells)), n, _periodic_holonomy(cells[1], coords, 3, gens))


def solid_torus_spec(core=1.0, rank: int | None = None) -> TwistedComplexSpec:
    """Triangle times a 3-vertex circle, each prism split into 3 tetrahedra.

    Vertex ``(a, k)`` has id ``3 k + a``. The subcomplex is the boundary
    torus: simplices whose triangle coordinates miss some corner.
    """
    gens, n = _gens([core], rank)
    vid = lambda a, k: 3 * (k % 3) + a
    tets = []
    for k in range(3):
        p = [[vid(a, k + s) for a in range(3)] for s in (0, 1)]
        tets.append((p[0][0], p[0][1], p[0][2], p[1][2]))
        tets.append((p[0][0], p[0][1], p[1][1], p[1][2]))
        tets.append((p[0][0], p[1][0], p[1][1], p[1][2]))
    cells = closure(tets)
    coords = {vid(a, k): (k,) for a in range(3) for k in range(3)}
    boundary = [s for level in cells for s in level if len({v % 3 for v in s}) < 3]
    return TwistedComplexSpec(tuple(map(tuple, cells)), n, _periodic_holonomy(cells[1], coords, 3, gens), tuple(boundary))
