"""Finite models of the boundary form space and its projections.

A :class:`BoundaryModel` is a graded space ``Omega^0 .. Omega^n`` (``n = m - 1``)
with a differential ``nabla``, an involution ``Gamma`` sending degree
``p`` to ``n - p`` and an inner product. The doubled space carries the
tangential and normal boundary values of forms on the collar; operators on
it are written slot-major, ``kron(S, A)`` with ``S`` acting on the two
slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graded_complex import ComplexError
from .linalg_core import (
    as_complex_matrix,
    generalized_eigenspaces,
    null_space,
    numerical_rank,
    operator_norm,
    range_basis,
)

__all__ = [
    "BoundaryModelError",
    "BoundaryModel",
    "ProjectionTriple",
    "AssumptionReport",
    "LagrangianData",
    "check_assumptions",
    "build_projections",
    "lagrangian_split",
    "collar_chirality",
    "duality_check",
    "domain_intertwining_check",
    "decomposition_dims",
    "eigenspace_orthogonality",
    "boundary_spectral_model",
    "random_hermitian_boundary",
    "random_boundary_model",
    "jordan_boundary_model",
    "direct_sum",
    "intersection_dim",
]


class BoundaryModelError(ComplexError):
    """Raised when a boundary model violates its structural assumptions."""


def intersection_dim(U: np.ndarray, V: np.ndarray, tol: float = 1e-9) -> int:
    """``dim(span U cap span V)`` from ranks."""
    if U.shape[1] == 0 or V.shape[1] == 0:
        return 0
    ru = numerical_rank(U, tol)
    rv = numerical_rank(V, tol)
    return ru + rv - numerical_rank(np.hstack([U, V]), tol)


@dataclass(frozen=True)
class BoundaryModel:
    """Graded boundary forms with differential, involution and inner product.

    Parameters
    ----------
    dims : sequence of int
        ``dim Omega^p`` for ``p = 0..n``. Boundaries of odd-dimensional
        manifolds have even ``n``; odd ``n`` is accepted for toy models and
        then has no middle degree.
    nabla : sequence of arrays
        ``nabla[p] : Omega^p -> Omega^{p+1}``.
    gamma : sequence of arrays
        ``gamma[p] : Omega^p -> Omega^{n-p}``, an involution.
    inner : sequence of arrays, optional
        Gram matrices; identity when omitted.
    """

    dims: tuple
    nabla: tuple
    gamma: tuple
    inner: tuple | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or min(dims) < 0:
            raise BoundaryModelError("dims must be non-negative")
        n = len(dims) - 1
        object.__setattr__(self, "dims", dims)
        if len(self.nabla) != n or len(self.gamma) != n + 1:
            raise BoundaryModelError("need n differentials and n + 1 involution blocks")

        def conv(A, shape, name):
            return np.zeros(shape, dtype=complex) if np.size(A) == 0 else as_complex_matrix(A, name)

        nab = tuple(conv(D, (dims[p + 1], dims[p]), f"nabla[{p}]") for p, D in enumerate(self.nabla))
        gam = tuple(conv(G, (dims[n - p], dims[p]), f"gamma[{p}]") for p, G in enumerate(self.gamma))
        for p, D in enumerate(nab):
            if D.shape != (dims[p + 1], dims[p]):
                raise BoundaryModelError(f"nabla[{p}] has shape {D.shape}")
        for p, G in enumerate(gam):
            if G.shape != (dims[n - p], dims[p]):
                raise BoundaryModelError(f"gamma[{p}] has shape {G.shape}")
        object.__setattr__(self, "nabla", nab)
        object.__setattr__(self, "gamma", gam)
        if self.inner is not None:
            object.__setattr__(self, "inner", tuple(conv(G, (d, d), f"inner[{p}]") for p, (G, d) in enumerate(zip(self.inner, dims))))
        self._check()

    def _check(self, tol: float = 1e-9):
        N, Gm = self.nabla_full(), self.gamma_full()
        if operator_norm(N @ N) > tol * max(1.0, operator_norm(N)) ** 2:
            raise BoundaryModelError("nabla does not square to zero")
        if operator_norm(Gm @ Gm - np.eye(self.total_dim)) > tol * max(1.0, operator_norm(Gm)) ** 2:
            raise BoundaryModelError("boundary chirality is not an involution")
        G = self.gram_full()
        if G.size and (operator_norm(G - G.conj().T) > tol or np.min(np.linalg.eigvalsh(0.5 * (G + G.conj().T))) <= 0):
            raise BoundaryModelError("inner product is not Hermitian positive definite")

    # ----- structure -------------------------------------------------------
    @property
    def top(self) -> int:
        return len(self.dims) - 1

    @property
    def m(self) -> int:
        """Dimension of the manifold this is a boundary of."""
        return self.top + 1

    @property
    def r(self) -> int:
        return (self.m + 1) // 2

    @property
    def middle(self) -> int | None:
        """Self-paired degree ``n / 2``; ``None`` for odd ``n``."""
        return None if self.top % 2 else self.top // 2

    @property
    def lower_degrees(self) -> range:
        """Degrees strictly below the middle (all of the lower half for odd ``n``)."""
        return range((self.top + 1) // 2)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def offsets(self) -> list[int]:
        out = [0]
        for d in self.dims:
            out.append(out[-1] + d)
        return out

    def degree_slice(self, p: int) -> slice:
        o = self.offsets()
        return slice(o[p], o[p + 1])

    def degree_of_index(self) -> np.ndarray:
        return np.concatenate([np.full(d, p, dtype=int) for p, d in enumerate(self.dims)]) if self.total_dim else np.zeros(0, int)

    def embed(self, p: int, V: np.ndarray) -> np.ndarray:
        out = np.zeros((self.total_dim, V.shape[1]), dtype=complex)
        out[self.degree_slice(p)] = V
        return out

    def nabla_full(self) -> np.ndarray:
        N = np.zeros((self.total_dim, self.total_dim), dtype=complex)
        for p, D in enumerate(self.nabla):
            N[self.degree_slice(p + 1), self.degree_slice(p)] = D
        return N

    def gamma_full(self) -> np.ndarray:
        G = np.zeros((self.total_dim, self.total_dim), dtype=complex)
        for p, A in enumerate(self.gamma):
            G[self.degree_slice(self.top - p), self.degree_slice(p)] = A
        return G

    def gram_full(self) -> np.ndarray:
        G = np.eye(self.total_dim, dtype=complex)
        if self.inner is not None:
            for p, A in enumerate(self.inner):
                s = self.degree_slice(p)
                G[s, s] = A
        return G

    def beta_full(self) -> np.ndarray:
        """Parity ``(-1)^p`` on degree ``p``."""
        return np.diag((-1.0) ** self.degree_of_index()).astype(complex)

    def adjoint(self, A: np.ndarray) -> np.ndarray:
        """Adjoint with respect to the model inner product."""
        G = self.gram_full()
        return np.linalg.solve(G, A.conj().T @ G)

    def nabla_dual_full(self) -> np.ndarray:
        """Dual differential with ``<nabla x, y> = <x, Gamma nabla' Gamma y>``."""
        Gm = self.gamma_full()
        return Gm @ self.adjoint(self.nabla_full()) @ Gm

    def dual_pair(self, primed: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """``(nabla, Gamma nabla Gamma)`` or the primed versions."""
        N = self.nabla_dual_full() if primed else self.nabla_full()
        Gm = self.gamma_full()
        return N, Gm @ N @ Gm

    def signature(self, primed: bool = False) -> np.ndarray:
        N = self.nabla_dual_full() if primed else self.nabla_full()
        Gm = self.gamma_full()
        return Gm @ N + N @ Gm

    def signature_sq(self, primed: bool = False) -> np.ndarray:
        B = self.signature(primed)
        return B @ B

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        return operator_norm(self.nabla_dual_full() - self.nabla_full()) <= tol * max(1.0, operator_norm(self.nabla_full()))

    def harmonic_basis(self, primed: bool = False) -> list[np.ndarray]:
        """Per degree: basis of ``ker nabla cap ker Gamma nabla Gamma``."""
        N, D = self.dual_pair(primed)
        tol = 1e-10 * max(1.0, operator_norm(N))
        out = []
        for p in range(self.top + 1):
            E = self.embed(p, np.eye(self.dims[p], dtype=complex))
            K = null_space(np.vstack([N @ E, D @ E]), tol, ncols=self.dims[p])
            out.append(K)
        return out

    def image_parts(self, primed: bool = False) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Per degree: bases of ``Im nabla`` and ``Im Gamma nabla Gamma``."""
        N, D = self.dual_pair(primed)
        tol = 1e-10 * max(1.0, operator_norm(N))
        im_n, im_d = [], []
        for p in range(self.top + 1):
            s = self.degree_slice(p)
            im_n.append(range_basis(N[s], tol) if self.dims[p] else np.zeros((0, 0), complex))
            im_d.append(range_basis(D[s], tol) if self.dims[p] else np.zeros((0, 0), complex))
        return im_n, im_d


@dataclass(frozen=True)
class ProjectionTriple:
    """Projections on the doubled space and their single-copy blocks."""

    minus: np.ndarray
    plus: np.ndarray
    harmonic: np.ndarray
    minus_single: np.ndarray = field(repr=False)
    plus_single: np.ndarray = field(repr=False)
    harmonic_single: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the two structural assumptions."""

    A: bool
    B: bool
    dims: dict


def _kernel_sq(model: BoundaryModel) -> list[np.ndarray]:
    B2 = model.signature_sq()
    tol = 1e-10 * max(1.0, operator_norm(B2))
    out = []
    for p in range(model.top + 1):
        s = model.degree_slice(p)
        out.append(null_space(B2[s, s], tol, ncols=model.dims[p]) if model.dims[p] else np.zeros((0, 0), complex))
    return out


def _involution_split(model: BoundaryModel, H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``+1`` and ``-1`` eigenvectors of the middle involution restricted to ``span H``."""
    if H.shape[1] == 0:
        z = np.zeros((model.dims[model.middle], 0), dtype=complex)
        return z, z
    G = model.gamma[model.middle]
    X = np.linalg.lstsq(H, G @ H, rcond=None)[0]
    if operator_norm(H @ X - G @ H) > 1e-8 * max(1.0, operator_norm(G)):
        raise BoundaryModelError("middle harmonic space is not invariant under the involution")
    k = H.shape[1]
    vp = H @ null_space(X - np.eye(k), 1e-8, ncols=k)
    vm = H @ null_space(X + np.eye(k), 1e-8, ncols=k)
    return vp, vm


def check_assumptions(model: BoundaryModel) -> AssumptionReport:
    """Assumption A (kernel of ``B_Y^2`` misses both images) and B (balanced middle involution)."""
    kers = _kernel_sq(model)
    im_n, im_d = model.image_parts()
    H = model.harmonic_basis()
    meet_n = [intersection_dim(K, U) for K, U in zip(kers, im_n)]
    meet_d = [intersection_dim(K, U) for K, U in zip(kers, im_d)]
    a_ok = not any(meet_n) and not any(meet_d)
    try:
        if model.middle is None:
            vp = vm = np.zeros((0, 0))
        else:
            vp, vm = _involution_split(model, H[model.middle])
        plus_dim, minus_dim = vp.shape[1], vm.shape[1]
        mid_h = 0 if model.middle is None else H[model.middle].shape[1]
        b_ok = plus_dim == minus_dim and plus_dim + minus_dim == mid_h
    except BoundaryModelError:
        plus_dim = minus_dim = -1
        b_ok = False
    dims = {
        "kernel": [K.shape[1] for K in kers],
        "harmonic": [h.shape[1] for h in H],
        "kernel_meets_image": meet_n,
        "kernel_meets_dual_image": meet_d,
        "middle_plus": plus_dim,
        "middle_minus": minus_dim,
    }
    return AssumptionReport(bool(a_ok), bool(b_ok), dims)


def _orth_projector(model: BoundaryModel, V: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto ``span V`` in the model inner product."""
    if V.shape[1] == 0:
        return np.zeros((model.total_dim, model.total_dim), dtype=complex)
    G = model.gram_full()
    return V @ np.linalg.solve(V.conj().T @ G @ V, V.conj().T @ G)


def _dual_kernel_projector(model: BoundaryModel) -> np.ndarray:
    B2p = model.signature_sq(primed=True)
    tol = 1e-10 * max(1.0, operator_norm(model.signature_sq()))
    cols = [d.projector for d in generalized_eigenspaces(B2p, tol=1e-6) if abs(d.value) <= max(tol, 1e-8)]
    if not cols:
        return np.zeros((model.total_dim, model.total_dim), dtype=complex)
    V = range_basis(sum(cols), 1e-8)
    return _orth_projector(model, V)


def _double(A: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(2), A)


def build_projections(model: BoundaryModel, require_assumptions: bool = True) -> ProjectionTriple:
    """Projections onto ``Im nabla``, ``Im Gamma nabla Gamma`` and the harmonic part.

    ``P- = R^{-1} nabla Gamma nabla Gamma`` and ``P+ = R^{-1} Gamma nabla
    Gamma nabla`` with ``R = B_Y^2 + pr``, where ``pr`` is the orthogonal
    projection onto the kernel of the dual square, both copied into the two
    slots; ``Ph = I - P- - P+``.

    Raises
    ------
    BoundaryModelError
        If Assumption A fails or ``R`` is singular.
    """
    if require_assumptions and not check_assumptions(model).A:
        raise BoundaryModelError("Assumption A fails: the kernel of B_Y^2 meets an image")
    N = model.nabla_full()
    Gm = model.gamma_full()
    D = Gm @ N @ Gm
    pr = _dual_kernel_projector(model)
    R = D @ N + N @ D + pr
    n = model.total_dim
    if n and np.linalg.cond(R) > 1e12:
        raise BoundaryModelError("regularized operator is singular")
    Pm = np.linalg.solve(R, N @ D) if n else np.zeros((0, 0), complex)
    Pp = np.linalg.solve(R, D @ N) if n else np.zeros((0, 0), complex)
    Ph = np.eye(n) - Pm - Pp
    return ProjectionTriple(_double(Pm), _double(Pp), _double(Ph), Pm, Pp, Ph)


@dataclass(frozen=True)
class LagrangianData:
    """A splitting ``H = K + Gamma K`` and the two boundary projections."""

    model: BoundaryModel = field(repr=False)
    K: np.ndarray
    gamma_K: np.ndarray
    P_L0: np.ndarray = field(repr=False)
    P_L1: np.ndarray = field(repr=False)
    P_minus_L0: np.ndarray = field(repr=False)
    P_plus_L1: np.ndarray = field(repr=False)
    projections: ProjectionTriple = field(repr=False)
    isotropy: float = 0.0

    def degree_dims(self) -> tuple[list[int], list[int]]:
        """``(dim K_q, dim (Gamma K)_q)`` per degree."""
        deg = self.model.degree_of_index()

        def per(V):
            return [numerical_rank(V[deg == p], 1e-9) if V.shape[1] else 0 for p in range(self.model.top + 1)]

        return per(self.K), per(self.gamma_K)


def _graded_columns(model: BoundaryModel, V: np.ndarray) -> np.ndarray:
    """Split columns into degree-homogeneous pieces and re-orthonormalize."""
    deg = model.degree_of_index()
    cols = []
    for p in range(model.top + 1):
        piece = np.where((deg == p)[:, None], V, 0)
        if piece.size:
            B = range_basis(piece, 1e-9)
            if B.shape[1]:
                cols.append(B)
    return np.hstack(cols) if cols else np.zeros((model.total_dim, 0), dtype=complex)


def _default_lagrangian(model: BoundaryModel) -> np.ndarray:
    H = model.harmonic_basis()
    cols = [model.embed(p, H[p]) for p in model.lower_degrees if H[p].shape[1]]
    if model.middle is None:
        return np.hstack(cols) if cols else np.zeros((model.total_dim, 0), dtype=complex)
    vp, vm = _involution_split(model, H[model.middle])
    if vp.shape[1] != vm.shape[1]:
        raise BoundaryModelError("Assumption B fails: unbalanced middle involution")
    if vp.shape[1]:
        # +1 eigenvectors of the involution swapping the two eigenbases
        vp = range_basis(vp)
        vm = range_basis(vm)
        cols.append(model.embed(model.middle, vp + vm))
    return np.hstack(cols) if cols else np.zeros((model.total_dim, 0), dtype=complex)


def lagrangian_split(model: BoundaryModel, K: np.ndarray | None = None) -> LagrangianData:
    """Assemble ``P-,L0 = P- + P_L0 Ph`` and ``P+,L1 = P+ + P_L1 Ph``.

    Parameters
    ----------
    K : (dim, k) array, optional
        Columns spanning a Lagrangian of the harmonic space, in full-space
        coordinates. By default ``K`` is all harmonic forms below the middle
        degree plus ``span(v+_j + v-_j)`` in the middle, where ``v+-`` are
        orthonormal eigenbases of the involution on the middle harmonic forms.

    Raises
    ------
    BoundaryModelError
        If an assumption fails or ``K + Gamma K`` is not the harmonic space.
    """
    rep = check_assumptions(model)
    if not rep.A:
        raise BoundaryModelError("Assumption A fails")
    if not rep.B:
        raise BoundaryModelError("Assumption B fails: no Lagrangian compatible with the involution")
    tri = build_projections(model)
    Kb = _default_lagrangian(model) if K is None else _graded_columns(model, np.asarray(K, dtype=complex))
    Gm = model.gamma_full()
    GK = Gm @ Kb
    H = np.hstack([model.embed(p, h) for p, h in enumerate(model.harmonic_basis())]) if model.total_dim else np.zeros((0, 0))
    hdim = H.shape[1]
    both = np.hstack([Kb, GK])
    if numerical_rank(both, 1e-9) != hdim or both.shape[1] != hdim or intersection_dim(both, H) != hdim:
        raise BoundaryModelError("K + Gamma K is not a direct sum equal to the harmonic space")
    n = model.total_dim
    if hdim:
        coords = np.linalg.solve(both.conj().T @ both, both.conj().T)
        pK = Kb @ coords[: Kb.shape[1]] @ tri.harmonic_single
        pGK = GK @ coords[Kb.shape[1]:] @ tri.harmonic_single
    else:
        pK = np.zeros((n, n), dtype=complex)
        pGK = np.zeros((n, n), dtype=complex)
    P_L0, P_L1 = _double(pK), _double(pGK)
    Pm = tri.minus + P_L0 @ tri.harmonic
    Pp = tri.plus + P_L1 @ tri.harmonic
    form = Kb.conj().T @ model.gram_full() @ (-1j * model.beta_full() @ Gm) @ Kb if Kb.shape[1] else np.zeros((0, 0))
    iso = float(operator_norm(form)) if form.size else 0.0
    return LagrangianData(model, Kb, GK, P_L0, P_L1, Pm, Pp, tri, iso)


def collar_chirality(model: BoundaryModel) -> np.ndarray:
    """Chirality on the doubled space, ``i beta Gamma^Y (x) [[0, -1], [1, 0]]``."""
    J = np.array([[0, -1], [1, 0]], dtype=complex)
    return np.kron(J, 1j * model.beta_full() @ model.gamma_full())


def _same_span(U: np.ndarray, V: np.ndarray, tol: float = 1e-9) -> bool:
    if U.shape[1] == 0 and V.shape[1] == 0:
        return True
    ru, rv = numerical_rank(U, tol), numerical_rank(V, tol)
    return ru == rv == numerical_rank(np.hstack([U, V]), tol)


def duality_check(data: LagrangianData, gamma: np.ndarray | None = None, tol: float = 1e-10) -> dict:
    """``Gamma L0 = L1``, ``Gamma L1 = L0`` and ``P-,L0 Gamma = Gamma P+,L1``.

    Returns
    -------
    dict
        ``holds``, ``commutator`` (operator norm of ``P-,L0 Gamma - Gamma
        P+,L1``), ``swap_L0`` and ``swap_L1``.
    """
    G = collar_chirality(data.model) if gamma is None else np.asarray(gamma, dtype=complex)
    L0 = _double_span(data.K)
    L1 = _double_span(data.gamma_K)
    swap0 = _same_span(G @ L0, L1)
    swap1 = _same_span(G @ L1, L0)
    comm = operator_norm(data.P_minus_L0 @ G - G @ data.P_plus_L1) if G.size else 0.0
    scale = max(1.0, operator_norm(data.P_minus_L0)) * max(1.0, operator_norm(G))
    return {"holds": bool(swap0 and swap1 and comm <= tol * scale), "commutator": float(comm),
            "swap_L0": bool(swap0), "swap_L1": bool(swap1)}


def _double_span(V: np.ndarray) -> np.ndarray:
    z = np.zeros_like(V)
    return np.hstack([np.vstack([V, z]), np.vstack([z, V])])


def domain_intertwining_check(data: LagrangianData, tol: float = 1e-9) -> dict:
    """The chirality carries ``ker P+,L1`` onto ``ker P-,L0`` and back.

    Boundary values ``v`` with ``P+,L1 v = 0`` are the finite shadow of the
    domain of the ``P+,L1`` realization; ``Gamma`` must map them exactly onto
    those with ``P-,L0 v = 0``.
    """
    G = collar_chirality(data.model)
    n = G.shape[0]
    km = null_space(data.P_minus_L0, tol, ncols=n)
    kp = null_space(data.P_plus_L1, tol, ncols=n)
    fwd = _same_span(G @ kp, km)
    back = _same_span(G @ km, kp)
    return {"holds": bool(fwd and back), "dim_minus": int(km.shape[1]), "dim_plus": int(kp.shape[1])}


def decomposition_dims(model: BoundaryModel) -> dict:
    """Summand dimensions of the three decompositions of the form space.

    ``mixed``: ``Im nabla + Im Gamma nabla' Gamma + (ker nabla cap ker Gamma nabla' Gamma)``;
    ``plain``: unprimed throughout; ``primed``: primed throughout. Each entry
    is a list of per-degree triples plus a flag telling whether the sum is
    direct and fills the degree.
    """
    N, D = model.dual_pair(False)
    Np, Dp = model.dual_pair(True)
    tol = 1e-10 * max(1.0, operator_norm(N), operator_norm(Np))
    out = {}
    for name, (A, Bm) in {"mixed": (N, Dp), "plain": (N, D), "primed": (Np, Dp)}.items():
        rows = []
        direct = True
        for p in range(model.top + 1):
            s = model.degree_slice(p)
            d = model.dims[p]
            if d == 0:
                rows.append((0, 0, 0))
                continue
            U = range_basis(A[s], tol)
            V = range_basis(Bm[s], tol)
            E = model.embed(p, np.eye(d, dtype=complex))
            W = null_space(np.vstack([A @ E, Bm @ E]), tol, ncols=d)
            rows.append((U.shape[1], V.shape[1], W.shape[1]))
            if numerical_rank(np.hstack([U, V, W]), 1e-8) != d or U.shape[1] + V.shape[1] + W.shape[1] != d:
                direct = False
        out[name] = {"dims": rows, "direct": direct}
    return out


def eigenspace_orthogonality(model: BoundaryModel, tol: float = 1e-6) -> float:
    """Largest normalized pairing between generalized eigenspaces of ``B^2`` and ``B'^2``.

    The space for ``lambda_k`` of ``B^2`` is paired with the space for
    ``conj(lambda_l)`` of ``B'^2`` for ``k != l``; the result should vanish.
    """
    G = model.gram_full()
    A = generalized_eigenspaces(model.signature_sq(), tol)
    Bp = generalized_eigenspaces(model.signature_sq(primed=True), tol)
    worst = 0.0
    for da in A:
        Ua = range_basis(da.projector, 1e-8)
        for db in Bp:
            if abs(np.conj(db.value) - da.value) <= tol * max(1.0, abs(da.value)):
                continue
            Ub = range_basis(db.projector, 1e-8)
            worst = max(worst, operator_norm(Ua.conj().T @ G @ Ub) / max(1e-300, operator_norm(G)))
    return float(worst)


def boundary_spectral_model(model: BoundaryModel, data: LagrangianData | None = None, tol: float = 1e-6):
    """Side-resolved spectral data of ``B_Y^2`` for the cylinder computations.

    The ``-`` side of degree ``p`` is ``B_Y^2`` on ``Im nabla`` there, the
    ``+`` side on ``Im Gamma nabla Gamma``; the harmonic counts are the
    degreewise dimensions of ``K`` and ``Gamma K``.
    """
    from .cylinder_heat import BoundarySpectralModel, SpectralEntry

    if data is None:
        data = lagrangian_split(model)
    B2 = model.signature_sq()
    im_n, im_d = model.image_parts()
    minus, plus = [], []
    for p in range(model.top + 1):
        s = model.degree_slice(p)
        for bases, side in ((im_n, minus), (im_d, plus)):
            U = bases[p]
            if U.size == 0 or U.shape[1] == 0:
                side.append(())
                continue
            block = np.linalg.lstsq(U, B2[s, s] @ U, rcond=None)[0]
            side.append(tuple(SpectralEntry(d.value, d.alg_mult, d.jordan_blocks) for d in generalized_eigenspaces(block, tol)))
    lk, lgk = data.degree_dims()
    return BoundarySpectralModel(model.m, tuple(minus), tuple(plus), tuple(lk), tuple(lgk))


# ----- generators --------------------------------------------------------------

def _unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_hermitian_boundary(
    rng: np.random.Generator,
    m: int,
    max_dim: int = 4,
    harmonic: bool = True,
) -> BoundaryModel:
    """Seeded boundary model with unitary involution and ``nabla' = nabla``.

    Below the middle degree the involution blocks are random unitaries with
    ``Gamma_{n-p} = Gamma_p^*``; in the middle it is ``V diag(I, -I) V^*``.
    The differential into the middle lands in the isotropic span of
    ``v+_j + v-_j``; the upper differentials follow from
    ``nabla_{n-1-p} = Gamma_p nabla_p^* Gamma_{n-1-p}``.
    """
    if m % 2 == 0 or m < 1:
        raise BoundaryModelError("m must be odd")
    n = m - 1
    s = n // 2
    while True:
        low = [int(rng.integers(1, max_dim + 1)) for _ in range(s)]
        half = int(rng.integers(1 if s == 0 else 0, max_dim // 2 + 1))
        dims = low + [2 * half] + low[::-1]
        if s == 0 or sum(dims) > 0:
            break
    # ranks of nabla_0 .. nabla_{s-1}
    ranks = []
    prev = 0
    for p in range(s):
        cap_next = half if p == s - 1 else dims[p + 1]
        top = min(dims[p] - prev, cap_next)
        top = max(top, 0)
        ranks.append(int(rng.integers(0 if harmonic else top, top + 1)))
        prev = ranks[-1]
    gam = [None] * (n + 1)
    for p in range(s):
        U = _unitary(rng, dims[p])
        gam[p] = U
        gam[n - p] = U.conj().T
    V = _unitary(rng, 2 * half)
    vp, vm = V[:, :half], V[:, half:]
    gam[s] = V @ np.diag(np.r_[np.ones(half), -np.ones(half)]).astype(complex) @ V.conj().T if half else np.zeros((0, 0), complex)
    nab = [None] * n
    frames = [_unitary(rng, d) @ np.diag(rng.uniform(0.7, 1.6, d)) if d else np.zeros((0, 0), complex) for d in dims]
    targets = list(frames)
    if s >= 1 and half:
        iso = (vp + vm) / np.sqrt(2.0)
        rest = (vp - vm) / np.sqrt(2.0)
        mix = _unitary(rng, half)
        targets[s] = np.hstack([iso @ mix, rest])
    for p in range(s):
        E = np.zeros((dims[p + 1], dims[p]), dtype=complex)
        src0 = ranks[p - 1] if p else 0
        for j in range(ranks[p]):
            E[j, src0 + j] = rng.uniform(0.6, 1.8)
        nab[p] = targets[p + 1] @ E @ np.linalg.inv(frames[p]) if dims[p] and dims[p + 1] else E
        if p + 1 < s:
            frames[p + 1] = targets[p + 1]
    for p in range(s):
        nab[n - 1 - p] = gam[p] @ nab[p].conj().T @ gam[n - 1 - p]
    return BoundaryModel(tuple(dims), tuple(nab), tuple(gam))


def _commuting_change(rng: np.random.Generator, model: BoundaryModel, spread: float) -> list[np.ndarray]:
    n = model.top
    s = model.middle
    S = [None] * (n + 1)
    for p in range(s):
        d = model.dims[p]
        A = np.eye(d) + spread * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / max(1, d)
        S[p] = A
        S[n - p] = model.gamma[p] @ A @ model.gamma[n - p] if d else A
    G = model.gamma[s]
    d = model.dims[s]
    A = np.eye(d) + spread * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / max(1, d)
    S[s] = 0.5 * (A + G @ A @ G) if d else A
    return S


def random_boundary_model(
    rng: np.random.Generator,
    m: int,
    max_dim: int = 4,
    harmonic: bool = True,
    spread: float = 0.5,
) -> BoundaryModel:
    """Hermitian model conjugated by a graded change of basis commuting with the involution.

    The involution is unchanged, the differential is no longer self-dual,
    and both assumptions survive because the conjugation moves kernels and
    images together.
    """
    base = random_hermitian_boundary(rng, m, max_dim, harmonic)
    for _ in range(50):
        S = _commuting_change(rng, base, spread)
        if all(np.linalg.cond(A) < 1e3 for A in S if A.size):
            break
    nab = tuple(S[p + 1] @ D @ np.linalg.inv(S[p]) if D.size else D for p, D in enumerate(base.nabla))
    return BoundaryModel(base.dims, nab, base.gamma)


def jordan_boundary_model(J: np.ndarray, rng: np.random.Generator | None = None) -> BoundaryModel:
    """``m = 3`` model with dims ``(k, 2k, k)`` whose ``B_Y^2`` on degree 0 is ``J``.

    ``nabla_0 = [I; 0]``, ``nabla_1 = [0 | A]``, the middle involution is
    ``[[0, X^*], [X, 0]]`` with ``X`` unitary and ``A = Gamma_0 J X^*``
    where ``Gamma_0`` is unitary; then ``B^2`` on degree 0 is
    ``Gamma_2 A X = J``.
    """
    J = np.asarray(J, dtype=complex)
    k = J.shape[0]
    rng = np.random.default_rng(0) if rng is None else rng
    X = _unitary(rng, k)
    U = _unitary(rng, k)
    z = np.zeros((k, k), dtype=complex)
    g1 = np.block([[z, X.conj().T], [X, z]])
    A = U @ J @ X.conj().T
    n0 = np.vstack([np.eye(k), z])
    n1 = np.hstack([z, A])
    return BoundaryModel((k, 2 * k, k), (n0, n1), (U, g1, U.conj().T))


def direct_sum(*models: BoundaryModel) -> BoundaryModel:
    """Degreewise block-diagonal sum of models with the same top degree."""
    import scipy.linalg as sla

    top = models[0].top
    if any(M.top != top for M in models):
        raise BoundaryModelError("direct sum needs equal top degrees")
    dims = tuple(sum(M.dims[p] for M in models) for p in range(top + 1))

    def bd(blocks, shape):
        out = np.zeros(shape, dtype=complex)
        r = c = 0
        for b in blocks:
            out[r:r + b.shape[0], c:c + b.shape[1]] = b
            r += b.shape[0]
            c += b.shape[1]
        return out

    nab = tuple(bd([M.nabla[p] for M in models], (dims[p + 1], dims[p])) for p in range(top))
    gam = tuple(bd([M.gamma[p] for M in models], (dims[top - p], dims[p])) for p in range(top + 1))
    inner = None
    if any(M.inner is not None for M in models):
        inner = tuple(sla.block_diag(*[(M.inner[p] if M.inner is not None else np.eye(M.dims[p])) for M in models]) for p in range(top + 1))
    return BoundaryModel(dims, nab, gam, inner)
