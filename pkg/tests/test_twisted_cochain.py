import cmath

import numpy as np
import pytest

from torsionlab.twisted_cochain import (
    TwistedComplexError,
    TwistedComplexSpec,
    build_twisted_complex,
    circle_spec,
    closure,
    cohomology_report,
    exact_rank,
    middle_dim_check,
    relative_complex,
    solid_torus_spec,
    torus_spec,
    twisted_cohomology_dims,
)


def hodge_kernel_dims(C):
    """Independent count: kernel of the combinatorial Laplacian per degree."""
    out = []
    for q, n in enumerate(C.dims):
        L = np.zeros((n, n), dtype=complex)
        if q < C.m:
            D = C.nabla[q]
            L += D.conj().T @ D
        if q > 0:
            D = C.nabla[q - 1]
            L += D @ D.conj().T
        ev = np.linalg.eigvalsh(L) if n else np.zeros(0)
        out.append(int(np.sum(np.abs(ev) < 1e-9)))
    return out


def u2(rng, phase):
    Q = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))[0]
    return Q @ np.diag([1.0, cmath.exp(1j * phase)]) @ Q.conj().T


def test_closure_counts():
    cells = closure([(0, 1, 2)])
    assert [len(c) for c in cells] == [3, 3, 1]


def test_circle_dims():
    assert twisted_cohomology_dims(build_twisted_complex(circle_spec())) == [1, 1]
    assert twisted_cohomology_dims(build_twisted_complex(circle_spec(2.0))) == [0, 0]


def test_torus_dims():
    C = build_twisted_complex(torus_spec())
    assert twisted_cohomology_dims(C) == [1, 2, 1]
    assert twisted_cohomology_dims(C, exact=True) == [1, 2, 1]
    assert twisted_cohomology_dims(build_twisted_complex(torus_spec(1j, 1.0))) == [0, 0, 0]


def test_torus_cell_counts():
    spec = torus_spec()
    assert [len(c) for c in spec.cells] == [9, 27, 18]
    assert spec.euler_characteristic() == 0


def test_solid_torus_trivial():
    rep = cohomology_report(solid_torus_spec())
    assert rep.absolute == (1, 1, 0, 0)
    assert rep.relative == (0, 0, 1, 1)
    assert rep.boundary == (1, 2, 1, 0)
    assert rep.rank_jstar == 1
    assert rep.euler_ok and rep.les_ok
    assert middle_dim_check(rep)


def test_solid_torus_non_unitary_scalar():
    rep = cohomology_report(solid_torus_spec(3.0))
    assert sum(rep.absolute) == sum(rep.relative) == sum(rep.boundary) == 0
    assert middle_dim_check(rep)


@pytest.mark.parametrize("seed", range(10))
def test_solid_torus_unitary_line(seed):
    phase = np.random.default_rng(seed).uniform(0.1, 2 * np.pi - 0.1)
    rep = cohomology_report(solid_torus_spec(cmath.exp(1j * phase)))
    assert rep.les_ok and rep.euler_ok
    assert middle_dim_check(rep)
    assert rep.boundary[1] == 2 * rep.rank_jstar


@pytest.mark.parametrize("seed", range(4))
def test_solid_torus_rank_two(seed):
    rng = np.random.default_rng(seed)
    rep = cohomology_report(solid_torus_spec(u2(rng, rng.uniform(0.5, 5.5))))
    # only the invariant line contributes
    assert rep.absolute == (1, 1, 0, 0)
    assert rep.boundary == (1, 2, 1, 0)
    assert middle_dim_check(rep)


@pytest.mark.parametrize("seed", range(6))
def test_hodge_oracle(seed):
    rng = np.random.default_rng(seed)
    a, b = (cmath.exp(1j * x) for x in rng.choice([0.0, 1.3, 2.1], 2))
    C = build_twisted_complex(torus_spec(a, b))
    assert twisted_cohomology_dims(C) == hodge_kernel_dims(C)


def test_hodge_oracle_rank_two():
    rng = np.random.default_rng(9)
    A = u2(rng, 1.0)
    C = build_twisted_complex(torus_spec(A, np.eye(2)))
    assert twisted_cohomology_dims(C) == hodge_kernel_dims(C) == [1, 2, 1]


def test_relative_circle_equals_reduced():
    spec = TwistedComplexSpec(circle_spec().cells, subcomplex=[(0,)])
    assert twisted_cohomology_dims(relative_complex(spec)) == [0, 1]


def test_coboundary_squares_to_zero():
    spec = solid_torus_spec(u2(np.random.default_rng(0), 1.0))
    C = build_twisted_complex(spec)
    for q in range(C.m - 1):
        assert np.abs(C.nabla[q + 1] @ C.nabla[q]).max() < 1e-12


def test_exact_rank():
    assert exact_rank([[1, 2], [2, 4]]) == 1
    assert exact_rank([[1, 0], [0, 1]]) == 2
    assert exact_rank(np.zeros((3, 2))) == 0


def test_non_flat_rejected():
    spec = TwistedComplexSpec(closure([(0, 1, 2)]), 1, {(0, 1): 2.0})
    assert spec.flatness_defect() > 0
    with pytest.raises(TwistedComplexError, match="flat"):
        build_twisted_complex(spec)


def test_non_subcomplex_rejected():
    with pytest.raises(TwistedComplexError, match="closed"):
        TwistedComplexSpec(closure([(0, 1, 2)]), subcomplex=[(0, 1)])


def test_missing_face_rejected():
    with pytest.raises(TwistedComplexError, match="missing"):
        TwistedComplexSpec(([(0,), (1,)], [(0, 1), (1, 2)]))


def test_bad_holonomy_rejected():
    with pytest.raises(TwistedComplexError, match="not an edge"):
        TwistedComplexSpec(circle_spec().cells, 1, {(0, 5): 1.0})
    with pytest.raises(TwistedComplexError, match="invertible"):
        TwistedComplexSpec(circle_spec().cells, 1, {(0, 1): 0.0})


def test_spec_round_trip():
    spec = solid_torus_spec(cmath.exp(0.7j))
    again = TwistedComplexSpec.from_dict(spec.to_dict())
    assert again.cells == spec.cells and again.subcomplex == spec.subcomplex
    assert cohomology_report(again).as_dict() == cohomology_report(spec).as_dict()


def test_torus_without_boundary():
    rep = cohomology_report(torus_spec())
    assert rep.boundary == (0, 0, 0)
    assert rep.relative == rep.absolute
    assert middle_dim_check(rep)
