import cmath

import numpy as np
from hypothesis import given, settings, strategies as st

from torsionlab.twisted_cochain import exact_rank
from torsionlab.zeta_eta import eta_invariant, logdet_identity_check
from conftest import make_two_term

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
nonzero_complex = st.builds(complex, finite, finite).filter(lambda z: abs(z) > 1e-3)


@given(st.lists(nonzero_complex, max_size=12), st.floats(0.1, 10))
def test_eta_scale_invariant(vals, c):
    assert eta_invariant(vals) == eta_invariant([c * z for z in vals])


@given(st.lists(nonzero_complex, max_size=12))
def test_eta_odd_under_negation(vals):
    assert eta_invariant([-z for z in vals]) == -eta_invariant(vals)


@given(st.lists(nonzero_complex, max_size=8), st.integers(0, 4))
def test_eta_zero_modes_count_half(vals, k):
    assert eta_invariant(vals + [0.0] * k) == eta_invariant(vals) + 0.5 * k


@settings(max_examples=60)
@given(nonzero_complex)
def test_two_term_identity(a):
    rep = logdet_identity_check(make_two_term(a))
    assert rep["residual"] < 1e-10
    d = rep["lhs"] - cmath.log(a)
    assert abs(d - round(d.imag / (2 * np.pi)) * 2j * np.pi) < 1e-10


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=4))
def test_exact_rank_matches_svd(rows):
    assert exact_rank(rows) == np.linalg.matrix_rank(np.array(rows, dtype=float))
