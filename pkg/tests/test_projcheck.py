from fractions import Fraction as F
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jflow import projcheck as pc

# frozen regression constant: smallest eigenvalue of the realified Gram matrix
GRAM_MIN_EIG = 0.26794919243112286  # 2 - sqrt(3)


def test_fs_curvature_examples():
    assert pc.fs_curvature(1).F[0][0][0][0] == 2
    F2 = pc.fs_curvature(2).F
    assert F2[0][1][0][1] == 1 and F2[0][1][1][0] == 0
    for n in range(1, 5):
        T = pc.fs_curvature(n)
        assert T.hermitian()
        for i in range(n):
            assert sum(T.F[a][a][i][i] for a in range(n)) == n + 1
    with pytest.raises(ValueError):
        pc.fs_curvature(5)


def test_wedge_examples():
    n = 2
    A = pc.fs_curvature(n).as_form()
    assert pc.wedge(pc.identity(n, n), A).entries == A.entries
    w2 = pc.power(pc.omega_form(n), 2)
    assert w2.top_coefficients() == [[2]]
    F2 = pc.power(A, 2)
    assert F2.top_coefficients() == [[3, 0], [0, 3]]  # (3/2) * 2 on the diagonal
    with pytest.raises(ValueError, match="overflow"):
        pc.wedge(F2, A)


def test_wedge_graded_commutativity_of_two_forms():
    # (1,1)-forms commute; compare A^B with B^A for scalar forms
    n = 3
    rng = np.random.default_rng(0)
    for _ in range(5):
        a = pc.MatrixFormPoly(n, 1, 1)
        b = pc.MatrixFormPoly(n, 1, 1)
        for i in range(n):
            for j in range(n):
                a.add_term(0, 0, (i,), (j,), int(rng.integers(-3, 4)))
                b.add_term(0, 0, (i,), (j,), int(rng.integers(-3, 4)))
        assert (pc.wedge(a, b) - pc.wedge(b, a)).is_zero()


def _det_top(M):
    # top coefficient of (sum M_ij (i/2pi) dz^i dzbar^j)^n = n! det M
    return factorial(len(M)) * F(round(np.linalg.det(np.array(M, dtype=float))))


def test_power_of_scalar_form_is_determinant():
    rng = np.random.default_rng(1)
    for n in (2, 3):
        M = rng.integers(-3, 4, size=(n, n))
        a = pc.MatrixFormPoly(n, 1, 1)
        for i in range(n):
            for j in range(n):
                a.add_term(0, 0, (i,), (j,), int(M[i, j]))
        assert pc.power(a, n).top_coefficients()[0][0] == _det_top(M)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_j_residual_vanishes_exactly(n):
    rep = pc.j_residual(n)
    assert rep.residual_zero and rep.residual.is_zero()
    assert rep.Fn_factor == 1 + F(1, n)
    # omega Id F^(n-1) = (1 + 1/n) omega^n only from n = 2 on; for n = 1 it is omega
    assert rep.omega_Fn1_factor == (1 if n == 1 else 1 + F(1, n))
    assert rep.c == (F(1, 2) if n == 1 else 1)


def test_j_residual_with_unit_constant_fails_for_n1():
    F1 = pc.fs_curvature(1).as_form()
    assert not (F1 - pc.omega_form(1, 1)).is_zero()


def chern_oracle(n):
    # ch_k of T'CP^n from the Euler sequence: (n+1) e^H - 1
    ch = [F(n + 1, factorial(k)) for k in range(n + 1)]
    ch[0] -= 1
    return n * ch[n], ch[n - 1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_chern_invariants(n):
    got = pc.chern_invariants(n)
    assert got == chern_oracle(n)
    assert got == pc.chern_invariants_by_curvature(n)
    assert got[0] == F(n + 1, factorial(n - 1))
    if n >= 2:
        assert got[1] == got[0]


def test_chern_invariants_values():
    assert pc.chern_invariants(2) == (3, 3)
    assert pc.chern_invariants(3) == (2, 2)
    assert pc.chern_invariants(4) == (F(5, 6), F(5, 6))
    assert pc.chern_invariants(1) == (2, 1)


def test_gram_matrix_min_eigenvalue():
    rep = pc.j_positivity_gram()
    assert rep.min_eig > 0 and rep.normalized_min_eig > 1e-6
    assert rep.min_eig == pytest.approx(GRAM_MIN_EIG, abs=1e-12)
    assert rep.min_eig == pytest.approx(2 - np.sqrt(3), abs=1e-14)
    assert rep.real_rank == 16
    assert rep.eig_residual <= 1e-12


def test_gram_single_coefficient():
    G = np.array(pc.gram_matrix_exact(), dtype=float)
    i = pc._idx(1, 1, 1)
    assert G[i, i] >= 1
    assert pc.quadratic_form({(1, 1, 1): 2 + 1j}) == pytest.approx(G[i, i] * 5)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=8, max_size=8))
def test_quadratic_form_matches_gram(vals):
    a = dict(zip(pc.GRAM_LABELS, vals))
    v = np.array(vals)
    G = np.array(pc.gram_matrix_exact(), dtype=float)
    direct = pc.quadratic_form(a)
    assert direct == pytest.approx(np.vdot(v, G @ v).real, abs=1e-9)
    assert direct >= GRAM_MIN_EIG * np.vdot(v, v).real - 1e-9


def test_equality_configuration_is_positive():
    # the Cauchy-Schwarz pairs aligned and of equal norm, the rest zero
    a = {(2, 1, 2): 1.0, (1, 1, 1): 1.0, (2, 2, 2): 1.0, (1, 2, 1): 0.0, (1, 1, 2): 0.0, (1, 2, 2): 0.0,
         (2, 1, 1): 0.0, (2, 2, 1): 0.0}
    assert pc.quadratic_form(a) > 0
    assert pc.quadratic_form({k: 0 for k in pc.GRAM_LABELS}) == 0


def test_griffith_from_positivity():
    rep = pc.griffith_from_positivity(seed=3)
    assert np.allclose(rep.spectra[0], [1, 3]) and np.allclose(rep.spectra[1], [1, 3])
    assert rep.positive and rep.trace_margin == pytest.approx(2)
    assert pc.griffith_block_exact() == [[3, 0], [0, 1]]


def test_report_n2():
    rep = pc.report(2)
    assert rep["j_residual_zero"] and rep["factor"] == "3/2" and rep["invariant"] == "3"
    assert rep["gram_min_eig"] == pytest.approx(GRAM_MIN_EIG, abs=1e-12)


def test_binomial_cancellation_n4():
    # trace of F^4 at the origin integrates to 4! ch_4 = 4! * 5/24
    F4 = pc.power(pc.fs_curvature(4).as_form(), 4).trace()
    assert F4.top_coefficients()[0][0] / factorial(4) == 5
