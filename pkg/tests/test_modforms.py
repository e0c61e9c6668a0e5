import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import RAMANUJAN_TAU, delta_product, monomial_count
from tcf_petersson.modforms import (
    cusp_basis,
    delta,
    dim_cusp,
    eigenforms,
    eisenstein,
    hecke_apply,
    hecke_matrix,
    matmul,
    required_prec,
)
from tcf_petersson.qexp import PrecisionError, mul

SMALL_WEIGHTS = [k for k in range(12, 41, 2) if dim_cusp(k)]


@pytest.mark.parametrize("k, d", [(12, 1), (24, 2), (11, 0), (2, 0), (16, 1), (14, 0), (26, 1), (36, 3), (38, 2)])
def test_dim_examples(k, d):
    assert dim_cusp(k) == d


def test_dim_matches_monomial_count():
    for k in range(4, 241, 2):
        assert dim_cusp(k) == monomial_count(k) - 1, k


@pytest.mark.parametrize("k", [-12, 0, 13, 25, Fraction(25, 2), 12.5, True])
def test_dim_degenerate_weights(k):
    assert dim_cusp(k) == 0


def test_dim_accepts_integral_fraction():
    assert dim_cusp(Fraction(24)) == 2


def test_eisenstein_rejects_other_weights():
    with pytest.raises(ValueError):
        eisenstein(8, 5)


def test_delta_against_product_expansion():
    D = delta(30)
    assert D.coeffs[:4] == (0, 1, -24, 252)
    assert list(D.coeffs) == delta_product(30)
    assert list(D.coeffs[1:11]) == RAMANUJAN_TAU


def test_delta_cross_identity():
    E4, E6 = eisenstein(4, 40), eisenstein(6, 40)
    assert (E4**3 - E6**2) == delta(40) * 1728


def test_basis_examples():
    assert cusp_basis(12, 10).basis == (delta(10),)
    b16 = cusp_basis(16, 10).basis
    assert len(b16) == 1 and b16[0] == mul(eisenstein(4, 10), delta(10))
    assert cusp_basis(10, 10).basis == ()


def test_basis_needs_precision():
    with pytest.raises(PrecisionError):
        cusp_basis(24, 2)


@pytest.mark.parametrize("k", SMALL_WEIGHTS)
def test_basis_is_echelon_cuspidal(k):
    S = cusp_basis(k, 20)
    for i, b in enumerate(S.basis):
        assert b[0] == 0
        assert all(x.denominator == 1 for x in b.coeffs)
        assert [b[j + 1] for j in range(S.dim)] == [int(i == j) for j in range(S.dim)]


@pytest.mark.parametrize("k", SMALL_WEIGHTS)
def test_hecke_stable_span(k):
    """T_2 of each basis element is the combination its leading coefficients predict."""
    S = cusp_basis(k, 2 * 30)
    for b in S.basis:
        Tb = hecke_apply(b, k, 2)
        assert Tb == S.combination(S.coordinates(Tb)).truncate(Tb.prec)


def test_hecke_apply_examples():
    D = delta(40)
    assert hecke_apply(D, 12, 2) == D.truncate(20) * -24
    assert hecke_apply(D, 12, 1) == D
    f = cusp_basis(24, 40).basis[1]
    for n in range(1, 8):
        assert hecke_apply(f, 24, n)[1] == f[n]


def test_hecke_apply_constant_term():
    E4 = eisenstein(4, 20)
    # E4 is a T_n eigenform with eigenvalue sigma_3(n)
    assert hecke_apply(E4, 4, 2) == E4.truncate(10) * 9


def test_hecke_apply_bad_index():
    with pytest.raises(ValueError):
        hecke_apply(delta(5), 12, 0)


def test_hecke_matrix_examples():
    assert hecke_matrix(12, 2).entries == ((-24,),)
    assert hecke_matrix(12, 4).entries == ((-1472,),)
    T = hecke_matrix(24, 2).entries
    assert T[0][0] + T[1][1] == 1080
    ev = np.linalg.eigvals(np.array(T, dtype=float))
    assert sorted(ev) == pytest.approx(sorted([540 - 12 * math.sqrt(144169), 540 + 12 * math.sqrt(144169)]), rel=1e-12)


def test_ramanujan_tau_via_hecke():
    for n, tau in enumerate(RAMANUJAN_TAU, start=1):
        assert hecke_matrix(12, n).entries == ((tau,),)


@pytest.mark.parametrize("k", SMALL_WEIGHTS)
def test_t1_is_identity(k):
    d = dim_cusp(k)
    assert hecke_matrix(k, 1).entries == tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))


def test_hecke_matrix_precision_guard():
    assert required_prec(24, 3) == 9
    with pytest.raises(PrecisionError):
        hecke_matrix(24, 3, 5)
    # a larger precision gives the same matrix
    assert hecke_matrix(24, 3, 30).entries == hecke_matrix(24, 3).entries


@given(st.sampled_from(SMALL_WEIGHTS), st.integers(1, 10), st.integers(1, 10))
def test_hecke_multiplicative_and_commuting(k, m, n):
    Tm, Tn = hecke_matrix(k, m).entries, hecke_matrix(k, n).entries
    assert matmul(Tm, Tn) == matmul(Tn, Tm)
    if math.gcd(m, n) == 1:
        assert matmul(Tm, Tn) == hecke_matrix(k, m * n).entries


@given(st.sampled_from(SMALL_WEIGHTS), st.sampled_from([2, 3, 5]), st.integers(0, 1))
def test_hecke_prime_power_recursion(k, p, r):
    lhs = hecke_matrix(k, p ** (r + 2)).entries
    A = matmul(hecke_matrix(k, p).entries, hecke_matrix(k, p ** (r + 1)).entries)
    B = hecke_matrix(k, p**r).entries
    c = Fraction(p) ** (k - 1)
    assert lhs == tuple(tuple(a - c * b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def test_eigenform_examples():
    (e,) = eigenforms(12)
    assert e.eigenvalues[2] == pytest.approx(-24)
    assert e.eigenvalues[3] == pytest.approx(252)
    e24 = eigenforms(24)
    assert len(e24) == 2
    assert sum(e.eigenvalues[2] for e in e24) == pytest.approx(1080, rel=1e-12)
    assert eigenforms(10) == []


@pytest.mark.parametrize("k", [24, 36, 48, 60, 120])
def test_eigenforms_diagonalize(k):
    forms = eigenforms(k)
    assert len(forms) == dim_cusp(k)
    for e in forms:
        v = np.array(e.vector)
        for p, lam in e.eigenvalues.items():
            assert abs(lam.imag) <= 1e-9 * abs(lam)
            T = np.array(hecke_matrix(k, p).entries, dtype=float)
            assert np.linalg.norm(T @ v - lam * v) <= 1e-6 * abs(lam)
    # Deligne bound |lambda_2| <= 2 * 2^{(k-1)/2}
    assert all(abs(e.eigenvalues[2]) <= 2 * 2 ** ((k - 1) / 2) for e in forms)
