import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import delta_mp, delta_product, sigma
from tcf_petersson.modforms import delta, eisenstein
from tcf_petersson.qexp import PrecisionError, QExpansion, add, eval, mul, pow

coeff = st.fractions(min_value=-20, max_value=20, max_denominator=7)


def series(prec=6):
    return st.lists(coeff, min_size=prec + 1, max_size=prec + 1).map(QExpansion)


def test_rejects_floats_and_empty():
    with pytest.raises(TypeError):
        QExpansion([1, 0.5])
    with pytest.raises(ValueError):
        QExpansion([])


def test_precision_guard():
    f = QExpansion([1, 2, 3])
    assert f[2] == 3
    with pytest.raises(PrecisionError):
        f[3]
    with pytest.raises(PrecisionError):
        f.truncate(5)


def test_add_examples():
    assert add(QExpansion([1, 1]), QExpansion([1, -1])) == QExpansion([2, 0])
    f = QExpansion([3, Fraction(1, 2), -7])
    assert f + QExpansion.zero(2) == f
    assert (eisenstein(4, 3) + eisenstein(6, 3))[1] == -264


def test_add_truncates_to_shared_precision():
    assert add(QExpansion([1, 2, 3]), QExpansion([1, 1])).prec == 1


def test_mul_examples():
    assert mul(QExpansion([1, 1, 0]), QExpansion([1, -1, 0])) == QExpansion([1, 0, -1])
    f = QExpansion([5, -2, Fraction(3, 4)])
    assert f * QExpansion.one(2) == f


def test_e4_cubed_minus_e6_squared():
    prec = 25
    E4, E6 = eisenstein(4, prec), eisenstein(6, prec)
    diff = E4**3 - E6**2
    assert list(diff.coeffs) == [1728 * c for c in delta_product(prec)]


def test_pow_examples():
    one_minus_q = QExpansion([1, -1, 0, 0])
    assert pow(one_minus_q, 2) == QExpansion([1, -2, 1, 0])
    assert pow(one_minus_q, 24)[1] == -24
    assert pow(QExpansion([7, 3]), 0) == QExpansion.one(1)
    with pytest.raises(ValueError):
        pow(one_minus_q, -1)


def test_pow_matches_binomial_coefficients():
    p = pow(QExpansion([1, -1] + [0] * 30), 24)
    assert list(p.coeffs) == [(-1) ** n * math.comb(24, n) for n in range(32)]


def test_valuation():
    assert delta(10).valuation() == 1
    assert QExpansion.zero(4).valuation() is None


def test_eval_zero():
    assert eval(QExpansion.zero(10), 12, 1j) == (0j, 0.0)


def test_eval_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        eval(delta(10), 12, 0.3 - 0.1j)


def test_eval_delta_at_i_against_eta_product():
    value, tail = eval(delta(30), 12, 1j)
    ref = complex(delta_mp(1j))
    assert abs(value - ref) <= 1e-14 * abs(ref)
    # leading term e^{-2 pi}
    assert abs(value) == pytest.approx(math.exp(-2 * math.pi) * abs(1 - 24 * math.exp(-2 * math.pi) + 252 * math.exp(-4 * math.pi)), rel=1e-3)
    assert tail < 1e-20


@pytest.mark.parametrize("tau", [1j, 0.5 + 0.9j, -0.2 + 1.3j])
def test_eval_precision_doubling_within_tail(tau):
    v20, t20 = eval(delta(20), 12, tau)
    v40, _ = eval(delta(40), 12, tau)
    assert abs(v40 - v20) <= t20


def test_eval_off_axis_against_eta_product():
    tau = 0.31 + 0.95j
    value, _ = eval(delta(60), 12, tau)
    assert abs(value - complex(delta_mp(tau))) <= 1e-13 * abs(value)


def test_eisenstein_divisor_sums():
    E4, E6 = eisenstein(4, 40), eisenstein(6, 40)
    assert E4.coeffs[:3] == (1, 240, 2160)
    assert E6.coeffs[:3] == (1, -504, -16632)
    assert all(E4[n] == 240 * sigma(n, 3) for n in range(1, 41))
    assert all(E6[n] == -504 * sigma(n, 5) for n in range(1, 41))


# ring axioms on truncated series


@given(series(), series())
def test_mul_commutes(f, g):
    assert f * g == g * f


@given(series(), series(), series())
def test_mul_associates(f, g, h):
    assert (f * g) * h == f * (g * h)


@given(series(), series(), series())
def test_distributive(f, g, h):
    assert f * (g + h) == f * g + f * h


@given(series(), st.integers(0, 5), st.integers(0, 5))
def test_pow_adds_exponents(f, a, b):
    assert pow(f, a) * pow(f, b) == pow(f, a + b)


@given(series())
def test_sub_self_is_zero(f):
    assert (f - f) == QExpansion.zero(f.prec)


@given(st.lists(coeff, min_size=1, max_size=5))
def test_eval_matches_direct_sum(coeffs):
    tau = 0.1 + 1.2j
    q = cmath.exp(2j * math.pi * tau)
    direct = sum(float(c) * q**n for n, c in enumerate(coeffs))
    assert abs(eval(QExpansion(coeffs), 4, tau)[0] - direct) < 1e-12
