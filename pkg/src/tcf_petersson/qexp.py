"""Truncated q-expansions with exact rational coefficients."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np


class PrecisionError(ValueError):
    """Raised when a coefficient beyond the known precision is requested."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("q-expansion coefficients must be exact (int or Fraction), got float")
    return Fraction(x)


@dataclass(frozen=True)
class QExpansion:
    """a_0 + a_1 q + ... + a_prec q^prec + O(q^(prec+1))."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable):
        cs = tuple(_as_fraction(c) for c in coeffs)
        if not cs:
            raise ValueError("a q-expansion needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", cs)

    @property
    def prec(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def zero(cls, prec: int) -> QExpansion:
        return cls([0] * (prec + 1))

    @classmethod
    def one(cls, prec: int) -> QExpansion:
        return cls([1] + [0] * prec)

    def __getitem__(self, n: int) -> Fraction:
        if n < 0:
            raise IndexError(f"negative coefficient index {n}")
        if n > self.prec:
            raise PrecisionError(f"coefficient a_{n} requested but prec is {self.prec}")
        return self.coeffs[n]

    def truncate(self, prec: int) -> QExpansion:
        if prec > self.prec:
            raise PrecisionError(f"cannot raise precision from {self.prec} to {prec}")
        return QExpansion(self.coeffs[: prec + 1])

    def valuation(self) -> int | None:
        for n, c in enumerate(self.coeffs):
            if c:
                return n
        return None

    def __add__(self, other: QExpansion) -> QExpansion:
        return add(self, other)

    def __neg__(self) -> QExpansion:
        return QExpansion(-c for c in self.coeffs)

    def __sub__(self, other: QExpansion) -> QExpansion:
        return add(self, -other)

    def __mul__(self, other):
        if isinstance(other, QExpansion):
            return mul(self, other)
        c = _as_fraction(other)
        return QExpansion(c * a for a in self.coeffs)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> QExpansion:
        return pow(self, e)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if self.prec >= 6 else ""
        return f"QExpansion(prec={self.prec}, [{head}{more}])"


def add(a: QExpansion, b: QExpansion) -> QExpansion:
    p = min(a.prec, b.prec)
    return QExpansion(x + y for x, y in zip(a.coeffs[: p + 1], b.coeffs[: p + 1]))


def _integer_form(coeffs: tuple[Fraction, ...]) -> tuple[np.ndarray, int]:
    den = math.lcm(*(c.denominator for c in coeffs))
    ints = np.array([c.numerator * (den // c.denominator) for c in coeffs], dtype=object)
    return ints, den


def mul(a: QExpansion, b: QExpansion) -> QExpansion:
    """Truncated Cauchy product."""
    p = min(a.prec, b.prec)
    xa, da = _integer_form(a.coeffs[: p + 1])
    xb, db = _integer_form(b.coeffs[: p + 1])
    # object-dtype convolution keeps Python ints exact
    prod = np.convolve(xa, xb)[: p + 1]
    den = da * db
    return QExpansion(Fraction(int(c), den) for c in prod)


def pow(a: QExpansion, e: int) -> QExpansion:
    if e < 0:
        raise ValueError("only nonnegative powers are supported")
    result = QExpansion.one(a.prec)
    base = a
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def _tail_sum(C: float, k: int, r: float, start: int) -> float:
    """Sum of C * n^k * r^n for n >= start, summed until it stops mattering."""
    if C == 0.0 or r == 0.0:
        return 0.0
    logr = math.log(r)
    peak = k / -logr if k > 0 else 0.0
    total = 0.0
    n = start
    while True:
        term = math.exp(math.log(C) + k * math.log(n) + n * logr)
        total += term
        if n > peak and term <= 1e-17 * total:
            return total
        if n > start + 100000:
            return total
        n += 1


def eval(f: QExpansion, k: int, tau: complex) -> tuple[complex, float]:
    """Evaluate the truncated series at tau in the upper half-plane.

    Returns ``(value, tail)`` where ``tail`` estimates the neglected terms by
    extrapolating |a_n| <= C n^k from the known coefficients.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"tau must lie in the upper half-plane, got {tau}")
    q = cmath.exp(2j * math.pi * tau)
    value = 0j
    qn = 1 + 0j
    for c in f.coeffs:
        if c:
            value += float(c) * qn
        qn *= q
    C = 0.0
    for n in range(1, f.prec + 1):
        if f.coeffs[n]:
            C = max(C, abs(float(f.coeffs[n])) / float(n) ** k)
    tail = _tail_sum(C, k, abs(q), f.prec + 1)
    return value, tail
