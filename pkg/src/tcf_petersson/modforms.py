"""Level one cusp forms over Q: dimensions, Miller bases, Hecke operators."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from numbers import Real

import mpmath

from .qexp import PrecisionError, QExpansion, mul, pow

EIGEN_RESIDUAL_TOL = 1e-10


class EigenformError(RuntimeError):
    """Hecke eigenbasis could not be separated numerically."""


def _integral_weight(k) -> int | None:
    if isinstance(k, bool):
        return None
    if isinstance(k, int):
        return k
    if isinstance(k, (Fraction, Real)) and k == int(k):
        return int(k)
    return None


def dim_cusp(k) -> int:
    """dim_Q S_k at level one.

    Uses the rank pattern of the homotopy of tcf: with n = 2k = 24j + r the
    rank is j for r in {0, 8, 12, 16, 20} and j - 1 for r = 4 (the only
    residues an even weight can produce). Odd, negative and half-integral
    weights give 0.
    """
    w = _integral_weight(k)
    if w is None or w < 12 or w % 2:
        return 0
    j, r = divmod(2 * w, 24)
    return j - 1 if r == 4 else j


def _sigma(n: int, e: int) -> int:
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**e
            if d * d != n:
                total += (n // d) ** e
        d += 1
    return total


@lru_cache(maxsize=64)
def eisenstein(k: int, prec: int) -> QExpansion:
    if k == 4:
        c, e = 240, 3
    elif k == 6:
        c, e = -504, 5
    else:
        raise ValueError(f"only E4 and E6 are provided, not weight {k}")
    return QExpansion([1] + [c * _sigma(n, e) for n in range(1, prec + 1)])


@lru_cache(maxsize=64)
def delta(prec: int) -> QExpansion:
    """q * prod_{n>=1} (1 - q^n)^24, via Euler's pentagonal series for prod (1 - q^n)."""
    euler = [0] * (prec + 1)
    m = 0
    while m * (3 * m - 1) // 2 <= prec:
        sign = -1 if m % 2 else 1
        for g in (m * (3 * m - 1) // 2, m * (3 * m + 1) // 2):
            if g <= prec:
                euler[g] = sign
        m += 1
    p24 = pow(QExpansion(euler), 24)
    return QExpansion([0] + list(p24.coeffs[:prec]))


@dataclass(frozen=True)
class CuspSpace:
    weight: int
    dim: int
    prec: int
    basis: tuple[QExpansion, ...]

    def coordinates(self, f: QExpansion) -> list[Fraction]:
        """Coordinates of a cusp form of this weight in the echelon basis."""
        return [f[i + 1] for i in range(self.dim)]

    def combination(self, coords) -> QExpansion:
        out = QExpansion.zero(self.prec)
        for c, b in zip(coords, self.basis):
            out = out + b * c
        return out


@lru_cache(maxsize=256)
def cusp_basis(k: int, prec: int) -> CuspSpace:
    """Echelonized basis of S_k: basis[i] = q^(i+1) + O(q^(dim+1))."""
    d = dim_cusp(k)
    if prec < d + 1:
        raise PrecisionError(f"weight {k} needs prec >= {d + 1}, got {prec}")
    if d == 0:
        return CuspSpace(weight=k, dim=0, prec=prec, basis=())
    D = delta(prec)
    E4 = eisenstein(4, prec)
    E6 = eisenstein(6, prec)
    rows = []
    for c in range(1, d + 1):
        rest = k - 12 * c
        b = 0 if rest % 4 == 0 else 1
        a = (rest - 6 * b) // 4
        # Delta^c E4^a E6^b = q^c + O(q^(c+1))
        rows.append(mul(mul(pow(D, c), pow(E4, a)), pow(E6, b)))
    # unit upper triangular: clear entries above the pivots from the bottom up
    for i in range(d - 1, -1, -1):
        for j in range(i + 1, d):
            c = rows[i][j + 1]
            if c:
                rows[i] = rows[i] - rows[j] * c
    return CuspSpace(weight=k, dim=d, prec=prec, basis=tuple(rows))


def hecke_apply(f: QExpansion, k: int, n: int) -> QExpansion:
    """a_m(T_n f) = sum_{d | gcd(m, n)} d^(k-1) a_{mn/d^2}(f)."""
    if n < 1:
        raise ValueError(f"Hecke index must be positive, got {n}")
    out_prec = f.prec // n
    if out_prec < 1 and f.prec >= 1:
        raise PrecisionError(f"T_{n} needs prec >= {n}, got {f.prec}")
    divs = [d for d in range(1, n + 1) if n % d == 0]
    coeffs = []
    for m in range(out_prec + 1):
        if m == 0:
            # sigma_{k-1}(n) a_0
            coeffs.append(sum(Fraction(d) ** (k - 1) for d in divs) * f[0])
            continue
        g = gcd(m, n)
        coeffs.append(sum(Fraction(d) ** (k - 1) * f[m * n // (d * d)] for d in divs if g % d == 0))
    return QExpansion(coeffs)


@dataclass(frozen=True)
class HeckeMatrix:
    """T_n on S_k acting on coordinate columns: entries[j][i] = a_{j+1}(T_n basis[i])."""

    weight: int
    index: int
    entries: tuple[tuple[Fraction, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.entries)


def required_prec(k: int, n: int) -> int:
    return n * (dim_cusp(k) + 1)


@lru_cache(maxsize=1024)
def hecke_matrix(k: int, n: int, prec: int | None = None) -> HeckeMatrix:
    need = required_prec(k, n)
    if prec is None:
        prec = need
    if prec < need:
        raise PrecisionError(f"T_{n} on S_{k} needs prec >= {need}, got {prec}")
    S = cusp_basis(k, prec)
    cols = [S.coordinates(hecke_apply(b, k, n)) for b in S.basis]
    entries = tuple(tuple(cols[i][j] for i in range(S.dim)) for j in range(S.dim))
    return HeckeMatrix(weight=k, index=n, entries=entries)


def matmul(A, B):
    """Exact product of square matrices given as nested sequences."""
    n = len(A)
    return tuple(tuple(sum((A[i][l] * B[l][j] for l in range(n)), Fraction(0)) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class Eigenform:
    eigenvalues: dict[int, complex]
    vector: tuple[complex, ...]


def _to_mp(entries):
    return mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in entries])


def eigenforms(k: int, primes=(2, 3, 5), dps: int | None = None) -> list[Eigenform]:
    """Hecke eigenbasis of S_k, computed numerically from the exact T_2.

    The diagonalization runs in ``dps``-digit arithmetic so the absolute
    residual check against T_3 and T_5 is not swamped by the size of their
    eigenvalues. By default the precision follows the size of the matrix
    entries, which in the echelon basis far exceeds the eigenvalues.
    """
    d = dim_cusp(k)
    if d == 0:
        return []
    exact = {p: hecke_matrix(k, p).entries for p in primes}
    if dps is None:
        digits = max(len(str(abs(x.numerator))) for T in exact.values() for row in T for x in row)
        dps = 30 + 2 * digits
    with mpmath.workdps(dps):
        mats = {p: _to_mp(T) for p, T in exact.items()}
        T2 = mats[primes[0]]
        if d == 1:
            vecs = [mpmath.matrix([[1]])]
        else:
            vals, V = mpmath.eig(T2)
            gap = min(abs(vals[i] - vals[j]) for i in range(d) for j in range(i + 1, d))
            scale = max(abs(v) for v in vals)
            if gap <= 1e-20 * max(scale, 1):
                # repeated T_2 eigenvalue: separate with T_3 on a generic combination
                vals, V = mpmath.eig(T2 + mpmath.sqrt(2) * mats[primes[1]])
                gap = min(abs(vals[i] - vals[j]) for i in range(d) for j in range(i + 1, d))
                if gap <= 1e-20 * max(max(abs(v) for v in vals), 1):
                    raise EigenformError(f"could not separate the Hecke eigenspaces of S_{k}")
            vecs = [V[:, i] for i in range(d)]
        out = []
        for v in vecs:
            v = v / mpmath.norm(v)
            lams = {}
            for p, T in mats.items():
                Tv = T * v
                # Rayleigh quotient on a unit vector
                lam = sum(mpmath.conj(v[i]) * Tv[i] for i in range(d))
                res = mpmath.norm(Tv - lam * v)
                if res > EIGEN_RESIDUAL_TOL:
                    raise EigenformError(f"T_{p} residual {float(res):.3e} on S_{k} exceeds {EIGEN_RESIDUAL_TOL}")
                lams[p] = complex(lam)
            out.append(Eigenform(eigenvalues=lams, vector=tuple(complex(v[i]) for i in range(d))))
    out.sort(key=lambda e: (e.eigenvalues[primes[0]].real, e.eigenvalues[primes[0]].imag))
    return out
