"""Independent reference computations used by the tests.

Nothing here imports the package under test.
"""
import mpmath
import numpy as np
from scipy import integrate


def sigma(n, e):
    return sum(d**e for d in range(1, n + 1) if n % d == 0)


def poly_mul(a, b, prec):
    out = [0] * (prec + 1)
    for i, x in enumerate(a[: prec + 1]):
        if x:
            for j, y in enumerate(b[: prec + 1 - i]):
                out[i + j] += x * y
    return out


def delta_product(prec):
    """q prod (1 - q^n)^24 by repeated multiplication of binomials."""
    p = [1] + [0] * prec
    for n in range(1, prec + 1):
        factor = [0] * (prec + 1)
        factor[0] = 1
        factor[n] = -1
        for _ in range(24):
            p = poly_mul(p, factor, prec)
    return [0] + p[:prec]


RAMANUJAN_TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def monomial_count(k):
    """dim M_k as the number of (a, b) with 4a + 6b = k."""
    return sum(1 for b in range(k // 6 + 1) if (k - 6 * b) >= 0 and (k - 6 * b) % 4 == 0)


def delta_mp(tau, dps=40):
    with mpmath.workdps(dps):
        q = mpmath.exp(2j * mpmath.pi * tau)
        return q * mpmath.qp(q) ** 24


def delta_eta(tau):
    q = np.exp(2j * np.pi * tau)
    p = 1.0
    n = 1
    while True:
        t = q**n
        if abs(t) < 1e-18:
            break
        p *= 1 - t
        n += 1
    return q * p**24


def delta_norm_dblquad():
    """<Delta, Delta> by adaptive quadrature over the fundamental domain, using the eta product."""
    val, _ = integrate.dblquad(
        lambda v, u: abs(delta_eta(u + 1j * v)) ** 2 * v**10,
        0.0,
        0.5,
        lambda u: np.sqrt(1 - u * u),
        lambda u: np.inf,
        epsabs=0,
        epsrel=1e-12,
    )
    return 2 * val


# frozen output of delta_norm_dblquad()
DELTA_NORM = 1.03536205680432e-06



def cusp_dim(w):
    if w < 12 or w % 2:
        return 0
    return monomial_count(w) - 1


def brute_radical(ring, m, keep, grams):
    """Exact left radical of the graded pairing on the slice of AH degrees in ``keep``.

    Materializes the full value tensor V[a, b, class] from the cup-product
    structure constants and the (exact) Gram matrices, then takes the sympy
    nullspace. Returns (slice dimension, list of kernel vectors).
    """
    import sympy

    basis = []
    for n in range(ring.top + 1):
        if (n - m) % 2 or not keep(n):
            continue
        w = (n - m) // 2
        for r in range(ring.b(n)):
            for c in range(cusp_dim(w)):
                basis.append((n, r, c, w))
    rows = []
    for nb, rb, cb, wb in basis:
        target = 2 * nb
        width = ring.b(target) if target <= ring.top else 0
        for cls in range(width):
            row = []
            for na, ra, ca, wa in basis:
                if na != nb:
                    row.append(0)
                    continue
                g = grams(wa)[ca, cb]
                row.append(sympy.Rational(g.numerator, g.denominator) * sympy.Rational(ring.product((na, ra), (na, rb))[cls]))
            rows.append(row)
    N = len(basis)
    if not rows:
        return N, [sympy.Matrix.eye(N)[:, i] for i in range(N)]
    return N, sympy.Matrix(rows).nullspace()
