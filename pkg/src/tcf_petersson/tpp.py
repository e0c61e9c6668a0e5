"""Topological Petersson products on the associated graded of tcf^*(X) (x) C.

In cohomological degree m the associated graded is the sum over
Atiyah-Hirzebruch degrees n of H^n(X) (x) S_w with w = (n - m)/2. An element
stores, for each such n, a b_n x dim S_w matrix whose row r is the cusp form
attached to the r-th basis class of H^n.

Products pair equal AH degrees only: the AH-degree-n parts of f and g give
sum_{h,i} <f_h, g_i> (x_h cup y_i) in H^2n, with the classical Petersson
product <,> taken at weight w (linear in f, conjugate-linear in g).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from . import petersson
from .cohomology import CohClass, GradedRing, RingError, hard_lefschetz_report, LefschetzReport
from .modforms import dim_cusp, hecke_matrix

RADICAL_RTOL = 1e-8

GramOracle = Callable[[int], np.ndarray]


class TcfError(ValueError):
    pass


def weight_of(n: int, m: int) -> int | None:
    """Weight of the cusp forms sitting in AH degree n of tcf^m; None if half-integral."""
    if (n - m) % 2:
        return None
    return (n - m) // 2


def slots(ring: GradedRing, m: int) -> list[tuple[int, int, int, int]]:
    """Nonzero summands (n, weight, b_n, dim S_weight) of the associated graded in degree m."""
    out = []
    for n in range(ring.top + 1):
        w = weight_of(n, m)
        if w is None:
            continue
        d = dim_cusp(w)
        if d and ring.b(n):
            out.append((n, w, ring.b(n), d))
    return out


def component_dims(ring: GradedRing, m: int) -> dict[int, int]:
    out = {}
    for n in range(ring.top + 1):
        w = weight_of(n, m)
        out[n] = ring.b(n) * (dim_cusp(w) if w is not None else 0)
    return out


# -- Gram oracles ------------------------------------------------------------------


class QuadratureGrams:
    """Classical Petersson Gram matrices from numerical quadrature."""

    def __init__(self, cfg: petersson.QuadratureConfig = petersson.DEFAULT_CONFIG):
        self.cfg = cfg

    def __call__(self, w: int) -> np.ndarray:
        return petersson.gram(w, self.cfg).matrix


class SyntheticGrams:
    """Exact positive-definite rational Gram matrices A^T A + I, one per weight.

    Entries are Fractions in object arrays, so products of exact coordinates
    stay exact.
    """

    def __init__(self, seed: int = 0, spread: int = 3):
        self.seed = seed
        self.spread = spread

    @lru_cache(maxsize=None)
    def __call__(self, w: int) -> np.ndarray:
        d = dim_cusp(w)
        rng = random.Random(self.seed * 100003 + w)
        A = [[Fraction(rng.randint(-self.spread, self.spread)) for _ in range(d)] for _ in range(d)]
        G = np.empty((d, d), dtype=object)
        for i in range(d):
            for j in range(d):
                G[i, j] = sum((A[l][i] * A[l][j] for l in range(d)), Fraction(int(i == j)))
        G.setflags(write=False)
        return G


DEFAULT_GRAMS = QuadratureGrams()


# -- elements ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TcfElement:
    ring: GradedRing
    degree: int
    components: Mapping[int, np.ndarray] = field(repr=False)

    @classmethod
    def zero(cls, ring: GradedRing, m: int, exact: bool = False) -> TcfElement:
        return cls.build(ring, m, {}, exact=exact)

    @classmethod
    def build(cls, ring: GradedRing, m: int, components: Mapping, exact: bool = False) -> TcfElement:
        """Validate shapes; absent slots become zero.

        With ``exact`` the entries are kept as Python numbers (e.g. Fractions)
        in object arrays.
        """
        shapes = {n: (b, d) for n, _, b, d in slots(ring, m)}
        for n in components:
            if n not in shapes:
                raise TcfError(f"AH degree {n} carries no cusp forms in tcf^{m}({ring.name})")
        comps = {}
        for n, shape in shapes.items():
            if n in components:
                arr = np.array(components[n], dtype=object if exact else complex)
                if arr.shape != shape:
                    raise TcfError(f"AH degree {n} component must have shape {shape}, got {arr.shape}")
            else:
                arr = np.full(shape, Fraction(0), dtype=object) if exact else np.zeros(shape, dtype=complex)
            arr.setflags(write=False)
            comps[n] = arr
        return cls(ring=ring, degree=m, components=comps)

    @property
    def exact(self) -> bool:
        return any(a.dtype == object for a in self.components.values())

    def component(self, n: int) -> np.ndarray | None:
        return self.components.get(n)

    def vector(self) -> np.ndarray:
        """Coordinates flattened in slot order, rows of each component in turn."""
        parts = [self.components[n].reshape(-1) for n in sorted(self.components)]
        if not parts:
            return np.zeros(0, dtype=complex)
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, ring: GradedRing, m: int, vec, exact: bool = False) -> TcfElement:
        vec = np.asarray(vec, dtype=object if exact else complex)
        comps = {}
        pos = 0
        for n, _, b, d in slots(ring, m):
            comps[n] = vec[pos : pos + b * d].reshape(b, d)
            pos += b * d
        if pos != vec.shape[0]:
            raise TcfError(f"vector has length {vec.shape[0]}, expected {pos}")
        return cls.build(ring, m, comps, exact=exact)

    def __add__(self, other: TcfElement) -> TcfElement:
        _check_pair(self, other)
        return TcfElement.build(self.ring, self.degree, {n: self.components[n] + other.components[n] for n in self.components}, exact=self.exact and other.exact)

    def scale(self, c) -> TcfElement:
        return TcfElement.build(self.ring, self.degree, {n: c * a for n, a in self.components.items()}, exact=self.exact and not isinstance(c, (complex, float)))

    def restrict(self, keep: Callable[[int], bool]) -> TcfElement:
        return TcfElement.build(self.ring, self.degree, {n: a for n, a in self.components.items() if keep(n)}, exact=self.exact)

    def is_zero(self) -> bool:
        return all(not np.any(a != 0) for a in self.components.values())


def slice_basis(ring: GradedRing, m: int, ah_filter: Callable[[int], bool] = lambda n: True) -> list[tuple[tuple[int, int, int], TcfElement]]:
    """Basis elements (class r of H^n) (x) (echelon cusp form c), labelled (n, r, c)."""
    out = []
    for n, _, b, d in slots(ring, m):
        if not ah_filter(n):
            continue
        for r in range(b):
            for c in range(d):
                comp = np.full((b, d), Fraction(0), dtype=object)
                comp[r, c] = Fraction(1)
                out.append(((n, r, c), TcfElement.build(ring, m, {n: comp}, exact=True)))
    return out


def _check_pair(f: TcfElement, g: TcfElement) -> None:
    if f.ring is not g.ring and f.ring != g.ring:
        raise TcfError(f"elements live over different spaces: {f.ring.name} and {g.ring.name}")
    if f.degree != g.degree:
        raise TcfError(f"elements have different degrees: {f.degree} and {g.degree}")


# -- products ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TppValue:
    """A nonhomogeneous class in H^*(X; C), stored per even degree."""

    ring: GradedRing
    classes: Mapping[int, tuple]

    def __getitem__(self, degree: int) -> tuple:
        return self.classes.get(degree, tuple(0 for _ in range(self.ring.b(degree))))

    def vector(self) -> np.ndarray:
        parts = [np.asarray(self[p], dtype=object) for p in range(0, self.ring.top + 1, 2)]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=object)

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(abs(c) <= atol for v in self.classes.values() for c in v)

    def support(self, atol: float = 0.0) -> list[int]:
        return sorted(p for p, v in self.classes.items() if any(abs(c) > atol for c in v))


def _pair_slot(f: TcfElement, g: TcfElement, n: int, grams: GramOracle) -> tuple:
    """Coordinates in H^2n of sum_{h,i} <f_h, g_i> (x_h cup y_i), or () if out of range."""
    R = f.ring
    target = 2 * n
    if target > R.top:
        return ()
    F = f.component(n)
    Gc = g.component(n)
    if F is None or Gc is None:
        return tuple(0 for _ in range(R.b(target)))
    w = weight_of(n, f.degree)
    G = np.asarray(grams(w))
    exact = F.dtype == object and Gc.dtype == object and G.dtype == object
    if not exact:
        G = G.astype(complex)
        F = F.astype(complex)
        Gc = Gc.astype(complex)
    # pairings[h, i] = <f_h, g_i>
    pairings = F @ G @ Gc.conj().T
    out = [0] * R.b(target)
    for h in range(R.b(n)):
        for i in range(R.b(n)):
            p = pairings[h, i]
            if p == 0:
                continue
            for l, c in enumerate(R.product((n, h), (n, i))):
                if c:
                    out[l] += p * (c if exact else float(c))
    return tuple(out)


def weight_product(f: TcfElement, g: TcfElement, j: int, grams: GramOracle = DEFAULT_GRAMS) -> CohClass:
    """Weight-j product: a class in H^{4(j-k)}(X; C) where m = -2k."""
    _check_pair(f, g)
    m = f.degree
    if m % 2:
        raise TcfError(f"weight products need an even degree, got {m}")
    k = -m // 2
    n = 2 * (j - k)
    if n < 0:
        return CohClass(2 * n, ())
    return CohClass(2 * n, _pair_slot(f, g, n, grams))


def full_product(f: TcfElement, g: TcfElement, grams: GramOracle = DEFAULT_GRAMS) -> TppValue:
    """Sum of the weight products over all AH degrees, as a class in H^*(X; C)."""
    _check_pair(f, g)
    classes = {}
    for n in sorted(f.components):
        vec = _pair_slot(f, g, n, grams)
        if vec:
            classes[2 * n] = vec
    for p in range(0, f.ring.top + 1, 2):
        classes.setdefault(p, tuple(0 for _ in range(f.ring.b(p))))
    return TppValue(ring=f.ring, classes=classes)


# -- radicals --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadicalReport:
    degree: int
    ah_degrees: tuple[int, ...]
    dimension: int
    basis: tuple[TcfElement, ...]
    singular_values: tuple[float, ...] = field(repr=False, default=())

    @property
    def radical_dimension(self) -> int:
        return len(self.basis)

    @property
    def nondegenerate(self) -> bool:
        return not self.basis


def value_matrix(ring: GradedRing, m: int, ah_filter: Callable[[int], bool], grams: GramOracle) -> np.ndarray:
    """Stacked values of <e_b, e_a> over slice basis pairs; column b, row block a.

    Since the product is linear in its first slot, f lies in the left radical
    exactly when this matrix kills f's coordinate vector.
    """
    basis = slice_basis(ring, m, ah_filter)
    N = len(basis)
    blocks = []
    for _, ea in basis:
        cols = [np.asarray(full_product(eb, ea, grams).vector(), dtype=complex) for _, eb in basis]
        blocks.append(np.stack(cols, axis=1) if cols else np.zeros((0, N)))
    if not blocks:
        return np.zeros((0, 0), dtype=complex)
    return np.vstack(blocks)


def _kernel(M: np.ndarray, rtol: float = RADICAL_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal kernel basis (columns) after row and column equilibration."""
    N = M.shape[1]
    if M.size == 0 or not np.any(M):
        return np.eye(N, dtype=complex), np.zeros(0)
    M = M[np.any(M != 0, axis=1)]
    M = M / np.linalg.norm(M, axis=1, keepdims=True)
    cn = np.linalg.norm(M, axis=0)
    scale = np.where(cn > 0, 1.0 / np.where(cn > 0, cn, 1.0), 1.0)
    Ms = M * scale
    _, s, Vh = np.linalg.svd(Ms)
    rank = int(np.sum(s > rtol * s[0]))
    K = Vh[rank:].conj().T
    # undo the column scaling, then re-orthonormalize
    K = scale[:, None] * K
    if K.shape[1]:
        K, _ = np.linalg.qr(K)
    return K, s


def left_radical(ring: GradedRing, m: int, ah_filter: Callable[[int], bool] = lambda n: True, grams: GramOracle = DEFAULT_GRAMS) -> RadicalReport:
    """Left radical of the product restricted to the slice picked by ``ah_filter``."""
    ahs = tuple(n for n, *_ in slots(ring, m) if ah_filter(n))
    N = sum(b * d for n, _, b, d in slots(ring, m) if ah_filter(n))
    M = value_matrix(ring, m, ah_filter, grams)
    K, s = _kernel(M) if N else (np.zeros((0, 0)), np.zeros(0))
    basis = []
    for col in range(K.shape[1]):
        vec = _embed(ring, m, ah_filter, K[:, col])
        basis.append(TcfElement.from_vector(ring, m, vec))
    return RadicalReport(degree=m, ah_degrees=ahs, dimension=N, basis=tuple(basis), singular_values=tuple(float(x) for x in s))


def _embed(ring: GradedRing, m: int, ah_filter, sub: np.ndarray) -> np.ndarray:
    """Place slice coordinates into the full coordinate vector of tcf^m."""
    out = []
    pos = 0
    for n, _, b, d in slots(ring, m):
        if ah_filter(n):
            out.append(sub[pos : pos + b * d])
            pos += b * d
        else:
            out.append(np.zeros(b * d, dtype=complex))
    return np.concatenate(out) if out else np.zeros(0, dtype=complex)


def degeneracy_witness(ring: GradedRing, m: int, grams: GramOracle = DEFAULT_GRAMS) -> TcfElement | None:
    """A nonzero element of the radical supported on the top cell, or None.

    The top-degree class cups to zero against everything in positive degree,
    so (cusp form) (x) (top class) pairs trivially with all of tcf^m.
    """
    d = ring.top
    if d == 0:
        return None
    w = weight_of(d, m)
    if w is None or dim_cusp(w) == 0 or ring.b(d) == 0:
        return None
    comp = np.full((ring.b(d), dim_cusp(w)), Fraction(0), dtype=object)
    comp[0, 0] = Fraction(1)
    f = TcfElement.build(ring, m, {d: comp}, exact=True)
    for _, e in slice_basis(ring, m):
        if not full_product(f, e, grams).is_zero():
            raise TcfError(f"top-cell element fails to pair trivially against {e!r}")
    return f


@dataclass(frozen=True, eq=False)
class KahlerReport:
    complex_dim: int
    radical: RadicalReport
    lefschetz: LefschetzReport

    @property
    def certificate_ok(self) -> bool:
        return self.lefschetz.lefschetz_holds and self.lefschetz.injective_ok

    @property
    def consistent(self) -> bool:
        # a passing certificate forces a zero radical
        return not self.certificate_ok or self.radical.nondegenerate


def kahler_filter(d: int) -> Callable[[int], bool]:
    return lambda n: n % 2 == 0 and 3 * n <= 2 * d


def kahler_slice_check(ring: GradedRing, omega: CohClass, d: int, m: int, grams: GramOracle = DEFAULT_GRAMS) -> KahlerReport:
    if ring.top % 2:
        raise RingError(f"{ring.name} has odd top degree {ring.top}")
    if ring.top != 2 * d:
        raise TcfError(f"complex dimension {d} does not match top degree {ring.top}")
    rad = left_radical(ring, m, kahler_filter(d), grams)
    return KahlerReport(complex_dim=d, radical=rad, lefschetz=hard_lefschetz_report(ring, omega))


# -- Hecke operators ------------------------------------------------------------------


def _hecke_array(w: int, n: int, exact: bool) -> np.ndarray:
    T = np.array(hecke_matrix(w, n).entries, dtype=object)
    return T if exact else T.astype(float)


def topological_hecke(f: TcfElement, n: int) -> TcfElement:
    """Apply T_n weightwise; rows of each component are coordinate vectors."""
    comps = {}
    for ah, arr in f.components.items():
        w = weight_of(ah, f.degree)
        T = _hecke_array(w, n, arr.dtype == object)
        comps[ah] = arr @ T.T
    return TcfElement.build(f.ring, f.degree, comps, exact=f.exact)


def _block(w: int, n: int) -> list[list[Fraction]]:
    return [list(r) for r in hecke_matrix(w, n).entries]


def _mm(A, B):
    d = len(A)
    return [[sum((A[i][l] * B[l][j] for l in range(d)), Fraction(0)) for j in range(d)] for i in range(d)]


def adams_relation_residual(ring: GradedRing, m: int, p: int, r: int) -> Fraction:
    """max |entry| of T_{p^{r+2}} - (T_p T_{p^{r+1}} - p^{-1} Psi^p T_{p^r}) on the associated graded.

    Psi^p scales the weight-w summand by p^w. Operators are block diagonal
    over the summands, with the cohomology factor untouched.
    """
    worst = Fraction(0)
    for _, w, _, _ in slots(ring, m):
        lhs = _block(w, p ** (r + 2))
        TpTp1 = _mm(_block(w, p), _block(w, p ** (r + 1)))
        adams = Fraction(p) ** w / p
        Tr = _block(w, p**r)
        for i, row in enumerate(lhs):
            for j, x in enumerate(row):
                rhs = TpTp1[i][j] - adams * Tr[i][j]
                worst = max(worst, abs(x - rhs))
    return worst


# -- element files ----------------------------------------------------------------------


def loads_element(text: str, ring: GradedRing, m: int) -> TcfElement:
    """Parse ``component <ah-degree> <class-index> = <re>,<im> ...`` lines."""
    shapes = {n: (b, d) for n, _, b, d in slots(ring, m)}
    comps: dict[int, np.ndarray] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, eq, rhs = line.partition("=")
        toks = lhs.split()
        if not eq or len(toks) != 3 or toks[0] != "component":
            raise TcfError(f"line {lineno}: expected 'component <ah-degree> <index> = <re>,<im> ...'")
        try:
            n, r = int(toks[1]), int(toks[2])
            vals = [complex(float(a), float(b)) for a, b in (t.split(",") for t in rhs.split())]
        except ValueError as exc:
            raise TcfError(f"line {lineno}: {exc}") from exc
        if n not in shapes:
            raise TcfError(f"line {lineno}: AH degree {n} carries no cusp forms in tcf^{m}({ring.name})")
        b, d = shapes[n]
        if not 0 <= r < b:
            raise TcfError(f"line {lineno}: class index {r} out of range for H^{n} of dimension {b}")
        if len(vals) != d:
            raise TcfError(f"line {lineno}: expected {d} cusp coordinates, got {len(vals)}")
        arr = comps.setdefault(n, np.zeros((b, d), dtype=complex))
        arr[r] = vals
    return TcfElement.build(ring, m, comps)


def dumps_element(f: TcfElement) -> str:
    lines = []
    for n in sorted(f.components):
        for r, row in enumerate(np.asarray(f.components[n], dtype=complex)):
            if np.any(row != 0):
                vals = " ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row)
                lines.append(f"component {n} {r} = {vals}")
    return "\n".join(lines) + ("\n" if lines else "")


def random_element(ring: GradedRing, m: int, rng: np.random.Generator, keep: Iterable[int] | None = None) -> TcfElement:
    keep = None if keep is None else set(keep)
    comps = {}
    for n, _, b, d in slots(ring, m):
        if keep is None or n in keep:
            comps[n] = rng.standard_normal((b, d)) + 1j * rng.standard_normal((b, d))
    return TcfElement.build(ring, m, comps)
