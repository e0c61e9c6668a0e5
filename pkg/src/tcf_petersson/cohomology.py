"""Finite graded-commutative Q-algebras given by structure constants.

A ring stores an additive basis per degree and the products of basis
elements. Degree 0 is spanned by the unit, index 0.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import sympy

Basis = tuple[int, int]  # (degree, index)


class RingError(ValueError):
    pass


class RingParseError(RingError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class RingAxiomError(RingError):
    """A structure-constant table violating one of the ring axioms.

    ``axiom`` is one of "unit", "degree", "commutativity", "associativity",
    "shape"; ``triple`` names the offending basis elements.
    """

    def __init__(self, axiom: str, triple: tuple, message: str):
        self.axiom = axiom
        self.triple = triple
        super().__init__(f"{axiom} axiom violated at {triple}: {message}")


@dataclass(frozen=True)
class CohClass:
    degree: int
    coords: tuple

    def __add__(self, other: CohClass) -> CohClass:
        if other.degree != self.degree:
            raise ValueError("cannot add classes of different degree")
        return CohClass(self.degree, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def scale(self, c) -> CohClass:
        return CohClass(self.degree, tuple(c * a for a in self.coords))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)


@dataclass(frozen=True, eq=False)
class GradedRing:
    name: str
    betti: tuple[int, ...]
    labels: tuple[tuple[str, ...], ...]
    # products[(x, y)] = coordinates of x cup y in degree |x| + |y|; zero products omitted
    products: Mapping[tuple[Basis, Basis], tuple[Fraction, ...]] = field(repr=False)

    @property
    def top(self) -> int:
        return len(self.betti) - 1

    def b(self, n: int) -> int:
        return self.betti[n] if 0 <= n <= self.top else 0

    def basis(self, n: int | None = None) -> list[Basis]:
        degs = range(self.top + 1) if n is None else [n]
        return [(p, i) for p in degs for i in range(self.b(p))]

    def unit(self) -> CohClass:
        return CohClass(0, (Fraction(1),))

    def basis_class(self, p: int, i: int) -> CohClass:
        return CohClass(p, tuple(Fraction(int(j == i)) for j in range(self.b(p))))

    def zero(self, p: int) -> CohClass:
        return CohClass(p, tuple(Fraction(0) for _ in range(self.b(p))))

    def product(self, x: Basis, y: Basis) -> tuple[Fraction, ...]:
        r = x[0] + y[0]
        got = self.products.get((x, y))
        return got if got is not None else tuple(Fraction(0) for _ in range(self.b(r)))

    def cup_tensor(self, p: int, q: int) -> list[list[tuple[Fraction, ...]]]:
        """T[i][j] = coordinates of e^p_i cup e^q_j."""
        return [[self.product((p, i), (q, j)) for j in range(self.b(q))] for i in range(self.b(p))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedRing):
            return NotImplemented
        return (
            self.name == other.name
            and self.betti == other.betti
            and self.labels == other.labels
            and dict(self.products) == dict(other.products)
        )

    def __hash__(self) -> int:
        return hash((self.name, self.betti))

    def poincare_symmetric(self) -> bool:
        return all(self.betti[n] == self.betti[self.top - n] for n in range(self.top + 1))


def cup(R: GradedRing, x: CohClass, y: CohClass) -> CohClass:
    r = x.degree + y.degree
    out = [0] * R.b(r)
    if not out:
        return CohClass(r, ())
    for i, a in enumerate(x.coords):
        if a == 0:
            continue
        for j, b in enumerate(y.coords):
            if b == 0:
                continue
            ab = a * b
            for l, c in enumerate(R.product((x.degree, i), (y.degree, j))):
                if c:
                    out[l] += ab * c
    return CohClass(r, tuple(out))


def cup_power(R: GradedRing, x: CohClass, e: int) -> CohClass:
    out = R.unit()
    for _ in range(e):
        out = cup(R, out, x)
    return out


# -- construction and validation -------------------------------------------------


def build_ring(name: str, betti, products: Mapping, labels=None, symmetrize: bool = True) -> GradedRing:
    """Assemble and validate a ring.

    ``products`` maps pairs of basis elements to coordinate vectors. Unit
    products are implied. With ``symmetrize`` a product given in one order
    only is completed by graded commutativity; products given in both orders
    are checked against each other.
    """
    betti = tuple(int(b) for b in betti)
    if not betti:
        raise RingAxiomError("shape", (), "empty betti sequence")
    if any(b < 0 for b in betti):
        raise RingAxiomError("shape", (), f"negative betti number in {betti}")
    if betti[0] != 1:
        raise RingAxiomError("unit", ((0, 0),), f"b_0 must be 1, got {betti[0]}")
    top = len(betti) - 1
    if labels is None:
        labels = tuple(tuple(f"e{p}_{i}" for i in range(b)) for p, b in enumerate(betti))
    labels = tuple(tuple(l) for l in labels)
    if tuple(len(l) for l in labels) != betti:
        raise RingAxiomError("shape", (), "basis labels do not match betti numbers")

    def bdim(n):
        return betti[n] if 0 <= n <= top else 0

    table: dict[tuple[Basis, Basis], tuple[Fraction, ...]] = {}
    for (x, y), vec in products.items():
        x, y = tuple(x), tuple(y)
        for z in (x, y):
            if not (0 <= z[0] <= top and 0 <= z[1] < betti[z[0]]):
                raise RingAxiomError("shape", (x, y), f"basis element {z} does not exist")
        vec = tuple(Fraction(c) for c in vec)
        r = x[0] + y[0]
        if len(vec) != bdim(r):
            if any(vec) and r > top:
                raise RingAxiomError("degree", (x, y), f"nonzero product lands in degree {r} > top {top}")
            if any(vec):
                raise RingAxiomError("shape", (x, y), f"product vector has length {len(vec)}, expected {bdim(r)}")
            continue
        if x == (0, 0) or y == (0, 0):
            other = y if x == (0, 0) else x
            expect = tuple(Fraction(int(i == other[1])) for i in range(bdim(r)))
            if vec != expect:
                raise RingAxiomError("unit", (x, y), "the unit must act as the identity")
            continue
        if any(vec):
            table[(x, y)] = vec

    for p in range(top + 1):
        for i in range(betti[p]):
            e = tuple(Fraction(int(j == i)) for j in range(betti[p]))
            table[((0, 0), (p, i))] = e
            table[((p, i), (0, 0))] = e

    if symmetrize:
        for (x, y), vec in list(table.items()):
            if (y, x) not in table:
                sign = -1 if (x[0] * y[0]) % 2 else 1
                table[(y, x)] = tuple(sign * c for c in vec)

    ring = GradedRing(name=name, betti=betti, labels=labels, products=table)
    validate(ring)
    return ring


def validate(R: GradedRing) -> None:
    """Check unit, graded commutativity and associativity on all basis triples."""
    if R.betti[0] != 1:
        raise RingAxiomError("unit", ((0, 0),), f"b_0 must be 1, got {R.betti[0]}")
    B = R.basis()
    for x in B:
        if R.product((0, 0), x) != R.basis_class(*x).coords or R.product(x, (0, 0)) != R.basis_class(*x).coords:
            raise RingAxiomError("unit", ((0, 0), x), "the unit must act as the identity")
    for x, y in itertools.product(B, B):
        sign = -1 if (x[0] * y[0]) % 2 else 1
        if R.product(x, y) != tuple(sign * c for c in R.product(y, x)):
            raise RingAxiomError("commutativity", (x, y), f"x.y != {sign:+d} y.x")
    for x, y, z in itertools.product(B, B, B):
        if x[0] + y[0] + z[0] > R.top:
            continue
        xy = cup(R, R.basis_class(*x), R.basis_class(*y))
        yz = cup(R, R.basis_class(*y), R.basis_class(*z))
        left = cup(R, xy, R.basis_class(*z))
        right = cup(R, R.basis_class(*x), yz)
        if left.coords != right.coords:
            raise RingAxiomError("associativity", (x, y, z), "(x.y).z != x.(y.z)")


# -- presets ------------------------------------------------------------------------


def point() -> GradedRing:
    return build_ring("point", (1,), {}, labels=(("1",),))


def sphere(n: int) -> GradedRing:
    if n < 1:
        raise RingError(f"sphere dimension must be >= 1, got {n}")
    betti = [1] + [0] * (n - 1) + [1]
    labels = [("1",)] + [()] * (n - 1) + [("x",)]
    return build_ring(f"sphere({n})", betti, {}, labels=labels)


def cp(n: int) -> GradedRing:
    if n < 1:
        raise RingError(f"complex projective space needs n >= 1, got {n}")
    betti = [1 if p % 2 == 0 else 0 for p in range(2 * n + 1)]
    labels = [(("1" if p == 0 else "h" if p == 2 else f"h^{p // 2}"),) if p % 2 == 0 else () for p in range(2 * n + 1)]
    products = {}
    for a in range(1, n + 1):
        for b in range(1, n + 1 - a):
            products[((2 * a, 0), (2 * b, 0))] = (1,)
    return build_ring(f"cp({n})", betti, products, labels=labels)


def _merge_sign(s: tuple[int, ...], t: tuple[int, ...]) -> int:
    inversions = sum(1 for a in s for b in t if a > b)
    return -1 if inversions % 2 else 1


def torus(n: int) -> GradedRing:
    """Exterior algebra on n generators of degree 1."""
    if n < 1:
        raise RingError(f"torus dimension must be >= 1, got {n}")
    subsets = [list(itertools.combinations(range(1, n + 1), p)) for p in range(n + 1)]
    index = {s: (len(s), i) for p in range(n + 1) for i, s in enumerate(subsets[p])}
    labels = [tuple("".join(f"e{g}" for g in s) or "1" for s in subsets[p]) for p in range(n + 1)]
    products = {}
    for s, x in index.items():
        for t, y in index.items():
            if not s or not t or set(s) & set(t):
                continue
            u = tuple(sorted(s + t))
            deg, pos = index[u]
            vec = [0] * len(subsets[deg])
            vec[pos] = _merge_sign(s, t)
            products[(x, y)] = tuple(vec)
    return build_ring(f"torus({n})", [len(s) for s in subsets], products, labels=labels)


def product(A: GradedRing, B: GradedRing) -> GradedRing:
    """Tensor product with Koszul signs: (a.b)(a'.b') = (-1)^{|b||a'|} (aa').(bb')."""
    top = A.top + B.top
    order: list[list[tuple[int, int, int]]] = [[] for _ in range(top + 1)]
    for r in range(top + 1):
        for p in range(max(0, r - B.top), min(A.top, r) + 1):
            for i in range(A.b(p)):
                for j in range(B.b(r - p)):
                    order[r].append((p, i, j))
    pos = {(r, key): n for r in range(top + 1) for n, key in enumerate(order[r])}
    labels = []
    for r in range(top + 1):
        row = []
        for p, i, j in order[r]:
            la, lb = A.labels[p][i], B.labels[r - p][j]
            row.append("1" if la == lb == "1" else la if lb == "1" else lb if la == "1" else f"{la}.{lb}")
        labels.append(tuple(row))
    products = {}
    for r in range(top + 1):
        for s in range(top + 1 - r):
            for x, (p, i, j) in enumerate(order[r]):
                for y, (p2, i2, j2) in enumerate(order[s]):
                    qa, qb = r - p, s - p2
                    va = A.product((p, i), (p2, i2))
                    vb = B.product((qa, j), (qb, j2))
                    if not any(va) or not any(vb):
                        continue
                    sign = -1 if (qa * p2) % 2 else 1
                    vec = [Fraction(0)] * len(order[r + s])
                    for a, ca in enumerate(va):
                        for b, cb in enumerate(vb):
                            if ca and cb:
                                vec[pos[(r + s, (p + p2, a, b))]] += sign * ca * cb
                    if any(vec):
                        products[((r, x), (s, y))] = tuple(vec)
    return build_ring(f"product({A.name},{B.name})", [len(o) for o in order], products, labels=labels)


def wedge(A: GradedRing, B: GradedRing) -> GradedRing:
    """Units identified, positive degrees summed, mixed products zero."""
    top = max(A.top, B.top)
    betti = [1] + [A.b(p) + B.b(p) for p in range(1, top + 1)]
    labels = [("1",)] + [
        (A.labels[p] if p <= A.top else ()) + (B.labels[p] if p <= B.top else ()) for p in range(1, top + 1)
    ]
    products = {}
    for second, R in enumerate((A, B)):
        # B's basis sits after A's in every positive degree
        def place(z):
            return (z[0], z[1] + (A.b(z[0]) if second else 0))

        for x in R.basis():
            for y in R.basis():
                if x[0] == 0 or y[0] == 0:
                    continue
                v = R.product(x, y)
                if not any(v):
                    continue
                r = x[0] + y[0]
                vec = [Fraction(0)] * betti[r]
                for l, c in enumerate(v):
                    vec[place((r, l))[1]] = c
                products[(place(x), place(y))] = tuple(vec)
    return build_ring(f"wedge({A.name},{B.name})", betti, products, labels=labels)


_ALIASES = [
    (re.compile(r"^(?:pt|point)$"), lambda m: point()),
    (re.compile(r"^(?:sphere|S)\(?(\d+)\)?$"), lambda m: sphere(int(m.group(1)))),
    (re.compile(r"^(?:cp|CP)\(?(\d+)\)?$"), lambda m: cp(int(m.group(1)))),
    (re.compile(r"^(?:torus|T)\(?(\d+)\)?$"), lambda m: torus(int(m.group(1)))),
]


def _split_args(body: str) -> list[str]:
    depth = 0
    parts, cur = [], []
    for ch in body:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def preset(spec: str) -> GradedRing:
    """Parse names like ``point``, ``sphere(3)``, ``cp2``, ``product(cp(1),cp(1))``."""
    s = spec.replace(" ", "")
    for head, fn in (("product", product), ("wedge", wedge)):
        if s.startswith(head + "(") and s.endswith(")"):
            args = _split_args(s[len(head) + 1 : -1])
            if len(args) != 2:
                raise RingError(f"{head} takes two arguments: {spec!r}")
            return fn(preset(args[0]), preset(args[1]))
    for pat, make in _ALIASES:
        m = pat.match(s)
        if m:
            return make(m)
    raise RingError(f"unknown space {spec!r}")


# -- ring files -----------------------------------------------------------------------


def format_fraction(c: Fraction) -> str:
    c = Fraction(c)
    sign = "-" if c < 0 else "+"
    a = abs(c)
    return f"{sign}{a.numerator}" if a.denominator == 1 else f"{sign}{a.numerator}/{a.denominator}"


def _parse_basis_ref(tok: str, line: int) -> Basis:
    m = re.fullmatch(r"(\d+):(\d+)", tok)
    if not m:
        raise RingParseError(line, f"bad basis reference {tok!r}, expected <degree>:<index>")
    return int(m.group(1)), int(m.group(2))


def _parse_term(tok: str, line: int) -> tuple[Fraction, Basis]:
    m = re.fullmatch(r"([+-]?\d+(?:/\d+)?)\*(\d+:\d+)", tok)
    if not m:
        raise RingParseError(line, f"bad product term {tok!r}, expected <coef>*<degree>:<index>")
    try:
        c = Fraction(m.group(1))
    except (ValueError, ZeroDivisionError) as exc:
        raise RingParseError(line, f"bad coefficient {m.group(1)!r}") from exc
    return c, _parse_basis_ref(m.group(2), line)


def parse_terms(text: str, line: int = 0) -> list[tuple[Fraction, Basis]]:
    """Parse ``+1*2:0 + -1/2*2:1`` style linear combinations of basis elements."""
    toks = [t for t in text.replace("+ ", " ").split() if t != "+"]
    return [_parse_term(t, line) for t in toks]


def loads_ring(text: str) -> GradedRing:
    name = None
    top = None
    betti = None
    labels: dict[int, tuple[str, ...]] = {}
    raw: dict[tuple[Basis, Basis], dict[Basis, Fraction]] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "name":
            if not rest:
                raise RingParseError(lineno, "empty name")
            name = rest
        elif key == "top":
            try:
                top = int(rest)
            except ValueError as exc:
                raise RingParseError(lineno, f"bad top degree {rest!r}") from exc
        elif key == "betti":
            try:
                betti = tuple(int(t) for t in rest.split())
            except ValueError as exc:
                raise RingParseError(lineno, f"bad betti line {rest!r}") from exc
        elif key == "basis":
            toks = rest.split()
            if not toks or not toks[0].isdigit():
                raise RingParseError(lineno, "basis line needs a degree")
            labels[int(toks[0])] = tuple(toks[1:])
        elif key == "cup":
            lhs, eq, rhs = rest.partition("=")
            if not eq:
                raise RingParseError(lineno, "cup line needs '='")
            factors = lhs.split()
            if len(factors) != 2:
                raise RingParseError(lineno, "cup line needs exactly two factors")
            x, y = (_parse_basis_ref(t, lineno) for t in factors)
            if (x, y) in raw:
                raise RingParseError(lineno, f"duplicate product {x} {y}")
            terms: dict[Basis, Fraction] = {}
            for c, z in parse_terms(rhs, lineno):
                if z[0] != x[0] + y[0]:
                    raise RingAxiomError("degree", (x, y, z), f"term in degree {z[0]} for a product of degree {x[0] + y[0]}")
                terms[z] = terms.get(z, Fraction(0)) + c
            raw[(x, y)] = terms
        else:
            raise RingParseError(lineno, f"unknown directive {key!r}")
    if name is None or top is None or betti is None:
        raise RingParseError(0, "ring file needs name, top and betti lines")
    if len(betti) != top + 1:
        raise RingParseError(0, f"betti has {len(betti)} entries but top is {top}")
    label_rows = []
    for p, b in enumerate(betti):
        got = labels.get(p)
        if got is None:
            got = ("1",) if p == 0 and b == 1 else tuple(f"e{p}_{i}" for i in range(b))
        label_rows.append(got)
    products = {}
    for (x, y), terms in raw.items():
        r = x[0] + y[0]
        if r > top:
            if any(terms.values()):
                raise RingAxiomError("degree", (x, y), f"nonzero product lands in degree {r} > top {top}")
            continue
        vec = [Fraction(0)] * betti[r]
        for (deg, idx), c in terms.items():
            if idx >= betti[r]:
                raise RingAxiomError("shape", (x, y), f"basis element {(deg, idx)} does not exist")
            vec[idx] += c
        products[(x, y)] = tuple(vec)
    return build_ring(name, betti, products, labels=label_rows)


def load_ring(path) -> GradedRing:
    return loads_ring(Path(path).read_text())


def dumps_ring(R: GradedRing) -> str:
    lines = [f"name {R.name}", f"top {R.top}", "betti " + " ".join(str(b) for b in R.betti)]
    for p in range(R.top + 1):
        if R.b(p):
            lines.append(f"basis {p} " + " ".join(R.labels[p]))
    for x, y in sorted(R.products):
        if x == (0, 0) or y == (0, 0):
            continue
        vec = R.products[(x, y)]
        r = x[0] + y[0]
        terms = [f"{format_fraction(c)}*{r}:{l}" for l, c in enumerate(vec) if c]
        if terms:
            lines.append(f"cup {x[0]}:{x[1]} {y[0]}:{y[1]} = " + " + ".join(terms))
    return "\n".join(lines) + "\n"


def parse_class(R: GradedRing, text: str) -> CohClass:
    """A class written as ``2:0`` or a combination such as ``+1*2:0 + +1*2:1``."""
    t = text.strip()
    if re.fullmatch(r"\d+:\d+", t):
        terms = [(Fraction(1), _parse_basis_ref(t, 0))]
    else:
        terms = parse_terms(t)
    degs = {z[0] for _, z in terms}
    if len(degs) != 1:
        raise RingError(f"class {text!r} must be homogeneous")
    (deg,) = degs
    coords = [Fraction(0)] * R.b(deg)
    for c, (_, i) in terms:
        if i >= len(coords):
            raise RingError(f"basis element {deg}:{i} does not exist in {R.name}")
        coords[i] += c
    return CohClass(deg, tuple(coords))


# -- hard Lefschetz ---------------------------------------------------------------------


def multiplication_matrix(R: GradedRing, w: CohClass, e: int, n: int) -> sympy.Matrix:
    """Matrix of x -> w^e . x from H^n to H^(n + e |w|), columns indexed by the H^n basis."""
    we = cup_power(R, w, e)
    target = n + e * w.degree
    cols = [cup(R, we, R.basis_class(n, i)).coords for i in range(R.b(n))]
    return sympy.Matrix(R.b(target), R.b(n), lambda r, c: sympy.Rational(cols[c][r]))


@dataclass(frozen=True)
class LefschetzReport:
    ring: str
    complex_dim: int
    omega: tuple
    # n -> (isomorphism?, rank, dim H^n, dim H^(2d-n))
    isomorphisms: dict[int, tuple[bool, int, int, int]]
    # even n <= 2d/3 -> (injective?, rank, dim H^n)
    injectivity: dict[int, tuple[bool, int, int]]
    poincare_symmetric: bool

    @property
    def lefschetz_holds(self) -> bool:
        return all(ok for ok, *_ in self.isomorphisms.values())

    @property
    def injective_ok(self) -> bool:
        return all(ok for ok, *_ in self.injectivity.values())

    def failures(self) -> list[int]:
        return sorted({n for n, (ok, *_) in self.isomorphisms.items() if not ok} | {n for n, (ok, *_) in self.injectivity.items() if not ok})


def hard_lefschetz_report(R: GradedRing, omega: CohClass) -> LefschetzReport:
    if omega.degree != 2:
        raise RingError(f"the Lefschetz class must have degree 2, got {omega.degree}")
    if R.top % 2:
        raise RingError(f"{R.name} has odd top degree {R.top}")
    d = R.top // 2
    isos = {}
    for n in range(d):
        M = multiplication_matrix(R, omega, d - n, n)
        rank = M.rank() if M.rows and M.cols else 0
        bn, bt = R.b(n), R.b(2 * d - n)
        isos[n] = (bn == bt and rank == bn, rank, bn, bt)
    inj = {}
    for n in range(0, R.top + 1, 2):
        if 3 * n > 2 * d:
            break
        M = multiplication_matrix(R, omega, n // 2, n)
        rank = M.rank() if M.rows and M.cols else 0
        inj[n] = (rank == R.b(n), rank, R.b(n))
    return LefschetzReport(
        ring=R.name,
        complex_dim=d,
        omega=omega.coords,
        isomorphisms=isos,
        injectivity=inj,
        poincare_symmetric=R.poincare_symmetric(),
    )
