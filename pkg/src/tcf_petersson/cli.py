"""Command-line front end.

Usage:
    tcf-petersson cusp dim --weight 12
    tcf-petersson cusp basis --weight 24 --prec 10
    tcf-petersson hecke matrix --weight 24 --index 2
    tcf-petersson hecke eigen --weight 24
    tcf-petersson petersson gram --weight 12
    tcf-petersson petersson selfadj --weight 24 --index 5
    tcf-petersson ring preset cp --n 2
    tcf-petersson ring load examples/cp2.ring
    tcf-petersson ring lefschetz "cp(3)" --omega 2:0
    tcf-petersson tpp dims --space "cp(2)" --degree -24
    tcf-petersson tpp product --space "cp(2)" --degree -24 --f f.txt --g g.txt
    tcf-petersson tpp radical --space "cp(2)" --degree -28
    tcf-petersson tpp witness --space "sphere(3)" --degree -21
    tcf-petersson tpp kahler --space "cp(3)" --degree -24 --omega 2:0
    tcf-petersson tpp hecke-check --space "cp(2)" --degree -24 --prime 2 --r 0
    tcf-petersson repro cp2

Reports are JSON on stdout with sorted keys. Exit status: 0 success,
1 computation-level failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import platform
import re
import sys
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import cohomology, modforms, petersson, qexp, tpp

DIGITS = 12


class ComputationFailure(Exception):
    """A recipe or check ran to completion but its expected structure did not hold."""


# -- serialization ------------------------------------------------------------------------


def fmt_real(x: float) -> str:
    return f"{float(x):.{DIGITS}e}"


def fmt_complex(z) -> dict:
    z = complex(z)
    return {"re": fmt_real(z.real), "im": fmt_real(z.imag)}


def fmt_number(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return fmt_complex(x)


def fmt_matrix(rows) -> list:
    return [[fmt_number(x) for x in row] for row in rows]


def fmt_value(v: tpp.TppValue) -> dict:
    return {str(p): [fmt_number(c) for c in v[p]] for p in sorted(v.classes)}


def fmt_element(f: tpp.TcfElement) -> dict:
    return {str(n): fmt_matrix(a.tolist()) for n, a in sorted(f.components.items())}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def provenance() -> dict:
    return {
        "package": "tcf_petersson",
        "version": _version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "tolerances": {
            "eigen_residual": modforms.EIGEN_RESIDUAL_TOL,
            "radical_rtol": tpp.RADICAL_RTOL,
        },
    }


def emit(argv, config: dict, results: dict, status: str = "ok") -> str:
    report = {
        "command": list(argv),
        "config": config,
        "provenance": provenance(),
        "results": results,
        "status": status,
    }
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


# -- argument helpers ------------------------------------------------------------------------


def _space(spec: str) -> cohomology.GradedRing:
    path = Path(spec)
    if path.is_file():
        return cohomology.load_ring(path)
    return cohomology.preset(spec)


def _quad_args(p: argparse.ArgumentParser) -> None:
    d = petersson.DEFAULT_CONFIG
    p.add_argument("--qprec", type=int, default=d.qprec)
    p.add_argument("--vmax", type=float, default=d.vmax)
    p.add_argument("--nu", type=int, default=d.nu)
    p.add_argument("--nv", type=int, default=d.nv)
    p.add_argument("--no-refine", action="store_true", help="skip the grid-doubling error estimate")


def _quad_cfg(args) -> petersson.QuadratureConfig:
    return petersson.QuadratureConfig(qprec=args.qprec, vmax=args.vmax, nu=args.nu, nv=args.nv, refine=not args.no_refine)


def _grams(args) -> tpp.QuadratureGrams:
    return tpp.QuadratureGrams(_quad_cfg(args))


# -- commands ------------------------------------------------------------------------------------


def cmd_cusp_dim(args):
    return {"weight": args.weight}, {"dim": modforms.dim_cusp(args.weight)}


def cmd_cusp_basis(args):
    prec = args.prec if args.prec is not None else modforms.dim_cusp(args.weight) + 1
    S = modforms.cusp_basis(args.weight, prec)
    return {"weight": args.weight, "prec": prec}, {
        "dim": S.dim,
        "basis": [[str(c) for c in b.coeffs] for b in S.basis],
    }


def cmd_hecke_matrix(args):
    prec = args.prec if args.prec is not None else modforms.required_prec(args.weight, args.index)
    H = modforms.hecke_matrix(args.weight, args.index, prec)
    return {"weight": args.weight, "index": args.index, "prec": prec}, {"dim": H.dim, "matrix": fmt_matrix(H.entries)}


def cmd_hecke_eigen(args):
    forms = modforms.eigenforms(args.weight)
    return {"weight": args.weight, "primes": [2, 3, 5]}, {
        "eigenforms": [
            {"eigenvalues": {str(p): fmt_complex(v) for p, v in e.eigenvalues.items()}, "vector": [fmt_complex(x) for x in e.vector]}
            for e in forms
        ]
    }


def cmd_petersson_gram(args):
    cfg = _quad_cfg(args)
    G = petersson.gram(args.weight, cfg)
    return {"weight": args.weight, "quadrature": cfg.as_dict()}, {
        "dim": G.dim,
        "gram": fmt_matrix(G.matrix.tolist()),
        "error_estimate": fmt_real(G.error_estimate),
        "min_eigenvalue": fmt_real(G.min_eigenvalue()),
    }


def cmd_petersson_selfadj(args):
    cfg = _quad_cfg(args)
    res = petersson.self_adjointness_residual(args.weight, args.index, cfg)
    fine = petersson.self_adjointness_residual(args.weight, args.index, cfg.doubled())
    return {"weight": args.weight, "index": args.index, "quadrature": cfg.as_dict()}, {
        "residual": fmt_real(res),
        "residual_doubled_grid": fmt_real(fine),
    }


def _ring_summary(R: cohomology.GradedRing) -> dict:
    return {
        "name": R.name,
        "top": R.top,
        "betti": R.betti,
        "labels": [list(l) for l in R.labels],
        "poincare_symmetric": R.poincare_symmetric(),
        "ring_file": cohomology.dumps_ring(R),
    }


def cmd_ring_preset(args):
    spec = args.name if args.n is None else f"{args.name}({args.n})"
    R = cohomology.preset(spec)
    if args.write:
        Path(args.write).write_text(cohomology.dumps_ring(R))
    return {"preset": spec}, _ring_summary(R)


def cmd_ring_load(args):
    R = cohomology.load_ring(args.path)
    return {"path": args.path}, _ring_summary(R)


def _lefschetz_dict(rep: cohomology.LefschetzReport) -> dict:
    return {
        "complex_dim": rep.complex_dim,
        "omega": [str(c) for c in rep.omega],
        "isomorphisms": {str(n): {"ok": ok, "rank": r, "dim_source": a, "dim_target": b} for n, (ok, r, a, b) in rep.isomorphisms.items()},
        "injectivity": {str(n): {"ok": ok, "rank": r, "dim": a} for n, (ok, r, a) in rep.injectivity.items()},
        "lefschetz_holds": rep.lefschetz_holds,
        "injective_ok": rep.injective_ok,
        "poincare_symmetric": rep.poincare_symmetric,
    }


def cmd_ring_lefschetz(args):
    R = _space(args.space)
    omega = cohomology.parse_class(R, args.omega)
    rep = cohomology.hard_lefschetz_report(R, omega)
    return {"space": R.name, "omega": args.omega}, _lefschetz_dict(rep)


def cmd_tpp_dims(args):
    R = _space(args.space)
    dims = tpp.component_dims(R, args.degree)
    return {"space": R.name, "degree": args.degree}, {
        "components": {str(n): {"betti": R.b(n), "weight": _weight_str(n, args.degree), "dim": d} for n, d in dims.items()},
        "total": sum(dims.values()),
    }


def _weight_str(n, m):
    w = tpp.weight_of(n, m)
    return str(w) if w is not None else f"{n - m}/2"


def cmd_tpp_product(args):
    R = _space(args.space)
    f = tpp.loads_element(Path(args.f).read_text(), R, args.degree)
    g = tpp.loads_element(Path(args.g).read_text(), R, args.degree)
    grams = _grams(args)
    config = {"space": R.name, "degree": args.degree, "f": args.f, "g": args.g, "quadrature": grams.cfg.as_dict()}
    if args.weight is not None:
        config["weight"] = args.weight
        c = tpp.weight_product(f, g, args.weight, grams)
        return config, {"weight_product": {"degree": c.degree, "coords": [fmt_number(x) for x in c.coords]}}
    return config, {"product": fmt_value(tpp.full_product(f, g, grams))}


def _radical_dict(rep: tpp.RadicalReport) -> dict:
    return {
        "degree": rep.degree,
        "ah_degrees": list(rep.ah_degrees),
        "slice_dimension": rep.dimension,
        "radical_dimension": rep.radical_dimension,
        "nondegenerate": rep.nondegenerate,
        "radical_support": sorted({n for b in rep.basis for n, a in b.components.items() if np.max(np.abs(a), initial=0) > 1e-9}),
    }


def cmd_tpp_radical(args):
    R = _space(args.space)

    def keep(n):
        if args.max_ah is not None and n > args.max_ah:
            return False
        return not (args.even_only and n % 2)

    grams = _grams(args)
    rep = tpp.left_radical(R, args.degree, keep, grams)
    return {"space": R.name, "degree": args.degree, "max_ah": args.max_ah, "even_only": args.even_only, "quadrature": grams.cfg.as_dict()}, _radical_dict(rep)


def cmd_tpp_witness(args):
    R = _space(args.space)
    f = tpp.degeneracy_witness(R, args.degree)
    out = {"witness": None if f is None else fmt_element(f)}
    if f is None:
        w = tpp.weight_of(R.top, args.degree)
        out["reason"] = "point has no positive-degree cohomology" if R.top == 0 else f"S_{_weight_str(R.top, args.degree)} is zero"
        if w is not None:
            out["weight"] = w
    return {"space": R.name, "degree": args.degree}, out


def cmd_tpp_kahler(args):
    R = _space(args.space)
    omega = cohomology.parse_class(R, args.omega)
    d = args.dim if args.dim is not None else R.top // 2
    grams = _grams(args)
    rep = tpp.kahler_slice_check(R, omega, d, args.degree, grams)
    return {"space": R.name, "degree": args.degree, "omega": args.omega, "complex_dim": d, "quadrature": grams.cfg.as_dict()}, {
        "radical": _radical_dict(rep.radical),
        "lefschetz": _lefschetz_dict(rep.lefschetz),
        "certificate_ok": rep.certificate_ok,
        "consistent": rep.consistent,
    }


def cmd_tpp_hecke_check(args):
    R = _space(args.space)
    res = tpp.adams_relation_residual(R, args.degree, args.prime, args.r)
    if res != 0:
        raise ComputationFailure(f"Adams-Hecke relation residual is {res}, expected 0")
    return {"space": R.name, "degree": args.degree, "prime": args.prime, "r": args.r}, {"residual": str(res)}


# -- reproduction recipes -----------------------------------------------------------------------


REPRO_TOL = 1e-6


def _close(a, b, scale) -> bool:
    return abs(complex(a) - complex(b)) <= REPRO_TOL * max(scale, 1e-300)


def _rel(a, b) -> float:
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


def repro_point(grams) -> tuple[dict, bool]:
    R = cohomology.point()
    rng = np.random.default_rng(0)
    checks = {}
    for k in (12, 16, 24):
        f = tpp.random_element(R, -2 * k, rng)
        g = tpp.random_element(R, -2 * k, rng)
        classical, _ = petersson.inner(f.component(0)[0], g.component(0)[0], k, grams.cfg)
        v = tpp.full_product(f, g, grams)
        others = [tpp.weight_product(f, g, j, grams) for j in range(k - 3, k + 4) if j != k]
        rad = tpp.left_radical(R, -2 * k, grams=grams)
        checks[str(k)] = {
            "classical": fmt_complex(classical),
            "topological": fmt_complex(v[0][0]),
            "matches_classical": _close(v[0][0], classical, abs(classical)),
            "other_weights_vanish": all(c.is_zero() for c in others),
            "nondegenerate": rad.nondegenerate,
        }
    ok = all(c["matches_classical"] and c["other_weights_vanish"] and c["nondegenerate"] for c in checks.values())
    return {"weights": checks}, ok


def repro_sphere(n: int, grams) -> tuple[dict, bool]:
    R = cohomology.sphere(n)
    rng = np.random.default_rng(n)
    checks = {}
    for m in (-24, -23, -28, -27):
        present = [s[0] for s in tpp.slots(R, m)]
        if not present:
            continue
        f = tpp.random_element(R, m, rng)
        g = tpp.random_element(R, m, rng)
        full = tpp.full_product(f, g, grams)
        base = tpp.full_product(f.restrict(lambda a: a == 0), g.restrict(lambda a: a == 0), grams)
        rad = tpp.left_radical(R, m, grams=grams)
        block = sum(b * d for a, _, b, d in tpp.slots(R, m) if a == n)
        top_in_radical = _block_in_radical(rad, R, m, n)
        base_present = 0 in present
        checks[str(m)] = {
            "ah_degrees": present,
            "basepoint_only": all(_close(x, y, 1.0) for x, y in zip(full.vector(), base.vector())),
            "top_block_dim": block,
            "radical_dimension": rad.radical_dimension,
            "top_block_in_radical": top_in_radical,
            "radical_is_top_block": rad.radical_dimension == block,
            "basepoint_pairs_nontrivially": (not base_present) or not base.is_zero(atol=0.0),
        }
    ok = all(c["basepoint_only"] and c["top_block_in_radical"] and c["radical_is_top_block"] and c["basepoint_pairs_nontrivially"] for c in checks.values())
    return {"degrees": checks}, ok


def _block_in_radical(rad: tpp.RadicalReport, R, m, n) -> bool:
    """Is every element supported on AH degree n in the span of the radical basis?"""
    if not rad.basis:
        return not any(a == n for a, *_ in tpp.slots(R, m))
    K = np.stack([b.vector() for b in rad.basis], axis=1)
    for _, e in tpp.slice_basis(R, m, lambda a: a == n):
        v = e.vector().astype(complex)
        coef, *_ = np.linalg.lstsq(K, v, rcond=None)
        if np.linalg.norm(K @ coef - v) > 1e-8:
            return False
    return True


def repro_cp2(grams) -> tuple[dict, bool]:
    R = cohomology.cp(2)
    rng = np.random.default_rng(2)
    checks = {}
    for k in range(12, 21):
        m = -2 * k
        f = tpp.random_element(R, m, rng)
        g = tpp.random_element(R, m, rng)
        v = tpp.full_product(f, g, grams)
        expect = {0: 0j, 4: 0j}
        for ah, deg in ((0, 0), (2, 4)):
            if f.component(ah) is not None:
                w = tpp.weight_of(ah, m)
                expect[deg], _ = petersson.inner(f.component(ah)[0], g.component(ah)[0], w, grams.cfg)
        rad = tpp.left_radical(R, m, grams=grams)
        top_dim = R.b(4) * modforms.dim_cusp(k + 2)
        checks[str(k)] = {
            "weights": {"0": k, "2": k + 1, "4": k + 2},
            "degree0": fmt_complex(v[0][0]),
            "degree2_zero": all(c == 0 for c in v[2]),
            "degree4": fmt_complex(v[4][0]),
            "degree0_matches": _close(v[0][0], expect[0], abs(expect[0]) or 1.0),
            "degree4_matches": _close(v[4][0], expect[4], abs(expect[4]) or 1.0),
            "radical_dimension": rad.radical_dimension,
            "top_cell_dim": top_dim,
            "radical_is_top_cell": rad.radical_dimension == top_dim and _block_in_radical(rad, R, m, 4),
        }
    ok = all(c["degree2_zero"] and c["degree0_matches"] and c["degree4_matches"] and c["radical_is_top_cell"] for c in checks.values())
    return {"k": checks}, ok


def repro_kahler(d: int, grams) -> tuple[dict, bool]:
    R = cohomology.cp(d)
    omega = R.basis_class(2, 0)
    checks = {}
    for m in range(-24, -57, -1):
        rep = tpp.kahler_slice_check(R, omega, d, m, grams)
        if rep.radical.dimension == 0:
            continue
        checks[str(m)] = {"slice_dimension": rep.radical.dimension, "nondegenerate": rep.radical.nondegenerate, "certificate_ok": rep.certificate_ok}
    ok = all(c["nondegenerate"] and c["certificate_ok"] for c in checks.values())
    return {"complex_dim": d, "degrees": checks}, ok


def cmd_repro(args):
    grams = _grams(args)
    name = args.example
    config = {"example": name, "quadrature": grams.cfg.as_dict(), "tolerance": REPRO_TOL}
    if name in ("pt", "point"):
        res, ok = repro_point(grams)
    elif name == "cp2":
        res, ok = repro_cp2(grams)
    elif m := re.fullmatch(r"sphere-(\d+)", name):
        res, ok = repro_sphere(int(m.group(1)), grams)
    elif m := re.fullmatch(r"kahler-cp(\d+)", name):
        res, ok = repro_kahler(int(m.group(1)), grams)
    else:
        raise UsageError(f"unknown example {name!r}; expected pt, sphere-<n>, cp2 or kahler-cp<d>")
    res["pass"] = ok
    if not ok:
        raise ComputationFailure(json.dumps(res, sort_keys=True))
    return config, res


class UsageError(Exception):
    pass


# -- parser ------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcf-petersson", description="Topological Petersson products on complexified tcf-cohomology.")
    sub = parser.add_subparsers(dest="group", required=True)

    cusp = sub.add_parser("cusp").add_subparsers(dest="action", required=True)
    p = cusp.add_parser("dim")
    p.add_argument("--weight", type=int, required=True)
    p.set_defaults(func=cmd_cusp_dim)
    p = cusp.add_parser("basis")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--prec", type=int)
    p.set_defaults(func=cmd_cusp_basis)

    hecke = sub.add_parser("hecke").add_subparsers(dest="action", required=True)
    p = hecke.add_parser("matrix")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--prec", type=int)
    p.set_defaults(func=cmd_hecke_matrix)
    p = hecke.add_parser("eigen")
    p.add_argument("--weight", type=int, required=True)
    p.set_defaults(func=cmd_hecke_eigen)

    pet = sub.add_parser("petersson").add_subparsers(dest="action", required=True)
    p = pet.add_parser("gram")
    p.add_argument("--weight", type=int, required=True)
    _quad_args(p)
    p.set_defaults(func=cmd_petersson_gram)
    p = pet.add_parser("selfadj")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--index", type=int, required=True)
    _quad_args(p)
    p.set_defaults(func=cmd_petersson_selfadj)

    ring = sub.add_parser("ring").add_subparsers(dest="action", required=True)
    p = ring.add_parser("preset")
    p.add_argument("name")
    p.add_argument("--n", type=int)
    p.add_argument("--write", metavar="PATH", help="also write the ring file to PATH")
    p.set_defaults(func=cmd_ring_preset)
    p = ring.add_parser("load")
    p.add_argument("path")
    p.set_defaults(func=cmd_ring_load)
    p = ring.add_parser("lefschetz")
    p.add_argument("space")
    p.add_argument("--omega", required=True)
    p.set_defaults(func=cmd_ring_lefschetz)

    t = sub.add_parser("tpp").add_subparsers(dest="action", required=True)

    def space_parser(name, func, quad=False):
        p = t.add_parser(name)
        p.add_argument("--space", required=True)
        p.add_argument("--degree", type=int, required=True)
        if quad:
            _quad_args(p)
        p.set_defaults(func=func)
        return p

    space_parser("dims", cmd_tpp_dims)
    p = space_parser("product", cmd_tpp_product, quad=True)
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--weight", type=int)
    p = space_parser("radical", cmd_tpp_radical, quad=True)
    p.add_argument("--max-ah", type=int)
    p.add_argument("--even-only", action="store_true")
    space_parser("witness", cmd_tpp_witness)
    p = space_parser("kahler", cmd_tpp_kahler, quad=True)
    p.add_argument("--omega", required=True)
    p.add_argument("--dim", type=int)
    p = space_parser("hecke-check", cmd_tpp_hecke_check)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--r", type=int, required=True)

    p = sub.add_parser("repro")
    p.add_argument("example")
    _quad_args(p)
    p.set_defaults(func=cmd_repro)
    return parser


COMPUTATION_ERRORS = (
    ComputationFailure,
    cohomology.RingError,
    tpp.TcfError,
    qexp.PrecisionError,
    modforms.EigenformError,
    petersson.WeightMismatchError,
    ValueError,
    OSError,
)


def run(argv=None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config, results = args.func(args)
    except UsageError as exc:
        print(f"tcf-petersson: error: {exc}", file=sys.stderr)
        return 2
    except COMPUTATION_ERRORS as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        for attr in ("axiom", "triple", "line"):
            if hasattr(exc, attr):
                error[attr] = repr(getattr(exc, attr)) if attr == "triple" else getattr(exc, attr)
        out.write(emit(argv, {}, {"error": error}, status="error"))
        return 1
    # written once, at the end
    out.write(emit(argv, config, results))
    return 0


def main() -> None:
    sys.exit(run())
