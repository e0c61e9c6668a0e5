"""Petersson inner products on S_k (x) C by quadrature over the fundamental domain.

The domain {|u| <= 1/2, |tau| >= 1} is cut at v = vmax. Each vertical fibre
[sqrt(1 - u^2), vmax] is covered by Gauss-Legendre panels whose lengths grow
geometrically away from the arc, where the integrand is largest.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import special

from .modforms import cusp_basis, dim_cusp, hecke_matrix

_V_PANELS = 4


class WeightMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    qprec: int = 60
    vmax: float = 8.0
    nu: int = 64
    nv: int = 64
    refine: bool = True

    def __post_init__(self):
        if self.vmax < 2:
            raise ValueError(f"vmax must be >= 2, got {self.vmax}")
        if self.nu < 8 or self.nv < 8:
            raise ValueError(f"nu and nv must be >= 8, got nu={self.nu}, nv={self.nv}")
        if self.qprec < 10:
            raise ValueError(f"qprec must be >= 10, got {self.qprec}")

    def doubled(self) -> QuadratureConfig:
        return replace(self, nu=2 * self.nu, nv=2 * self.nv)

    def as_dict(self) -> dict:
        return {"qprec": self.qprec, "vmax": self.vmax, "nu": self.nu, "nv": self.nv, "refine": self.refine}


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class PeterssonGram:
    weight: int
    matrix: np.ndarray
    config: QuadratureConfig
    error_estimate: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())


@lru_cache(maxsize=32)
def _nodes(vmax: float, nu: int, nv: int):
    """Quadrature nodes (tau) and weights for the truncated fundamental domain."""
    xu, wu = special.roots_legendre(nu)
    u = 0.5 * xu
    wu = 0.5 * wu
    per = [nv // _V_PANELS] * _V_PANELS
    per[-1] += nv - sum(per)
    taus = []
    weights = []
    for ui, wi in zip(u, wu):
        v0 = np.sqrt(1.0 - ui * ui)
        span = vmax - v0
        edges = v0 + span * (2.0 ** np.arange(_V_PANELS + 1) - 1.0) / (2.0**_V_PANELS - 1.0)
        for a, b, m in zip(edges[:-1], edges[1:], per):
            xv, wv = special.roots_legendre(m)
            v = 0.5 * (b - a) * xv + 0.5 * (a + b)
            taus.append(ui + 1j * v)
            weights.append(wi * 0.5 * (b - a) * wv)
    return np.concatenate(taus), np.concatenate(weights)


def _basis_values(k: int, qprec: int, taus: np.ndarray) -> np.ndarray:
    S = cusp_basis(k, qprec)
    coeffs = np.array([[float(c) for c in b.coeffs] for b in S.basis])
    n = np.arange(qprec + 1)
    # q^n = exp(2 pi i n tau) computed directly, not by repeated multiplication
    Q = np.exp(2j * np.pi * np.outer(n, taus))
    return coeffs @ Q


def _cusp_tail(k: int, vmax: float, absc: np.ndarray) -> float:
    """Bound on the integral above vmax for the worst pair of basis elements.

    With |f g| <= sum_s c_s e^(-2 pi s v), c = |a| * |b| (convolution), each
    term integrates to c_s Gamma(k - 1, 2 pi s vmax) / (2 pi s)^(k - 1).
    """
    s = np.arange(2 * absc.shape[1] - 1)
    a = 2 * np.pi * np.maximum(s, 1)
    shape = k - 1
    with np.errstate(under="ignore"):
        per = special.gammaincc(shape, a * vmax) * special.gamma(shape) / a**shape
    per[0] = 0.0
    worst = 0.0
    for x in absc:
        for y in absc:
            worst = max(worst, float(np.convolve(x, y) @ per))
    return worst


def _raw_gram(k: int, cfg: QuadratureConfig) -> np.ndarray:
    taus, w = _nodes(cfg.vmax, cfg.nu, cfg.nv)
    B = _basis_values(k, cfg.qprec, taus)
    weight = w * taus.imag ** (k - 2)
    return (B * weight) @ B.conj().T


@lru_cache(maxsize=128)
def gram(k: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> PeterssonGram:
    """Gram matrix G[i, j] = <b_i, b_j> over the echelon basis of S_k."""
    d = dim_cusp(k)
    if d == 0:
        raise ValueError(f"S_{k} is zero; there is no Gram matrix")
    G = _raw_gram(k, cfg)
    err = 0.0
    if cfg.refine:
        fine = _raw_gram(k, cfg.doubled())
        err = float(np.max(np.abs(fine - G)))
        G = fine
    S = cusp_basis(k, cfg.qprec)
    absc = np.array([[abs(float(c)) for c in b.coeffs] for b in S.basis])
    err += _cusp_tail(k, cfg.vmax, absc)
    G = 0.5 * (G + G.conj().T)
    G.setflags(write=False)
    return PeterssonGram(weight=k, matrix=G, config=cfg, error_estimate=err)


def inner(f, g, k: int, cfg: QuadratureConfig = DEFAULT_CONFIG, g_weight: int | None = None) -> tuple[complex, float]:
    """<f, g> for coordinate vectors in the echelon basis of S_k.

    Linear in f, conjugate-linear in g. Returns ``(value, error_estimate)``.
    """
    if g_weight is not None and g_weight != k:
        raise WeightMismatchError(f"cannot pair weight {k} with weight {g_weight}")
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    d = dim_cusp(k)
    if f.shape != (d,) or g.shape != (d,):
        raise WeightMismatchError(f"coordinate vectors must have length dim S_{k} = {d}, got {f.shape} and {g.shape}")
    P = gram(k, cfg)
    value = complex(f @ P.matrix @ g.conj())
    err = P.error_estimate * float(np.sum(np.abs(f)) * np.sum(np.abs(g)))
    return value, err


def self_adjointness_residual(k: int, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """||T^t G - G conj(T)|| / ||G|| for T = T_n on S_k."""
    G = gram(k, cfg).matrix
    T = np.array([[float(x) for x in row] for row in hecke_matrix(k, n).entries])
    R = T.T @ G - G @ T.conj()
    return float(np.linalg.norm(R) / np.linalg.norm(G))
