"""Stratified Monte Carlo over chamber annuli, plus a Gauss-Legendre panel oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..kernels import IntegrandSpec, integrand_phi

DEFAULT_SAMPLES = 200_000
DEFAULT_STRATA = 64
# share of samples drawn uniformly in each coordinate; the rest follow a
# log-uniform law that resolves the integrand near the walls
UNIFORM_SHARE = 0.5
FLAG_RELERR = 0.25

_GL16 = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class AnnulusEstimate:
    estimate: float
    stderr: float
    samples: int
    flagged: bool

    def __iter__(self):
        # allows ``est, err = integrate_annulus(...)``
        return iter((self.estimate, self.stderr))


def _spec_key(spec) -> int:
    if isinstance(spec, IntegrandSpec):
        return int(spec.digest()[:16], 16)
    return 0


def _rng(seed: int, key: int, level: int, stratum: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), key, int(level), int(stratum)]))


def _mixture(u: np.ndarray, length: np.ndarray, ell: float):
    """Map uniforms to [0, length) and return (y, density)."""
    a = UNIFORM_SHARE
    length = np.broadcast_to(length, u.shape)
    logspan = np.log1p(length / ell)
    lo = u < a
    y = np.where(lo, length * u / a, ell * np.expm1(logspan * (u - a) / (1 - a)))
    y = np.minimum(y, length)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = a / length + (1 - a) / ((y + ell) * logspan)
    return y, dens


def _sample_rank1(u, R_lo, R_hi):
    lam = R_lo + (R_hi - R_lo) * u[:, 0]
    return lam, np.full(lam.shape, R_hi - R_lo)


def _sample_chamber(u, R_lo, R_hi, ell):
    """Chamber l_1 > ... > l_p > 0 of the annulus, built from the bottom up.

    Coordinates are l_p and the gaps l_j - l_{j+1}; each is drawn on its
    admissible range from the uniform / log-uniform mixture, so the walls
    l_p = 0 and l_j = l_{j+1} are resolved at the scale ``ell``. The last gap
    alone carries the inner radius. The map has unit Jacobian.
    """
    n, p = u.shape
    lam = np.zeros((n, p))
    sumsq = np.zeros(n)
    prev = np.zeros(n)
    weight = np.ones(n)
    for col in range(p - 1, -1, -1):
        remaining = col + 1
        top = np.sqrt(np.maximum(R_hi ** 2 - sumsq, 0.0) / remaining)
        lo = prev
        if col == 0:
            lo = np.maximum(prev, np.sqrt(np.maximum(R_lo ** 2 - sumsq, 0.0)))
        span = np.maximum(top - lo, 0.0)
        y, dens = _mixture(u[:, col], span, ell)
        lam[:, col] = lo + y
        weight = np.where(span > 0, weight / dens, 0.0)
        sumsq = sumsq + lam[:, col] ** 2
        prev = lam[:, col]
    return lam, weight


def _dims(spec, p):
    if isinstance(spec, IntegrandSpec):
        return spec.datum.p
    return 1 if p is None else p


def _evaluator(spec) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(spec, IntegrandSpec):
        return lambda lam: integrand_phi(spec, lam)
    return spec


def integrate_annulus(spec, R_lo: float, R_hi: float, budget: int = DEFAULT_SAMPLES, *,
                      seed: int = 0, level: int = 0, strata: int = DEFAULT_STRATA,
                      p: Optional[int] = None, scale: Optional[float] = None) -> AnnulusEstimate:
    """Integral of the integrand over the chamber part of R_lo <= |lam| < R_hi.

    ``spec`` is an IntegrandSpec or a plain vectorized callable (then ``p``
    gives the dimension). Strata split the unit cube of uniforms: 64 slabs in
    rank one and rank three (radial), an 8 x 8 grid in rank two. Every stratum
    draws from its own generator seeded by (seed, spec hash, level, stratum).
    """
    if not R_lo < R_hi:
        raise ValueError(f"need R_lo < R_hi, got {R_lo}, {R_hi}")
    dim = _dims(spec, p)
    f = _evaluator(spec)
    key = _spec_key(spec)
    if scale is None:
        scale = max(spec.point.coords) if isinstance(spec, IntegrandSpec) else 1.0
    ell = 1.0 / scale
    side = max(1, int(round(strata ** (1.0 / dim))))
    cells = list(itertools.product(range(side), repeat=dim))
    n = max(2, budget // len(cells))

    us = []
    for s, cell in enumerate(cells):
        rng = _rng(seed, key, level, s)
        us.append((np.asarray(cell) + rng.random((n, dim))) / side)
    u = np.concatenate(us)
    if dim == 1:
        lam, w = _sample_rank1(u, R_lo, R_hi)
    elif dim in (2, 3):
        lam, w = _sample_chamber(u, R_lo, R_hi, ell)
    else:
        raise ValueError(f"unsupported dimension {dim}")
    vals = np.where(w > 0, f(lam) * w, 0.0).reshape(len(cells), n)
    means = vals.mean(axis=1)
    var = vals.var(axis=1, ddof=1) / n
    est = float(means.mean())
    err = float(math.sqrt(var.sum()) / len(cells))
    flagged = bool(err > FLAG_RELERR * abs(est)) if est else err > 0
    return AnnulusEstimate(est, err, n * len(cells), flagged)


# -- deterministic oracle ---------------------------------------------------

def panel_length(k: int, xmax: float) -> float:
    return math.pi / (4.0 * k * xmax)


def gauss_panels(a: float, b: float, h: float, order: int = 16):
    """Nodes and weights of composite Gauss-Legendre on [a, b], panels <= h."""
    if b <= a:
        return np.empty(0), np.empty(0)
    if order == 16:
        x, w = _GL16
    else:
        x, w = np.polynomial.legendre.leggauss(order)
    m = max(1, math.ceil((b - a) / h))
    edges = np.linspace(a, b, m + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def panel_integral_1d(func: Callable, a: float, b: float, h: float, chunk: int = 1 << 20) -> float:
    nodes, weights = gauss_panels(a, b, h)
    total = 0.0
    for i in range(0, len(nodes), chunk):
        total += float(np.dot(func(nodes[i:i + chunk]), weights[i:i + chunk]))
    return total


def panel_integral(spec: IntegrandSpec, R_lo: float, R_hi: float) -> float:
    """Deterministic integral over the chamber annulus (rank one or rank two)."""
    p = spec.datum.p
    xmax = max(spec.point.coords)
    h = panel_length(spec.k, xmax)
    if p == 1:
        return panel_integral_1d(lambda lam: integrand_phi(spec, lam), R_lo, R_hi, h)
    if p != 2:
        raise ValueError("panel quadrature covers rank one and rank two only")
    rho, wr = gauss_panels(R_lo, R_hi, h)
    th, wt = gauss_panels(0.0, math.pi / 4.0, h / R_hi)
    total = 0.0
    for i in range(0, len(rho), 256):
        rr = rho[i:i + 256, None]
        lam = np.column_stack([(rr * np.cos(th)).ravel(), (rr * np.sin(th)).ravel()])
        vals = integrand_phi(spec, lam).reshape(len(rr), len(th))
        total += float(np.sum(vals * (wr[i:i + 256, None] * rr) * wt[None, :]))
    return total
