"""Explicit divergence witnesses: rank-one intervals and type D rectangles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..kernels import IntegrandSpec, integrand_phi
from .integrate import gauss_panels


def lower_bound_rank1(t: float, N: int) -> np.ndarray:
    """Partial sums of the k = 2, nu = 0 witness over [j pi/t, (2j+1) pi/(2t)].

    On these intervals cos^4(t lam - pi/4) >= 1/4, so the leading Bessel term
    gives phi >= 1 / (pi^2 t^2 lam); each interval contributes
    ln((2j+1)/(2j)) / (pi^2 t^2).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    j = np.arange(1, N + 1, dtype=float)
    return np.cumsum(np.log1p(0.5 / j)) / (math.pi ** 2 * t * t)


def rank1_intervals(t: float, N: int) -> np.ndarray:
    j = np.arange(1, N + 1, dtype=float)
    return np.column_stack([j * math.pi / t, (2 * j + 1) * math.pi / (2 * t)])


@dataclass(frozen=True)
class Rectangles:
    lam1: np.ndarray  # (N, 2) lower/upper edges
    lam2: np.ndarray
    area: float
    bounds: np.ndarray  # per-rectangle lower bounds
    partial_sums: np.ndarray


def typeD_rectangles(x: float, eta: float, N: int) -> Rectangles:
    """Rectangles I_n, n = 1..N, around x lam_1 = (n + 7/4) pi, x lam_2 = (n + 1/4) pi.

    Inside I_n the leading asymptotics of the r = 0 type D integrand give
    phi >= 16 D_n^4 / (pi^4 x^4 l1 l2 (l1^2 - l2^2)^2) with
    D_n = l1_min cos^2(eta) - l2_max sin^2(eta); l1, l2 and l1^2 - l2^2 are
    then replaced by their largest values on the rectangle.
    """
    if not 0 < eta < math.pi / 4:
        raise ValueError("eta must lie in (0, pi/4)")
    if x <= 0 or N < 1:
        raise ValueError("need x > 0 and N >= 1")
    n = np.arange(1, N + 1, dtype=float)
    c1 = (n + 1.75) * math.pi
    c2 = (n + 0.25) * math.pi
    lam1 = np.column_stack([c1 - eta, c1 + eta]) / x
    lam2 = np.column_stack([c2 - eta, c2 + eta]) / x
    area = 4 * eta ** 2 / x ** 2
    d = lam1[:, 0] * math.cos(eta) ** 2 - lam2[:, 1] * math.sin(eta) ** 2
    denom = math.pi ** 4 * x ** 4 * lam1[:, 1] * lam2[:, 1] * (lam1[:, 1] ** 2 - lam2[:, 0] ** 2) ** 2
    bounds = area * 16 * d ** 4 / denom
    return Rectangles(lam1, lam2, area, bounds, np.cumsum(bounds))


def lower_bound_typeD_rectangles(x: float, eta: float, N: int) -> np.ndarray:
    return typeD_rectangles(x, eta, N).partial_sums


def rectangle_quadrature(spec: IntegrandSpec, rects: Rectangles, order: int = 16):
    """Tensor Gauss-Legendre integral of phi over each rectangle.

    Returns (per-rectangle values, per-rectangle error estimates) where the
    error is the difference to a rule of half the order.
    """
    vals, errs = [], []
    for (a1, b1), (a2, b2) in zip(rects.lam1, rects.lam2):
        res = []
        for m in (order, order // 2):
            x1, w1 = gauss_panels(a1, b1, b1 - a1, m)
            x2, w2 = gauss_panels(a2, b2, b2 - a2, m)
            g1, g2 = np.meshgrid(x1, x2, indexing="ij")
            lam = np.column_stack([g1.ravel(), g2.ravel()])
            f = integrand_phi(spec, lam).reshape(g1.shape)
            res.append(float(w1 @ f @ w2))
        vals.append(res[0])
        errs.append(abs(res[0] - res[1]))
    return np.array(vals), np.array(errs)
