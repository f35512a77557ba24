"""Upper-bound decay exponents of the integrand, region by region.

Each formula gives e with phi_k <= C / lam_1**e on the region. Area regions
converge when e exceeds the chamber dimension; the type A strip and the type
D region W22 are effectively one-dimensional (the transverse coordinate is
bounded), so there the threshold is 1.
"""

from __future__ import annotations

from typing import Union

from ..spaces import PointClass

Exponent = Union[float, tuple]

_FORMULAS = {
    (PointClass.REGULAR, 2, "W1"): lambda k, r: (2 * r + 1) * (k - 1) + 2 * k - 2,
    (PointClass.REGULAR, 2, "W2"): lambda k, r: (k - 2) * (1 + 2 * r) + 4 * k - 4,
    (PointClass.TYPE_D, 2, "W1"): lambda k, r: (2 * r + 1) * (2 * k - 2) - 2,
    (PointClass.TYPE_D, 2, "W21"): lambda k, r: (2 * r + 1) * (k - 1) + 2 * k - 2,
    (PointClass.TYPE_D, 2, "W22"): lambda k, r: (k - 1) * (1 + 2 * r) + 2 * k - 4,
    (PointClass.TYPE_A, 2, "strip"): lambda k, r: 4 * k - 5 - 2 * r,
    (PointClass.TYPE_A, 2, "W21"): lambda k, r: ((2 * r + 1) * (k - 1), 4 * k - 5 - 2 * r),
    (PointClass.TYPE_A, 2, "W1"): lambda k, r: (k - 2) * (2 * r + 1) + 2 * k - 2,
    (PointClass.REGULAR, 3, "W1"): lambda k, r: 3 * (1 + 2 * r) * (k - 1) + 6 * k - 6,
    (PointClass.REGULAR, 3, "W2"): lambda k, r: (1 + 2 * r) * (2 * k - 3) + 8 * k - 8,
    (PointClass.REGULAR, 3, "W3"): lambda k, r: (1 + 2 * r) * (k - 1) + 8 * k - 8,
}

_ONE_DIMENSIONAL = {(PointClass.TYPE_A, "strip"), (PointClass.TYPE_D, "W22")}


def _as_class(cls) -> PointClass:
    return cls if isinstance(cls, PointClass) else PointClass(cls)


def regions(cls, p: int = 2) -> list:
    cls = _as_class(cls)
    if p == 1:
        return ["ray"]
    return [reg for (c, q, reg) in _FORMULAS if c is cls and q == p]


def predicted_exponent(region: str, cls, k: int, r: float, p: int = 2) -> Exponent:
    """Exponent of the region's upper bound; rank one uses region "ray" with r = nu.

    Type A on W21 bounds by a product of two powers, returned as the pair
    (exponent in lam_2, exponent in lam_1).
    """
    cls = _as_class(cls)
    if p == 1:
        if region != "ray":
            raise ValueError(f"rank one has the single region 'ray', not {region!r}")
        return (2 * r + 1) * (k - 1)
    key = (cls, p, region)
    if key not in _FORMULAS:
        raise ValueError(f"no bound for region {region!r} at a {cls.value} point with p={p}")
    return _FORMULAS[key](k, r)


def region_dimension(region: str, cls, p: int) -> int:
    if p == 1 or (_as_class(cls), region) in _ONE_DIMENSIONAL:
        return 1
    return p


def region_converges(region: str, cls, k: int, r: float, p: int = 2) -> bool:
    """Sufficient condition: the bound is integrable on the region."""
    e = predicted_exponent(region, cls, k, r, p)
    dim = region_dimension(region, cls, p)
    if isinstance(e, tuple):
        # lam_2**-e2 integrable on (c, inf) and lam_1**-e1 on the strip scale
        return e[0] > 1 and e[1] > 1
    return e > dim


def predicted_exponents(cls, k: int, r: float, p: int = 2) -> dict:
    return {reg: predicted_exponent(reg, cls, k, r, p) for reg in regions(cls, p)}


def predicts_convergence(cls, k: int, r: float, p: int = 2) -> bool:
    return all(region_converges(reg, cls, k, r, p) for reg in regions(cls, p))
