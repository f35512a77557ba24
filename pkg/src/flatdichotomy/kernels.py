"""Spherical-function kernels and the dichotomy integrands.

The regular kernel is

    K(a, b) = det[g_r(a_i b_j)] / (V(a) V(b)),   a_i = x_i**2, b_j = lam_j**2,

with V(v) = prod_{i<j} (v_i - v_j). Column divided differences turn the
quotient by V(b) into ``det[h_i[b_1..b_j]] * (-1)**(p(p-1)/2)`` where
``h_i(b) = g_r(a_i b)``. Divided differences over clusters of nearby nodes are
summed from a Taylor expansion about the cluster mean, using
``h_i^{(n)}(b) = a_i**n (-1/2)**n g_{r+n}(a_i b)``; the kernel stays finite and
accurate on the chamber walls.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import specfun
from .spaces import OrbitPoint, PointClass, RootDatum, SpaceError, classify_point

EPS = np.finfo(float).eps
TAYLOR_TERMS = 24
# node separations (in units of the local oscillation scale) below which
# divided differences switch to the Taylor route
CONFLUENCE = 1.0

Deriv = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class KernelValue:
    value: np.ndarray
    conditioning: np.ndarray
    confluent: np.ndarray


@dataclass(frozen=True)
class IntegrandSpec:
    datum: RootDatum
    point: OrbitPoint
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise SpaceError(f"power k must be >= 1, got {self.k}")
        if self.point.p != self.datum.p:
            raise SpaceError(
                f"point has {self.point.p} coordinates but the space has rank {self.datum.p}")
        if self.point.cls is PointClass.ZERO:
            raise SpaceError("zero orbit: the orbital measure is a point mass")
        if self.point.cls is PointClass.SINGULAR:
            raise SpaceError("singular rank-3 points have no kernel")
        if self.datum.p > 1 and self.datum.cartan_label != "AIII":
            raise SpaceError("higher-rank kernels exist for AIII only")

    @property
    def r(self) -> int:
        return self.datum.r

    @property
    def nu(self) -> float:
        return self.datum.nu

    def to_dict(self) -> dict:
        return {"space": self.datum.to_dict(), "point": self.point.to_dict(), "k": self.k}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def make_spec(datum: RootDatum, coords: Sequence[float], k: int) -> IntegrandSpec:
    return IntegrandSpec(datum, classify_point(coords), int(k))


# -- divided differences ----------------------------------------------------

def _row_deriv(r: float, a: float) -> Deriv:
    def deriv(n: int, b: np.ndarray) -> np.ndarray:
        if a == 0.0:
            return np.full_like(b, specfun.g_r(r, 0.0)) if n == 0 else np.zeros_like(b)
        return a ** n * (-0.5) ** n * specfun.g_r(r + n, a * b)
    return deriv


def _weighted_row_deriv(r: float, a: float) -> Deriv:
    """Derivatives of u(b) = b g_{r+1}(a b)."""
    inner = _row_deriv(r + 1, a)

    def deriv(n: int, b: np.ndarray) -> np.ndarray:
        out = b * inner(n, b)
        if n:
            out = out + n * inner(n - 1, b)
        return out
    return deriv


def _complete_homogeneous(d: list, kmax: int) -> list:
    """h_k(d_1, ..., d_m) for k = 0..kmax."""
    cur = [np.ones_like(d[0])]
    for k in range(1, kmax + 1):
        cur.append(cur[-1] * d[0])
    for dj in d[1:]:
        nxt = [np.ones_like(dj)]
        for k in range(1, kmax + 1):
            nxt.append(cur[k] + dj * nxt[k - 1])
        cur = nxt
    return cur


def _taylor_dd(deriv: Deriv, nodes: list) -> np.ndarray:
    m = len(nodes)
    c = sum(nodes) / m
    d = [b - c for b in nodes]
    hk = _complete_homogeneous(d, TAYLOR_TERMS - m + 1)
    total = np.zeros_like(c)
    for n in range(m - 1, TAYLOR_TERMS + 1):
        total = total + deriv(n, c) * (hk[n - m + 1] / math.factorial(n))
    return total


def _dd_pair(deriv: Deriv, h1, h2, b1, b2, a):
    sigma = _sigma(a, np.minimum(b1, b2))
    gap = b1 - b2
    close = np.abs(gap) * sigma < CONFLUENCE
    out = np.empty_like(b1)
    far = ~close
    out[far] = (h1[far] - h2[far]) / gap[far]
    if close.any():
        out[close] = _taylor_dd(deriv, [b1[close], b2[close]])
    cond = np.where(close, EPS * TAYLOR_TERMS, EPS / np.minimum(1.0, np.abs(gap) * sigma + 1e-300))
    return out, close, cond


def _dd_triple(deriv: Deriv, d12, d23, b1, b3, nodes, a):
    sigma = _sigma(a, np.minimum(np.minimum(nodes[0], nodes[1]), nodes[2]))
    spread = b1 - b3
    close = np.abs(spread) * sigma < CONFLUENCE
    out = np.empty_like(b1)
    far = ~close
    out[far] = (d12[far] - d23[far]) / spread[far]
    if close.any():
        out[close] = _taylor_dd(deriv, [v[close] for v in nodes])
    cond = np.where(close, EPS * TAYLOR_TERMS, EPS / np.minimum(1.0, np.abs(spread) * sigma + 1e-300))
    return out, close, cond


def _first_row(deriv: Deriv, nodes: list, a: float):
    """[h[b1], h[b1,b2], h[b1,b2,b3]] truncated to len(nodes) entries.

    ``a`` sets the oscillation scale of the row (h varies on the b-scale
    1/sigma with sigma from ``_sigma``), judged at the smallest node of each
    cluster.
    """
    vals = [deriv(0, b) for b in nodes]
    row = [vals[0]]
    cond = np.full_like(nodes[0], EPS)
    confl = np.zeros(nodes[0].shape, dtype=bool)
    if len(nodes) >= 2:
        d12, c12, k12 = _dd_pair(deriv, vals[0], vals[1], nodes[0], nodes[1], a)
        row.append(d12)
        confl |= c12
        cond = np.maximum(cond, k12)
    if len(nodes) == 3:
        d23, c23, k23 = _dd_pair(deriv, vals[1], vals[2], nodes[1], nodes[2], a)
        d123, c123, k123 = _dd_triple(deriv, d12, d23, nodes[0], nodes[2], nodes, a)
        row.append(d123)
        confl |= c23 | c123
        cond = np.maximum(cond, np.maximum(k23, k123))
    return row, confl, cond


def _det_and_perm(m: list) -> tuple:
    p = len(m)
    if p == 1:
        return m[0][0], np.abs(m[0][0])
    if p == 2:
        t1, t2 = m[0][0] * m[1][1], m[0][1] * m[1][0]
        return t1 - t2, np.abs(t1) + np.abs(t2)
    det = np.zeros_like(m[0][0])
    perm = np.zeros_like(m[0][0])
    for (i, j, k), sign in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                            ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
        t = m[0][i] * m[1][j] * m[2][k]
        det = det + sign * t
        perm = perm + np.abs(t)
    return det, perm


def _vandermonde(v: Sequence) -> np.ndarray:
    out = 1.0
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            out = out * (v[i] - v[j])
    return out


def _sigma(a: float, b: np.ndarray) -> np.ndarray:
    """Rate of change of g_r(a b) per unit b near b."""
    return a / (2.0 * np.maximum(1.0, np.sqrt(a * np.abs(b))))


def _as_lambda(lam, p: int) -> tuple:
    arr = np.asarray(lam, dtype=float)
    single = arr.ndim == 1 and p > 1 or arr.ndim == 0
    arr = np.atleast_2d(arr.reshape(-1, p) if arr.ndim <= 1 else arr)
    if arr.shape[-1] != p:
        raise SpaceError(f"lambda must have {p} coordinates")
    return arr, single


def _finish(value, cond, confl, single):
    if single:
        return KernelValue(value[0], cond[0], confl[0])
    return KernelValue(value, cond, confl)


# -- kernels ---------------------------------------------------------------

def kernel_rank1(nu, t: float, lam):
    """f_nu(t lam) scaled by 2**nu Gamma(nu+1) so the value at lam = 0 is 1."""
    nu = nu.nu if isinstance(nu, specfun.BesselOrder) else float(nu)
    if t <= 0:
        raise SpaceError("t must be > 0")
    lam = np.asarray(lam, dtype=float)
    scale = math.exp(nu * math.log(2.0) + math.lgamma(nu + 1.0))
    return scale * specfun.f_r(nu, t * np.abs(lam))


def _regular_raw(r: float, x: Sequence[float], lam: np.ndarray):
    p = len(x)
    a = [xi * xi for xi in x]
    b = [lam[:, j] ** 2 for j in range(p)]
    rows, confl, cond = [], np.zeros(lam.shape[0], dtype=bool), np.full(lam.shape[0], EPS)
    for ai in a:
        row, c, k = _first_row(_row_deriv(r, ai), b, ai)
        rows.append(row)
        confl |= c
        cond = np.maximum(cond, k)
    det, perm = _det_and_perm(rows)
    sign = -1.0 if (p * (p - 1) // 2) % 2 else 1.0
    va = _vandermonde(a)
    value = sign * det / va
    with np.errstate(divide="ignore", invalid="ignore"):
        cancel = np.where(det != 0, perm / np.abs(det), np.inf)
    cond = cond + EPS * cancel
    # near-equal x_i make the row quotient ill-conditioned
    if p > 1:
        rel_gap = min(abs(a[i] - a[j]) for i in range(p) for j in range(i + 1, p)) / max(a)
        cond = cond + EPS / max(rel_gap, 1e-300)
    return value, cond, confl


def kernel_regular(p: int, r: float, X, lam, normalized: bool = False) -> KernelValue:
    """det[f_r(x_i lam_j)] / (V(x^2) V(lam^2)) evaluated stably.

    ``X`` is an OrbitPoint or coordinate sequence with distinct entries (a
    single zero is allowed); ``lam`` is (p,) or (N, p). With ``normalized``
    the value is divided by its lam -> 0 limit.
    """
    x = tuple(X.coords) if isinstance(X, OrbitPoint) else tuple(float(v) for v in X)
    if len(x) != p or p not in (1, 2, 3):
        raise SpaceError(f"need p in (1, 2, 3) coordinates, got {x}")
    if len(set(x)) != p:
        raise SpaceError("kernel_regular needs distinct x_i; use kernel_typeD on the diagonal")
    arr, single = _as_lambda(lam, p)
    value, cond, confl = _regular_raw(r, x, arr)
    if normalized:
        value = value / kernel_normalization(r, x)
    return _finish(value, cond, confl, single)


def kernel_normalization(r: float, x: Sequence[float]) -> float:
    """lam -> 0 limit of the raw regular kernel, through the confluent route."""
    value, _, _ = _regular_raw(r, tuple(x), np.zeros((1, len(x))))
    return float(value[0])


def kernel_typeD(r: float, x: float, lam) -> KernelValue:
    """det[[l1 f_r'(x l1), l2 f_r'(x l2)], [f_r(x l1), f_r(x l2)]] / (l1^2 - l2^2).

    Evaluated as x (u(b1) h[b1,b2] - h(b1) u[b1,b2]) with h(b) = g_r(x^2 b),
    u(b) = b g_{r+1}(x^2 b), b = lam^2, which is finite on the wall.
    """
    if x <= 0:
        raise SpaceError("type D needs x > 0")
    arr, single = _as_lambda(lam, 2)
    a = x * x
    b = [arr[:, 0] ** 2, arr[:, 1] ** 2]
    hrow, ch, kh = _first_row(_row_deriv(r, a), b, a)
    urow, cu, ku = _first_row(_weighted_row_deriv(r, a), b, a)
    t1, t2 = urow[0] * hrow[1], hrow[0] * urow[1]
    value = x * (t1 - t2)
    with np.errstate(divide="ignore", invalid="ignore"):
        cancel = np.where(value != 0, x * (np.abs(t1) + np.abs(t2)) / np.abs(value), np.inf)
    cond = np.maximum(kh, ku) + EPS * cancel
    return _finish(value, cond, ch | cu, single)


def kernel_typeD_normalization(r: float, x: float) -> float:
    return float(kernel_typeD(r, x, np.zeros((1, 2))).value[0])


def kernel_typeA(r: float, x: float, lam) -> np.ndarray:
    """(f_r(x l1) - f_r(x l2)) / (l1^2 - l2^2), stable near l1 = l2."""
    if x <= 0:
        raise SpaceError("type A needs x > 0")
    arr, single = _as_lambda(lam, 2)
    a = x * x
    b = [arr[:, 0] ** 2, arr[:, 1] ** 2]
    row, _, _ = _first_row(_row_deriv(r, a), b, a)
    return row[1][0] if single else row[1]


def spherical_kernel(spec_or_datum, point: OrbitPoint, lam, normalized: bool = True) -> np.ndarray:
    """Kernel value for any supported point class, optionally normalized to 1 at 0."""
    datum = spec_or_datum.datum if isinstance(spec_or_datum, IntegrandSpec) else spec_or_datum
    if datum.p == 1:
        t = point.coords[0]
        lam = np.asarray(lam, dtype=float)
        if lam.ndim and lam.shape[-1:] == (1,):
            lam = lam[..., 0]
        return kernel_rank1(datum.nu, t, lam) if normalized else specfun.f_r(datum.nu, t * lam)
    r = datum.r
    if point.cls in (PointClass.REGULAR, PointClass.TYPE_A):
        return kernel_regular(datum.p, r, point, lam, normalized=normalized).value
    if point.cls is PointClass.TYPE_D:
        v = kernel_typeD(r, point.coords[0], lam).value
        return v / kernel_typeD_normalization(r, point.coords[0]) if normalized else v
    raise SpaceError(f"no kernel for class {point.cls.value}")


def _phi_rank1(spec: IntegrandSpec, lam: np.ndarray) -> np.ndarray:
    nu = spec.nu
    t = spec.point.coords[0]
    lam = np.abs(lam)
    return np.abs(specfun.f_r(nu, t * lam)) ** (2 * spec.k) * lam ** (2 * nu + 1)


def integrand_phi(spec: IntegrandSpec, lam) -> np.ndarray:
    """Plancherel-weighted |kernel|**(2k) at chamber points (rows of ``lam``).

    Coordinates are sorted into the chamber first, so the value is symmetric
    under permutations. Constant factors depending only on X are kept as in
    the determinant normalization; none of them affects convergence.
    """
    p = spec.datum.p
    if p == 1:
        arr = np.asarray(lam, dtype=float)
        if arr.ndim and arr.shape[-1:] == (1,):
            arr = arr[..., 0]
        return _phi_rank1(spec, arr)
    arr, single = _as_lambda(lam, p)
    arr = -np.sort(-np.abs(arr), axis=1)
    r = spec.r
    cls = spec.point.cls
    if cls is PointClass.REGULAR:
        kern = _regular_raw(r, spec.point.coords, arr)[0]
    elif cls is PointClass.TYPE_D:
        kern = kernel_typeD(r, spec.point.coords[0], arr).value
    elif cls is PointClass.TYPE_A:
        kern = kernel_typeA(r, spec.point.coords[0], arr)
    else:
        raise SpaceError(f"no integrand for class {cls.value}")
    b = arr ** 2
    vb = _vandermonde([b[:, j] for j in range(p)])
    out = np.abs(kern) ** (2 * spec.k) * vb * vb * np.prod(arr, axis=1) ** (1 + 2 * r)
    return out[0] if single else out
