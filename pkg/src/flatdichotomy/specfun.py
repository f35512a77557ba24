"""Bessel functions of the first kind and the normalized functions f_r, g_r.

Three evaluation routes are combined:

* ascending power series for ``s <= 12``,
* Miller's backward recurrence (normalized by a Neumann-type sum) in the
  transition region,
* the Hankel asymptotic expansion, truncated at its smallest term, once
  ``s >= max(20, nu**2)``.

``f_r(s) = J_r(s) / s**r`` and ``g_r(t) = f_r(sqrt(t))`` are entire functions;
near the origin they are summed from the series and never formed by division.
Derivatives use ``f_r' = -s f_{r+1}`` and ``g_r^{(m)} = (-1/2)**m g_{r+m}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SERIES_MAX = 12.0
SERIES_TERMS = 60
MAX_ORDER = 50.0
# derivative and Taylor routes need orders above MAX_ORDER internally
_INTERNAL_MAX_ORDER = 120.0
_HANKEL_TERMS = 80


class BesselDomainError(ValueError):
    """Raised for negative arguments or unsupported orders."""


class EnvelopeViolation(AssertionError):
    """Raised when a decay envelope fails to hold on the tested grid."""


@dataclass(frozen=True)
class BesselOrder:
    nu: float

    def __post_init__(self):
        if not math.isfinite(self.nu) or self.nu < 0:
            raise BesselDomainError(f"order must be finite and >= 0, got {self.nu}")


@dataclass(frozen=True)
class EnvelopeBound:
    constant: float
    exponent: float
    valid_from: float


def hankel_threshold(nu: float) -> float:
    """Smallest argument at which the Hankel expansion is used for order nu."""
    return max(20.0, nu * nu)


def _as_order(order) -> float:
    nu = order.nu if isinstance(order, BesselOrder) else float(order)
    if not math.isfinite(nu) or nu < 0:
        raise BesselDomainError(f"order must be finite and >= 0, got {nu}")
    return nu


def _as_argument(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)):
        raise BesselDomainError("argument must be finite")
    if np.any(s < 0):
        raise BesselDomainError("argument must be >= 0")
    return s


def _reduced_series(nu: float, q: np.ndarray) -> np.ndarray:
    """Sum_{l>=0} q**l * Gamma(nu+1) / (l! Gamma(nu+l+1)), compensated.

    With q = -(s/2)**2 this is J_nu(s) * Gamma(nu+1) / (s/2)**nu.
    """
    total = np.ones_like(q)
    comp = np.zeros_like(q)
    term = np.ones_like(q)
    for l in range(1, SERIES_TERMS):
        term = term * q / (l * (l + nu))
        # Neumaier summation
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        if l > 4 and np.all(np.abs(term) <= 1e-18 * np.abs(total)):
            break
    return total + comp


def _series_j(nu: float, s: np.ndarray) -> np.ndarray:
    half = s / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = np.exp(nu * np.log(half) - math.lgamma(nu + 1.0))
    if nu == 0:
        lead = np.ones_like(s)
    else:
        lead = np.where(s == 0, 0.0, lead)
    return lead * _reduced_series(nu, -half * half)


def _hankel_j(nu: float, s: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    p = np.ones_like(s)
    q = np.zeros_like(s)
    term = np.ones_like(s)
    last = np.ones_like(s)
    active = np.ones(s.shape, dtype=bool)
    for k in range(1, _HANKEL_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * s)
        mag = np.abs(term)
        # stop at the smallest term
        active &= mag < last
        if not active.any():
            break
        contrib = np.where(active, term, 0.0)
        if k % 2 == 1:
            sign = 1.0 if (k // 2) % 2 == 0 else -1.0
            q += sign * contrib
        else:
            sign = -1.0 if (k // 2) % 2 == 1 else 1.0
            p += sign * contrib
        last = np.where(active, mag, last)
        active &= mag > 1e-18
        if mu == (2 * k - 1) ** 2:
            break
    omega = s - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * s)) * (p * np.cos(omega) - q * np.sin(omega))


def _miller(nu0: float, nmax: int, s: np.ndarray) -> np.ndarray:
    """J_{nu0+n}(s) for n = 0..nmax, shape (nmax+1, len(s)); nu0 in [0, 1)."""
    s = np.atleast_1d(s)
    smax = float(s.max())
    start = int(max(nmax, smax) + 30 + 6 * math.sqrt(smax))
    start += start % 2
    out = np.zeros((nmax + 1, s.size))
    j_next = np.zeros_like(s)
    j_cur = np.full_like(s, 1e-280)
    norm = np.zeros_like(s)

    def weight(k: int) -> float:
        # coefficient of J_{nu0+k} in the Neumann sum (k even)
        m = k // 2
        if nu0 == 0.0:
            return 1.0 if k == 0 else 2.0
        return (nu0 + k) * math.exp(math.lgamma(nu0 + m) - math.lgamma(m + 1))

    for k in range(start, -1, -1):
        if k <= nmax:
            out[k] = j_cur
        if k % 2 == 0:
            norm += weight(k) * j_cur
        if k == 0:
            break
        mu = nu0 + k
        j_prev = (2.0 * mu / s) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            out *= scale
    if nu0 == 0.0:
        factor = 1.0 / norm
    else:
        factor = np.power(s / 2.0, nu0) / norm
    return out * factor


def _bessel_j_unchecked(nu: float, s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    lo = s <= SERIES_MAX
    hi = s >= hankel_threshold(nu)
    mid = ~(lo | hi)
    if lo.any():
        out[lo] = _series_j(nu, s[lo])
    if hi.any():
        out[hi] = _hankel_j(nu, s[hi])
    if mid.any():
        nu0 = nu - math.floor(nu)
        n = int(round(nu - nu0))
        out[mid] = _miller(nu0, n, s[mid])[n]
    return out


def bessel_j(order, s):
    """J_nu(s) for real order 0 <= nu <= 50 and s >= 0 (vectorized in s)."""
    nu = _as_order(order)
    if nu > MAX_ORDER:
        raise BesselDomainError(f"order {nu} exceeds supported maximum {MAX_ORDER}")
    arr = _as_argument(s)
    out = _bessel_j_unchecked(nu, np.atleast_1d(arr).ravel()).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def bessel_j_series(order, s):
    """Power-series branch only; accurate for moderate s."""
    nu = _as_order(order)
    arr = np.atleast_1d(_as_argument(s)).astype(float)
    return _series_j(nu, arr)


def bessel_j_hankel(order, s):
    """Asymptotic branch only; accurate for s well above nu**2."""
    nu = _as_order(order)
    arr = np.atleast_1d(_as_argument(s)).astype(float)
    if np.any(arr == 0):
        raise BesselDomainError("asymptotic branch needs s > 0")
    return _hankel_j(nu, arr)


def bessel_j_recurrence(order, s):
    """Miller backward-recurrence branch only (s > 0)."""
    nu = _as_order(order)
    arr = np.atleast_1d(_as_argument(s)).astype(float)
    if np.any(arr == 0):
        raise BesselDomainError("recurrence branch needs s > 0")
    nu0 = nu - math.floor(nu)
    n = int(round(nu - nu0))
    return _miller(nu0, n, arr)[n]


def _f_unchecked(nu: float, s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    lo = s <= SERIES_MAX
    if lo.any():
        half = s[lo] / 2.0
        norm = math.exp(nu * math.log(2.0) + math.lgamma(nu + 1.0))
        out[lo] = _reduced_series(nu, -half * half) / norm
    if (~lo).any():
        sh = s[~lo]
        out[~lo] = _bessel_j_unchecked(nu, sh) / np.power(sh, nu)
    return out


def _check_internal_order(nu: float) -> float:
    nu = _as_order(nu)
    if nu > _INTERNAL_MAX_ORDER:
        raise BesselDomainError(f"order {nu} too large")
    return nu


def f_r(r, s):
    """f_r(s) = J_r(s) / s**r, analytic at 0 (f_r(0) = 1 / (2**r r!))."""
    nu = _check_internal_order(r)
    arr = _as_argument(s)
    out = _f_unchecked(nu, np.atleast_1d(arr).ravel()).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def f_r_prime(r, s):
    """First derivative of f_r, computed as -s f_{r+1}(s)."""
    arr = _as_argument(s)
    return -arr * f_r(_as_order(r) + 1, arr)


def f_r_second(r, s):
    """Second derivative of f_r: -f_{r+1}(s) + s**2 f_{r+2}(s)."""
    arr = _as_argument(s)
    nu = _as_order(r)
    return -f_r(nu + 1, arr) + arr * arr * f_r(nu + 2, arr)


def _bessel_j_signed(n: int, s):
    # J_{-m} = (-1)^m J_m for integer m
    if n >= 0:
        return bessel_j(n, s)
    return (-1) ** (-n) * bessel_j(-n, s)


def f_r_prime_closed(r: int, s):
    """(s J_{r-1}(s) - 2 r J_r(s)) / s**(r+1), for integer r and s > 0."""
    s = _as_argument(s)
    return (s * _bessel_j_signed(r - 1, s) - 2 * r * bessel_j(r, s)) / s ** (r + 1)


def f_r_second_closed(r: int, s):
    """Closed form (s^2 J_{r-2} + (1-4r) s J_{r-1} + 2r(2r+1) J_r) / s^{r+2}."""
    s = _as_argument(s)
    num = (s * s * _bessel_j_signed(r - 2, s)
           + (1 - 4 * r) * s * _bessel_j_signed(r - 1, s)
           + 2 * r * (2 * r + 1) * bessel_j(r, s))
    return num / s ** (r + 2)


def g_r(r, t):
    """g_r(t) = sum_l (-1)^l t^l / (2^(2l+r) l! (r+l)!), so g_r(s**2) = f_r(s).

    Defined for t >= -144 (the series is used on [-144, 144]).
    """
    nu = _check_internal_order(r)
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise BesselDomainError("argument must be finite")
    if np.any(arr < -SERIES_MAX ** 2):
        raise BesselDomainError("g_r is only evaluated for t >= -144")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    lo = flat <= SERIES_MAX ** 2
    if lo.any():
        norm = math.exp(nu * math.log(2.0) + math.lgamma(nu + 1.0))
        out[lo] = _reduced_series(nu, -flat[lo] / 4.0) / norm
    if (~lo).any():
        out[~lo] = _f_unchecked(nu, np.sqrt(flat[~lo]))
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def g_r_deriv(r, t, order: int = 1):
    """order-th derivative of g_r: (-1/2)**order * g_{r+order}(t)."""
    if order < 0:
        raise ValueError("derivative order must be >= 0")
    return (-0.5) ** order * g_r(_as_order(r) + order, t)


def g_r_derivatives(r: float, t: np.ndarray, nmax: int) -> np.ndarray:
    """Stack of g_r^{(n)}(t) for n = 0..nmax, shape (nmax+1,) + t.shape."""
    t = np.asarray(t, dtype=float)
    out = np.empty((nmax + 1,) + t.shape)
    for n in range(nmax + 1):
        out[n] = (-0.5) ** n * g_r(r + n, t)
    return out


_QUANTITIES: dict[str, Callable] = {
    "f_r": f_r,
    "f_r_prime": f_r_prime,
    "f_r_second": f_r_second,
}


def envelope_check(quantity: str, r: float, s_grid) -> EnvelopeBound:
    """Smallest C with |quantity(s)| <= C s^-(r+1/2) on the grid.

    Raises EnvelopeViolation when the scaled quantity is still growing over
    the upper half of the grid, i.e. when no such bound is plausible.
    """
    if quantity not in _QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    s = np.sort(np.asarray(s_grid, dtype=float))
    if s[0] < 10:
        raise ValueError("envelope grids must start at s >= 10")
    exponent = float(r) + 0.5
    scaled = np.abs(_QUANTITIES[quantity](r, s)) * s ** exponent
    if not np.all(np.isfinite(scaled)):
        raise EnvelopeViolation(f"{quantity}: non-finite values on grid")
    half = s.size // 2
    lower, upper = scaled[:half].max(), scaled[half:].max()
    if upper > 1.5 * lower:
        raise EnvelopeViolation(
            f"{quantity}, r={r}: scaled maximum grows from {lower:.3g} to {upper:.3g}")
    return EnvelopeBound(constant=float(scaled.max()), exponent=exponent,
                         valid_from=float(s[0]))
