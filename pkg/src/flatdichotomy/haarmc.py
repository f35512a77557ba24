"""Haar Monte Carlo for orbital measures and their convolutions.

Spaces:

* AI: the tangent space is the plane of 2x2 symmetric traceless matrices; the
  orbit of radius t is a circle and rotations act on it by doubled angle, so a
  uniform angle realizes the K-average.
* AIII(p, q): p x q complex matrices with the action X -> u X v*, u, v Haar
  unitaries, and chamber coordinates given by the singular values.

The pairing with a chamber vector lam is Re tr(Lam Y*) = sum_j lam_j Re Y_jj,
with Lam = [diag(lam) | 0], so only the real diagonal of each draw is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from . import kernels
from .spaces import OrbitPoint, RootDatum, SpaceError, aiii_datum, classify_point, rank1_datum

MAX_N = 64
MAX_Q = 8
CHUNK = 20_000
FLAG_RELERR = 0.10


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(n: int, seed=None, size: Optional[int] = None) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with the R-diagonal phase fix."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}]")
    rng = _generator(seed)
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


@dataclass
class OrbitSampleSet:
    space: str
    datum: RootDatum
    factors: list
    samples: np.ndarray  # (N, p) chamber coordinates, descending
    pairing: np.ndarray  # (N, p) coordinates paired with lam (Re Y_jj)
    seed: int
    n: int
    subgroup: str = "full"

    @property
    def p(self) -> int:
        return self.datum.p


def _parse_space(space) -> RootDatum:
    if isinstance(space, RootDatum):
        datum = space
    else:
        s = str(space).upper().replace(" ", "")
        if s in ("AI", "RANK1:AI"):
            datum = rank1_datum("AI")
        elif s.startswith("AIII"):
            parts = dict(kv.split("=") for kv in s.split(":")[1:])
            datum = aiii_datum(int(parts.get("P", 1)), int(parts["Q"]))
        else:
            raise SpaceError(f"Haar sampling supports AI and AIII only, not {space!r}")
    if datum.cartan_label == "AI":
        return datum
    if datum.cartan_label != "AIII" or datum.q > MAX_Q:
        raise SpaceError(f"unsupported space {datum.space_id} (AI or AIII with q <= {MAX_Q})")
    return datum


def _as_point(f, p: int) -> OrbitPoint:
    pt = f if isinstance(f, OrbitPoint) else classify_point(np.atleast_1d(np.asarray(f, dtype=float)))
    if pt.p != p:
        raise SpaceError(f"factor {pt.coords} does not have {p} coordinates")
    return pt


def _aiii_chunk(datum: RootDatum, points, m: int, rng, subgroup: str):
    p, q = datum.p, datum.q
    y = np.zeros((m, p, q), dtype=complex)
    for pt in points:
        x = np.zeros((p, q))
        x[np.arange(p), np.arange(p)] = pt.coords
        u = haar_unitary(p, rng, m)
        v = haar_unitary(q, rng, m)
        if subgroup == "special":
            phase = np.angle(np.linalg.det(u) * np.linalg.det(v))
            v = v * np.exp(-1j * phase / q)[:, None, None]
        y += u @ x @ np.conj(np.swapaxes(v, -1, -2))
    sv = np.linalg.svd(y, compute_uv=False)
    diag = np.real(np.diagonal(y, axis1=-2, axis2=-1))
    return sv, diag


def sample_orbit_sum(space, factors: Sequence, N: int, seed: int = 0,
                     subgroup: str = "full") -> OrbitSampleSet:
    """N draws of sum_i Ad(k_i) H_i with independent Haar k_i.

    ``subgroup="special"`` draws (u, v) from the determinant-one subgroup
    instead of U(p) x U(q).
    """
    datum = _parse_space(space)
    p = datum.p
    points = [_as_point(f, p) for f in factors]
    if not points:
        raise SpaceError("need at least one factor")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(N), len(points)]))
    if datum.cartan_label == "AI":
        radii = np.array([pt.coords[0] for pt in points])
        ang = rng.uniform(0.0, 2 * math.pi, size=(N, len(points)))
        y1 = (radii * np.cos(ang)).sum(axis=1)
        y2 = (radii * np.sin(ang)).sum(axis=1)
        samples = np.hypot(y1, y2)[:, None]
        pairing = y1[:, None]
    else:
        svs, diags = [], []
        for start in range(0, N, CHUNK):
            sv, dg = _aiii_chunk(datum, points, min(CHUNK, N - start), rng, subgroup)
            svs.append(sv)
            diags.append(dg)
        samples = np.concatenate(svs)
        pairing = np.concatenate(diags)
    return OrbitSampleSet(datum.space_id, datum, points, samples, pairing, int(seed), int(N), subgroup)


@dataclass(frozen=True)
class TransformValue:
    value: complex
    stderr: float
    stderr_re: float
    flagged: bool


def empirical_transform(sset: OrbitSampleSet, lam, scale: float = 1.0) -> list:
    """Sample means of exp(i s <Lam, Y>) at each chamber point of ``lam``."""
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    if lam.shape[1] != sset.p:
        raise SpaceError(f"lambda must have {sset.p} coordinates")
    phase = float(scale) * sset.pairing @ lam.T  # (N, G)
    c, s = np.cos(phase), np.sin(phase)
    n = sset.n
    out = []
    for j in range(lam.shape[0]):
        val = complex(c[:, j].mean(), s[:, j].mean())
        err_re = float(c[:, j].std(ddof=1) / math.sqrt(n))
        err = float(math.hypot(err_re, s[:, j].std(ddof=1) / math.sqrt(n)))
        out.append(TransformValue(val, err, err_re, err > FLAG_RELERR * abs(val)))
    return out


def _transform_arrays(sset, lam, scale):
    tv = empirical_transform(sset, lam, scale)
    return np.array([t.value.real for t in tv]), np.array([t.stderr_re for t in tv])


def predicted_transform(datum: RootDatum, factors: Sequence[OrbitPoint], lam) -> np.ndarray:
    """Product of normalized kernels over the factors."""
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    out = np.ones(lam.shape[0])
    for pt in factors:
        v = kernels.spherical_kernel(datum, pt, lam if datum.p > 1 else lam[:, 0], normalized=True)
        out = out * np.asarray(v, dtype=float)
    return out


@dataclass
class CalibrationScale:
    s: float
    residuals: list = field(default_factory=list)  # |deviation| / stderr per grid point
    max_residual: float = 0.0
    ok: bool = True


def calibrate_scale(sset: OrbitSampleSet, lam_grid, target: Optional[Callable] = None,
                    bounds=(0.1, 10.0), tol: float = 3.0) -> CalibrationScale:
    """Fit s so that the empirical transform at s * <Lam, Y> matches ``target``.

    ``target`` maps the grid to kernel values; by default it is the product
    of the normalized kernels of the sampled factors.
    """
    lam = np.atleast_2d(np.asarray(lam_grid, dtype=float))
    if lam.shape[0] < 8:
        raise ValueError("calibration needs at least 8 grid points")
    want = target(lam) if target is not None else predicted_transform(sset.datum, sset.factors, lam)

    def loss(logs):
        emp, err = _transform_arrays(sset, lam, math.exp(logs))
        return float(np.sum(((emp - want) / np.maximum(err, 1e-12)) ** 2))

    grid = np.linspace(math.log(bounds[0]), math.log(bounds[1]), 161)
    vals = [loss(g) for g in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(loss, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-6})
    s = math.exp(res.x)
    emp, err = _transform_arrays(sset, lam, s)
    resid = np.abs(emp - want) / np.maximum(err, 1e-12)
    return CalibrationScale(s, [float(v) for v in resid], float(resid.max()), bool(resid.max() <= tol))


@dataclass
class ProductFormulaReport:
    space: str
    factors: list
    scale: float
    rows: list
    passed: bool
    failures: list

    def to_dict(self) -> dict:
        return {"space": self.space, "factors": self.factors, "scale": self.scale,
                "rows": self.rows, "pass": self.passed, "failures": self.failures}


def validate_product_formula(sset: OrbitSampleSet, lam_grid, scale: float = 1.0,
                             nsigma: float = 3.0) -> ProductFormulaReport:
    """Compare the empirical transform of the convolution with the kernel product."""
    lam = np.atleast_2d(np.asarray(lam_grid, dtype=float))
    if sset.p == 1 and lam.shape[0] == 1 and lam.shape[1] > 1:
        lam = lam.T
    pred = predicted_transform(sset.datum, sset.factors, lam)
    tv = empirical_transform(sset, lam, scale)
    rows, failures = [], []
    for j, t in enumerate(tv):
        ok = abs(t.value - pred[j]) <= nsigma * t.stderr
        row = {"lambda": [float(v) for v in lam[j]], "empirical_re": t.value.real,
               "empirical_im": t.value.imag, "stderr": t.stderr,
               "predicted": float(pred[j]), "pass": bool(ok)}
        rows.append(row)
        if not ok:
            failures.append(row["lambda"])
    return ProductFormulaReport(sset.space, [list(f.coords) for f in sset.factors], float(scale),
                                rows, not failures, failures)
