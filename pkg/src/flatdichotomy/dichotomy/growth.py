"""Partial integrals over nested dyadic balls and their growth classification."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from ..kernels import IntegrandSpec
from ..spaces import PointClass
from . import exponents
from .integrate import DEFAULT_SAMPLES, DEFAULT_STRATA, integrate_annulus

DEFAULT_R0 = 16.0
DEFAULT_LEVELS = 9
TAIL_LEVELS = 4

CONVERGENT_MAX = 0.8
LOG_BAND = (0.9, 1.1)
POLY_MIN = 1.2


@dataclass
class Classification:
    kind: str  # Convergent | LogDivergent | PolyDivergent | Ambiguous
    limit_estimate: Optional[float] = None
    slope: Optional[float] = None
    exponent: Optional[float] = None
    interval: Optional[tuple] = None
    ratios: tuple = ()

    @property
    def value(self) -> Optional[float]:
        if self.kind == "Convergent":
            return self.limit_estimate
        if self.kind == "LogDivergent":
            return self.slope
        if self.kind == "PolyDivergent":
            return self.exponent
        return None


@dataclass
class GrowthReport:
    radii: list
    partials: list
    stderrs: list
    increments: list
    increment_stderrs: list
    classification: Classification
    predicted_exponents: dict = field(default_factory=dict)
    predicts_convergence: Optional[bool] = None
    flagged_levels: list = field(default_factory=list)
    samples: int = 0
    seed: int = 0

    @property
    def kind(self) -> str:
        return self.classification.kind

    @property
    def diverges(self) -> bool:
        return self.kind in ("LogDivergent", "PolyDivergent")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["predicted_exponents"] = {k: (list(v) if isinstance(v, tuple) else v)
                                    for k, v in self.predicted_exponents.items()}
        return d


def classify_increments(increments, stderrs=None, tail: int = TAIL_LEVELS,
                        total: float = 0.0) -> Classification:
    """Increment-ratio rule over the last ``tail`` dyadic increments.

    ``total`` is the partial integral reached so far; a convergent limit is
    that plus the geometric tail.
    """
    inc = np.asarray(increments, dtype=float)[-tail:]
    err = None if stderrs is None else np.asarray(stderrs, dtype=float)[-tail:]
    if len(inc) < 2 or np.any(inc <= 0):
        return Classification("Ambiguous")
    ratios = inc[1:] / inc[:-1]
    rt = tuple(float(v) for v in ratios)
    if np.all(ratios <= CONVERGENT_MAX):
        rho = float(np.exp(np.mean(np.log(ratios))))
        return Classification("Convergent", limit_estimate=total + rho * float(inc[-1]) / (1 - rho), ratios=rt)
    if np.all((ratios >= LOG_BAND[0]) & (ratios <= LOG_BAND[1])):
        per_level = inc / math.log(2.0)
        slope = float(per_level.mean())
        half = float(stats.t.ppf(0.975, len(inc) - 1) * per_level.std(ddof=1) / math.sqrt(len(inc)))
        return Classification("LogDivergent", slope=slope, interval=(slope - half, slope + half), ratios=rt)
    if np.all(ratios >= POLY_MIN):
        m = np.arange(len(inc), dtype=float)
        y = np.log2(inc)
        w = None
        if err is not None and np.all(err > 0):
            w = inc * math.log(2.0) / err
        coef, cov = np.polyfit(m, y, 1, w=w, cov="unscaled" if w is not None else True)
        s = float(coef[0])
        half = float(stats.t.ppf(0.975, max(1, len(inc) - 2)) * math.sqrt(max(cov[0, 0], 0.0)))
        return Classification("PolyDivergent", exponent=s, interval=(s - half, s + half), ratios=rt)
    return Classification("Ambiguous", ratios=rt)


def partial_sums(spec, levels: int = DEFAULT_LEVELS, R0: float = DEFAULT_R0,
                 samples: int = DEFAULT_SAMPLES, seed: int = 0, strata: int = DEFAULT_STRATA, **kw):
    """Ball integral up to R0 and the dyadic annuli beyond it."""
    radii = [R0 * 2.0 ** m for m in range(levels + 1)]
    bounds = [0.0] + radii
    ests, errs, flags = [], [], []
    for m in range(levels + 1):
        res = integrate_annulus(spec, bounds[m], bounds[m + 1], samples,
                                seed=seed, level=m, strata=strata, **kw)
        ests.append(res.estimate)
        errs.append(res.stderr)
        if res.flagged:
            flags.append(m)
    return radii, ests, errs, flags


def growth_scan(spec: IntegrandSpec, levels: int = DEFAULT_LEVELS, *, R0: float = DEFAULT_R0,
                samples: int = DEFAULT_SAMPLES, seed: int = 0, strata: int = DEFAULT_STRATA) -> GrowthReport:
    """Partial integrals over balls of radius R0 * 2**m, m = 0..levels, and their classification."""
    if levels < 6:
        raise ValueError("growth_scan needs at least 6 levels")
    radii, ests, errs, flags = partial_sums(spec, levels, R0, samples, seed, strata)
    partials = list(np.cumsum(ests))
    perr = list(np.sqrt(np.cumsum(np.square(errs))))
    increments = ests[1:]
    inc_err = errs[1:]
    cls = classify_increments(increments, inc_err, total=partials[-1])
    p = spec.datum.p
    order = spec.nu if p == 1 else spec.r
    pcls = PointClass.REGULAR if p == 1 else spec.point.cls
    try:
        pred = exponents.predicted_exponents(pcls, spec.k, order, p)
        conv = exponents.predicts_convergence(pcls, spec.k, order, p)
    except ValueError:
        pred, conv = {}, None
    return GrowthReport(
        radii=[float(r) for r in radii],
        partials=[float(v) for v in partials],
        stderrs=[float(v) for v in perr],
        increments=[float(v) for v in increments],
        increment_stderrs=[float(v) for v in inc_err],
        classification=cls,
        predicted_exponents=pred,
        predicts_convergence=conv,
        flagged_levels=flags,
        samples=samples,
        seed=seed,
    )
