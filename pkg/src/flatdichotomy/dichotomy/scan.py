"""Minimal square-integrable convolution power and dichotomy verdicts."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

from ..kernels import IntegrandSpec
from ..spaces import l1_power_lookup
from .growth import DEFAULT_LEVELS, GrowthReport, growth_scan

MAX_K = 8


@dataclass
class Verdict:
    space: str
    point_class: str
    k: int
    in_L1: bool
    in_L2: Optional[bool]
    dichotomy_holds_at_k: Optional[bool]
    classification: str
    implied: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def make_verdict(spec: IntegrandSpec, kind: str, implied: bool = False) -> Verdict:
    """in_L2 is None when the growth classification is Ambiguous."""
    in_l1 = spec.k >= l1_power_lookup(spec.datum, spec.point)
    if kind == "Convergent":
        in_l2: Optional[bool] = True
    elif kind in ("LogDivergent", "PolyDivergent"):
        in_l2 = False
    else:
        in_l2 = None
    if in_l2 is None:
        holds = None if in_l1 else True
    else:
        holds = not (in_l1 and not in_l2)
    return Verdict(spec.datum.space_id, spec.point.cls.value, spec.k, in_l1, in_l2,
                   holds, kind, implied)


@dataclass
class MinKResult:
    min_k: Optional[int]
    verdicts: list
    reports: dict = field(default_factory=dict)

    @property
    def dichotomy_holds(self) -> Optional[bool]:
        flags = [v.dichotomy_holds_at_k for v in self.verdicts]
        if any(f is False for f in flags):
            return False
        if any(f is None for f in flags):
            return None
        return True

    def to_dict(self) -> dict:
        return {
            "min_k": self.min_k,
            "dichotomy_holds": self.dichotomy_holds,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "reports": {str(k): r.to_dict() for k, r in self.reports.items()},
        }


def min_k_scan(template: IntegrandSpec, k_max: int = 4, k_min: int = 1,
               levels: int = DEFAULT_LEVELS, stop_at_first: bool = True, **kw) -> MinKResult:
    """Scan k = k_min..k_max for the first Convergent growth classification.

    Since |kernel| <= 1 after normalization, convergence at k implies
    convergence at every larger k; with ``stop_at_first`` those powers get
    verdicts marked ``implied`` instead of being integrated.
    """
    if not 1 <= k_min <= k_max <= MAX_K:
        raise ValueError(f"need 1 <= k_min <= k_max <= {MAX_K}")
    verdicts, reports = [], {}
    found = None
    for k in range(k_min, k_max + 1):
        spec = IntegrandSpec(template.datum, template.point, k)
        if found is not None and stop_at_first:
            verdicts.append(make_verdict(spec, "Convergent", implied=True))
            continue
        rep: GrowthReport = growth_scan(spec, levels, **kw)
        reports[k] = rep
        verdicts.append(make_verdict(spec, rep.kind))
        if rep.kind == "Convergent" and found is None:
            found = k
    return MinKResult(found, verdicts, reports)
