"""Root data, Plancherel densities and Weyl-chamber geometry.

Multiplicities are stored uniformly as ``(m0, m1, m2)``:

* ``m0`` for the roots ``alpha_i +- alpha_j`` (absent in rank one),
* ``m1`` for ``alpha_k`` (the rank-one ``m_alpha``),
* ``m2`` for ``2 alpha_k`` (the rank-one ``m_{2alpha}``).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

SNAP_RTOL = 1e-12
DEFAULT_C = 4.0

RANK1_LABELS = ("AI", "AII", "AIII", "BDI", "CII", "FII")


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class RootDatum:
    family: str
    p: int
    q: Optional[int]
    m0: int
    m1: int
    m2: int
    cartan_label: str

    @property
    def rank(self) -> int:
        return self.p

    @property
    def nu(self) -> float:
        """Bessel order: (m_alpha + m_2alpha - 1)/2 in rank one, q - p otherwise."""
        if self.p == 1:
            return (self.m1 + self.m2 - 1) / 2.0
        return float(self.q - self.p)

    @property
    def r(self) -> int:
        if self.cartan_label != "AIII":
            raise SpaceError(f"r = q - p is only defined for AIII, not {self.cartan_label}")
        return self.q - self.p

    @property
    def space_id(self) -> str:
        if self.p == 1 and self.cartan_label != "AIII":
            return f"rank1:{self.cartan_label}" + (f":q={self.q}" if self.q else "")
        return f"AIII:p={self.p}:q={self.q}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nu"] = self.nu
        return d


def rank1_datum(label: str, q: Optional[int] = None) -> RootDatum:
    """Rank-one root datum for a Cartan label (q needed for AIII, BDI, CII)."""
    label = label.upper()
    if label not in RANK1_LABELS:
        raise SpaceError(f"unknown rank-one label {label!r}")
    needs_q = label in ("AIII", "BDI", "CII")
    if needs_q:
        if q is None or q < 2:
            raise SpaceError(f"{label} needs q >= 2, got {q}")
    if label == "BDI" and q == 2:
        # SO_0(1,2)/SO(2) is the AI space
        return rank1_datum("AI")
    if label == "AI":
        return RootDatum("A1", 1, None, 0, 1, 0, "AI")
    if label == "AII":
        return RootDatum("A1", 1, None, 0, 4, 0, "AII")
    if label == "AIII":
        return RootDatum("BC1", 1, q, 0, 2 * (q - 1), 1, "AIII")
    if label == "BDI":
        return RootDatum("A1", 1, q, 0, q - 1, 0, "BDI")
    if label == "CII":
        return RootDatum("BC1", 1, q, 0, 4 * (q - 1), 3, "CII")
    return RootDatum("BC1", 1, None, 0, 8, 7, "FII")


def aiii_datum(p: int, q: int) -> RootDatum:
    """SU(p,q)/S(U(p)xU(q)) for p in {1,2,3} and q >= p."""
    if p not in (1, 2, 3):
        raise SpaceError(f"unsupported rank p={p}; only 1, 2, 3")
    if q < p:
        raise SpaceError(f"need q >= p, got p={p}, q={q}")
    if p == 1:
        if q < 2:
            raise SpaceError("rank-one AIII needs q >= 2")
        return rank1_datum("AIII", q)
    family = f"C{p}" if q == p else f"BC{p}"
    return RootDatum(family, p, q, 2, 2 * (q - p), 1, "AIII")


def root_table() -> list[RootDatum]:
    """Representative rows of both multiplicity tables."""
    rows = [rank1_datum("AI"), rank1_datum("AII")]
    rows += [rank1_datum("AIII", q) for q in (2, 3, 5)]
    rows += [rank1_datum("BDI", q) for q in (3, 4)]
    rows += [rank1_datum("CII", 2), rank1_datum("FII")]
    rows += [aiii_datum(p, q) for p in (2, 3) for q in (p, p + 1, p + 2)]
    return rows


def dump_root_table(rows: Optional[Iterable[RootDatum]] = None) -> str:
    rows = root_table() if rows is None else rows
    return json.dumps([d.to_dict() for d in rows], indent=2, ensure_ascii=False)


def plancherel_density(datum: RootDatum, lam) -> np.ndarray:
    """Unnormalized Plancherel weight on the chamber (constant fixed to 1).

    ``lam`` has shape (..., p). For AIII this is
    prod_{i<j} (l_i^2 - l_j^2)^2 * prod_i l_i^(2(q-p)+1); in rank one it is
    l^(m_alpha + m_2alpha).
    """
    lam = np.asarray(lam, dtype=float)
    if datum.p == 1:
        x = lam[..., 0] if lam.ndim and lam.shape[-1:] == (1,) else lam
        return np.abs(x) ** (datum.m1 + datum.m2)
    b = lam ** 2
    out = np.ones(lam.shape[:-1])
    for i in range(datum.p):
        for j in range(i + 1, datum.p):
            out = out * (b[..., i] - b[..., j]) ** 2
    return out * np.prod(np.abs(lam), axis=-1) ** (2 * datum.r + 1)


@dataclass(frozen=True)
class ChamberPoint:
    coords: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        object.__setattr__(self, "coords", c)
        if not all(a > b for a, b in zip(c, c[1:])) or c[-1] <= 0:
            raise SpaceError(f"{c} is not in the open chamber l_1 > ... > l_p > 0")


class PointClass(str, enum.Enum):
    REGULAR = "Regular"
    TYPE_D = "TypeD"
    TYPE_A = "TypeA"
    ZERO = "Zero"
    # singular points of rank three; no kernel support
    SINGULAR = "Singular"


@dataclass(frozen=True)
class OrbitPoint:
    coords: tuple
    cls: PointClass = field(compare=False)

    @property
    def p(self) -> int:
        return len(self.coords)

    def to_dict(self) -> dict:
        return {"coords": list(self.coords), "class": self.cls.value}


def classify_point(coords: Sequence[float]) -> OrbitPoint:
    """Sort, snap near-equal / near-zero coordinates, and classify."""
    x = np.asarray(coords, dtype=float).ravel()
    if x.size == 0:
        raise SpaceError("empty point")
    if np.any(~np.isfinite(x)):
        raise SpaceError("coordinates must be finite")
    if np.any(x < 0):
        raise SpaceError(f"negative coordinates in {tuple(x)}")
    x = np.sort(x)[::-1].copy()
    scale = x[0]
    if scale == 0:
        return OrbitPoint(tuple(x.tolist()), PointClass.ZERO)
    tol = SNAP_RTOL * scale
    x[x <= tol] = 0.0
    for i in range(1, x.size):
        if x[i - 1] - x[i] <= tol:
            x[i] = x[i - 1]
    pts = tuple(float(v) for v in x)
    strict = all(a > b for a, b in zip(pts, pts[1:])) and pts[-1] > 0
    if strict:
        return OrbitPoint(pts, PointClass.REGULAR)
    if x.size == 2:
        if pts[0] == pts[1]:
            return OrbitPoint(pts, PointClass.TYPE_D)
        return OrbitPoint(pts, PointClass.TYPE_A)
    return OrbitPoint(pts, PointClass.SINGULAR)


def _is_type_a_or_d3(family: str) -> bool:
    f = family.upper()
    if f == "D3":
        return True
    return f.startswith("A") and f[1:].isdigit()


def l1_power_lookup(datum: RootDatum, point: OrbitPoint) -> int:
    """Smallest convolution power known to be absolutely continuous."""
    if point.cls is PointClass.ZERO:
        raise SpaceError("the zero orbit is a point mass; no power is absolutely continuous")
    if datum.rank == 1 or point.cls is PointClass.REGULAR:
        return 2
    if _is_type_a_or_d3(datum.family):
        return datum.rank + 1
    return datum.rank


def default_ball_radius(point: OrbitPoint) -> float:
    positive = [v for v in point.coords if v > 0]
    return 8.0 * max(1.0, 1.0 / min(positive))


def chamber_region(lam: Sequence[float], p: int, ball_radius: float = 0.0,
                   c: Optional[float] = None) -> str:
    """Region tag of a chamber point.

    p = 2: Ball, W1 (l2 >= l1/2), W2 (l2 < l1/2), the latter split into
    W21 (l2 > c) / W22 (l2 <= c) when c is given.
    p = 3: Ball, W1 (l3 >= l1/2), W2 (l2 >= l1/2 > l3), W3 (l1/2 > l2), the
    latter split into W31 (l3 > c) / W32 (l3 <= c) when c is given.
    """
    lam = [float(v) for v in lam]
    if len(lam) != p or p not in (2, 3):
        raise SpaceError(f"need a point with p in (2, 3) coordinates, got {lam}")
    if math.hypot(*lam) < ball_radius:
        return "Ball"
    half = 0.5 * lam[0]
    if p == 2:
        if lam[1] >= half:
            return "W1"
        if c is None:
            return "W2"
        return "W21" if lam[1] > c else "W22"
    if lam[2] >= half:
        return "W1"
    if lam[1] >= half:
        return "W2"
    if c is None:
        return "W3"
    return "W31" if lam[2] > c else "W32"
