"""Parametric footbridge model.

Plan alignment (rational quadratic Bezier), hollow-box girder cross-section,
pier layout along the developed arc, concrete volumes, and site-compliance
checks (street clearance, tree protection).  All quantities SI: metres,
square/cubic metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FEATURE_NAMES = ("h_girder", "t_girder", "n_p", "h_p", "i", "w")

# Continuous feature positions within the 6-vector; index 2 (n_p) is the
# integer pier count.
CONTINUOUS_FEATURES = (0, 1, 3, 4, 5)
PIER_COUNT_INDEX = 2
N_P_MIN, N_P_MAX = 2, 8
N_P_CLASSES = N_P_MAX - N_P_MIN + 1

DEFAULT_LOWER = (0.25, 0.1, 2.0, 0.5, 0.0, 0.01)
DEFAULT_UPPER = (2.5, 0.23, 8.0, 1.5, 4.0, 7.00)

# Points per alignment polyline; arc length and footprint tests share it.
POLYLINE_POINTS = 1024


class GeometryError(ValueError):
    """Invalid geometric input (non-finite value, violated invariant)."""


@dataclass(frozen=True)
class SiteConfig:
    """Synthetic site: chord endpoints, deck level, street corridor, trees.

    The street corridor is an interval measured along the chord axis from
    ``sp``; trees are (center_x, center_y, radius) circles in plan.
    """

    sp: tuple[float, float]
    ep: tuple[float, float]
    deck_elevation: float
    street_corridor: tuple[float, float]
    required_clearance: float
    trees: tuple[tuple[float, float, float], ...]
    width_b: float = 2.5
    ground_elevation: float = 0.0

    def __post_init__(self):
        if self.sp == self.ep:
            raise GeometryError("sp and ep must differ")
        if self.required_clearance <= 0:
            raise GeometryError("required_clearance must be > 0")
        if self.width_b <= 0:
            raise GeometryError("width_b must be > 0")
        lo, hi = self.street_corridor
        if not (0.0 <= lo < hi <= self.chord_length):
            raise GeometryError(
                "street_corridor must be a non-empty subinterval of [0, chord]"
            )
        for tree in self.trees:
            if tree[2] <= 0:
                raise GeometryError("tree radii must be > 0")

    @property
    def chord_length(self) -> float:
        return math.hypot(self.ep[0] - self.sp[0], self.ep[1] - self.sp[1])

    @property
    def chord_unit(self) -> tuple[float, float]:
        c = self.chord_length
        return ((self.ep[0] - self.sp[0]) / c, (self.ep[1] - self.sp[1]) / c)

    def to_dict(self) -> dict:
        return {
            "sp": list(self.sp),
            "ep": list(self.ep),
            "deck_elevation": self.deck_elevation,
            "street_corridor": list(self.street_corridor),
            "required_clearance": self.required_clearance,
            "trees": [list(t) for t in self.trees],
            "width_b": self.width_b,
            "ground_elevation": self.ground_elevation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SiteConfig":
        return cls(
            sp=tuple(d["sp"]),
            ep=tuple(d["ep"]),
            deck_elevation=float(d["deck_elevation"]),
            street_corridor=tuple(d["street_corridor"]),
            required_clearance=float(d["required_clearance"]),
            trees=tuple(tuple(t) for t in d.get("trees", [])),
            width_b=float(d.get("width_b", 2.5)),
            ground_elevation=float(d.get("ground_elevation", 0.0)),
        )


@dataclass(frozen=True)
class DesignFeatures:
    """One point of the 6-dimensional design space."""

    h_girder: float  # m, girder depth
    t_girder: float  # m, box wall thickness
    n_p: int         # intermediate pier count
    h_p: float       # m, square pier cross-section side
    i: float         # m, lateral offset of the alignment control point
    w: float         # rational weight of the control point

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.h_girder, self.t_girder, float(self.n_p), self.h_p, self.i, self.w]
        )

    @classmethod
    def from_array(cls, x) -> "DesignFeatures":
        x = np.asarray(x, dtype=float)
        if x.shape != (6,):
            raise GeometryError(f"design vector must have 6 entries, got shape {x.shape}")
        return cls(
            h_girder=float(x[0]),
            t_girder=float(x[1]),
            n_p=int(round(x[2])),
            h_p=float(x[3]),
            i=float(x[4]),
            w=float(x[5]),
        )


@dataclass(frozen=True)
class DesignSpace:
    """Per-feature bounds; defaults are the sampling-campaign bounds."""

    lower: tuple[float, ...] = DEFAULT_LOWER
    upper: tuple[float, ...] = DEFAULT_UPPER
    sample_count: int = 4000

    def __post_init__(self):
        if len(self.lower) != 6 or len(self.upper) != 6:
            raise GeometryError("bounds must have 6 entries")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise GeometryError("each lower bound must be below its upper bound")

    def contains(self, x: DesignFeatures) -> bool:
        v = x.as_array()
        lo = np.array(self.lower)
        hi = np.array(self.upper)
        inside = bool(np.all(v >= lo) and np.all(v <= hi))
        return inside and N_P_MIN <= x.n_p <= N_P_MAX

    def clip(self, v: np.ndarray) -> tuple[np.ndarray, bool]:
        """Clip a raw 6-vector into bounds; report whether anything moved."""
        lo = np.array(self.lower)
        hi = np.array(self.upper)
        clipped = np.clip(v, lo, hi)
        clipped[PIER_COUNT_INDEX] = float(
            int(min(max(round(clipped[PIER_COUNT_INDEX]), N_P_MIN), N_P_MAX))
        )
        return clipped, bool(np.any(np.abs(clipped - v) > 1e-12))

    def to_dict(self) -> dict:
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "sample_count": self.sample_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DesignSpace":
        return cls(
            lower=tuple(float(v) for v in d.get("lower", DEFAULT_LOWER)),
            upper=tuple(float(v) for v in d.get("upper", DEFAULT_UPPER)),
            sample_count=int(d.get("sample_count", 4000)),
        )


@dataclass(frozen=True)
class CrossSection:
    """Hollow-box girder section with derived elastic properties."""

    b: float       # m, width
    h: float       # m, depth
    t: float       # m, wall thickness
    A: float       # m^2
    I: float       # m^4
    W_el: float    # m^3, elastic section modulus I/(h/2)
    is_solid: bool


@dataclass(frozen=True)
class BridgeGeometry:
    """Derived bridge geometry for one design on one site."""

    arc_length: float
    pier_stations: tuple[float, ...]  # arc-length positions of interior piers
    pier_height: float
    girder_volume: float
    pier_volume: float
    section: CrossSection
    i: float
    w: float


def eval_alignment(i: float, w: float, t, site: SiteConfig) -> np.ndarray:
    """Evaluate the plan alignment at parameter(s) t in [0, 1].

    Rational quadratic Bezier through sp and ep whose middle control point
    sits at the chord midpoint offset laterally by ``i`` with weight ``w``.
    Returns shape (2,) for scalar t, (n, 2) for an array.
    """
    for name, val in (("i", i), ("w", w)):
        if not math.isfinite(val):
            raise GeometryError(f"{name} must be finite")
    if w <= 0:
        raise GeometryError("w must be > 0")
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise GeometryError("t must be finite")
    if np.any(t_arr < 0) or np.any(t_arr > 1):
        raise GeometryError("t must lie in [0, 1]")

    p0 = np.array(site.sp)
    p2 = np.array(site.ep)
    ux, uy = site.chord_unit
    normal = np.array([-uy, ux])
    p1 = 0.5 * (p0 + p2) + i * normal

    tt = np.atleast_1d(t_arr)[:, None]
    b0 = (1.0 - tt) ** 2
    b1 = 2.0 * tt * (1.0 - tt) * w
    b2 = tt**2
    denom = b0 + b1 + b2
    pts = (b0 * p0 + b1 * p1 + b2 * p2) / denom
    if t_arr.ndim == 0:
        return pts[0]
    return pts


def alignment_polyline(
    i: float, w: float, site: SiteConfig, n_points: int = POLYLINE_POINTS
) -> np.ndarray:
    """Alignment discretized at n_points uniform parameter values, shape (n, 2)."""
    return eval_alignment(i, w, np.linspace(0.0, 1.0, n_points), site)


def arc_length(
    i: float, w: float, site: SiteConfig, n_points: int = POLYLINE_POINTS
) -> float:
    """Developed length of the alignment polyline; >= chord length."""
    pts = alignment_polyline(i, w, site, n_points)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def section_properties(h: float, t: float, b: float) -> CrossSection:
    """Hollow-box section; falls back to a solid rectangle when the walls meet."""
    if h <= 0 or t <= 0 or b <= 0:
        raise GeometryError("section dimensions must be > 0")
    hi = h - 2.0 * t
    bi = b - 2.0 * t
    if hi <= 0 or bi <= 0:
        A = b * h
        I = b * h**3 / 12.0
        solid = True
    else:
        A = b * h - bi * hi
        I = (b * h**3 - bi * hi**3) / 12.0
        solid = False
    return CrossSection(b=b, h=h, t=t, A=A, I=I, W_el=I / (h / 2.0), is_solid=solid)


def pier_stations(n_p: int, length: float) -> list[float]:
    """Equally spaced interior pier stations; abutments sit at 0 and length."""
    if n_p < 1:
        raise GeometryError("n_p must be >= 1")
    return [k * length / (n_p + 1) for k in range(1, n_p + 1)]


def _chord_coordinate(points: np.ndarray, site: SiteConfig) -> np.ndarray:
    """Project plan points onto the chord axis (distance along sp->ep)."""
    ux, uy = site.chord_unit
    rel = points - np.array(site.sp)
    return rel[:, 0] * ux + rel[:, 1] * uy


def _point_to_polyline_distance(point: np.ndarray, poly: np.ndarray) -> float:
    """Min distance from a plan point to a polyline (vectorized over segments)."""
    a = poly[:-1]
    d = poly[1:] - a
    seg_len2 = np.einsum("ij,ij->i", d, d)
    ap = point[None, :] - a
    s = np.clip(np.einsum("ij,ij->i", ap, d) / np.where(seg_len2 > 0, seg_len2, 1.0), 0.0, 1.0)
    closest = a + s[:, None] * d
    return float(np.min(np.linalg.norm(point[None, :] - closest, axis=1)))


def _station_plan_points(
    geom: BridgeGeometry, site: SiteConfig, stations: np.ndarray
) -> np.ndarray:
    """Plan points at given arc-length stations via the discretized alignment."""
    poly = alignment_polyline(geom.i, geom.w, site)
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    xs = np.interp(stations, cum, poly[:, 0])
    ys = np.interp(stations, cum, poly[:, 1])
    return np.stack([xs, ys], axis=1)


def check_compliance(
    geom: BridgeGeometry, x: DesignFeatures, site: SiteConfig
) -> tuple[bool, bool]:
    """Street clearance and tree-protection flags for a built geometry."""
    lo, hi = site.street_corridor

    headroom = site.deck_elevation - x.h_girder
    clearance_ok = headroom >= site.required_clearance
    if clearance_ok and geom.pier_stations:
        pier_pts = _station_plan_points(geom, site, np.array(geom.pier_stations))
        chord_pos = _chord_coordinate(pier_pts, site)
        if np.any((chord_pos >= lo) & (chord_pos <= hi)):
            clearance_ok = False

    trees_ok = True
    if site.trees:
        center = alignment_polyline(geom.i, geom.w, site)
        half_width = site.width_b / 2.0
        for cx, cy, r in site.trees:
            dist = _point_to_polyline_distance(np.array([cx, cy]), center)
            if dist <= half_width + r:
                trees_ok = False
                break
    return clearance_ok, trees_ok


def build_geometry(x: DesignFeatures, site: SiteConfig) -> BridgeGeometry:
    """Compose alignment, section, pier layout, and volumes for one design."""
    length = arc_length(x.i, x.w, site)
    stations = pier_stations(x.n_p, length)
    section = section_properties(x.h_girder, x.t_girder, site.width_b)
    pier_height = site.deck_elevation - x.h_girder - site.ground_elevation
    if pier_height < 0:
        raise GeometryError("pier height is negative: girder deeper than deck elevation")
    return BridgeGeometry(
        arc_length=length,
        pier_stations=tuple(stations),
        pier_height=pier_height,
        girder_volume=section.A * length,
        pier_volume=x.n_p * x.h_p**2 * pier_height,
        section=section,
        i=x.i,
        w=x.w,
    )
