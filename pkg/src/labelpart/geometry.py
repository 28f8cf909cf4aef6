"""Rectangle primitives and gating-rectangle construction.

Rectangles are closed on both axes: two rectangles that only touch along an
edge or at a corner intersect.  Bulk algorithms work on :class:`RectArrays`
(struct-of-arrays, float64) rather than on lists of :class:`Rect` objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

Label = Hashable


class InvalidDensityError(ValueError):
    """A predicted-measurement density is not a valid Gaussian mixture."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``x × y`` (a gating box)."""

    x: Interval
    y: Interval

    @classmethod
    def from_bounds(cls, x_l: float, y_l: float, x_u: float, y_u: float) -> "Rect":
        return cls(Interval(float(x_l), float(x_u)), Interval(float(y_l), float(y_u)))

    @property
    def x_l(self) -> float:
        return self.x.lo

    @property
    def x_u(self) -> float:
        return self.x.hi

    @property
    def y_l(self) -> float:
        return self.y.lo

    @property
    def y_u(self) -> float:
        return self.y.hi

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x.lo, self.y.lo, self.x.hi, self.y.hi)

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x.lo + self.x.hi), 0.5 * (self.y.lo + self.y.hi))

    def contains(self, other: "Rect") -> bool:
        return (
            self.x.lo <= other.x.lo
            and other.x.hi <= self.x.hi
            and self.y.lo <= other.y.lo
            and other.y.hi <= self.y.hi
        )


def interval_overlap(a: Interval, b: Interval) -> bool:
    """Closed-interval overlap; a shared endpoint counts."""
    return a.lo <= b.hi and b.lo <= a.hi


def rect_intersects(a: Rect, b: Rect) -> bool:
    return interval_overlap(a.x, b.x) and interval_overlap(a.y, b.y)


def mbr_union(a: Rect, b: Rect) -> Rect:
    return Rect(
        Interval(min(a.x.lo, b.x.lo), max(a.x.hi, b.x.hi)),
        Interval(min(a.y.lo, b.y.lo), max(a.y.hi, b.y.hi)),
    )


def clamp_rect(r: Rect, domain: Rect) -> Rect | None:
    """Intersect ``r`` with ``domain``; ``None`` when they are disjoint."""
    if not rect_intersects(r, domain):
        return None
    return Rect.from_bounds(
        max(r.x_l, domain.x_l),
        max(r.y_l, domain.y_l),
        min(r.x_u, domain.x_u),
        min(r.y_u, domain.y_u),
    )


# ---------------------------------------------------------------------------
# Gaussian mixtures


@dataclass(frozen=True)
class GaussianComponent2D:
    weight: float
    mean: tuple[float, float]
    cov: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        mean = tuple(float(v) for v in np.asarray(self.mean, dtype=float).reshape(2))
        cov_arr = np.asarray(self.cov, dtype=float).reshape(2, 2)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", tuple(tuple(float(v) for v in row) for row in cov_arr))
        if not self.weight > 0:
            raise InvalidDensityError(f"component weight must be positive, got {self.weight}")
        (a, b), (c, d) = self.cov
        if not math.isclose(b, c, rel_tol=1e-12, abs_tol=1e-12):
            raise InvalidDensityError("covariance is not symmetric")
        if not (a > 0 and d > 0 and a * d - b * c > 0):
            raise InvalidDensityError(f"covariance is not positive definite: {self.cov}")


@dataclass(frozen=True)
class GaussianMixture2D:
    components: tuple[GaussianComponent2D, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise InvalidDensityError("mixture has no components")
        total = math.fsum(c.weight for c in comps)
        if abs(total - 1.0) > 1e-9:
            raise InvalidDensityError(f"mixture weights sum to {total!r}, expected 1")

    @classmethod
    def single(cls, mean, cov) -> "GaussianMixture2D":
        return cls((GaussianComponent2D(1.0, mean, cov),))


def gate_scale(pg: float) -> float:
    """Per-axis gate half-width in standard deviations for gating probability ``pg``.

    This is the square root of the 2-dof chi-square quantile, which has the
    closed form ``-2 ln(1 - pg)``.
    """
    if not 0.0 < pg < 1.0:
        raise ValueError(f"gating probability must be in (0, 1), got {pg}")
    return math.sqrt(-2.0 * math.log1p(-pg))


def gmbr_from_mixture(mix: GaussianMixture2D, pg: float) -> Rect:
    """Minimum bounding rectangle of the per-component gate boxes.

    Each component contributes ``mean ± k·sqrt(cov[d, d])`` per axis, with
    ``k = gate_scale(pg)``.  Weights are not used.
    """
    k = gate_scale(pg)
    x_l = y_l = math.inf
    x_u = y_u = -math.inf
    for comp in mix.components:
        mx, my = comp.mean
        hx = k * math.sqrt(comp.cov[0][0])
        hy = k * math.sqrt(comp.cov[1][1])
        x_l, x_u = min(x_l, mx - hx), max(x_u, mx + hx)
        y_l, y_u = min(y_l, my - hy), max(y_u, my + hy)
    return Rect.from_bounds(x_l, y_l, x_u, y_u)


class MixtureArrays:
    """Flattened component means and standard deviations for many mixtures.

    Built once per label set; :meth:`gates` then rescales every gate for a new
    gating probability without touching Python objects.
    """

    def __init__(self, labels: Mapping[Label, GaussianMixture2D]):
        self.labels = list(labels)
        starts, mx, my, sx, sy = [], [], [], [], []
        for lab in self.labels:
            mix = labels[lab]
            if not isinstance(mix, GaussianMixture2D):
                raise InvalidDensityError(f"label {lab!r} has no Gaussian mixture")
            starts.append(len(mx))
            for comp in mix.components:
                mx.append(comp.mean[0])
                my.append(comp.mean[1])
                sx.append(math.sqrt(comp.cov[0][0]))
                sy.append(math.sqrt(comp.cov[1][1]))
        self.starts = np.asarray(starts, dtype=np.intp)
        self.mx = np.asarray(mx, dtype=float)
        self.my = np.asarray(my, dtype=float)
        self.sx = np.asarray(sx, dtype=float)
        self.sy = np.asarray(sy, dtype=float)

    def __len__(self):
        return len(self.labels)

    def gates(self, pg: float) -> "RectArrays":
        if not self.labels:
            return RectArrays.empty()
        k = gate_scale(pg)
        hx, hy = k * self.sx, k * self.sy
        return RectArrays(
            self.labels,
            np.minimum.reduceat(self.mx - hx, self.starts),
            np.minimum.reduceat(self.my - hy, self.starts),
            np.maximum.reduceat(self.mx + hx, self.starts),
            np.maximum.reduceat(self.my + hy, self.starts),
        )


# ---------------------------------------------------------------------------
# Bulk storage


@dataclass
class RectArrays:
    """Labelled rectangles stored column-wise.

    Position ``i`` holds label ``labels[i]`` with bounds
    ``(xl[i], yl[i], xu[i], yu[i])``.  Join results refer to positions.
    """

    labels: list
    xl: np.ndarray
    yl: np.ndarray
    xu: np.ndarray
    yu: np.ndarray
    _positions: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.xl, self.yl, self.xu, self.yu = (
            np.ascontiguousarray(a, dtype=np.float64) for a in (self.xl, self.yl, self.xu, self.yu)
        )
        n = len(self.labels)
        if not all(a.shape == (n,) for a in (self.xl, self.yl, self.xu, self.yu)):
            raise ValueError("label and coordinate arrays differ in length")
        if np.any(self.xl > self.xu) or np.any(self.yl > self.yu):
            raise ValueError("rectangle with lo > hi")

    @classmethod
    def empty(cls) -> "RectArrays":
        z = np.empty(0)
        return cls([], z, z, z, z)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Label, Rect]]) -> "RectArrays":
        pairs = list(pairs)
        if not pairs:
            return cls.empty()
        coords = np.array([r.bounds for _, r in pairs], dtype=np.float64)
        return cls([lab for lab, _ in pairs], coords[:, 0], coords[:, 1], coords[:, 2], coords[:, 3])

    def __len__(self) -> int:
        return len(self.labels)

    def rect(self, i: int) -> Rect:
        return Rect.from_bounds(self.xl[i], self.yl[i], self.xu[i], self.yu[i])

    def to_pairs(self) -> list[tuple[Label, Rect]]:
        return [(lab, self.rect(i)) for i, lab in enumerate(self.labels)]

    def to_dict(self) -> dict[Label, Rect]:
        return dict(self.to_pairs())

    def position(self, label: Label) -> int:
        if self._positions is None:
            self._positions = {lab: i for i, lab in enumerate(self.labels)}
            if len(self._positions) != len(self.labels):
                raise ValueError("duplicate label ids")
        return self._positions[label]

    def subset(self, idx: np.ndarray) -> "RectArrays":
        idx = np.asarray(idx, dtype=np.intp)
        return RectArrays(
            [self.labels[i] for i in idx], self.xl[idx], self.yl[idx], self.xu[idx], self.yu[idx]
        )

    def contains(self, other: "RectArrays") -> np.ndarray:
        """Elementwise containment ``other[i] ⊆ self[i]``."""
        return (
            (self.xl <= other.xl) & (other.xu <= self.xu) & (self.yl <= other.yl) & (other.yu <= self.yu)
        )


def as_rect_arrays(rects: "RectArrays | Sequence[tuple[Label, Rect]] | Mapping[Label, Rect]") -> RectArrays:
    if isinstance(rects, RectArrays):
        return rects
    if isinstance(rects, Mapping):
        return RectArrays.from_pairs(rects.items())
    return RectArrays.from_pairs(rects)
