"""Synthetic uniform workloads and the plain-text dataset dump format.

Random numbers come from numpy's PCG64 bit generator seeded with the 64-bit
``seed`` and drawn as float64 uniforms in ``[0, 1)`` with
``Generator.random``.  Draw order for ``n`` objects, each block ``n`` long:

* rect mode: corner x, corner y, width, height;
* gaussian mode: mean x, mean y, sigma x, sigma y.

Extents use ``max_extent * (1 - u)``, which lies in ``(0, max_extent]``.
Label ids are ``0 .. n-1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from labelpart.geometry import GaussianMixture2D, Rect, RectArrays, gate_scale

DUMP_HEADER = "# labelpart-rects v1 seed={seed} n={n}"
_HEADER_RE = re.compile(r"^# labelpart-rects v1 seed=(-?\d+) n=(\d+)$")


def _default_domain() -> Rect:
    return Rect.from_bounds(0.0, 0.0, 2000.0, 2000.0)


@dataclass(frozen=True)
class DatasetSpec:
    n_objects: int
    domain: Rect = field(default_factory=_default_domain)
    max_extent: float = 20.0
    seed: int = 0
    mode: str = "rect"
    pg_init: float = 0.9973  # gaussian mode: gates at this P_G fit in max_extent

    def __post_init__(self):
        if self.n_objects < 1:
            raise ValueError("n_objects must be at least 1")
        if not self.max_extent > 0:
            raise ValueError("max_extent must be positive")
        if self.max_extent > min(self.domain.x.length, self.domain.y.length):
            raise ValueError("max_extent exceeds the domain")
        if self.mode not in ("rect", "gaussian"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


def generate_rect_arrays(spec: DatasetSpec) -> RectArrays:
    n, d = spec.n_objects, spec.domain
    rng = spec.rng()
    x = d.x_l + rng.random(n) * d.x.length
    y = d.y_l + rng.random(n) * d.y.length
    w = spec.max_extent * (1.0 - rng.random(n))
    h = spec.max_extent * (1.0 - rng.random(n))
    return RectArrays(list(range(n)), x, y, np.minimum(x + w, d.x_u), np.minimum(y + h, d.y_u))


def generate_rects(spec: DatasetSpec) -> list[tuple[int, Rect]]:
    """``n_objects`` uniform rectangles as ``(label, Rect)`` pairs."""
    if spec.mode != "rect":
        raise ValueError("generate_rects needs mode='rect'")
    return generate_rect_arrays(spec).to_pairs()


def generate_gaussians(spec: DatasetSpec) -> dict[int, GaussianMixture2D]:
    """Single-component mixtures whose ``pg_init`` gates span at most ``max_extent``."""
    if spec.mode != "gaussian":
        raise ValueError("generate_gaussians needs mode='gaussian'")
    n, d = spec.n_objects, spec.domain
    rng = spec.rng()
    mx = d.x_l + rng.random(n) * d.x.length
    my = d.y_l + rng.random(n) * d.y.length
    # full gate width is 2 * k * sigma
    scale = spec.max_extent / (2.0 * gate_scale(spec.pg_init))
    sx = scale * (1.0 - rng.random(n))
    sy = scale * (1.0 - rng.random(n))
    return {
        i: GaussianMixture2D.single((mx[i], my[i]), ((sx[i] ** 2, 0.0), (0.0, sy[i] ** 2)))
        for i in range(n)
    }


# ---------------------------------------------------------------------------
# Dump format


def format_dump(rects: RectArrays, seed: int) -> str:
    lines = [DUMP_HEADER.format(seed=seed, n=len(rects))]
    # repr of a Python float is the shortest string that round-trips exactly
    cols = zip(rects.labels, rects.xl.tolist(), rects.yl.tolist(), rects.xu.tolist(), rects.yu.tolist())
    for lab, a, b, c, d in cols:
        lines.append(f"{lab} {a!r} {b!r} {c!r} {d!r}")
    return "\n".join(lines) + "\n"


def write_dump(rects: RectArrays, seed: int, path) -> Path:
    path = Path(path)
    try:
        path.write_text(format_dump(rects, seed), encoding="ascii")
    except OSError as exc:
        raise OSError(f"cannot write dataset dump {path}: {exc.strerror}") from exc
    return path


def read_dump(path) -> tuple[RectArrays, int]:
    """Parse a dump; returns the rects and the recorded seed."""
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text:
        raise ValueError(f"{path}: empty dataset dump")
    m = _HEADER_RE.match(text[0])
    if not m:
        raise ValueError(f"{path}: bad header {text[0]!r}")
    seed, n = int(m.group(1)), int(m.group(2))
    labels, coords = [], []
    for lineno, line in enumerate(text[1:], start=2):
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
        lab = parts[0]
        labels.append(int(lab) if lab.lstrip("-").isdigit() else lab)
        coords.append([float(v) for v in parts[1:]])
    if len(labels) != n:
        raise ValueError(f"{path}: header says n={n} but found {len(labels)} records")
    c = np.asarray(coords, dtype=np.float64).reshape(-1, 4)
    return RectArrays(labels, c[:, 0], c[:, 1], c[:, 2], c[:, 3]), seed
