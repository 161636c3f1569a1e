"""Pairwise and set-level dissimilarity between sketches of one image.

Two sketches are compared by truncating both length mappings to their common
drawn length, voxelizing each onto the shared grid, and averaging the squared
ink-count difference over all voxels.  For two sets of sketches the metric is
evaluated for every cross pair; the resulting value list (100 values for two
sets of 10) feeds the significance test in :mod:`tracelab.stats`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .strokes import LengthMapping, Sketch, build_length_mapping, DEFAULT_SPACING
from .voxel import truncate_mapping, voxelize


class IncomparableSketches(ValueError):
    """The sketches were not drawn over the same source image."""


class ZeroCommonLength(ValueError):
    """At least one sketch has no drawn length to compare."""


@dataclass(frozen=True)
class PairDissimilarity:
    """Dissimilarity of one sketch pair.

    ``value`` is the per-voxel average of squared ink differences over the
    grids of both mappings truncated to ``common_length``; ``voxel_count`` is
    the normalizing number of voxels.
    """

    value: float
    common_length: float
    voxel_count: int


@dataclass(frozen=True)
class SetDissimilarity:
    """All cross-pair dissimilarities between two sketch sets.

    ``values`` holds |X| * |Y| entries in (i-major, j-minor) order; ``mean``
    and ``variance`` (unbiased) summarize their ``value`` fields.
    """

    values: tuple[PairDissimilarity, ...]
    mean: float
    variance: float

    def value_array(self) -> np.ndarray:
        return np.array([v.value for v in self.values], dtype=np.float64)


def pair_dissimilarity(a: LengthMapping, b: LengthMapping,
                       image_w: float, image_h: float) -> PairDissimilarity:
    """Compare two length mappings drawn over the same image.

    Both mappings are truncated to the shorter drawn length, voxelized onto
    identically-dimensioned grids, and scored as sum((A - B)^2) / n_voxels.
    """
    common = min(a.total_length, b.total_length)
    if common <= 0.0:
        raise ZeroCommonLength("zero common length: both sketches must have "
                               "positive drawn length")
    grid_a = voxelize(truncate_mapping(a, common), image_w, image_h)
    grid_b = voxelize(truncate_mapping(b, common), image_w, image_h)
    return PairDissimilarity(
        value=_grid_value(grid_a.counts, grid_b.counts),
        common_length=common,
        voxel_count=grid_a.counts.size,
    )


def set_dissimilarity(xs: Sequence[Sketch], ys: Sequence[Sketch],
                      image_w: float, image_h: float,
                      spacing: float = DEFAULT_SPACING) -> SetDissimilarity:
    """Evaluate every cross pair between two sketch sets over one image.

    All sketches must carry canvas dimensions equal to the image dimensions.
    Pair evaluation order is fixed (x-index major) so results are reproducible
    regardless of any parallel scheduling by callers.
    """
    if not xs or not ys:
        raise ValueError("both sketch sets must be non-empty")
    for sk in list(xs) + list(ys):
        if sk.canvas_w != image_w or sk.canvas_h != image_h:
            raise IncomparableSketches(
                f"incomparable sketches: '{sk.sketch_id}' was drawn on a "
                f"{sk.canvas_w:g}x{sk.canvas_h:g} canvas, expected "
                f"{image_w:g}x{image_h:g}")
    maps_x = [build_length_mapping(s, spacing) for s in xs]
    maps_y = [build_length_mapping(s, spacing) for s in ys]

    # Truncated grids recur across pairs whenever common lengths repeat, so
    # memoize per (side, index, common length).
    grid_cache: dict[tuple[str, int, float], np.ndarray] = {}

    def grid(side: str, idx: int, mapping: LengthMapping, common: float) -> np.ndarray:
        key = (side, idx, common)
        hit = grid_cache.get(key)
        if hit is None:
            hit = voxelize(truncate_mapping(mapping, common), image_w, image_h).counts
            grid_cache[key] = hit
        return hit

    values: list[PairDissimilarity] = []
    for i, ma in enumerate(maps_x):
        for j, mb in enumerate(maps_y):
            common = min(ma.total_length, mb.total_length)
            if common <= 0.0:
                raise ZeroCommonLength(
                    f"pair ({i}, {j}): zero common length "
                    f"('{xs[i].sketch_id}' vs '{ys[j].sketch_id}')")
            ca = grid("x", i, ma, common)
            cb = grid("y", j, mb, common)
            values.append(PairDissimilarity(
                value=_grid_value(ca, cb),
                common_length=common,
                voxel_count=ca.size,
            ))
    vals = np.array([v.value for v in values], dtype=np.float64)
    mean = float(vals.mean())
    variance = float(vals.var(ddof=1)) if vals.size > 1 else 0.0
    return SetDissimilarity(tuple(values), mean, variance)


def _grid_value(ca: np.ndarray, cb: np.ndarray) -> float:
    diff = ca - cb
    return float(np.sum(diff * diff, dtype=np.int64) / diff.size)
