"""Sketch domain types and the length-parameterized point cloud they map to.

Coordinates live in source-image pixel space: x grows rightward, y grows
downward, origin at the top-left corner.  A sketch is an ordered list of
strokes; a stroke is one pen-down-to-pen-up sequence of timed samples.

The analysis pipeline never looks at timestamps.  Every sketch is converted
into a :class:`LengthMapping`, a point cloud (x, y, z) where z is the
cumulative drawn distance in pixels at the moment the pen passed (x, y).
Two sketches that put ink in the same places in the same order are identical
under this mapping no matter how the drawer split their strokes or paced
themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Default arc-length step between resampled points, in pixels.  One point
#: per pixel of drawn distance is what makes "ink counts" well defined.
DEFAULT_SPACING = 1.0

# Relative slack used when deciding whether an arc position reaches the end
# of a polyline or coincides with one of its vertices.  Keeps cumulative
# floating-point error from dropping or displacing boundary points.
_SNAP = 1e-6


@dataclass(frozen=True)
class StrokeSample:
    """One timed pen position: pixels plus milliseconds since trial start."""

    x: float
    y: float
    t_ms: int


class Stroke:
    """An ordered, immutable run of samples captured between pen-down and pen-up.

    Samples are stored as parallel arrays (``xy`` with shape (n, 2) and
    ``t_ms`` with shape (n,)) so downstream geometry stays vectorized.
    """

    __slots__ = ("xy", "t_ms")

    def __init__(self, xy, t_ms) -> None:
        xy_arr = np.atleast_2d(np.asarray(xy, dtype=np.float64))
        t_arr = np.asarray(t_ms, dtype=np.int64).reshape(-1)
        if xy_arr.ndim != 2 or xy_arr.shape[1] != 2:
            raise ValueError("stroke coordinates must be an (n, 2) sequence")
        if xy_arr.shape[0] == 0:
            raise ValueError("stroke must contain at least one sample")
        if t_arr.shape[0] != xy_arr.shape[0]:
            raise ValueError("stroke has %d samples but %d timestamps"
                             % (xy_arr.shape[0], t_arr.shape[0]))
        if not np.isfinite(xy_arr).all():
            raise ValueError("stroke coordinates must be finite")
        if (t_arr < 0).any():
            raise ValueError("sample timestamps must be non-negative")
        if t_arr.shape[0] > 1 and (np.diff(t_arr) < 0).any():
            raise ValueError("sample timestamps must be non-decreasing")
        xy_arr = np.ascontiguousarray(xy_arr)
        xy_arr.setflags(write=False)
        t_arr.setflags(write=False)
        self.xy = xy_arr
        self.t_ms = t_arr

    @classmethod
    def from_samples(cls, samples: Iterable[StrokeSample | tuple]) -> "Stroke":
        rows = [(s.x, s.y, s.t_ms) if isinstance(s, StrokeSample) else tuple(s)
                for s in samples]
        if not rows:
            raise ValueError("stroke must contain at least one sample")
        arr = np.asarray(rows, dtype=np.float64)
        return cls(arr[:, :2], arr[:, 2].astype(np.int64))

    @property
    def samples(self) -> list[StrokeSample]:
        return [StrokeSample(float(x), float(y), int(t))
                for (x, y), t in zip(self.xy, self.t_ms)]

    def __len__(self) -> int:
        return self.xy.shape[0]

    def length(self) -> float:
        """Polyline length in pixels (zero for a single-sample stroke)."""
        if len(self) < 2:
            return 0.0
        return float(np.sum(np.linalg.norm(np.diff(self.xy, axis=0), axis=1)))

    def __repr__(self) -> str:
        return f"Stroke(n={len(self)}, length={self.length():.1f}px)"


@dataclass(frozen=True)
class Sketch:
    """One drawer's traced response to one source image under one time limit."""

    sketch_id: str
    image_id: str
    drawer_id: str
    time_limit_s: float
    canvas_w: float
    canvas_h: float
    strokes: tuple[Stroke, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "strokes", tuple(self.strokes))
        if self.time_limit_s <= 0:
            raise ValueError("time limit must be positive")
        if self.canvas_w <= 0 or self.canvas_h <= 0:
            raise ValueError("canvas dimensions must be positive")
        for stroke in self.strokes:
            if not isinstance(stroke, Stroke):
                raise TypeError("strokes must be Stroke instances")

    def total_raw_length(self) -> float:
        """Sum of per-stroke polyline lengths, before any resampling."""
        return float(sum(s.length() for s in self.strokes))

    def in_bounds(self) -> bool:
        """True when every sample lies inside [0, canvas_w] x [0, canvas_h]."""
        for stroke in self.strokes:
            x, y = stroke.xy[:, 0], stroke.xy[:, 1]
            if (x < 0).any() or (x > self.canvas_w).any():
                return False
            if (y < 0).any() or (y > self.canvas_h).any():
                return False
        return True


class LengthMapping:
    """Point cloud (x, y, z) with z equal to cumulative drawn distance.

    Within a stroke consecutive points advance z by exactly the resampling
    spacing; at a stroke join z stays put (pen-up travel draws nothing) while
    (x, y) may jump.  The final point's z equals ``total_length`` except for
    mappings truncated at a position between two lattice points.
    """

    __slots__ = ("points", "total_length")

    def __init__(self, points, total_length: float) -> None:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        if total_length < 0:
            raise ValueError("total_length must be non-negative")
        if pts.shape[0]:
            z = pts[:, 2]
            if z[0] != 0.0:
                raise ValueError("first point must sit at z = 0")
            if (np.diff(z) < 0).any():
                raise ValueError("z must be non-decreasing")
            if z[-1] > total_length:
                raise ValueError("z exceeds the stated total length")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        self.points = pts
        self.total_length = float(total_length)

    @property
    def is_empty(self) -> bool:
        return self.points.shape[0] == 0

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return f"LengthMapping(n={len(self)}, length={self.total_length:.1f}px)"


def resample_stroke(stroke: Stroke, spacing: float = DEFAULT_SPACING) -> np.ndarray:
    """Resample a stroke at uniform arc-length steps.

    Returns the (m, 2) coordinates at arc positions 0, spacing, 2*spacing, ...
    up to the stroke's polyline length, linearly interpolated along the
    polyline.  A single-sample (or fully degenerate) stroke yields exactly its
    anchor point.  Arc positions that coincide with an input vertex return
    that vertex's coordinates untouched.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    pts = stroke.xy
    if pts.shape[0] > 1:
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        keep = np.concatenate(([True], seg > 0.0))
        pts = pts[keep]
        seg = seg[seg > 0.0]
    if pts.shape[0] < 2:
        return pts[:1].copy()

    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = cum[-1]
    n_out = int(total / spacing + _SNAP) + 1
    arcs = np.arange(n_out, dtype=np.float64) * spacing
    out = np.column_stack((np.interp(arcs, cum, pts[:, 0]),
                           np.interp(arcs, cum, pts[:, 1])))

    # Pin arc positions that land on (or within float noise of) a vertex to
    # the original vertex coordinates.
    tol = _SNAP * spacing
    right = np.searchsorted(cum, arcs)
    for cand in (np.clip(right - 1, 0, len(cum) - 1),
                 np.clip(right, 0, len(cum) - 1)):
        hit = np.abs(cum[cand] - arcs) <= tol
        if hit.any():
            out[hit] = pts[cand[hit]]
    return out


def build_length_mapping(sketch: Sketch, spacing: float = DEFAULT_SPACING) -> LengthMapping:
    """Convert a sketch into its length-parameterized 3D point cloud.

    Strokes are resampled in order and concatenated; z advances by one
    spacing per resampled step and stands still across pen-up gaps.
    Zero-length strokes (all samples coincident) contribute no ink.  When a
    stroke begins exactly where the previous one ended, the duplicated join
    point is emitted once, so re-splitting a stroke at a resample point leaves
    the mapping unchanged.  Timestamps never influence the result.
    """
    chunks: list[np.ndarray] = []
    offset = 0  # z offset, in spacing units
    last_xy: tuple[float, float] | None = None
    for stroke in sketch.strokes:
        if stroke.length() == 0.0:
            continue
        xy = resample_stroke(stroke, spacing)
        z = (offset + np.arange(xy.shape[0], dtype=np.float64)) * spacing
        offset += xy.shape[0] - 1
        if (last_xy is not None
                and xy[0, 0] == last_xy[0] and xy[0, 1] == last_xy[1]):
            xy = xy[1:]
            z = z[1:]
        if xy.shape[0]:
            chunks.append(np.column_stack((xy, z)))
            last_xy = (float(xy[-1, 0]), float(xy[-1, 1]))
    if not chunks:
        return LengthMapping(np.empty((0, 3)), 0.0)
    return LengthMapping(np.concatenate(chunks), offset * spacing)


def sketch_from_points(sketch_id: str, image_id: str, drawer_id: str,
                       time_limit_s: float, canvas_w: float, canvas_h: float,
                       strokes: Sequence[Sequence[tuple]]) -> Sketch:
    """Convenience constructor from plain (x, y, t_ms) triples per stroke."""
    return Sketch(sketch_id, image_id, drawer_id, time_limit_s,
                  canvas_w, canvas_h,
                  tuple(Stroke.from_samples(s) for s in strokes))
