"""Binning of length mappings into fixed-size voxel grids of ink counts.

Each voxel covers 60 x 60 pixels of image area and 300 pixels of drawn
distance.  Its value is the number of resampled mapping points that fall
inside, i.e. the amount of "ink" a drawer spent there at that stage of the
drawing.  Grids over the same image with the same mapping length always share
dimensions, which is what makes two sketches directly comparable.
"""

from __future__ import annotations

import math

import numpy as np

from .strokes import LengthMapping

#: Voxel extent in image pixels (x and y) and in drawn-distance pixels (z).
CELL_XY = 60.0
CELL_Z = 300.0


class PointOutOfBounds(ValueError):
    """A mapping point lies outside the stated image rectangle."""

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class VoxelGrid:
    """Dense grid of ink counts for one sketch over one image.

    ``counts`` has shape (nx, ny, nz) and dtype int64; ``length_px`` is the
    mapping length the grid represents (after any truncation).
    """

    __slots__ = ("counts", "image_w", "image_h", "length_px")

    def __init__(self, counts: np.ndarray, image_w: float, image_h: float,
                 length_px: float) -> None:
        counts = np.ascontiguousarray(counts, dtype=np.int64)
        if counts.ndim != 3:
            raise ValueError("counts must be a 3-d array")
        if (counts < 0).any():
            raise ValueError("ink counts must be non-negative")
        counts.setflags(write=False)
        self.counts = counts
        self.image_w = float(image_w)
        self.image_h = float(image_h)
        self.length_px = float(length_px)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.counts.shape  # type: ignore[return-value]

    @property
    def cell_size(self) -> tuple[float, float, float]:
        return (CELL_XY, CELL_XY, CELL_Z)

    @property
    def total_ink(self) -> int:
        return int(self.counts.sum())

    def flat(self) -> np.ndarray:
        """Counts flattened with x varying fastest, then y, then z."""
        return self.counts.transpose(2, 1, 0).ravel()

    def dump(self) -> str:
        """Plain-text form (dims header plus one row of x counts per line)."""
        nx, ny, nz = self.dims
        lines = [f"dims {nx} {ny} {nz}",
                 f"image {self.image_w:g} {self.image_h:g}",
                 f"length {self.length_px:g}"]
        for iz in range(nz):
            for iy in range(ny):
                lines.append(" ".join(str(int(c)) for c in self.counts[:, iy, iz]))
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"VoxelGrid(dims={self.dims}, ink={self.total_ink})"


def grid_dims(image_w: float, image_h: float, length_px: float) -> tuple[int, int, int]:
    """Grid shape covering an image and a drawn length; nz is 0 for length 0."""
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dimensions must be positive")
    if length_px < 0:
        raise ValueError("length must be non-negative")
    return (math.ceil(image_w / CELL_XY),
            math.ceil(image_h / CELL_XY),
            math.ceil(length_px / CELL_Z))


def voxelize(mapping: LengthMapping, image_w: float, image_h: float) -> VoxelGrid:
    """Bin a length mapping into ink counts over the image's voxel grid.

    Bins are half-open ([k*60, (k+1)*60) in x/y and [k*300, (k+1)*300) in z)
    except that points exactly on the top image or length boundary fall into
    the last bin.  Points outside the image raise :class:`PointOutOfBounds`
    with the offending index, the signature of corrupt capture data.
    """
    nx, ny, nz = grid_dims(image_w, image_h, mapping.total_length)
    pts = mapping.points
    if pts.shape[0]:
        x, y = pts[:, 0], pts[:, 1]
        bad = (x < 0) | (x > image_w) | (y < 0) | (y > image_h)
        if bad.any():
            i = int(np.argmax(bad))
            raise PointOutOfBounds(
                f"point {i} at ({x[i]:g}, {y[i]:g}) lies outside the "
                f"{image_w:g}x{image_h:g} image", index=i)
    counts = np.zeros((nx, ny, nz), dtype=np.int64)
    if nz > 0 and pts.shape[0]:
        ix = np.minimum((pts[:, 0] // CELL_XY).astype(np.int64), nx - 1)
        iy = np.minimum((pts[:, 1] // CELL_XY).astype(np.int64), ny - 1)
        iz = np.minimum((pts[:, 2] // CELL_Z).astype(np.int64), nz - 1)
        flat = (ix * ny + iy) * nz + iz
        counts = np.bincount(flat, minlength=nx * ny * nz).reshape(nx, ny, nz)
        counts = counts.astype(np.int64)
    return VoxelGrid(counts, image_w, image_h, mapping.total_length)


def truncate_mapping(mapping: LengthMapping, max_len: float) -> LengthMapping:
    """Keep only the mapping prefix drawn within the first ``max_len`` pixels.

    Points with z <= max_len survive; the result's total length is
    min(total_length, max_len).  Truncating at or beyond the mapping's length
    returns the mapping unchanged.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    if mapping.is_empty or max_len >= mapping.total_length:
        return mapping
    kept = mapping.points[mapping.points[:, 2] <= max_len]
    return LengthMapping(kept, min(mapping.total_length, max_len))
