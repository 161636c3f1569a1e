"""Deterministic, seedable generator of synthetic sketch populations.

Stands in for human drawers in tests and calibration runs: a shape program
lists the parts of a scene as polylines with a canonical drawing priority,
and a drawer model perturbs that priority, adds positional jitter, and draws
at a fixed speed until the time limit cuts it off mid-stroke.

All randomness flows through SplitMix64 so the streams are portable: output
k of a stream is mix64(seed + (k + 1) * GOLDEN_GAMMA) where mix64 is the
SplitMix64 finalizer, uniforms are the top 53 bits scaled by 2**-53, and
gaussians come from the Box-Muller transform applied to consecutive uniform
pairs (u1 clamped away from zero).  Seeds for sub-streams derive from a
parent seed plus path components via :func:`derive_seed`.  Any implementation
following this recipe reproduces the sketches bit for bit.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .strokes import Sketch, Stroke

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

#: Synthetic pointer sampling rate, samples per second.
SAMPLE_HZ = 60


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford variant 13)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *path: int | str) -> int:
    """Fold path components into a parent seed, giving independent sub-streams.

    Strings hash through the first 8 bytes of their SHA-256 digest so any
    language derives the same value.
    """
    h = base & _MASK64
    for part in path:
        if isinstance(part, str):
            part = int.from_bytes(
                hashlib.sha256(part.encode("utf-8")).digest()[:8], "big")
        h = mix64(h ^ mix64(part & _MASK64))
    return h


def uniforms(seed: int, n: int) -> np.ndarray:
    """First ``n`` uniform [0, 1) doubles of the SplitMix64 stream for ``seed``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * np.uint64(GOLDEN_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def gaussians(seed: int, n: int) -> np.ndarray:
    """First ``n`` standard normals via Box-Muller over the uniform stream."""
    u = uniforms(seed, 2 * n)
    u1 = np.maximum(u[0::2], 2.0 ** -53)
    u2 = u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class Part:
    """One named contour of a shape program, stored as a polyline."""

    name: str
    points: np.ndarray  # (k, 2) float64

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("part needs at least two polyline points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.length <= 0.0:
            raise ValueError(f"part '{self.name}' has zero length")

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


def line_part(name: str, p0: tuple, p1: tuple) -> Part:
    return Part(name, np.array([p0, p1], dtype=np.float64))


def arc_part(name: str, center: tuple, radius: float,
             deg0: float, deg1: float, segments: int = 64) -> Part:
    theta = np.radians(np.linspace(deg0, deg1, segments + 1))
    pts = np.column_stack((center[0] + radius * np.cos(theta),
                           center[1] + radius * np.sin(theta)))
    return Part(name, pts)


def ellipse_part(name: str, center: tuple, rx: float, ry: float,
                 segments: int = 64) -> Part:
    theta = np.linspace(0.0, 2.0 * math.pi, segments + 1)
    pts = np.column_stack((center[0] + rx * np.cos(theta),
                           center[1] + ry * np.sin(theta)))
    return Part(name, pts)


def polygon_part(name: str, vertices: Sequence[tuple]) -> Part:
    pts = np.asarray(vertices, dtype=np.float64)
    if not np.array_equal(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[0]])
    return Part(name, pts)


@dataclass(frozen=True)
class ShapeProgram:
    """The parts of one synthetic scene plus their canonical drawing order."""

    image_id: str
    width: float
    height: float
    parts: tuple[Part, ...]
    priority: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "priority", tuple(self.priority))
        if not self.parts:
            raise ValueError("program needs at least one part")
        if sorted(self.priority) != list(range(len(self.parts))):
            raise ValueError("priority must be a permutation of part indices")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        for part in self.parts:
            x, y = part.points[:, 0], part.points[:, 1]
            if (x < 0).any() or (x > self.width).any() \
                    or (y < 0).any() or (y > self.height).any():
                raise ValueError(f"part '{part.name}' leaves the image bounds")

    def reversed_priority(self) -> "ShapeProgram":
        return replace(self, priority=tuple(reversed(self.priority)))

    def total_length(self) -> float:
        return float(sum(p.length for p in self.parts))


@dataclass(frozen=True)
class DrawerModel:
    """Behavioral parameters of one simulated drawer."""

    priority_noise: float = 0.0
    jitter_px: float = 0.0
    speed_px_per_s: float = 300.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.priority_noise <= 1.0):
            raise ValueError("priority_noise must lie in [0, 1]")
        if self.jitter_px < 0 or not math.isfinite(self.jitter_px):
            raise ValueError("jitter_px must be finite and non-negative")
        if self.speed_px_per_s <= 0 or not math.isfinite(self.speed_px_per_s):
            raise ValueError("speed must be finite and positive")


def perturb_priority(priority: Sequence[int], noise: float, seed: int) -> tuple[int, ...]:
    """One left-to-right pass of adjacent swaps, each taken with probability ``noise``."""
    order = list(priority)
    if noise <= 0.0 or len(order) < 2:
        return tuple(order)
    u = uniforms(seed, len(order) - 1)
    for i in range(len(order) - 1):
        if u[i] < noise:
            order[i], order[i + 1] = order[i + 1], order[i]
    return tuple(order)


def simulate_sketch(program: ShapeProgram, drawer: DrawerModel,
                    time_limit_s: float,
                    sketch_id: str = "sim-0",
                    drawer_id: str = "drawer-0") -> Sketch:
    """Draw the program's parts in perturbed priority order under a time limit.

    The pen traverses each part at the drawer's speed with samples every
    1/60 s plus the exact part endpoint; per-sample jitter is clamped to the
    canvas.  Drawing stops mid-stroke the moment the limit is reached.
    Pen-up moves between parts cost no time.
    """
    if time_limit_s <= 0:
        raise ValueError("time limit must be positive")
    order = perturb_priority(program.priority, drawer.priority_noise,
                             derive_seed(drawer.seed, "order"))
    dt = 1.0 / SAMPLE_HZ
    clock = 0.0
    strokes: list[Stroke] = []
    for part_idx in order:
        if clock >= time_limit_s:
            break
        part = program.parts[part_idx]
        duration = part.length / drawer.speed_px_per_s
        end = min(duration, time_limit_s - clock)
        times = np.arange(0.0, end, dt)
        if times.size == 0 or end - times[-1] > 1e-12:
            times = np.append(times, end)
        arcs = np.minimum(times * drawer.speed_px_per_s, part.length)
        cum = np.concatenate(([0.0], np.cumsum(
            np.linalg.norm(np.diff(part.points, axis=0), axis=1))))
        x = np.interp(arcs, cum, part.points[:, 0])
        y = np.interp(arcs, cum, part.points[:, 1])
        if drawer.jitter_px > 0.0:
            g = gaussians(derive_seed(drawer.seed, "jitter", part_idx),
                          2 * times.size) * drawer.jitter_px
            x = np.clip(x + g[0::2], 0.0, program.width)
            y = np.clip(y + g[1::2], 0.0, program.height)
        t_ms = np.rint((clock + times) * 1000.0).astype(np.int64)
        strokes.append(Stroke(np.column_stack((x, y)), t_ms))
        clock += duration
    return Sketch(sketch_id, program.image_id, drawer_id, time_limit_s,
                  program.width, program.height, tuple(strokes))


def simulate_population(program: ShapeProgram, drawer_template: DrawerModel,
                        n: int, time_limit_s: float, seed: int,
                        id_prefix: str = "sim") -> list[Sketch]:
    """Generate ``n`` independent drawers' sketches of one program.

    Drawer seeds derive from (seed, index), so any subset of the population
    is reproducible without generating the rest.
    """
    if n < 1:
        raise ValueError("population size must be at least 1")
    sketches = []
    for i in range(n):
        drawer = replace(drawer_template, seed=derive_seed(seed, i))
        sketches.append(simulate_sketch(
            program, drawer, time_limit_s,
            sketch_id=f"{id_prefix}-{i:03d}",
            drawer_id=f"{id_prefix}-drawer-{i:03d}"))
    return sketches


def random_program(seed: int, image_id: str, width: float, height: float,
                   n_parts: int = 4) -> ShapeProgram:
    """Deterministically generate a program of simple parts spread over the image.

    Parts are laid out one per grid region so sketches have spatial structure
    worth comparing; priority is the generation order.
    """
    if n_parts < 1:
        raise ValueError("need at least one part")
    cols = math.ceil(math.sqrt(n_parts))
    rows = math.ceil(n_parts / cols)
    cell_w, cell_h = width / cols, height / rows
    parts: list[Part] = []
    for k in range(n_parts):
        u = uniforms(derive_seed(seed, "part", k), 8)
        cx = (k % cols + 0.5) * cell_w
        cy = (k // cols + 0.5) * cell_h
        rx = (0.2 + 0.25 * u[0]) * cell_w
        ry = (0.2 + 0.25 * u[1]) * cell_h
        kind = int(u[2] * 4)
        if kind == 0:
            part = line_part(f"line-{k}", (cx - rx, cy - ry), (cx + rx, cy + ry))
        elif kind == 1:
            part = arc_part(f"arc-{k}", (cx, cy), min(rx, ry),
                            360.0 * u[3], 360.0 * u[3] + 180.0 + 180.0 * u[4])
        elif kind == 2:
            part = ellipse_part(f"ellipse-{k}", (cx, cy), rx, ry)
        else:
            ang = 2.0 * math.pi * u[3]
            vertices = [(cx + rx * math.cos(ang + 2.0 * math.pi * v / 3.0),
                         cy + ry * math.sin(ang + 2.0 * math.pi * v / 3.0))
                        for v in range(3)]
            part = polygon_part(f"poly-{k}", vertices)
        parts.append(part)
    return ShapeProgram(image_id, width, height, tuple(parts),
                        tuple(range(n_parts)))
