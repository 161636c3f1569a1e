import numpy as np
import pytest

from tracelab.strokes import sketch_from_points
from tracelab.synth import DrawerModel, derive_seed, random_program, simulate_sketch


def make_sketch(strokes, sketch_id="s-0", image_id="img-0", drawer_id="d-0",
                time_limit_s=20, canvas_w=120.0, canvas_h=60.0):
    """Sketch from bare (x, y, t_ms) triples per stroke."""
    return sketch_from_points(sketch_id, image_id, drawer_id, time_limit_s,
                              canvas_w, canvas_h, strokes)


def line_sketch(p0, p1, n_samples=2, **kwargs):
    """Single straight stroke from p0 to p1 with evenly timed samples."""
    xs = np.linspace(p0[0], p1[0], n_samples)
    ys = np.linspace(p0[1], p1[1], n_samples)
    ts = np.arange(n_samples) * 16
    return make_sketch([[(x, y, int(t)) for x, y, t in zip(xs, ys, ts)]], **kwargs)


def random_sim_sketch(seed, image_w=240.0, image_h=240.0, n_parts=3,
                      jitter=1.0, noise=0.3, speed=200.0, limit=20,
                      image_id="img-0", sketch_id=None):
    """One deterministic synthetic sketch, used across the oracle tests."""
    program = random_program(derive_seed(seed, "prog"), image_id, image_w,
                             image_h, n_parts=n_parts)
    drawer = DrawerModel(priority_noise=noise, jitter_px=jitter,
                         speed_px_per_s=speed, seed=derive_seed(seed, "drawer"))
    return simulate_sketch(program, drawer, limit,
                           sketch_id=sketch_id or f"rand-{seed}",
                           drawer_id=f"rand-drawer-{seed}")


def brute_force_grid(mapping, image_w, image_h):
    """Independent point-binning oracle: plain loops and integer division.

    Mirrors the binning contract (half-open cells, top boundary into the
    last bin) without sharing any code with the implementation.
    """
    import math

    nx = math.ceil(image_w / 60)
    ny = math.ceil(image_h / 60)
    nz = math.ceil(mapping.total_length / 300)
    counts = np.zeros((nx, ny, nz), dtype=np.int64)
    if nz == 0:
        return counts
    for x, y, z in mapping.points:
        ix = int(x // 60)
        iy = int(y // 60)
        iz = int(z // 300)
        if ix == nx:
            ix -= 1
        if iy == ny:
            iy -= 1
        if iz >= nz:
            iz = nz - 1
        counts[ix, iy, iz] += 1
    return counts


@pytest.fixture
def simple_manifest_rows():
    return [
        {"image_id": "img-0", "category": "synthetic", "width": 120, "height": 60, "path": ""},
        {"image_id": "img-1", "category": "synthetic", "width": 240, "height": 240, "path": ""},
    ]
