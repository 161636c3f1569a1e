"""JSONL sketch records, image manifests, submission validation, and loading.

One sketch per line.  The canonical wire form is UTF-8 JSON with sorted keys
and no whitespace, e.g.::

    {"canvas_h":240,"canvas_w":300,"client_version":"tracelab/0.1",
     "drawer_id":"d-001","image_id":"img-00","set_label":"primary",
     "sketch_id":"s-001","strokes":[[[10.0,20.0,0],[40.0,20.0,130]]],
     "time_limit_s":20}

Coordinates are reals (sub-pixel pointer precision survives), timestamps are
integer milliseconds.  ``set_label`` distinguishes the second 20 s baseline
set from the primary set of the same limit; records without it are primary.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .strokes import Sketch, Stroke

DEFAULT_MIN_LENGTH_PX = 100.0
DEFAULT_GRACE_MS = 500
CLIENT_VERSION = "tracelab/0.1"

LABEL_PRIMARY = "primary"
LABEL_BASELINE_20S = "baseline-20s"

ENV_MIN_LENGTH = "SKETCH_MIN_LEN_PX"
ENV_GRACE = "SKETCH_GRACE_MS"


class DatasetError(ValueError):
    """A dataset file violates its contract (bad reference, duplicate, ...)."""


def env_min_length_px() -> float:
    return float(os.environ.get(ENV_MIN_LENGTH, DEFAULT_MIN_LENGTH_PX))


def env_grace_ms() -> int:
    return int(os.environ.get(ENV_GRACE, DEFAULT_GRACE_MS))


@dataclass(frozen=True)
class SketchRecord:
    """Wire form of a sketch plus capture metadata."""

    sketch: Sketch
    client_version: str = CLIENT_VERSION
    set_label: str = LABEL_PRIMARY


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    category: str
    width: float
    height: float
    path: str = ""


class ImageManifest:
    """The set of source images under study, keyed by image id."""

    def __init__(self, entries: Iterable[ManifestEntry]) -> None:
        self.entries: dict[str, ManifestEntry] = {}
        for entry in entries:
            if entry.width <= 0 or entry.height <= 0:
                raise DatasetError(
                    f"manifest image '{entry.image_id}' has non-positive dimensions")
            if entry.image_id in self.entries:
                raise DatasetError(f"duplicate manifest image '{entry.image_id}'")
            self.entries[entry.image_id] = entry

    def __contains__(self, image_id: str) -> bool:
        return image_id in self.entries

    def __getitem__(self, image_id: str) -> ManifestEntry:
        return self.entries[image_id]

    def __len__(self) -> int:
        return len(self.entries)

    def image_ids(self) -> list[str]:
        return sorted(self.entries)

    def categories(self) -> dict[str, str]:
        return {e.image_id: e.category for e in self.entries.values()}


def load_manifest(path: str) -> ImageManifest:
    """Read a manifest from JSON (list of objects) or CSV (headered)."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, list):
            raise DatasetError("manifest JSON must be a list of image objects")
        rows = raw
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    entries = []
    for row in rows:
        try:
            entries.append(ManifestEntry(
                image_id=str(row["image_id"]),
                category=str(row.get("category", "")),
                width=float(row["width"]),
                height=float(row["height"]),
                path=str(row.get("path", "") or ""),
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise DatasetError(f"bad manifest row {row!r}: {e}") from e
    return ImageManifest(entries)


def save_manifest(path: str, manifest: ImageManifest) -> None:
    rows = [{"image_id": e.image_id, "category": e.category,
             "width": e.width, "height": e.height, "path": e.path}
            for e in manifest.entries.values()]
    if path.endswith(".json"):
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["image_id", "category",
                                                 "width", "height", "path"])
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    atomic_write_text(path, text)


def record_to_dict(record: SketchRecord) -> dict:
    sk = record.sketch
    return {
        "sketch_id": sk.sketch_id,
        "image_id": sk.image_id,
        "drawer_id": sk.drawer_id,
        "time_limit_s": _as_number(sk.time_limit_s),
        "canvas_w": _as_number(sk.canvas_w),
        "canvas_h": _as_number(sk.canvas_h),
        "strokes": [
            [[float(x), float(y), int(t)]
             for (x, y), t in zip(stroke.xy, stroke.t_ms)]
            for stroke in sk.strokes
        ],
        "client_version": record.client_version,
        "set_label": record.set_label,
    }


def serialize_record(record: SketchRecord) -> str:
    """Canonical one-line JSON: sorted keys, compact separators."""
    return json.dumps(record_to_dict(record), sort_keys=True,
                      separators=(",", ":"), ensure_ascii=False)


def record_from_dict(obj: dict) -> SketchRecord:
    try:
        strokes = []
        for raw_stroke in obj["strokes"]:
            pts = [(float(x), float(y)) for x, y, _ in raw_stroke]
            ts = [_as_int_ms(t) for _, _, t in raw_stroke]
            strokes.append(Stroke(np.asarray(pts, dtype=np.float64).reshape(-1, 2), ts))
        sketch = Sketch(
            sketch_id=str(obj["sketch_id"]),
            image_id=str(obj["image_id"]),
            drawer_id=str(obj["drawer_id"]),
            time_limit_s=_as_number(obj["time_limit_s"]),
            canvas_w=_as_number(obj["canvas_w"]),
            canvas_h=_as_number(obj["canvas_h"]),
            strokes=tuple(strokes),
        )
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise DatasetError(f"malformed record: {e}") from e
    return SketchRecord(
        sketch,
        client_version=str(obj.get("client_version", "")),
        set_label=str(obj.get("set_label", LABEL_PRIMARY)),
    )


def parse_record(line: str) -> SketchRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise DatasetError(f"malformed record: {e}") from e
    if not isinstance(obj, dict):
        raise DatasetError("malformed record: not a JSON object")
    return record_from_dict(obj)


def _as_number(v) -> float | int:
    f = float(v)
    return int(f) if f.is_integer() else f


def _as_int_ms(t) -> int:
    f = float(t)
    if not f.is_integer():
        raise ValueError(f"timestamp {t!r} is not an integer millisecond count")
    return int(f)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


ACCEPT = ValidationResult(True)


def validate_submission(record: SketchRecord, entry: ManifestEntry,
                        min_length_px: float = DEFAULT_MIN_LENGTH_PX,
                        grace_ms: int = DEFAULT_GRACE_MS) -> ValidationResult:
    """Quality-gate one submission against its manifest entry.

    Rejects sketches that draw too little, run past the time limit plus
    grace, leave the canvas, arrive empty, or were captured on a canvas that
    does not match the image dimensions.
    """
    sk = record.sketch
    if not sk.strokes:
        return ValidationResult(False, "empty sketch")
    if sk.canvas_w != entry.width or sk.canvas_h != entry.height:
        return ValidationResult(
            False, f"canvas mismatch: {sk.canvas_w:g}x{sk.canvas_h:g} vs "
                   f"image {entry.width:g}x{entry.height:g}")
    if not sk.in_bounds():
        return ValidationResult(False, "out of bounds")
    deadline = sk.time_limit_s * 1000.0 + grace_ms
    for stroke in sk.strokes:
        if stroke.t_ms[-1] > deadline:
            return ValidationResult(False, "overtime")
    if sk.total_raw_length() < min_length_px:
        return ValidationResult(False, "too short")
    return ACCEPT


#: Cell key: (image_id, time limit, set label).
CellKey = tuple[str, float | int, str]


@dataclass
class Exclusion:
    line_no: int
    sketch_id: str | None
    reason: str


@dataclass
class Dataset:
    """Validated sketches grouped into collection cells."""

    cells: dict[CellKey, list[Sketch]] = field(default_factory=dict)
    exclusions: list[Exclusion] = field(default_factory=list)

    def cell(self, image_id: str, time_limit_s: float | int,
             set_label: str = LABEL_PRIMARY) -> list[Sketch]:
        return self.cells.get((image_id, _as_number(time_limit_s), set_label), [])

    def n_sketches(self) -> int:
        return sum(len(v) for v in self.cells.values())


def load_dataset(jsonl_path: str, manifest: ImageManifest | str,
                 min_length_px: float | None = None,
                 grace_ms: int | None = None) -> Dataset:
    """Load and group a sketch file, excluding records that fail validation.

    Grouping is deterministic regardless of input order: cells are keyed by
    (image, limit, label) and sorted, and sketches within a cell sort by id.
    Unknown image ids and duplicate sketch ids are hard errors; malformed
    lines are logged as exclusions.
    """
    if isinstance(manifest, str):
        manifest = load_manifest(manifest)
    min_len = env_min_length_px() if min_length_px is None else min_length_px
    grace = env_grace_ms() if grace_ms is None else grace_ms

    raw_cells: dict[CellKey, list[Sketch]] = {}
    exclusions: list[Exclusion] = []
    seen_ids: set[str] = set()
    with open(jsonl_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = parse_record(line)
            except DatasetError as e:
                exclusions.append(Exclusion(line_no, None, f"line {line_no}: {e}"))
                continue
            sk = record.sketch
            if sk.sketch_id in seen_ids:
                raise DatasetError(
                    f"line {line_no}: duplicate sketch_id '{sk.sketch_id}'")
            seen_ids.add(sk.sketch_id)
            if sk.image_id not in manifest:
                raise DatasetError(
                    f"line {line_no}: unknown image_id '{sk.image_id}'")
            verdict = validate_submission(record, manifest[sk.image_id],
                                          min_len, grace)
            if not verdict:
                exclusions.append(Exclusion(line_no, sk.sketch_id, verdict.reason))
                continue
            key = (sk.image_id, _as_number(sk.time_limit_s), record.set_label)
            raw_cells.setdefault(key, []).append(sk)

    cells = {key: sorted(raw_cells[key], key=lambda s: s.sketch_id)
             for key in sorted(raw_cells)}
    return Dataset(cells, exclusions)


def write_records(path: str, records: Iterable[SketchRecord]) -> None:
    """Write records as canonical JSONL atomically (temp file plus rename)."""
    text = "".join(serialize_record(r) + "\n" for r in records)
    atomic_write_text(path, text)


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_bytes(path: str, data: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
