"""Command-line interface for the tracing toolkit.

Subcommands cover the full pipeline: ``simulate`` writes synthetic datasets,
``voxelize``/``compare`` inspect individual sketches, ``abtest`` runs the
per-image significance tests over a dataset, ``report`` aggregates results
by category, ``render`` draws a sketch with an early-to-late color gradient,
and ``serve`` starts the capture service.

Exit codes: 0 success, 1 data error, 2 usage error.  Output files are always
written to a temp file and renamed, never left half-written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from . import dataio, stats, synth
from .dataio import (
    ImageManifest,
    LABEL_BASELINE_20S,
    LABEL_PRIMARY,
    ManifestEntry,
    SketchRecord,
    atomic_write_bytes,
    atomic_write_text,
)
from .metric import pair_dissimilarity
from .strokes import DEFAULT_SPACING, build_length_mapping
from .voxel import voxelize

RESULT_COLUMNS = ("image_id", "comparison", "t", "df", "p", "reject")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracelab",
        description="Timed tracing sketches: capture, voxelize, compare, test.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("voxelize", help="dump a sketch file's voxel grids as text")
    p.add_argument("sketches", help="JSONL sketch file")
    p.add_argument("--image-w", type=float, required=True)
    p.add_argument("--image-h", type=float, required=True)
    p.add_argument("--sketch-id", help="only this sketch")
    p.add_argument("--spacing", type=float, default=DEFAULT_SPACING)
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.set_defaults(func=_cmd_voxelize)

    p = sub.add_parser("compare", help="dissimilarity between two sketches")
    p.add_argument("sketch_a", help="JSONL file; first sketch is used")
    p.add_argument("sketch_b", help="JSONL file; first sketch is used")
    p.add_argument("--image-w", type=float, required=True)
    p.add_argument("--image-h", type=float, required=True)
    p.add_argument("--spacing", type=float, default=DEFAULT_SPACING)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("abtest", help="per-image AA/AB significance tests")
    p.add_argument("--dataset", required=True, help="JSONL sketch file")
    p.add_argument("--manifest", required=True, help="image manifest (json/csv)")
    p.add_argument("--comparison", choices=("20v10", "20v40"), required=True)
    p.add_argument("--alpha", type=float, default=stats.DEFAULT_ALPHA)
    p.add_argument("--welch", action="store_true",
                   help="use the unequal-variance test")
    p.add_argument("--spacing", type=float, default=DEFAULT_SPACING)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel per-image workers")
    p.add_argument("-o", "--output", help="results CSV path (default stdout)")
    p.set_defaults(func=_cmd_abtest)

    p = sub.add_parser("report", help="aggregate results by image category")
    p.add_argument("--results", required=True, help="results CSV from abtest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--config", required=True, help="scenario JSON")
    p.add_argument("-o", "--output", required=True, help="JSONL output path")
    p.add_argument("--manifest-out", help="also write the matching manifest")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("render", help="draw a sketch with an early-to-late gradient")
    p.add_argument("sketches", help="JSONL sketch file")
    p.add_argument("--sketch-id", help="only this sketch (default: first)")
    p.add_argument("--line-width", type=int, default=2)
    p.add_argument("-o", "--output", required=True, help="PNG output path")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("serve", help="run the capture service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8037)
    p.add_argument("--dataset", required=True, help="JSONL store to append to")
    p.add_argument("--manifest", required=True)
    p.add_argument("--target", type=int, default=10,
                   help="accepted sketches per cell")
    p.add_argument("--min-length-px", type=float, default=None)
    p.add_argument("--grace-ms", type=int, default=None)
    p.add_argument("--task-ttl-s", type=float, default=600.0)
    p.add_argument("--image-dir", help="serve image files from this directory")
    p.add_argument("--static-dir", help="serve the tracing UI from this directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def _read_records(path: str) -> list[SketchRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(dataio.parse_record(line))
            except dataio.DatasetError as e:
                raise dataio.DatasetError(f"{path}:{line_no}: {e}") from e
    if not records:
        raise dataio.DatasetError(f"{path}: no sketches found")
    return records


def _emit(text: str, output: str | None) -> None:
    if output:
        atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def _cmd_voxelize(args) -> int:
    records = _read_records(args.sketches)
    if args.sketch_id:
        records = [r for r in records if r.sketch.sketch_id == args.sketch_id]
        if not records:
            raise dataio.DatasetError(f"sketch '{args.sketch_id}' not found")
    blocks = []
    for record in records:
        mapping = build_length_mapping(record.sketch, args.spacing)
        grid = voxelize(mapping, args.image_w, args.image_h)
        blocks.append(f"sketch {record.sketch.sketch_id}\n" + grid.dump())
    _emit("\n".join(blocks), args.output)
    return 0


def _cmd_compare(args) -> int:
    rec_a = _read_records(args.sketch_a)[0]
    rec_b = _read_records(args.sketch_b)[0]
    map_a = build_length_mapping(rec_a.sketch, args.spacing)
    map_b = build_length_mapping(rec_b.sketch, args.spacing)
    pair = pair_dissimilarity(map_a, map_b, args.image_w, args.image_h)
    print(f"{pair.value:.12g}")
    return 0


def _required_cells(comparison: str) -> tuple[int, str]:
    other_limit = 10 if comparison == "20v10" else 40
    return other_limit, LABEL_PRIMARY


def _cmd_abtest(args) -> int:
    manifest = dataio.load_manifest(args.manifest)
    dataset = dataio.load_dataset(args.dataset, manifest)
    for exc in dataset.exclusions:
        print(f"excluded line {exc.line_no} "
              f"({exc.sketch_id or '?'}): {exc.reason}", file=sys.stderr)
    other_limit, other_label = _required_cells(args.comparison)

    jobs = []
    for image_id in manifest.image_ids():
        primary = dataset.cell(image_id, 20, LABEL_PRIMARY)
        baseline = dataset.cell(image_id, 20, LABEL_BASELINE_20S)
        other = dataset.cell(image_id, other_limit, other_label)
        if min(len(primary), len(baseline), len(other)) < 2:
            print(f"skipping image '{image_id}': needs at least 2 sketches in "
                  f"each of the 20s, baseline and {other_limit}s cells",
                  file=sys.stderr)
            continue
        entry = manifest[image_id]
        jobs.append((image_id, primary, baseline, other, entry.width, entry.height))
    if not jobs:
        raise dataio.DatasetError("no image has all the cells this comparison needs")

    def run(job):
        image_id, primary, baseline, other, w, h = job
        return stats.run_image_test(image_id, primary, baseline, other, w, h,
                                    alpha=args.alpha, welch=args.welch,
                                    comparison=args.comparison,
                                    spacing=args.spacing)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    results.sort(key=lambda r: r.image_id)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(RESULT_COLUMNS)
    for res in results:
        writer.writerow([res.image_id, res.comparison, repr(res.t_stat),
                         repr(res.df), repr(res.p_value),
                         "true" if res.reject else "false"])
    _emit(buf.getvalue(), args.output)
    return 0


def read_results_csv(path: str) -> list[stats.ImageTestResult]:
    """Read an abtest results CSV back into result rows (without D values)."""
    results = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                results.append(stats.ImageTestResult(
                    image_id=row["image_id"],
                    comparison=row["comparison"],
                    aa=None, ab=None,  # type: ignore[arg-type]
                    t_stat=float(row["t"]),
                    df=float(row["df"]),
                    p_value=float(row["p"]),
                    reject=row["reject"].strip().lower() in ("true", "1", "yes"),
                ))
            except (KeyError, ValueError) as e:
                raise dataio.DatasetError(f"bad results row {row!r}: {e}") from e
    return results


def _cmd_report(args) -> int:
    manifest = dataio.load_manifest(args.manifest)
    results = read_results_csv(args.results)
    report = stats.aggregate_categories(results, manifest.categories())
    text = stats.report_csv(report) if args.format == "csv" \
        else stats.report_text(report)
    _emit(text, args.output)
    return 0


def _load_scenario(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    for key in ("seed", "images", "populations"):
        if key not in cfg:
            raise dataio.DatasetError(f"scenario config is missing '{key}'")
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load_scenario(args.config)
    seed = int(cfg["seed"])
    default_canvas = cfg.get("canvas", {"width": 300, "height": 240})
    n_default = int(cfg.get("n_per_cell", 10))

    records: list[SketchRecord] = []
    entries: list[ManifestEntry] = []
    for img in cfg["images"]:
        image_id = str(img["image_id"])
        width = float(img.get("width", default_canvas["width"]))
        height = float(img.get("height", default_canvas["height"]))
        program = synth.random_program(
            synth.derive_seed(seed, image_id), image_id, width, height,
            n_parts=int(img.get("parts", 4)))
        entries.append(ManifestEntry(image_id, str(img.get("category", "synthetic")),
                                     width, height, str(img.get("path", ""))))
        for pop in cfg["populations"]:
            limit = pop["time_limit_s"]
            label = str(pop.get("set_label", LABEL_PRIMARY))
            n = int(pop.get("n", n_default))
            drawer = synth.DrawerModel(
                priority_noise=float(pop.get("priority_noise", 0.0)),
                jitter_px=float(pop.get("jitter_px", 0.0)),
                speed_px_per_s=float(pop.get("speed_px_per_s", 300.0)),
            )
            prog = program.reversed_priority() if pop.get("reverse_priority") \
                else program
            pop_seed = synth.derive_seed(seed, image_id, int(limit), label)
            prefix = f"{image_id}-{limit}s-{label}"
            for sketch in synth.simulate_population(prog, drawer, n, limit,
                                                    pop_seed, id_prefix=prefix):
                records.append(SketchRecord(sketch, set_label=label))
    dataio.write_records(args.output, records)
    if args.manifest_out:
        dataio.save_manifest(args.manifest_out, ImageManifest(entries))
    print(f"wrote {len(records)} sketches to {args.output}", file=sys.stderr)
    return 0


def _gradient_color(fraction: float) -> tuple[int, int, int]:
    """Early ink is yellow, late ink is blue."""
    f = min(max(fraction, 0.0), 1.0)
    return (round(255 * (1 - f)), round(255 * (1 - f)), round(255 * f))


def _cmd_render(args) -> int:
    from PIL import Image, ImageDraw

    records = _read_records(args.sketches)
    if args.sketch_id:
        records = [r for r in records if r.sketch.sketch_id == args.sketch_id]
        if not records:
            raise dataio.DatasetError(f"sketch '{args.sketch_id}' not found")
    sketch = records[0].sketch
    img = Image.new("RGB", (int(sketch.canvas_w), int(sketch.canvas_h)), "white")
    draw = ImageDraw.Draw(img)
    total = sketch.total_raw_length() or 1.0
    drawn = 0.0
    for stroke in sketch.strokes:
        xy = stroke.xy
        if len(xy) == 1:
            color = _gradient_color(drawn / total)
            draw.point((xy[0, 0], xy[0, 1]), fill=color)
            continue
        for i in range(len(xy) - 1):
            seg = ((xy[i, 0], xy[i, 1]), (xy[i + 1, 0], xy[i + 1, 1]))
            color = _gradient_color(drawn / total)
            draw.line(seg, fill=color, width=args.line_width)
            drawn += float(((xy[i + 1, 0] - xy[i, 0]) ** 2
                            + (xy[i + 1, 1] - xy[i, 1]) ** 2) ** 0.5)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    atomic_write_bytes(args.output, buf.getvalue())
    return 0


def _cmd_serve(args) -> int:
    from .service import Coordinator, SketchStore, make_server

    manifest = dataio.load_manifest(args.manifest)
    store = SketchStore(args.dataset)
    coordinator = Coordinator(manifest, store, target=args.target,
                              min_length_px=args.min_length_px,
                              grace_ms=args.grace_ms,
                              task_ttl_s=args.task_ttl_s)
    server = make_server(args.host, args.port, coordinator,
                         image_dir=args.image_dir, static_dir=args.static_dir)
    host, port = server.server_address[:2]
    print(f"capture service on http://{host}:{port} "
          f"({len(manifest)} images, target {args.target})", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        store.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
