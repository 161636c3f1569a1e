"""Toolkit for collecting and analyzing timed image-tracing sketches.

Pipeline: timed strokes -> length-parameterized 3D mapping -> voxel grid of
ink counts -> pairwise/set dissimilarity -> per-image AA/AB significance
tests -> per-category report.  A deterministic simulator, a JSONL dataset
format, a CLI, and an HTTP capture service round out the toolkit.
"""

from .strokes import (
    DEFAULT_SPACING,
    LengthMapping,
    Sketch,
    Stroke,
    StrokeSample,
    build_length_mapping,
    resample_stroke,
    sketch_from_points,
)
from .voxel import (
    CELL_XY,
    CELL_Z,
    PointOutOfBounds,
    VoxelGrid,
    grid_dims,
    truncate_mapping,
    voxelize,
)
from .metric import (
    IncomparableSketches,
    PairDissimilarity,
    SetDissimilarity,
    ZeroCommonLength,
    pair_dissimilarity,
    set_dissimilarity,
)
from .stats import (
    CategoryReport,
    CategoryRow,
    ImageTestResult,
    TTestResult,
    aggregate_categories,
    regularized_incomplete_beta,
    report_csv,
    report_text,
    run_image_test,
    students_t_test,
)
from .synth import (
    DrawerModel,
    Part,
    ShapeProgram,
    derive_seed,
    random_program,
    simulate_population,
    simulate_sketch,
)
from .dataio import (
    Dataset,
    DatasetError,
    ImageManifest,
    ManifestEntry,
    SketchRecord,
    ValidationResult,
    load_dataset,
    load_manifest,
    parse_record,
    serialize_record,
    validate_submission,
    write_records,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
