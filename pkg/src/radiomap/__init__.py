"""Indoor pathloss radio-map toolkit.

Feature-channel engineering, normalization and geometry transforms,
training-time augmentations, a deterministic physics baseline, RMSE
evaluation with task splits, distribution-shift statistics, and a
forward-only stub of the encoder/neck/decoder architecture.
"""

from .augment import (
    AugmentConfig,
    AugmentTrace,
    apply_pipeline,
    crop_resize,
    flip,
    mixup,
    resize_db_domain,
    rot90,
    rotate_arbitrary,
)
from .baseline import BaselineConfig, predict
from .core import (
    MAX_PATHLOSS_DB,
    PAD_VALUE,
    PIXEL_SIZE_M,
    TX_HEIGHT_M,
    AntennaPattern,
    BuildingGrid,
    DataError,
    FormatError,
    GridFileError,
    LengthError,
    RadioMap,
    SampleMeta,
    TxConfig,
    building_from_raster,
    building_to_raster,
    export_png,
    read_grid_file,
    read_pattern_file,
    synthetic_building,
    write_grid_file,
    write_pattern_file,
)
from .evaluation import (
    EvalReport,
    SplitSpec,
    grouped_report,
    make_split,
    per_map_rmse,
    rmse_macro,
    rmse_micro,
    task_weighted_average,
)
from .features import (
    CHANNEL_ORDER,
    DIVISORS,
    MODEL_SIZE,
    FeatureStack,
    GeomTransform,
    build_stack,
    distance_channel,
    fspl_channel,
    fspl_db,
    frequency_channel,
    invert_geom,
    normalize,
    obstruction_channel,
    pad_and_resize,
    radiation_channel,
    trace_wall_entries,
)
from .modelstub import NeckSpec, StubWeights, decode_head, forward, patchify
from .shift import ShiftStats, dataset_scatter, generate_crops, scatter_to_csv, stats

__version__ = "0.1.0"
