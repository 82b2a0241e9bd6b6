"""Low-latency visual previews of large CT volumes.

Turns gigabyte-scale slice stacks into three browsable products: a
thumbnail chosen by image entropy (list preview), histogram-filtered
slicemap atlases (data preview), and multi-resolution slicemaps with the
sample container removed (interactive preview), plus an HTTP service
that delivers them to a browser viewer.
"""
from .errors import (
    CTPrevError,
    CircleOutOfBounds,
    DegenerateHistogram,
    DimensionMismatch,
    EmptyHistogram,
    EmptyRegion,
    EmptyVolume,
    IndexOutOfRange,
    InvalidManifest,
    InvalidSpec,
    InvalidTarget,
    ManifestMismatch,
    MissingSlice,
    NoCircleFound,
    NonConvergence,
    RangeOutOfBounds,
    UnsupportedPixelFormat,
    UnsupportedScheme,
)
from .mask import (
    Circle,
    apply_circle_mask,
    artifact_bins,
    detect_container_circle,
    filter_histogram_bins,
)
from .phantom import (
    BoxSpec,
    CylinderSpec,
    Phantom,
    PhantomSpec,
    SphereSpec,
    generate_phantom,
)
from .pipeline import (
    DataPreview,
    InteractivePreview,
    ListPreview,
    build_bundle,
    build_data_preview,
    build_interactive_preview,
    build_list_preview,
    ingest_stack,
    verify_bundle,
)
from .render import (
    EntropyResult,
    SnapshotResult,
    ViewParams,
    image_entropy,
    optimal_snapshot,
    render_view,
)
from .slicemap import (
    SlicemapScheme,
    SlicemapSet,
    decode_slicemaps,
    encode_slicemaps,
    load_slicemaps,
    plan_scheme,
    save_slicemaps,
    slice_cell,
)
from .threshold import (
    ThresholdResult,
    apply_threshold,
    its_threshold,
    otsu_threshold,
)
from .volume import (
    DatasetMeta,
    Histogram256,
    Volume,
    downscale_volume,
    load_slice_stack,
    load_volume,
    save_volume,
    volume_histogram,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "CTPrevError",
    "CircleOutOfBounds",
    "DegenerateHistogram",
    "DimensionMismatch",
    "EmptyHistogram",
    "EmptyRegion",
    "EmptyVolume",
    "IndexOutOfRange",
    "InvalidManifest",
    "InvalidSpec",
    "InvalidTarget",
    "ManifestMismatch",
    "MissingSlice",
    "NoCircleFound",
    "NonConvergence",
    "RangeOutOfBounds",
    "UnsupportedPixelFormat",
    "UnsupportedScheme",
    # volume
    "DatasetMeta",
    "Histogram256",
    "Volume",
    "downscale_volume",
    "load_slice_stack",
    "load_volume",
    "save_volume",
    "volume_histogram",
    # phantom
    "BoxSpec",
    "CylinderSpec",
    "Phantom",
    "PhantomSpec",
    "SphereSpec",
    "generate_phantom",
    # threshold
    "ThresholdResult",
    "apply_threshold",
    "its_threshold",
    "otsu_threshold",
    # mask
    "Circle",
    "apply_circle_mask",
    "artifact_bins",
    "detect_container_circle",
    "filter_histogram_bins",
    # slicemap
    "SlicemapScheme",
    "SlicemapSet",
    "decode_slicemaps",
    "encode_slicemaps",
    "load_slicemaps",
    "plan_scheme",
    "save_slicemaps",
    "slice_cell",
    # render
    "EntropyResult",
    "SnapshotResult",
    "ViewParams",
    "image_entropy",
    "optimal_snapshot",
    "render_view",
    # pipeline
    "DataPreview",
    "InteractivePreview",
    "ListPreview",
    "build_bundle",
    "build_data_preview",
    "build_interactive_preview",
    "build_list_preview",
    "ingest_stack",
    "verify_bundle",
]
