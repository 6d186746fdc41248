"""Infrared/visible frame-sequence fusion for night-vision pedestrian highlighting."""

from .background import (
    BackgroundModel,
    SamplingPolicy,
    accumulate,
    build_background,
    estimate_background,
    spatial_median,
)
from .detector import (
    BinaryMask,
    Classification,
    DetectionParams,
    Polarity,
    Region,
    classify_regions,
    detect,
    label_components,
    morph_open,
    subtract_threshold,
)
from .frame_io import (
    GrayFrame,
    RgbFrame,
    SequenceManifest,
    load_gray_frame,
    load_rgb_frame,
    save_frame,
    scan_sequences,
)
from .fusion import FusionConfig, boost_object_pixels, compose_fused_frame, draw_bbox
from .pipeline import (
    DetectionRecord,
    PipelineConfig,
    RunReport,
    emit_detections,
    parse_config,
    read_detections,
    run_pipeline,
)

__version__ = "0.1.0"
