"""End-to-end run: background from the IR stream, then per-frame detection
and fusion, with a JSON detection sidecar and a timing report."""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable

from .background import BackgroundModel, SamplingPolicy, default_stride, spatial_median
from .detector import Classification, DetectionParams, Polarity, Region, detect
from .errors import (
    BadKernel,
    EmptySource,
    FrameProcessingError,
    NightfuseError,
    ParseError,
    ValidationError,
)
from .frame_io import GrayFrame, load_gray_frame, load_rgb_frame, save_frame, scan_sequences
from .fusion import FusionConfig, compose_fused_frame

logger = logging.getLogger(__name__)

SIDECAR_NAME = "detections.json"
REPORT_NAME = "report.json"
PARTIAL_MARKER = "INCOMPLETE"
SIDECAR_FORMAT = "nightfuse-detections"
SIDECAR_VERSION = 1
OUTPUT_FORMATS = ("ppm", "png")
STAGES = ("background", "detect", "fuse", "io")


# -- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    ir_dir: Path
    vis_dir: Path
    out_dir: Path
    sampling: SamplingPolicy = field(default_factory=SamplingPolicy)
    detection: DetectionParams = field(default_factory=DetectionParams)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    background_frames: int | str = "all"
    emit_masks: bool = False
    emit_background: bool = False
    frame_rate: float | None = None
    workers: int = 1
    output_format: str = "ppm"

    def algorithm_dict(self) -> dict[str, Any]:
        """Parameters that determine output pixels and detections."""
        d, s, f = self.detection, self.sampling, self.fusion
        return {
            "stride": s.stride_frames,
            "median_kernel": s.median_kernel,
            "background_frames": self.background_frames,
            "threshold": d.diff_threshold,
            "polarity": d.polarity.value,
            "area_min": d.area_min,
            "ratio_min": d.ratio_min,
            "ratio_max": d.ratio_max,
            "connectivity": d.connectivity,
            "open_radius": d.morph_open_radius,
            "boost": f.boost,
            "box_color": list(f.box_color),
            "box_thickness": f.box_thickness,
            "draw_boxes": f.draw_boxes,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "ir_dir": str(self.ir_dir),
            "vis_dir": str(self.vis_dir),
            "out_dir": str(self.out_dir),
            "frame_rate": self.frame_rate,
            **self.algorithm_dict(),
            "emit_masks": self.emit_masks,
            "emit_background": self.emit_background,
            "workers": self.workers,
            "output_format": self.output_format,
        }


# flat key -> (expected python types, default)
_KEYS: dict[str, tuple[tuple[type, ...], Any]] = {
    "ir_dir": ((str,), None),
    "vis_dir": ((str,), None),
    "out_dir": ((str,), "out"),
    "frame_rate": ((int, float), None),
    "stride": ((int,), None),
    "median_kernel": ((int,), 3),
    "background_frames": ((int, str), "all"),
    "threshold": ((int,), 30),
    "polarity": ((str,), "positive"),
    "area_min": ((int,), 50),
    "ratio_min": ((int, float), 1.5),
    "ratio_max": ((int, float), 4.0),
    "connectivity": ((int,), 8),
    "open_radius": ((int,), 1),
    "boost": ((int,), 60),
    "box_color": ((list, tuple), (0, 255, 0)),
    "box_thickness": ((int,), 1),
    "draw_boxes": ((bool,), True),
    "emit_masks": ((bool,), False),
    "emit_background": ((bool,), False),
    "workers": ((int,), 1),
    "output_format": ((str,), "ppm"),
}

CONFIG_KEYS = tuple(_KEYS)


def _load_config_file(path: str | os.PathLike) -> dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    if not text.strip():
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")
    return data


def _typed(key: str, value: Any) -> Any:
    types, _ = _KEYS[key]
    # bool is an int subclass; keep it out of numeric fields
    if isinstance(value, bool) and bool not in types:
        raise ValidationError(f"{key} must be {'/'.join(t.__name__ for t in types)}, got bool", key)
    if not isinstance(value, types):
        raise ValidationError(
            f"{key} must be {'/'.join(t.__name__ for t in types)}, got {type(value).__name__}", key
        )
    return value


def parse_config(config_file: str | os.PathLike | None = None, **overrides: Any) -> PipelineConfig:
    """Merge defaults, an optional JSON config file, then keyword overrides.

    Overrides whose value is None are ignored, so argparse namespaces can be
    passed straight through.  Unknown keys raise ParseError naming the key.
    """
    raw: dict[str, Any] = {}
    if config_file is not None:
        raw.update(_load_config_file(config_file))
    raw.update({k: v for k, v in overrides.items() if v is not None})
    for key in raw:
        if key not in _KEYS:
            raise ParseError(f"unknown config key {key!r}", key)

    values = {key: default for key, (_, default) in _KEYS.items()}
    for key, value in raw.items():
        values[key] = _typed(key, value)

    for key in ("ir_dir", "vis_dir"):
        if values[key] is None:
            raise ValidationError(f"{key} is required", key)

    bg_frames = values["background_frames"]
    if isinstance(bg_frames, str):
        if bg_frames != "all":
            raise ValidationError(f"background_frames must be >= 1 or 'all', got {bg_frames!r}", "background_frames")
    elif bg_frames < 1:
        raise ValidationError(f"background_frames must be >= 1 or 'all', got {bg_frames}", "background_frames")
    if values["workers"] < 1:
        raise ValidationError(f"workers must be >= 1, got {values['workers']}", "workers")
    if values["output_format"] not in OUTPUT_FORMATS:
        raise ValidationError(f"output_format must be one of {OUTPUT_FORMATS}", "output_format")
    if values["polarity"] not in [p.value for p in Polarity]:
        raise ValidationError(f"polarity must be 'positive' or 'absolute', got {values['polarity']!r}", "polarity")
    frame_rate = values["frame_rate"]
    if frame_rate is not None and frame_rate <= 0:
        raise ValidationError(f"frame_rate must be > 0, got {frame_rate}", "frame_rate")

    stride = values["stride"] if values["stride"] is not None else default_stride(frame_rate)
    try:
        sampling = SamplingPolicy(stride_frames=stride, median_kernel=values["median_kernel"])
    except BadKernel as exc:
        raise ValidationError(str(exc), "median_kernel") from exc
    except ValueError as exc:
        raise ValidationError(str(exc), "stride") from exc

    if not 0 < values["ratio_min"] <= values["ratio_max"]:
        raise ValidationError(
            f"ratio bounds must satisfy 0 < ratio_min <= ratio_max, got [{values['ratio_min']}, {values['ratio_max']}]",
            "ratio_min/ratio_max",
        )
    detection_fields = {
        "threshold": "diff_threshold",
        "area_min": "area_min",
        "ratio_min": "ratio_min",
        "ratio_max": "ratio_max",
        "connectivity": "connectivity",
        "open_radius": "morph_open_radius",
        "polarity": "polarity",
    }
    detection = _build(DetectionParams, {v: values[k] for k, v in detection_fields.items()}, detection_fields)
    fusion_fields = {
        "boost": "boost",
        "box_color": "box_color",
        "box_thickness": "box_thickness",
        "draw_boxes": "draw_boxes",
    }
    fusion = _build(FusionConfig, {v: values[k] for k, v in fusion_fields.items()}, fusion_fields)

    return PipelineConfig(
        ir_dir=Path(values["ir_dir"]),
        vis_dir=Path(values["vis_dir"]),
        out_dir=Path(values["out_dir"]),
        sampling=sampling,
        detection=detection,
        fusion=fusion,
        background_frames=bg_frames,
        emit_masks=values["emit_masks"],
        emit_background=values["emit_background"],
        frame_rate=float(frame_rate) if frame_rate is not None else None,
        workers=values["workers"],
        output_format=values["output_format"],
    )


def _build(cls, kwargs: dict, key_map: dict[str, str]):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        message = str(exc)
        reverse = {v: k for k, v in key_map.items()}
        culprit = next((reverse[f.name] for f in fields(cls) if message.startswith(f.name)), None)
        raise ValidationError(message, culprit) from exc


# -- sidecar -------------------------------------------------------------------


@dataclass(frozen=True)
class RegionRecord:
    bbox_x: int
    bbox_y: int
    bbox_w: int
    bbox_h: int
    area: int
    classification: str

    @classmethod
    def from_region(cls, region: Region) -> "RegionRecord":
        return cls(**region.summary())

    @property
    def is_object(self) -> bool:
        return self.classification == Classification.OBJECT.value

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return (self.bbox_x, self.bbox_y, self.bbox_w, self.bbox_h)


@dataclass(frozen=True)
class DetectionRecord:
    frame_index: int
    regions: tuple[RegionRecord, ...] = ()

    @classmethod
    def from_regions(cls, frame_index: int, regions: Iterable[Region]) -> "DetectionRecord":
        return cls(frame_index, tuple(RegionRecord.from_region(r) for r in regions))

    def objects(self) -> list[RegionRecord]:
        return [r for r in self.regions if r.is_object]


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def emit_detections(records: list[DetectionRecord], path: str | os.PathLike, config: dict[str, Any] | None = None) -> None:
    """Write a single JSON document holding the config echo and all records."""
    indices = [r.frame_index for r in records]
    if indices != sorted(indices):
        raise ValueError("records must be sorted by frame_index")
    doc = {
        "format": SIDECAR_FORMAT,
        "version": SIDECAR_VERSION,
        "config": config or {},
        "records": [
            {"frame_index": r.frame_index, "regions": [asdict(reg) for reg in r.regions]} for r in records
        ],
    }
    _write_atomic(Path(path), json.dumps(doc, indent=2) + "\n")


def read_detections(path: str | os.PathLike) -> tuple[dict[str, Any], list[DetectionRecord]]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != SIDECAR_FORMAT:
        raise ValueError(f"{path} is not a {SIDECAR_FORMAT} document")
    records = [
        DetectionRecord(rec["frame_index"], tuple(RegionRecord(**reg) for reg in rec["regions"]))
        for rec in doc["records"]
    ]
    return doc["config"], records


# -- run -----------------------------------------------------------------------


@dataclass
class RunReport:
    frames_processed: int
    wall_time_per_stage: dict[str, float]
    total_wall_time: float
    achieved_fps: float
    detect_fuse_fps: float
    background_frames_used: int
    config_echo: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class _StageClock:
    def __init__(self):
        self.totals = dict.fromkeys(STAGES, 0.0)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] += time.perf_counter() - t0

    def merge(self, other: dict[str, float], scale: float = 1.0):
        for k, v in other.items():
            self.totals[k] += v * scale


def _fps(frames: int, seconds: float) -> float:
    return frames / seconds if seconds > 0 else float("inf")


def _process_frame(i: int, ir_path: Path, vis_path: Path, background: GrayFrame, config: PipelineConfig):
    """Load, detect and fuse one frame pair; returns results plus stage times."""
    clock = _StageClock()
    try:
        with clock.stage("io"):
            ir = load_gray_frame(ir_path)
            vis = load_rgb_frame(vis_path)
        with clock.stage("detect"):
            mask, regions = detect(ir, background, config.detection)
        with clock.stage("fuse"):
            fused = compose_fused_frame(vis, regions, config.fusion)
    except (NightfuseError, OSError, ValueError) as exc:
        raise FrameProcessingError(i, exc) from exc
    return fused, mask, regions, clock.totals


def _build_background_from(paths, config: PipelineConfig, clock: _StageClock) -> GrayFrame:
    model = None
    for k, path in enumerate(paths):
        try:
            with clock.stage("io"):
                frame = load_gray_frame(path)
            with clock.stage("background"):
                filtered = spatial_median(frame, config.sampling.median_kernel)
                if model is None:
                    model = BackgroundModel.like(filtered)
                model.accumulate(filtered)
        except (NightfuseError, OSError, ValueError) as exc:
            raise FrameProcessingError(k * config.sampling.stride_frames, exc) from exc
    if model is None:
        raise EmptySource("no frames available for background estimation")
    with clock.stage("background"):
        return model.estimate()


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Process every frame pair and write fused frames, sidecar and report.

    An ``INCOMPLETE`` marker sits in ``out_dir`` for the duration of the run
    and is removed only after the report is written.
    """
    t_start = time.perf_counter()
    clock = _StageClock()
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    marker = out_dir / PARTIAL_MARKER
    marker.write_text("run in progress or aborted; outputs are partial\n")

    with clock.stage("io"):
        manifest = scan_sequences(config.ir_dir, config.vis_dir, config.frame_rate)
    n = manifest.frame_count
    n_bg = n if config.background_frames == "all" else min(int(config.background_frames), n)
    bg_paths = manifest.ir_paths[:n_bg][:: config.sampling.stride_frames]
    logger.info("building background from %d of %d IR frames", len(bg_paths), n)
    background = _build_background_from(bg_paths, config, clock)
    if config.emit_background:
        with clock.stage("io"):
            save_frame(background, out_dir / "background.pgm")

    ext = config.output_format
    records: list[DetectionRecord] = []

    def write(i, fused, mask):
        try:
            with clock.stage("io"):
                save_frame(fused, out_dir / f"fused_{i:06d}.{ext}")
                if config.emit_masks:
                    save_frame(mask.to_gray(), out_dir / f"mask_{i:06d}.{'pgm' if ext == 'ppm' else 'png'}")
        except (NightfuseError, OSError, ValueError) as exc:
            raise FrameProcessingError(i, exc) from exc

    pairs = list(manifest.pairs())
    if config.workers == 1:
        for i, ir_path, vis_path in pairs:
            fused, mask, regions, times = _process_frame(i, ir_path, vis_path, background, config)
            clock.merge(times)
            write(i, fused, mask)
            records.append(DetectionRecord.from_regions(i, regions))
    else:
        chunk = 4 * config.workers
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            for start in range(0, n, chunk):
                batch = pairs[start : start + chunk]
                t0 = time.perf_counter()
                results = list(
                    pool.map(lambda p: _process_frame(p[0], p[1], p[2], background, config), batch)
                )
                wall = time.perf_counter() - t0
                # split the parallel section's wall time by the threads' stage shares
                summed = dict.fromkeys(STAGES, 0.0)
                for *_, times in results:
                    for k, v in times.items():
                        summed[k] += v
                busy = sum(summed.values())
                clock.merge(summed, wall / busy if busy > 0 else 0.0)
                for (i, _, _), (fused, mask, regions, _) in zip(batch, results):
                    write(i, fused, mask)
                    records.append(DetectionRecord.from_regions(i, regions))

    with clock.stage("io"):
        emit_detections(records, out_dir / SIDECAR_NAME, config.algorithm_dict())

    total = time.perf_counter() - t_start
    stages = dict(clock.totals)
    report = RunReport(
        frames_processed=n,
        wall_time_per_stage=stages,
        total_wall_time=total,
        achieved_fps=_fps(n, total),
        detect_fuse_fps=_fps(n, stages["detect"] + stages["fuse"]),
        background_frames_used=len(bg_paths),
        config_echo=config.to_dict(),
    )
    _write_atomic(out_dir / REPORT_NAME, json.dumps(report.to_dict(), indent=2) + "\n")
    marker.unlink()
    logger.info("processed %d frames at %.1f fps (detect+fuse %.1f fps)", n, report.achieved_fps, report.detect_fuse_fps)
    return report
