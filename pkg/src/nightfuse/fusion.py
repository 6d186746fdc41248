"""Compose fused frames: brighten detected objects in the visible frame and
outline them with bounding boxes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .detector import Region
from .errors import RegionOutOfBounds
from .frame_io import RgbFrame


@dataclass(frozen=True)
class FusionConfig:
    boost: int = 60
    box_color: tuple[int, int, int] = (0, 255, 0)
    box_thickness: int = 1
    draw_boxes: bool = True

    def __post_init__(self):
        object.__setattr__(self, "box_color", tuple(int(c) for c in self.box_color))
        if not 0 <= self.boost <= 255:
            raise ValueError(f"boost must be in [0, 255], got {self.boost}")
        if len(self.box_color) != 3 or not all(0 <= c <= 255 for c in self.box_color):
            raise ValueError(f"box_color must be an (R, G, B) triplet in [0, 255], got {self.box_color}")
        if self.box_thickness < 1:
            raise ValueError(f"box_thickness must be >= 1, got {self.box_thickness}")


def _objects(regions: Iterable[Region]) -> list[Region]:
    return sorted((r for r in regions if r.is_object), key=lambda r: r.label)


def _boost_inplace(rgb: np.ndarray, region: Region, boost: int) -> None:
    h, w = rgb.shape[:2]
    xs, ys = region.pixels[:, 0], region.pixels[:, 1]
    if xs.size and (xs.min() < 0 or ys.min() < 0 or xs.max() >= w or ys.max() >= h):
        raise RegionOutOfBounds(f"region {region.label} has pixels outside the {w}x{h} frame")
    vals = rgb[ys, xs].astype(np.int16) + boost
    rgb[ys, xs] = np.minimum(vals, 255).astype(np.uint8)


def _ring_inplace(rgb: np.ndarray, region: Region, config: FusionConfig) -> None:
    h, w = rgb.shape[:2]
    x0, y0 = region.bbox_x, region.bbox_y
    x1, y1 = x0 + region.bbox_w, y0 + region.bbox_h  # exclusive
    t = config.box_thickness
    color = np.array(config.box_color, dtype=np.uint8)
    # four bands inside the bbox, each clipped to the frame
    bands = (
        (x0, x1, y0, min(y0 + t, y1)),
        (x0, x1, max(y1 - t, y0), y1),
        (x0, min(x0 + t, x1), y0, y1),
        (max(x1 - t, x0), x1, y0, y1),
    )
    for bx0, bx1, by0, by1 in bands:
        bx0, by0 = max(bx0, 0), max(by0, 0)
        bx1, by1 = min(bx1, w), min(by1, h)
        if bx0 < bx1 and by0 < by1:
            rgb[by0:by1, bx0:bx1] = color


def boost_object_pixels(visible: RgbFrame, regions: Iterable[Region], config: FusionConfig) -> RgbFrame:
    """Saturating add of ``config.boost`` to every channel at Object pixels.

    A pixel listed in several Object regions is boosted once per listing, in
    label order.
    """
    out = np.array(visible.data)
    for region in _objects(regions):
        _boost_inplace(out, region, config.boost)
    return RgbFrame(out)


def draw_bbox(frame: RgbFrame, region: Region, config: FusionConfig) -> RgbFrame:
    out = np.array(frame.data)
    _ring_inplace(out, region, config)
    return RgbFrame(out)


def compose_fused_frame(visible: RgbFrame, regions: Iterable[Region], config: FusionConfig | None = None) -> RgbFrame:
    config = config or FusionConfig()
    objects = _objects(regions)
    if not objects:
        return visible
    out = np.array(visible.data)
    for region in objects:
        _boost_inplace(out, region, config.boost)
    if config.draw_boxes:
        for region in objects:
            _ring_inplace(out, region, config)
    return RgbFrame(out)
