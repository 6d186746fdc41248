"""Warm-object extraction from IR frames against a frozen background.

Stages: thresholded subtraction into a 0/255 mask, morphological opening to
drop specks, connected-component labeling, and an area plus height/width
gate that separates upright pedestrians from other thermal emitters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch
from .frame_io import GrayFrame

FOREGROUND = 255


class Polarity(str, enum.Enum):
    POSITIVE = "positive"  # only warmer than background
    ABSOLUTE = "absolute"  # warmer or cooler


class Classification(str, enum.Enum):
    OBJECT = "Object"
    NOISE = "Noise"


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """0/255 foreground mask, ``data`` has shape (height, width)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.dtype != np.uint8 or arr.ndim != 2:
            raise TypeError(f"mask must be a 2-D uint8 array, got {arr.dtype} {arr.shape}")
        if np.any((arr != 0) & (arr != FOREGROUND)):
            raise ValueError("mask values must be 0 or 255")
        arr = np.ascontiguousarray(arr).view()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_bool(cls, fg: np.ndarray) -> "BinaryMask":
        return cls(fg.astype(np.uint8) * np.uint8(FOREGROUND))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def foreground(self) -> np.ndarray:
        return self.data == FOREGROUND

    def count(self) -> int:
        return int(np.count_nonzero(self.data))

    def to_gray(self) -> GrayFrame:
        return GrayFrame(self.data)

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))


@dataclass(frozen=True, eq=False)
class Region:
    """One connected foreground component.

    ``pixels`` is an (area, 2) int array of (x, y) member coordinates in
    raster order.
    """

    label: int
    bbox_x: int
    bbox_y: int
    bbox_w: int
    bbox_h: int
    area: int
    pixels: np.ndarray = field(repr=False)
    classification: Classification = Classification.NOISE

    @property
    def ratio(self) -> float:
        return self.bbox_h / self.bbox_w

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return (self.bbox_x, self.bbox_y, self.bbox_w, self.bbox_h)

    @property
    def is_object(self) -> bool:
        return self.classification is Classification.OBJECT

    def summary(self) -> dict:
        return {
            "bbox_x": self.bbox_x,
            "bbox_y": self.bbox_y,
            "bbox_w": self.bbox_w,
            "bbox_h": self.bbox_h,
            "area": self.area,
            "classification": self.classification.value,
        }

    def translated(self, dx: int, dy: int) -> "Region":
        return replace(
            self,
            bbox_x=self.bbox_x + dx,
            bbox_y=self.bbox_y + dy,
            pixels=self.pixels + np.array([dx, dy], dtype=self.pixels.dtype),
        )

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return (
            self.label == other.label
            and self.bbox == other.bbox
            and self.area == other.area
            and self.classification == other.classification
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class DetectionParams:
    diff_threshold: int = 30
    area_min: int = 50
    ratio_min: float = 1.5
    ratio_max: float = 4.0
    connectivity: int = 8
    morph_open_radius: int = 1
    polarity: Polarity = Polarity.POSITIVE

    def __post_init__(self):
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        if not 0 <= self.diff_threshold <= 255:
            raise ValueError(f"diff_threshold must be in [0, 255], got {self.diff_threshold}")
        if self.area_min < 1:
            raise ValueError(f"area_min must be >= 1, got {self.area_min}")
        if not 0 < self.ratio_min <= self.ratio_max:
            raise ValueError(
                f"ratio bounds must satisfy 0 < ratio_min <= ratio_max, got [{self.ratio_min}, {self.ratio_max}]"
            )
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.morph_open_radius < 0:
            raise ValueError(f"morph_open_radius must be >= 0, got {self.morph_open_radius}")


def _check_same_size(a, b):
    if a.data.shape[:2] != b.data.shape[:2]:
        raise DimensionMismatch(f"{a!r} and {b!r} differ in size")


def subtract_threshold(frame: GrayFrame, background: GrayFrame, params: DetectionParams) -> BinaryMask:
    _check_same_size(frame, background)
    diff = frame.data.astype(np.int16) - background.data.astype(np.int16)
    if params.polarity is Polarity.ABSOLUTE:
        diff = np.abs(diff)
    return BinaryMask.from_bool(diff > params.diff_threshold)


def _window_reduce(fg: np.ndarray, radius: int, reduce) -> np.ndarray:
    # Separable square window.  Edge replication makes min/max over the
    # padded window equal min/max over the window clipped to the frame.
    h, w = fg.shape
    padded = np.pad(fg, radius, mode="edge")
    rows = padded[0:h]
    for k in range(1, 2 * radius + 1):
        rows = reduce(rows, padded[k : k + h])
    out = rows[:, 0:w]
    for k in range(1, 2 * radius + 1):
        out = reduce(out, rows[:, k : k + w])
    return out


def erode(fg: np.ndarray, radius: int) -> np.ndarray:
    return _window_reduce(fg, radius, np.logical_and)


def dilate(fg: np.ndarray, radius: int) -> np.ndarray:
    return _window_reduce(fg, radius, np.logical_or)


def morph_open(mask: BinaryMask, radius: int) -> BinaryMask:
    """Erosion then dilation with a (2*radius+1) square element.

    Window positions falling outside the frame are ignored, so a blob touching
    the border is not eaten away by the edge.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if radius == 0:
        return mask
    return BinaryMask.from_bool(dilate(erode(mask.foreground, radius), radius))


_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def label_components(mask: BinaryMask, connectivity: int = 8) -> list[Region]:
    """Connected foreground components, labeled 1..n in raster order of each
    component's first pixel.  All regions start out classified as Noise."""
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, n = ndimage.label(mask.foreground, structure=_STRUCTURES[connectivity])
    if n == 0:
        return []
    flat = labels.ravel()
    fg_idx = np.flatnonzero(flat)  # raster order
    fg_lab = flat[fg_idx]
    order = np.argsort(fg_lab, kind="stable")
    sorted_idx = fg_idx[order]
    sorted_lab = fg_lab[order]
    starts = np.flatnonzero(np.r_[True, sorted_lab[1:] != sorted_lab[:-1]])
    ends = np.r_[starts[1:], sorted_lab.size]
    # relabel by first-encountered pixel regardless of the labeler's numbering
    firsts = sorted_idx[starts]
    width = mask.width
    regions = []
    for new_label, g in enumerate(np.argsort(firsts, kind="stable"), start=1):
        idx = sorted_idx[starts[g] : ends[g]]
        ys, xs = np.divmod(idx, width)
        x0, x1 = int(xs.min()), int(xs.max())
        y0, y1 = int(ys.min()), int(ys.max())
        regions.append(
            Region(
                label=new_label,
                bbox_x=x0,
                bbox_y=y0,
                bbox_w=x1 - x0 + 1,
                bbox_h=y1 - y0 + 1,
                area=int(idx.size),
                pixels=np.stack([xs, ys], axis=1),
            )
        )
    return regions


def is_pedestrian(region: Region, params: DetectionParams) -> bool:
    return region.area >= params.area_min and params.ratio_min <= region.bbox_h / region.bbox_w <= params.ratio_max


def classify_regions(regions: list[Region], params: DetectionParams) -> list[Region]:
    return [
        replace(region, classification=Classification.OBJECT if is_pedestrian(region, params) else Classification.NOISE)
        for region in regions
    ]


def detect(
    frame: GrayFrame, background: GrayFrame, params: DetectionParams | None = None
) -> tuple[BinaryMask, list[Region]]:
    """Run the full extraction chain; the returned mask is post-opening."""
    params = params or DetectionParams()
    mask = subtract_threshold(frame, background, params)
    mask = morph_open(mask, params.morph_open_radius)
    regions = classify_regions(label_components(mask, params.connectivity), params)
    return mask, regions
