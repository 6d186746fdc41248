"""Static IR background estimation by per-pixel temporal mode.

Sampled frames are denoised with a small spatial median, every pixel's
value is tallied into a 256-bin histogram, and the background image is the
most frequent value at each pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import BadKernel, DimensionMismatch, EmptyModel, EmptySource
from .frame_io import GrayFrame

N_LEVELS = 256


@dataclass(frozen=True)
class SamplingPolicy:
    """Which frames feed the background, and how each is denoised.

    ``median_kernel`` is the edge length of the square median window; 1
    disables the filter.
    """

    stride_frames: int = 1
    median_kernel: int = 3

    def __post_init__(self):
        if not isinstance(self.stride_frames, int) or self.stride_frames < 1:
            raise ValueError(f"stride_frames must be an integer >= 1, got {self.stride_frames!r}")
        if not isinstance(self.median_kernel, int) or self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise BadKernel(f"median_kernel must be odd and >= 1, got {self.median_kernel!r}")

    @classmethod
    def from_frame_rate(cls, frame_rate: float | None, median_kernel: int = 3) -> "SamplingPolicy":
        """Sample four times per second of footage when the frame rate is known."""
        return cls(stride_frames=default_stride(frame_rate), median_kernel=median_kernel)


def default_stride(frame_rate: float | None) -> int:
    if frame_rate is None or frame_rate <= 0:
        return 1
    return max(1, int(round(frame_rate / 4.0)))


def spatial_median(frame: GrayFrame, kernel: int) -> GrayFrame:
    """Median over a kernel x kernel window, replicating the border pixels."""
    if not isinstance(kernel, int) or kernel < 1 or kernel % 2 == 0:
        raise BadKernel(f"kernel must be odd and >= 1, got {kernel!r}")
    if kernel > min(frame.width, frame.height):
        raise BadKernel(f"kernel {kernel} exceeds frame size {frame.width}x{frame.height}")
    if kernel == 1:
        return frame
    r = kernel // 2
    padded = np.pad(frame.data, r, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (kernel, kernel))
    flat = windows.reshape(frame.height, frame.width, kernel * kernel)
    mid = (kernel * kernel) // 2
    out = np.partition(flat, mid, axis=2)[:, :, mid]
    return GrayFrame(np.ascontiguousarray(out, dtype=np.uint8))


class BackgroundModel:
    """Per-pixel occurrence histogram over accumulated frames.

    The tally lives in one contiguous ``(height * width, 256)`` uint32 block.
    Not safe for concurrent ``accumulate`` calls on the same instance.
    """

    def __init__(self, width: int, height: int):
        if width < 1 or height < 1:
            raise ValueError(f"invalid model size {width}x{height}")
        self.width = width
        self.height = height
        self.histogram = np.zeros((height * width, N_LEVELS), dtype=np.uint32)
        self.frames_accumulated = 0
        self._row_offsets = np.arange(height * width, dtype=np.intp) * N_LEVELS

    @classmethod
    def like(cls, frame: GrayFrame) -> "BackgroundModel":
        return cls(frame.width, frame.height)

    def accumulate(self, frame: GrayFrame) -> "BackgroundModel":
        if (frame.width, frame.height) != (self.width, self.height):
            raise DimensionMismatch(
                f"frame is {frame.width}x{frame.height}, model is {self.width}x{self.height}"
            )
        # one increment per pixel, so the fancy-index targets are all distinct
        idx = self._row_offsets + frame.data.ravel()
        self.histogram.reshape(-1)[idx] += 1
        self.frames_accumulated += 1
        return self

    def counts(self, x: int, y: int) -> np.ndarray:
        """The 256 counters of pixel (x, y)."""
        return self.histogram[y * self.width + x]

    def estimate(self) -> GrayFrame:
        if self.frames_accumulated < 1:
            raise EmptyModel("no frames accumulated")
        # argmax returns the first maximum, i.e. the smallest tied value
        mode = np.argmax(self.histogram, axis=1).astype(np.uint8)
        return GrayFrame(mode.reshape(self.height, self.width))


def accumulate(model: BackgroundModel, frame: GrayFrame) -> BackgroundModel:
    return model.accumulate(frame)


def estimate_background(model: BackgroundModel) -> GrayFrame:
    """Most frequent value per pixel; ties go to the smaller (cooler) value."""
    return model.estimate()


def sample_indices(n_frames: int, stride: int) -> range:
    return range(0, n_frames, stride)


def build_background(frames: Iterable[GrayFrame], policy: SamplingPolicy | None = None) -> GrayFrame:
    """Stride-sample ``frames``, median-filter each, tally, and take the mode.

    ``frames`` may be any iterable (including a lazy loader); frames that are
    skipped by the stride are still consumed but never filtered.
    """
    policy = policy or SamplingPolicy()
    model: BackgroundModel | None = None
    for i, frame in enumerate(frames):
        if i % policy.stride_frames:
            continue
        filtered = spatial_median(frame, policy.median_kernel)
        if model is None:
            model = BackgroundModel.like(filtered)
        model.accumulate(filtered)
    if model is None:
        raise EmptySource("background source yielded no frames")
    return model.estimate()
