"""Frame containers and the on-disk codecs for paired IR/visible sequences.

Supported formats are binary PNM (P5 graymap, P6 pixmap, maxval 255) and
8-bit PNG.  PNM is decoded and encoded here directly so that the round trip
is bit-exact and malformed files fail loudly; PNG goes through Pillow.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    ColorInGrayStream,
    DimensionMismatch,
    EmptyDirectory,
    FrameCountMismatch,
    MalformedImage,
)

PNM_SUFFIXES = {".pgm", ".ppm", ".pnm"}
PNG_SUFFIXES = {".png"}
IMAGE_SUFFIXES = PNM_SUFFIXES | PNG_SUFFIXES

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_WHITESPACE = b" \t\n\r\x0b\x0c"


def _frozen_uint8(data, ndim: int, kind: str) -> np.ndarray:
    arr = np.asarray(data)
    if arr.dtype != np.uint8:
        raise TypeError(f"{kind} data must be uint8, got {arr.dtype}")
    if arr.ndim != ndim:
        raise ValueError(f"{kind} data must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{kind} must be at least 1x1, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr).view()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GrayFrame:
    """Single-channel 8-bit image, ``data`` has shape (height, width)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen_uint8(self.data, 2, "GrayFrame"))

    @classmethod
    def from_bytes(cls, width: int, height: int, raw: bytes | Sequence[int]) -> "GrayFrame":
        buf = np.frombuffer(bytes(bytearray(raw)), dtype=np.uint8)
        if buf.size != width * height:
            raise ValueError(f"expected {width * height} bytes, got {buf.size}")
        return cls(buf.reshape(height, width))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def to_bytes(self) -> bytes:
        return self.data.tobytes()

    def __eq__(self, other):
        if not isinstance(other, GrayFrame):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"GrayFrame({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class RgbFrame:
    """Interleaved 8-bit RGB image, ``data`` has shape (height, width, 3)."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_uint8(self.data, 3, "RgbFrame")
        if arr.shape[2] != 3:
            raise ValueError(f"RgbFrame needs 3 channels, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_bytes(cls, width: int, height: int, raw: bytes | Sequence[int]) -> "RgbFrame":
        buf = np.frombuffer(bytes(bytearray(raw)), dtype=np.uint8)
        if buf.size != 3 * width * height:
            raise ValueError(f"expected {3 * width * height} bytes, got {buf.size}")
        return cls(buf.reshape(height, width, 3))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def to_bytes(self) -> bytes:
        return self.data.tobytes()

    def __eq__(self, other):
        if not isinstance(other, RgbFrame):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"RgbFrame({self.width}x{self.height})"


# -- PNM codec -----------------------------------------------------------------


def _parse_pnm_header(buf: bytes) -> tuple[bytes, int, int, int, int]:
    """Return (magic, width, height, maxval, raster_offset).

    Header tokens may be separated by arbitrary whitespace and ``#`` comments;
    exactly one whitespace byte separates maxval from the raster.
    """
    if len(buf) < 2 or buf[0:1] != b"P" or buf[1:2] not in (b"5", b"6"):
        raise MalformedImage(f"bad magic number {buf[:2]!r}")
    magic = buf[:2]
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(buf) and (buf[pos] in _WHITESPACE or buf[pos] == ord("#")):
            if buf[pos] == ord("#"):
                nl = buf.find(b"\n", pos)
                pos = len(buf) if nl < 0 else nl + 1
            else:
                pos += 1
        start = pos
        while pos < len(buf) and buf[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise MalformedImage("truncated or non-numeric PNM header")
        tokens.append(int(buf[start:pos]))
    if pos >= len(buf) or buf[pos] not in _WHITESPACE:
        raise MalformedImage("missing whitespace after PNM maxval")
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise MalformedImage(f"invalid dimensions {width}x{height}")
    return magic, width, height, maxval, pos + 1


def _decode_pnm(buf: bytes) -> np.ndarray:
    magic, width, height, maxval, offset = _parse_pnm_header(buf)
    if maxval != 255:
        raise MalformedImage(f"only 8-bit PNM (maxval 255) is supported, got maxval {maxval}")
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    raster = buf[offset : offset + need]
    if len(raster) < need:
        raise MalformedImage(f"truncated raster: expected {need} bytes, found {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(height, width)
    return arr.reshape(height, width, 3)


def _encode_pnm(arr: np.ndarray) -> bytes:
    h, w = arr.shape[:2]
    magic = b"P5" if arr.ndim == 2 else b"P6"
    return magic + b"\n%d %d\n255\n" % (w, h) + arr.tobytes()


def _decode_png(buf: bytes, path) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(buf)) as img:
            img.load()
            mode = img.mode
            if mode in ("L", "RGB"):
                return np.array(img, dtype=np.uint8)
            if mode in ("RGBA", "P", "PA", "CMYK", "YCbCr"):
                raise ColorInGrayStream(f"{path}: unsupported color mode {mode!r}")
            raise MalformedImage(f"{path}: unsupported PNG mode {mode!r} (need 8-bit gray or RGB)")
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedImage(f"{path}: cannot decode PNG: {exc}") from exc


def _decode_file(path) -> np.ndarray:
    with open(path, "rb") as fh:
        buf = fh.read()
    if not buf:
        raise MalformedImage(f"{path}: empty file")
    if buf.startswith(_PNG_SIGNATURE):
        return _decode_png(buf, path)
    try:
        return _decode_pnm(buf)
    except MalformedImage as exc:
        raise MalformedImage(f"{path}: {exc}") from None


def load_gray_frame(path: str | os.PathLike) -> GrayFrame:
    """Load a P5 or 8-bit grayscale PNG.  Color files raise ColorInGrayStream."""
    arr = _decode_file(path)
    if arr.ndim != 2:
        raise ColorInGrayStream(f"{path}: color image supplied to the IR stream")
    return GrayFrame(arr)


def load_rgb_frame(path: str | os.PathLike) -> RgbFrame:
    """Load a P6 or RGB PNG.  Grayscale input is promoted with R=G=B."""
    try:
        arr = _decode_file(path)
    except ColorInGrayStream as exc:
        raise MalformedImage(str(exc)) from None
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return RgbFrame(arr)


def save_frame(frame: GrayFrame | RgbFrame, path: str | os.PathLike) -> None:
    """Write ``frame`` as PNM or PNG, chosen by the file suffix.

    ``.pnm`` accepts either frame type; ``.pgm`` is gray-only and ``.ppm``
    color-only.  A missing parent directory raises FileNotFoundError.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    is_gray = isinstance(frame, GrayFrame)
    if not isinstance(frame, (GrayFrame, RgbFrame)):
        raise TypeError(f"cannot save {type(frame).__name__}")
    if suffix in PNM_SUFFIXES:
        if (suffix == ".pgm" and not is_gray) or (suffix == ".ppm" and is_gray):
            raise ValueError(f"{path}: suffix {suffix} does not match {type(frame).__name__}")
        payload = _encode_pnm(frame.data)
    elif suffix in PNG_SUFFIXES:
        out = io.BytesIO()
        Image.fromarray(np.array(frame.data), mode="L" if is_gray else "RGB").save(out, format="PNG")
        payload = out.getvalue()
    else:
        raise ValueError(f"{path}: unsupported image suffix {suffix!r}")
    with open(path, "wb") as fh:
        fh.write(payload)


def read_dimensions(path: str | os.PathLike) -> tuple[int, int]:
    """(width, height) of an image file, reading only its header."""
    with open(path, "rb") as fh:
        head = fh.read(4096)
    if head.startswith(_PNG_SIGNATURE):
        try:
            with Image.open(path) as img:
                return img.size
        except (UnidentifiedImageError, OSError) as exc:
            raise MalformedImage(f"{path}: cannot decode PNG: {exc}") from exc
    if not head:
        raise MalformedImage(f"{path}: empty file")
    try:
        _, width, height, _, _ = _parse_pnm_header(head)
    except MalformedImage as exc:
        raise MalformedImage(f"{path}: {exc}") from None
    return width, height


# -- sequences -----------------------------------------------------------------


@dataclass(frozen=True)
class SequenceManifest:
    ir_paths: tuple[Path, ...]
    vis_paths: tuple[Path, ...]
    width: int
    height: int
    frame_rate_hint: float | None = None
    frame_count: int = field(init=False)

    def __post_init__(self):
        if len(self.ir_paths) != len(self.vis_paths):
            raise FrameCountMismatch(
                f"{len(self.ir_paths)} IR frames vs {len(self.vis_paths)} visible frames"
            )
        object.__setattr__(self, "frame_count", len(self.ir_paths))

    def pairs(self) -> Iterator[tuple[int, Path, Path]]:
        for i, (ir, vis) in enumerate(zip(self.ir_paths, self.vis_paths)):
            yield i, ir, vis


def list_frames(directory: str | os.PathLike) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    files = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES]
    if not files:
        raise EmptyDirectory(f"no image files in {directory}")
    return sorted(files, key=lambda p: p.name)


def _check_stream(paths: list[Path], stream: str) -> tuple[int, int]:
    first = read_dimensions(paths[0])
    for p in paths[1:]:
        dims = read_dimensions(p)
        if dims != first:
            raise DimensionMismatch(
                f"{stream} frame {p.name} is {dims[0]}x{dims[1]}, "
                f"expected {first[0]}x{first[1]} (from {paths[0].name})"
            )
    return first


def scan_sequences(
    ir_dir: str | os.PathLike,
    vis_dir: str | os.PathLike,
    frame_rate_hint: float | None = None,
) -> SequenceManifest:
    """Pair the frames of two directories positionally by sorted filename."""
    ir_paths = list_frames(ir_dir)
    vis_paths = list_frames(vis_dir)
    if len(ir_paths) != len(vis_paths):
        raise FrameCountMismatch(
            f"{len(ir_paths)} IR frames in {ir_dir} vs {len(vis_paths)} visible frames in {vis_dir}"
        )
    ir_dims = _check_stream(ir_paths, "IR")
    vis_dims = _check_stream(vis_paths, "visible")
    if ir_dims != vis_dims:
        raise DimensionMismatch(
            f"IR frames are {ir_dims[0]}x{ir_dims[1]} but visible frames are {vis_dims[0]}x{vis_dims[1]}"
        )
    return SequenceManifest(
        ir_paths=tuple(ir_paths),
        vis_paths=tuple(vis_paths),
        width=ir_dims[0],
        height=ir_dims[1],
        frame_rate_hint=frame_rate_hint,
    )
