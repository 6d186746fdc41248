"""Exception hierarchy shared by every stage of the fusion pipeline."""

from __future__ import annotations


class NightfuseError(Exception):
    """Base class for all errors raised by nightfuse."""


# -- frame I/O -----------------------------------------------------------------


class MalformedImage(NightfuseError, ValueError):
    """File is truncated, has an unknown magic number, or is not 8-bit."""


class ColorInGrayStream(NightfuseError, ValueError):
    """A color image was supplied where a single-channel IR frame is required."""


class EmptyDirectory(NightfuseError):
    pass


class FrameCountMismatch(NightfuseError):
    pass


class DimensionMismatch(NightfuseError, ValueError):
    """Two frames (or a frame and a model) disagree on width/height."""


# -- background ----------------------------------------------------------------


class BadKernel(NightfuseError, ValueError):
    pass


class EmptyModel(NightfuseError):
    pass


class EmptySource(NightfuseError):
    pass


# -- fusion --------------------------------------------------------------------


class RegionOutOfBounds(NightfuseError, ValueError):
    pass


# -- configuration / orchestration ---------------------------------------------


class ConfigError(NightfuseError):
    """Base for problems the user can fix by editing the configuration."""


class ParseError(ConfigError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ValidationError(ConfigError, ValueError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class FrameProcessingError(NightfuseError):
    """A per-frame failure during a pipeline run; carries the frame index."""

    def __init__(self, frame_index: int, cause: BaseException):
        super().__init__(f"frame {frame_index}: {cause}")
        self.frame_index = frame_index
        self.cause = cause
