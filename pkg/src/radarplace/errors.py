"""Exception hierarchy shared by all radarplace layers."""

from __future__ import annotations

from pathlib import Path


class RadarPlaceError(Exception):
    """Base class for domain failures (as opposed to argument errors)."""


# ── Data ─────────────────────────────────────────────────────────────────────


class DatasetError(RadarPlaceError):
    """A dataset file or directory is missing or unreadable."""

    def __init__(self, message: str, path: Path | None = None) -> None:
        super().__init__(message)
        self.path = path


class DatasetFormatError(DatasetError):
    """A dataset file exists but its contents violate the layout."""


class EmptySequenceError(DatasetError):
    """A sequence directory holds no usable scans."""


class PoseRangeError(RadarPlaceError):
    """A timestamp lies outside the pose coverage of a sequence."""


# ── Sampling / training ──────────────────────────────────────────────────────


class FrameGapError(RadarPlaceError):
    """No scan lies within tolerance of a requested timestamp."""


class BatchConstructionError(RadarPlaceError):
    """A training batch could not be filled within the retry budget."""


class ConfigError(RadarPlaceError):
    """Unknown configuration key or invalid configuration value."""

    def __init__(self, message: str, key: str | None = None) -> None:
        super().__init__(message)
        self.key = key


class CheckpointIntegrityError(RadarPlaceError):
    """A checkpoint archive is corrupt or not a radarplace checkpoint."""


class ConfigMismatchError(RadarPlaceError):
    """A checkpoint was written under a different model configuration."""

    def __init__(self, message: str, diff: dict[str, tuple[str, str]]) -> None:
        super().__init__(message)
        self.diff = diff


class TrainingDivergedError(RadarPlaceError):
    """The training loss became NaN or infinite."""

    def __init__(self, step: int, loss: float) -> None:
        super().__init__(f"Non-finite loss {loss!r} at step {step}")
        self.step = step
        self.loss = loss


# ── Evaluation ───────────────────────────────────────────────────────────────


class UndefinedRecallError(RadarPlaceError):
    """No query has a ground-truth match, so recall is undefined."""
