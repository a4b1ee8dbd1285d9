"""Radar scan, pose and sequence value objects."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import numpy.typing as npt

from radarplace.core.types import Metres, Radians, Timestamp, shortest_arc, wrap_angle
from radarplace.errors import PoseRangeError

type PowerGrid = npt.NDArray[np.float32]

_MIN_AZIMUTHS = 4


@dataclass(frozen=True, slots=True, eq=False)
class PolarScan:
    """One radar sweep: an azimuth x range grid of powers in ``[0, 1]``.

    Azimuth row ``a`` looks along bearing ``2*pi*a/A`` clockwise from
    vehicle-forward; range column ``r`` covers ``[r, r+1) * range_resolution``.
    """

    power: PowerGrid
    timestamp: Timestamp
    range_resolution: Metres

    def __post_init__(self) -> None:
        power = np.asarray(self.power, dtype=np.float32)
        if power.ndim != 2:
            raise ValueError(f"Scan power must be 2-D, got shape {power.shape!r}")
        if power.shape[0] < _MIN_AZIMUTHS or power.shape[1] < 1:
            raise ValueError(f"Scan needs A >= 4 and R >= 1, got shape {power.shape!r}")
        if power.size and (power.min() < 0.0 or power.max() > 1.0):
            raise ValueError("Scan power values must lie in [0, 1]")
        if not self.range_resolution > 0:
            raise ValueError(f"Invalid range resolution: {self.range_resolution!r}")
        if power is self.power and power.flags.writeable:
            power = power.copy()
        power.flags.writeable = False
        object.__setattr__(self, "power", power)

    @property
    def azimuths(self) -> int:
        return int(self.power.shape[0])

    @property
    def range_bins(self) -> int:
        return int(self.power.shape[1])

    @property
    def max_range(self) -> Metres:
        return self.range_bins * self.range_resolution

    def bearing_of(self, azimuth: int) -> Radians:
        """Bearing (clockwise from forward) of azimuth row *azimuth*."""
        return 2.0 * math.pi * azimuth / self.azimuths

    def same_grid(self, other: PolarScan) -> bool:
        return (
            self.power.shape == other.power.shape
            and self.range_resolution == other.range_resolution
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolarScan):
            return NotImplemented
        return (
            self.timestamp == other.timestamp
            and self.same_grid(other)
            and bool(np.array_equal(self.power, other.power))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, slots=True)
class PoseRecord:
    """Vehicle pose in a fixed world frame at one timestamp."""

    timestamp: Timestamp
    x: Metres
    y: Metres
    yaw: Radians

    @property
    def position(self) -> tuple[Metres, Metres]:
        return (self.x, self.y)


@dataclass(frozen=True)
class RadarSequence:
    """An ordered radar recording with its pose track.

    Scan and pose timestamps are strictly increasing; every scan timestamp
    is bracketed by the pose track.
    """

    name: str
    scans: tuple[PolarScan, ...]
    poses: tuple[PoseRecord, ...]
    _pose_times: npt.NDArray[np.int64] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _require_increasing([s.timestamp for s in self.scans], "scan")
        _require_increasing([p.timestamp for p in self.poses], "pose")
        if self.scans and self.poses:
            first, last = self.poses[0].timestamp, self.poses[-1].timestamp
            for scan in self.scans:
                if not first <= scan.timestamp <= last:
                    raise PoseRangeError(
                        f"Scan at {scan.timestamp} outside pose coverage "
                        f"[{first}, {last}] in sequence {self.name!r}"
                    )
        elif self.scans:
            raise PoseRangeError(f"Sequence {self.name!r} has scans but no poses")
        object.__setattr__(
            self, "_pose_times", np.fromiter((p.timestamp for p in self.poses), dtype=np.int64)
        )

    def __len__(self) -> int:
        return len(self.scans)

    @cached_property
    def scan_timestamps(self) -> npt.NDArray[np.int64]:
        return np.fromiter((s.timestamp for s in self.scans), dtype=np.int64)

    @property
    def duration_us(self) -> int:
        if not self.scans:
            return 0
        return self.scans[-1].timestamp - self.scans[0].timestamp

    def pose_at(self, t: Timestamp) -> PoseRecord:
        """Interpolated pose at time *t*; see :func:`pose_at`."""
        return pose_at(self, t)


def pose_at(seq: RadarSequence, t: Timestamp) -> PoseRecord:
    """Interpolate the pose of *seq* at time *t*.

    Position is interpolated linearly and yaw along the shortest arc.
    Exact at sample timestamps.
    """
    times = seq._pose_times
    if times.size == 0 or t < times[0] or t > times[-1]:
        span = f"[{times[0]}, {times[-1]}]" if times.size else "[]"
        raise PoseRangeError(f"Timestamp {t} outside pose range {span} of {seq.name!r}")

    hi = int(np.searchsorted(times, t, side="left"))
    if times[hi] == t:
        return seq.poses[hi]
    before, after = seq.poses[hi - 1], seq.poses[hi]
    alpha = (t - before.timestamp) / (after.timestamp - before.timestamp)
    return PoseRecord(
        timestamp=t,
        x=before.x + alpha * (after.x - before.x),
        y=before.y + alpha * (after.y - before.y),
        yaw=wrap_angle(before.yaw + alpha * shortest_arc(before.yaw, after.yaw)),
    )


def _require_increasing(values: list[int], what: str) -> None:
    for idx in range(1, len(values)):
        if values[idx] <= values[idx - 1]:
            raise ValueError(
                f"{what.capitalize()} timestamps not strictly increasing at index "
                f"{idx}: {values[idx - 1]} -> {values[idx]}"
            )
