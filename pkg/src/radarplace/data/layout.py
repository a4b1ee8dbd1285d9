"""On-disk sequence layout shared by the loader and the simulator writer.

A sequence directory contains::

    meta.txt          azimuths=<A>, range_bins=<R>, range_resolution_m=<metres>
    timestamps.txt    one integer microsecond timestamp per line
    scans/<ts>.bin    A x R row-major unsigned 8-bit powers, azimuth-major
    poses.csv         header ``timestamp,x,y,yaw`` then one row per pose
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from radarplace.core.scan import PolarScan, PoseRecord
from radarplace.core.types import Metres
from radarplace.errors import DatasetError, DatasetFormatError

META_FILE = "meta.txt"
TIMESTAMPS_FILE = "timestamps.txt"
POSES_FILE = "poses.csv"
SCANS_DIR = "scans"
POSE_HEADER = ("timestamp", "x", "y", "yaw")

_META_KEYS = ("azimuths", "range_bins", "range_resolution_m")


@dataclass(frozen=True, slots=True)
class ScanMeta:
    """Grid dimensions declared in ``meta.txt``."""

    azimuths: int
    range_bins: int
    range_resolution: Metres

    @property
    def scan_bytes(self) -> int:
        return self.azimuths * self.range_bins


def scan_path(root: Path, timestamp: int) -> Path:
    return root / SCANS_DIR / f"{timestamp}.bin"


# ── Reading ──────────────────────────────────────────────────────────────────


def _require_file(path: Path) -> None:
    if not path.is_file():
        raise DatasetError(f"Missing dataset file: {path}", path)


def read_meta(root: Path) -> ScanMeta:
    """Parse ``meta.txt`` under *root*."""
    path = root / META_FILE
    _require_file(path)
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DatasetFormatError(f"{path}:{line_no}: expected key=value, got {raw!r}", path)
        values[key.strip()] = value.strip()

    missing = [k for k in _META_KEYS if k not in values]
    if missing:
        raise DatasetFormatError(f"{path}: missing keys {missing}", path)
    try:
        meta = ScanMeta(
            azimuths=int(values["azimuths"]),
            range_bins=int(values["range_bins"]),
            range_resolution=float(values["range_resolution_m"]),
        )
    except ValueError as exc:
        raise DatasetFormatError(f"{path}: {exc}", path) from exc
    if meta.azimuths < 4 or meta.range_bins < 1 or not meta.range_resolution > 0:
        raise DatasetFormatError(f"{path}: invalid grid {meta!r}", path)
    return meta


def read_timestamps(root: Path) -> list[int]:
    """Read ``timestamps.txt``; rejects non-increasing sequences."""
    path = root / TIMESTAMPS_FILE
    _require_file(path)
    stamps: list[int] = []
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            stamps.append(int(line))
        except ValueError:
            raise DatasetFormatError(f"{path}:{line_no}: bad timestamp {raw!r}", path) from None
        idx = len(stamps) - 1
        if idx and stamps[idx] <= stamps[idx - 1]:
            raise DatasetFormatError(
                f"{path}: timestamps not strictly increasing at index {idx} "
                f"({stamps[idx - 1]} -> {stamps[idx]})",
                path,
            )
    return stamps


def read_poses(root: Path) -> list[PoseRecord]:
    """Read ``poses.csv``; rejects a wrong header or non-increasing times."""
    path = root / POSES_FILE
    _require_file(path)
    poses: list[PoseRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != POSE_HEADER:
            raise DatasetFormatError(f"{path}: expected header {','.join(POSE_HEADER)}", path)
        for row_no, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                ts, x, y, yaw = row
                pose = PoseRecord(int(ts), float(x), float(y), float(yaw))
            except ValueError:
                raise DatasetFormatError(f"{path}:{row_no}: bad pose row {row!r}", path) from None
            if poses and pose.timestamp <= poses[-1].timestamp:
                raise DatasetFormatError(
                    f"{path}: pose timestamps not strictly increasing at index {len(poses)}",
                    path,
                )
            poses.append(pose)
    return poses


def read_scan(root: Path, timestamp: int, meta: ScanMeta) -> PolarScan:
    """Load one 8-bit scan file and normalise it to ``[0, 1]``."""
    path = scan_path(root, timestamp)
    _require_file(path)
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size != meta.scan_bytes:
        raise DatasetFormatError(
            f"{path}: expected {meta.scan_bytes} bytes "
            f"({meta.azimuths}x{meta.range_bins}), found {raw.size}",
            path,
        )
    power = raw.reshape(meta.azimuths, meta.range_bins).astype(np.float32) / 255.0
    return PolarScan(power=power, timestamp=timestamp, range_resolution=meta.range_resolution)


# ── Writing ──────────────────────────────────────────────────────────────────


def quantise_power(power: np.ndarray) -> np.ndarray:
    """Map powers in ``[0, 1]`` to the 8-bit storage representation."""
    return np.rint(np.clip(power, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_meta(root: Path, meta: ScanMeta) -> None:
    root.mkdir(parents=True, exist_ok=True)
    (root / META_FILE).write_text(
        f"azimuths={meta.azimuths}\n"
        f"range_bins={meta.range_bins}\n"
        f"range_resolution_m={meta.range_resolution!r}\n",
        encoding="utf-8",
    )


def write_scan(root: Path, scan: PolarScan) -> Path:
    path = scan_path(root, scan.timestamp)
    path.parent.mkdir(parents=True, exist_ok=True)
    quantise_power(scan.power).tofile(path)
    return path


def write_timestamps(root: Path, timestamps: list[int]) -> None:
    text = "".join(f"{ts}\n" for ts in timestamps)
    (root / TIMESTAMPS_FILE).write_text(text, encoding="utf-8")


def write_poses(root: Path, poses: list[PoseRecord]) -> None:
    with (root / POSES_FILE).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(POSE_HEADER)
        for pose in poses:
            writer.writerow([pose.timestamp, repr(pose.x), repr(pose.y), repr(pose.yaw)])
