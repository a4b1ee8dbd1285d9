"""Load radar sequences from the documented on-disk layout."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from radarplace.core.scan import PolarScan, PoseRecord, RadarSequence, pose_at
from radarplace.data.layout import (
    ScanMeta,
    read_meta,
    read_poses,
    read_scan,
    read_timestamps,
    write_meta,
    write_poses,
    write_scan,
    write_timestamps,
)
from radarplace.errors import DatasetError, DatasetFormatError, EmptySequenceError

_LOGGER = logging.getLogger(__name__)

# Fraction of scans allowed to fall outside pose coverage before loading fails.
MAX_DROPPED_FRACTION = 0.10

__all__ = ["MAX_DROPPED_FRACTION", "load_sequence", "pose_at", "save_sequence"]


def load_sequence(root_path: Path | str, *, workers: int = 1) -> RadarSequence:
    """Load the sequence stored under *root_path*.

    Scans outside the pose track are dropped with a warning; more than
    :data:`MAX_DROPPED_FRACTION` dropped is a :class:`DatasetFormatError`.
    With ``workers > 1`` scan files are read by a thread pool; the result
    is identical to sequential loading.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise DatasetError(f"Sequence directory not found: {root}", root)

    meta = read_meta(root)
    timestamps = read_timestamps(root)
    if not timestamps:
        raise EmptySequenceError(f"Sequence {root} contains no scans", root)
    poses = read_poses(root)

    covered = _covered_timestamps(timestamps, poses)
    dropped = len(timestamps) - len(covered)
    if dropped:
        _LOGGER.warning(
            "Dropped %d of %d scans outside pose coverage in %s",
            dropped,
            len(timestamps),
            root,
        )
        if dropped > MAX_DROPPED_FRACTION * len(timestamps):
            raise DatasetFormatError(
                f"{dropped} of {len(timestamps)} scans in {root} lie outside pose coverage",
                root,
            )
    if not covered:
        raise EmptySequenceError(f"Sequence {root} has no scans inside pose coverage", root)

    scans = _read_scans(root, covered, meta, workers)
    _LOGGER.info("Loaded %d scans from %s", len(scans), root)
    return RadarSequence(name=root.name, scans=tuple(scans), poses=tuple(poses))


def save_sequence(seq: RadarSequence, root_path: Path | str) -> Path:
    """Write *seq* in the on-disk layout (8-bit quantised powers)."""
    root = Path(root_path)
    if not seq.scans:
        raise EmptySequenceError(f"Refusing to write empty sequence {seq.name!r}", root)
    first = seq.scans[0]
    meta = ScanMeta(first.azimuths, first.range_bins, first.range_resolution)
    if any(not s.same_grid(first) for s in seq.scans):
        raise ValueError(f"Sequence {seq.name!r} mixes scan grids")
    write_meta(root, meta)
    for scan in seq.scans:
        write_scan(root, scan)
    write_timestamps(root, [s.timestamp for s in seq.scans])
    write_poses(root, list(seq.poses))
    return root


def _covered_timestamps(timestamps: list[int], poses: list[PoseRecord]) -> list[int]:
    if not poses:
        return []
    first, last = poses[0].timestamp, poses[-1].timestamp
    return [ts for ts in timestamps if first <= ts <= last]


def _read_scans(
    root: Path,
    timestamps: list[int],
    meta: ScanMeta,
    workers: int,
) -> list[PolarScan]:
    if workers <= 1:
        return [read_scan(root, ts, meta) for ts in timestamps]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ts: read_scan(root, ts, meta), timestamps))
