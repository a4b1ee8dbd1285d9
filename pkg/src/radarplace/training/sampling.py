"""Batch construction for the four training variants.

Per anchor the recipe is: sample an instance, pin a real frame 2 s later
as its augmentation, spin one member of the pair, and (``vTR2`` only) pin
a second instance 6 s later whose augmentation is the spun frame 2 s
before it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Final

import numpy as np

from radarplace.core.enums import Variant
from radarplace.core.geometry import (
    CartesianFrame,
    GridSpec,
    polar_to_cartesian,
    random_spin,
    spin_polar,
)
from radarplace.core.scan import PolarScan, RadarSequence
from radarplace.core.types import Seconds, Timestamp, seconds_to_us
from radarplace.errors import BatchConstructionError, FrameGapError

_LOGGER = logging.getLogger(__name__)

RETRY_BUDGET: Final = 100


@dataclass(frozen=True, slots=True)
class VariantConfig:
    """Temporal offsets and batch size of one training variant."""

    variant: Variant = Variant.VIDEO_SPIN_PAIRED
    positive_offset: Seconds = 2.0
    negative_offset: Seconds = 6.0
    negative_aug_offset: Seconds = 4.0
    time_tolerance: Seconds = 0.3
    pairs_per_batch: int = 12

    def __post_init__(self) -> None:
        if not 0 < self.positive_offset < self.negative_aug_offset < self.negative_offset:
            raise ValueError(
                "Offsets must satisfy 0 < positive < negative_aug < negative, got "
                f"{self.positive_offset!r}, {self.negative_aug_offset!r}, "
                f"{self.negative_offset!r}"
            )
        if self.time_tolerance < 0:
            raise ValueError(f"time_tolerance must be >= 0: {self.time_tolerance!r}")
        if self.pairs_per_batch < 2:
            raise ValueError(f"pairs_per_batch must be >= 2: {self.pairs_per_batch!r}")
        if self.variant.uses_negative_pair and self.pairs_per_batch % 2:
            raise ValueError(f"vTR2 needs an even pairs_per_batch: {self.pairs_per_batch!r}")

    @property
    def samples_per_batch(self) -> int:
        """Anchors drawn per batch (each vTR2 sample yields two pairs)."""
        if self.variant.uses_negative_pair:
            return self.pairs_per_batch // 2
        return self.pairs_per_batch


@dataclass(frozen=True, slots=True)
class TrainingSample:
    """Frames built around one anchor.

    ``negative`` and ``negative_aug`` are present only for ``vTR2``.
    """

    anchor: CartesianFrame
    positive: CartesianFrame
    anchor_timestamp: Timestamp
    negative: CartesianFrame | None = None
    negative_aug: CartesianFrame | None = None

    def pairs(self) -> list[InstancePair]:
        out = [InstancePair(self.anchor, self.positive)]
        if self.negative is not None and self.negative_aug is not None:
            out.append(InstancePair(self.negative, self.negative_aug))
        return out


@dataclass(frozen=True, slots=True)
class InstancePair:
    """An instance and its augmentation, one softmax class in the loss."""

    instance: CartesianFrame
    augmentation: CartesianFrame


# ── Frame lookup ─────────────────────────────────────────────────────────────


def nearest_frame(seq: RadarSequence, t: Timestamp, tol: Seconds) -> int:
    """Index of the scan closest to *t* (ties go to the earlier scan).

    Raises :class:`FrameGapError` when the closest scan is further than
    *tol* seconds away.
    """
    if not len(seq):
        raise ValueError(f"Sequence {seq.name!r} is empty")
    stamps = seq.scan_timestamps
    hi = int(np.searchsorted(stamps, t, side="left"))
    candidates = [i for i in (hi - 1, hi) if 0 <= i < len(stamps)]
    best = min(candidates, key=lambda i: (abs(int(stamps[i]) - t), i))
    gap = abs(int(stamps[best]) - t)
    if gap > seconds_to_us(tol):
        raise FrameGapError(
            f"No scan within {tol} s of {t} in {seq.name!r} (closest gap {gap} us)"
        )
    return best


# ── Samples ──────────────────────────────────────────────────────────────────


def _spun(scan: PolarScan, rng: np.random.Generator) -> PolarScan:
    return spin_polar(scan, random_spin(rng, scan.azimuths))


def build_sample(
    seq: RadarSequence,
    anchor_idx: int,
    cfg: VariantConfig,
    rng: np.random.Generator,
    grid: GridSpec | None = None,
) -> TrainingSample:
    """Build the frames for one anchor according to ``cfg.variant``.

    Offset frames are located before any random draw, so a
    :class:`FrameGapError` leaves *rng* untouched.
    """
    if not 0 <= anchor_idx < len(seq):
        raise ValueError(f"Anchor index {anchor_idx!r} out of range for {seq.name!r}")
    grid = grid or GridSpec()
    anchor = seq.scans[anchor_idx]
    t0 = anchor.timestamp
    variant = cfg.variant

    def offset_scan(offset: Seconds) -> PolarScan:
        return seq.scans[nearest_frame(seq, t0 + seconds_to_us(offset), cfg.time_tolerance)]

    if not variant.uses_video:
        positive = _spun(anchor, rng)
        return TrainingSample(
            anchor=polar_to_cartesian(anchor, grid),
            positive=polar_to_cartesian(positive, grid),
            anchor_timestamp=t0,
        )

    positive = offset_scan(cfg.positive_offset)
    negative = negative_src = None
    if variant.uses_negative_pair:
        negative = offset_scan(cfg.negative_offset)
        negative_src = offset_scan(cfg.negative_aug_offset)

    if variant is not Variant.VIDEO:
        if rng.integers(0, 2) == 0:
            anchor = _spun(anchor, rng)
        else:
            positive = _spun(positive, rng)

    sample = TrainingSample(
        anchor=polar_to_cartesian(anchor, grid),
        positive=polar_to_cartesian(positive, grid),
        anchor_timestamp=t0,
    )
    if negative is None or negative_src is None:
        return sample
    return TrainingSample(
        anchor=sample.anchor,
        positive=sample.positive,
        anchor_timestamp=t0,
        negative=polar_to_cartesian(negative, grid),
        negative_aug=polar_to_cartesian(_spun(negative_src, rng), grid),
    )


# ── Batches ──────────────────────────────────────────────────────────────────


def build_batch(
    pool: list[RadarSequence],
    cfg: VariantConfig,
    rng: np.random.Generator,
    grid: GridSpec | None = None,
) -> list[InstancePair]:
    """Draw ``cfg.pairs_per_batch`` instance pairs from *pool*.

    Anchors are uniform over every frame of every sequence. Anchors whose
    offset frames are missing are redrawn; after :data:`RETRY_BUDGET`
    failures the batch is abandoned with :class:`BatchConstructionError`.
    """
    if not pool:
        raise ValueError("Sequence pool is empty")
    sizes = np.array([len(seq) for seq in pool], dtype=np.int64)
    total = int(sizes.sum())
    if total == 0:
        raise BatchConstructionError("Sequence pool holds no frames")
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    pairs: list[InstancePair] = []
    drawn = failures = 0
    while drawn < cfg.samples_per_batch:
        flat = int(rng.integers(0, total))
        seq_idx = int(np.searchsorted(offsets, flat, side="right")) - 1
        anchor_idx = flat - int(offsets[seq_idx])
        try:
            sample = build_sample(pool[seq_idx], anchor_idx, cfg, rng, grid)
        except FrameGapError:
            failures += 1
            if failures >= RETRY_BUDGET:
                raise BatchConstructionError(
                    f"Could not fill a {cfg.variant} batch: {failures} anchors "
                    f"lacked frames at the configured offsets"
                ) from None
            continue
        pairs.extend(sample.pairs())
        drawn += 1

    if failures:
        _LOGGER.debug("Batch needed %d anchor redraws", failures)
    return pairs


def pool_frame_count(pool: list[RadarSequence]) -> int:
    return sum(len(seq) for seq in pool)
