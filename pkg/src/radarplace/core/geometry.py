"""Polar to Cartesian projection and the azimuth "spin" augmentation.

Cartesian frames put the vehicle between the four central pixels with
forward pointing up (decreasing row) and right along increasing column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt
from scipy import ndimage

from radarplace.core.scan import PolarScan
from radarplace.core.types import Metres, Timestamp

type PixelGrid = npt.NDArray[np.float32]


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Square metric grid fed to the network (256 px at 0.5 m by default)."""

    side_pixels: int = 256
    metres_per_pixel: Metres = 0.5

    def __post_init__(self) -> None:
        if self.side_pixels < 16 or self.side_pixels % 2:
            raise ValueError(f"side_pixels must be even and >= 16: {self.side_pixels!r}")
        if not self.metres_per_pixel > 0:
            raise ValueError(f"metres_per_pixel must be > 0: {self.metres_per_pixel!r}")

    @property
    def centre(self) -> float:
        """Row/column index coordinate of the vehicle (a pixel corner)."""
        return self.side_pixels / 2.0 - 0.5

    @property
    def half_extent(self) -> Metres:
        return self.side_pixels * self.metres_per_pixel / 2.0


@dataclass(frozen=True, slots=True, eq=False)
class CartesianFrame:
    """Top-down projection of one scan, values in ``[0, 1]``."""

    pixels: PixelGrid
    source_timestamp: Timestamp

    def __post_init__(self) -> None:
        self.pixels.flags.writeable = False

    @property
    def side(self) -> int:
        return int(self.pixels.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CartesianFrame):
            return NotImplemented
        return self.source_timestamp == other.source_timestamp and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None  # type: ignore[assignment]


# ── Projection ───────────────────────────────────────────────────────────────


@lru_cache(maxsize=16)
def _sampling_plan(
    azimuths: int,
    range_bins: int,
    range_resolution: float,
    grid: GridSpec,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.bool_]]:
    """Fractional (azimuth, range) indices for every output pixel.

    Returned coordinates index a power grid padded with one wrapped
    azimuth row, so interpolation between rows ``A-1`` and ``0`` works.
    """
    idx = np.arange(grid.side_pixels, dtype=np.float64)
    forward = (grid.centre - idx)[:, None] * grid.metres_per_pixel
    right = (idx - grid.centre)[None, :] * grid.metres_per_pixel
    rho = np.hypot(right, forward)
    bearing = np.mod(np.arctan2(right, forward), 2.0 * math.pi)

    az_coord = bearing * (azimuths / (2.0 * math.pi))
    range_coord = np.clip(rho / range_resolution - 0.5, 0.0, range_bins - 1)
    inside = rho <= range_bins * range_resolution

    coords = np.stack([az_coord, np.broadcast_to(range_coord, az_coord.shape)])
    coords.flags.writeable = False
    inside.flags.writeable = False
    return coords, inside


def polar_to_cartesian(scan: PolarScan, grid: GridSpec | None = None) -> CartesianFrame:
    """Project *scan* onto a square Cartesian grid by bilinear sampling.

    Interpolation is linear in range and linear in azimuth with wraparound.
    Pixels beyond the maximum range are zero.
    """
    grid = grid or GridSpec()
    coords, inside = _sampling_plan(
        scan.azimuths, scan.range_bins, scan.range_resolution, grid
    )
    padded = np.concatenate([scan.power, scan.power[:1]], axis=0)
    sampled = ndimage.map_coordinates(padded, coords, order=1, mode="nearest")
    pixels = np.where(inside, np.clip(sampled, 0.0, 1.0), 0.0).astype(np.float32)
    return CartesianFrame(pixels=pixels, source_timestamp=scan.timestamp)


# ── Spin augmentation ────────────────────────────────────────────────────────


def spin_polar(scan: PolarScan, shift: int) -> PolarScan:
    """Rotate *scan* clockwise by *shift* azimuth rows (a lossless roll).

    Content seen at row ``a`` moves to row ``a + shift (mod A)``.
    """
    if not 0 <= shift < scan.azimuths:
        raise ValueError(f"Spin shift must be in [0, {scan.azimuths}): {shift!r}")
    if shift == 0:
        return scan
    return PolarScan(
        power=np.roll(scan.power, shift, axis=0),
        timestamp=scan.timestamp,
        range_resolution=scan.range_resolution,
    )


def random_spin(rng: np.random.Generator, azimuths: int) -> int:
    """Draw a spin uniformly from ``{0, ..., azimuths - 1}``."""
    if azimuths < 4:
        raise ValueError(f"Need at least 4 azimuths to spin: {azimuths!r}")
    return int(rng.integers(0, azimuths))


def rotate_frame_quarter_turns(frame: CartesianFrame, quarter_turns: int) -> CartesianFrame:
    """Rotate *frame* clockwise by ``90 deg * quarter_turns`` about its centre."""
    pixels = np.ascontiguousarray(np.rot90(frame.pixels, k=-quarter_turns))
    return CartesianFrame(pixels=pixels, source_timestamp=frame.source_timestamp)
