"""Synthetic radar world for desk-scale verification.

Point scatterers on a plane are observed by a simulated scanning radar
moving along a waypoint path. Returns are Gaussian blobs, so rendering at
``yaw + 2*pi*k/A`` equals rolling the azimuth rows by ``k``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

import numpy as np
import numpy.typing as npt

from radarplace.core.scan import PolarScan, PoseRecord, RadarSequence
from radarplace.core.types import Metres, Radians, Timestamp, wrap_angle
from radarplace.data.ingest import save_sequence

_LOGGER = logging.getLogger(__name__)

DEFAULT_START_US = 1_600_000_000_000_000
_FALLOFF_M = 50.0
_MIN_REFLECTIVITY = 0.3

type Waypoints = npt.NDArray[np.float64]


@dataclass(frozen=True, slots=True)
class World:
    """Point scatterers ``(x, y, reflectivity)`` inside ``[-extent, extent]^2``."""

    scatterers: npt.NDArray[np.float64]
    extent: Metres

    def __post_init__(self) -> None:
        pts = np.asarray(self.scatterers, dtype=np.float64).reshape(-1, 3)
        if pts.size:
            if np.abs(pts[:, :2]).max() > self.extent:
                raise ValueError("Scatterers must lie within the world extent")
            refl = pts[:, 2]
            if refl.min() <= 0.0 or refl.max() > 1.0:
                raise ValueError("Reflectivity must lie in (0, 1]")
        pts.flags.writeable = False
        object.__setattr__(self, "scatterers", pts)

    def __len__(self) -> int:
        return int(self.scatterers.shape[0])


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Simulated sensor parameters."""

    azimuths: int = 400
    range_bins: int = 200
    range_resolution: Metres = 0.5
    scan_rate: float = 4.0
    speckle_noise_sigma: float = 0.02
    beam_width: Radians | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.azimuths < 4 or self.range_bins < 1:
            raise ValueError(f"Invalid sensor grid {self.azimuths}x{self.range_bins}")
        if not self.range_resolution > 0 or not self.scan_rate > 0:
            raise ValueError("range_resolution and scan_rate must be positive")
        if self.speckle_noise_sigma < 0:
            raise ValueError(f"Negative speckle sigma: {self.speckle_noise_sigma!r}")
        if self.beam_width is not None and self.beam_width < self.azimuth_step - 1e-12:
            raise ValueError(f"beam_width must be >= 2*pi/A: {self.beam_width!r}")

    @property
    def azimuth_step(self) -> Radians:
        return 2.0 * math.pi / self.azimuths

    @property
    def effective_beam_width(self) -> Radians:
        return self.beam_width if self.beam_width is not None else self.azimuth_step

    @property
    def max_range(self) -> Metres:
        return self.range_bins * self.range_resolution


# ── World ────────────────────────────────────────────────────────────────────


def generate_world(seed: int, n_scatterers: int, extent: Metres) -> World:
    """Scatter points uniformly over the square, reflectivity in ``[0.3, 1]``."""
    if n_scatterers < 0:
        raise ValueError(f"n_scatterers must be >= 0: {n_scatterers!r}")
    if not extent > 0:
        raise ValueError(f"extent must be > 0: {extent!r}")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(-extent, extent, size=(n_scatterers, 2))
    refl = rng.uniform(_MIN_REFLECTIVITY, 1.0, size=(n_scatterers, 1))
    return World(scatterers=np.hstack([xy, refl]), extent=extent)


# ── Rendering ────────────────────────────────────────────────────────────────


def render_scan(
    world: World,
    pose: PoseRecord,
    cfg: SimConfig,
    rng: np.random.Generator | None = None,
) -> PolarScan:
    """Render the radar view from *pose*.

    Each scatterer within range deposits a Gaussian return (one bin wide in
    range, ``beam_width`` wide in azimuth) centred on the range bin that
    contains it, of amplitude ``reflectivity / (1 + range / 50 m)``. Speckle
    is added when *rng* is given and ``speckle_noise_sigma > 0``; the result
    is clipped to ``[0, 1]``.
    """
    A, R = cfg.azimuths, cfg.range_bins
    power = np.zeros((A, R), dtype=np.float64)

    if len(world):
        dx = world.scatterers[:, 0] - pose.x
        dy = world.scatterers[:, 1] - pose.y
        rng_m = np.hypot(dx, dy)
        visible = rng_m < cfg.max_range
        if visible.any():
            dx, dy, rng_m = dx[visible], dy[visible], rng_m[visible]
            refl = world.scatterers[visible, 2]
            # clockwise bearing relative to heading
            bearing = np.mod(pose.yaw - np.arctan2(dy, dx), 2.0 * math.pi)
            az_centre = bearing / cfg.azimuth_step
            # bin r holds ranges in [r, r+1) * range_resolution
            range_centre = np.floor(rng_m / cfg.range_resolution)
            amplitude = refl / (1.0 + rng_m / _FALLOFF_M)

            sigma_az = cfg.effective_beam_width / cfg.azimuth_step
            az = np.arange(A, dtype=np.float64)[None, :]
            d_az = np.mod(az - az_centre[:, None] + A / 2.0, A) - A / 2.0
            az_profile = np.exp(-0.5 * (d_az / sigma_az) ** 2)
            rb = np.arange(R, dtype=np.float64)[None, :]
            range_profile = np.exp(-0.5 * (rb - range_centre[:, None]) ** 2)
            power = np.einsum("s,sa,sr->ar", amplitude, az_profile, range_profile)

    if rng is not None and cfg.speckle_noise_sigma > 0:
        power = power + rng.normal(0.0, cfg.speckle_noise_sigma, size=power.shape)
    return PolarScan(
        power=np.clip(power, 0.0, 1.0).astype(np.float32),
        timestamp=pose.timestamp,
        range_resolution=cfg.range_resolution,
    )


# ── Paths and traversals ─────────────────────────────────────────────────────


def straight_path(length: Metres, *, origin: tuple[float, float] = (0.0, 0.0)) -> Waypoints:
    """Two-waypoint path heading along +x."""
    ox, oy = origin
    return np.array([[ox, oy], [ox + length, oy]], dtype=np.float64)


def loop_path(radius: Metres, n_vertices: int = 64, *, laps: int = 1) -> Waypoints:
    """Closed polygonal loop approximating a circle, driven counter-clockwise."""
    if n_vertices < 3 or laps < 1:
        raise ValueError(f"Invalid loop: n_vertices={n_vertices!r}, laps={laps!r}")
    angles = np.linspace(0.0, 2.0 * math.pi * laps, n_vertices * laps + 1)
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


def sample_poses(
    waypoints: Waypoints,
    speed: float,
    scan_rate: float,
    *,
    start_us: Timestamp = DEFAULT_START_US,
) -> list[PoseRecord]:
    """Poses at ``scan_rate`` along *waypoints* at constant *speed*.

    Yaw follows the tangent of the segment being driven.
    """
    pts = np.asarray(waypoints, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError(f"Need at least two 2-D waypoints, got shape {pts.shape!r}")
    if not speed > 0 or not scan_rate > 0:
        raise ValueError("speed and scan_rate must be positive")

    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    keep = seg_len > 0
    seg, seg_len, starts = seg[keep], seg_len[keep], pts[:-1][keep]
    total = float(seg_len.sum())
    if total <= 0:
        raise ValueError("Path length must be > 0")

    step = speed / scan_rate
    count = int(math.floor(total / step + 1e-9))
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    period_us = 1_000_000.0 / scan_rate

    poses: list[PoseRecord] = []
    for i in range(count):
        s = i * step
        k = min(int(np.searchsorted(cum, s, side="right")) - 1, len(seg_len) - 1)
        frac = (s - cum[k]) / seg_len[k]
        x, y = starts[k] + frac * seg[k]
        yaw = wrap_angle(math.atan2(seg[k][1], seg[k][0]))
        ts = start_us + int(round(i * period_us))
        poses.append(PoseRecord(timestamp=ts, x=float(x), y=float(y), yaw=yaw))
    return poses


def simulate_sequence(
    world: World,
    waypoints: Waypoints,
    speed: float,
    cfg: SimConfig,
    *,
    name: str = "sim",
) -> RadarSequence:
    """Render a full traversal in memory.

    Scan ``i`` draws speckle from a generator seeded with ``(cfg.seed, i)``.
    """
    poses = sample_poses(waypoints, speed, cfg.scan_rate)
    scans = [
        render_scan(world, pose, cfg, np.random.default_rng([cfg.seed, i]))
        for i, pose in enumerate(poses)
    ]
    return RadarSequence(name=name, scans=tuple(scans), poses=tuple(poses))


def generate_traversal(
    world: World,
    waypoints: Waypoints,
    speed: float,
    cfg: SimConfig,
    out_dir: Path | str,
) -> RadarSequence:
    """Render a traversal and write it in the ingest on-disk layout."""
    out = Path(out_dir)
    seq = simulate_sequence(world, waypoints, speed, cfg, name=out.name)
    save_sequence(seq, out)
    _LOGGER.info("Wrote %d simulated scans to %s", len(seq), out)
    return seq


class PathKind(StrEnum):
    LOOP = "loop"
    STRAIGHT = "straight"


@dataclass(frozen=True, slots=True)
class TraversalSpec:
    """World and path parameters of one simulated traversal."""

    world_seed: int = 0
    n_scatterers: int = 400
    extent: Metres = 150.0
    speed: float = 5.0
    path: PathKind = PathKind.LOOP
    loop_radius: Metres = 60.0
    loop_vertices: int = 64
    laps: int = 1
    path_length: Metres = 100.0
    reverse: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.path, PathKind):
            object.__setattr__(self, "path", PathKind(self.path))
        if self.n_scatterers < 0:
            raise ValueError(f"n_scatterers must be >= 0: {self.n_scatterers!r}")
        if not self.extent > 0 or not self.speed > 0:
            raise ValueError("extent and speed must be positive")
        if self.path is PathKind.LOOP and not 0 < self.loop_radius <= self.extent:
            raise ValueError(f"loop_radius must lie in (0, extent]: {self.loop_radius!r}")
        if self.path is PathKind.STRAIGHT and not self.path_length > 0:
            raise ValueError(f"path_length must be > 0: {self.path_length!r}")

    def waypoints(self) -> Waypoints:
        if self.path is PathKind.LOOP:
            pts = loop_path(self.loop_radius, self.loop_vertices, laps=self.laps)
        else:
            pts = straight_path(self.path_length, origin=(-self.path_length / 2.0, 0.0))
        return reverse_path(pts) if self.reverse else pts

    def world(self) -> World:
        return generate_world(self.world_seed, self.n_scatterers, self.extent)


def reverse_path(waypoints: Waypoints) -> Waypoints:
    """The same waypoints driven in the opposite direction."""
    return np.ascontiguousarray(np.asarray(waypoints, dtype=np.float64)[::-1])


def generate_from_spec(spec: TraversalSpec, cfg: SimConfig, out_dir: Path | str) -> RadarSequence:
    return generate_traversal(spec.world(), spec.waypoints(), spec.speed, cfg, out_dir)
