"""Shared pytest fixtures used across the test suite."""

from __future__ import annotations

import os
import sys
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest

from radarplace.core.enums import Backbone, Variant
from radarplace.core.geometry import GridSpec
from radarplace.core.scan import PolarScan, PoseRecord, RadarSequence
from radarplace.data.simworld import (
    SimConfig,
    World,
    generate_traversal,
    generate_world,
    loop_path,
    simulate_sequence,
)
from radarplace.training.embedder import EmbedderConfig
from radarplace.training.sampling import VariantConfig
from radarplace.training.trainer import TrainConfig

# Linux CI runners are often headless. Force an offscreen backend only there.
if (
    sys.platform.startswith("linux")
    and "QT_QPA_PLATFORM" not in os.environ
    and "DISPLAY" not in os.environ
    and "WAYLAND_DISPLAY" not in os.environ
):
    os.environ["QT_QPA_PLATFORM"] = "offscreen"

START_US = 1_600_000_000_000_000
PERIOD_US = 250_000  # 4 Hz


def make_uniform_sequence(
    n: int = 200,
    *,
    azimuths: int = 16,
    range_bins: int = 8,
    seed: int = 0,
    period_us: int = PERIOD_US,
    name: str = "uniform",
) -> RadarSequence:
    """Random scans at a fixed rate, driving along +x at 5 m/s."""
    rng = np.random.default_rng(seed)
    scans = []
    poses = []
    for i in range(n):
        ts = START_US + i * period_us
        power = rng.random((azimuths, range_bins), dtype=np.float32)
        scans.append(PolarScan(power=power, timestamp=ts, range_resolution=1.0))
        poses.append(PoseRecord(timestamp=ts, x=5.0 * i * period_us / 1e6, y=0.0, yaw=0.0))
    return RadarSequence(name=name, scans=tuple(scans), poses=tuple(poses))


@pytest.fixture(scope="session")
def qapp() -> Iterator[object]:
    """Provide a singleton QGuiApplication for rendering tests."""
    from radarplace.runtime import ensure_gui_application

    yield ensure_gui_application()


@pytest.fixture
def sim_cfg() -> SimConfig:
    return SimConfig(azimuths=64, range_bins=32, range_resolution=1.0, scan_rate=4.0, seed=3)


@pytest.fixture
def small_grid() -> GridSpec:
    return GridSpec(side_pixels=32, metres_per_pixel=2.0)


@pytest.fixture(scope="session")
def world() -> World:
    return generate_world(7, 150, 60.0)


@pytest.fixture
def loop_sequence(world: World, sim_cfg: SimConfig) -> RadarSequence:
    return simulate_sequence(world, loop_path(30.0, 32), 5.0, sim_cfg, name="loop")


@pytest.fixture
def dataset_dir(tmp_path: Path, world: World, sim_cfg: SimConfig) -> Path:
    out = tmp_path / "loop"
    generate_traversal(world, loop_path(30.0, 32), 5.0, sim_cfg, out)
    return out


@pytest.fixture
def uniform_sequence() -> RadarSequence:
    return make_uniform_sequence()


@pytest.fixture
def train_cfg(small_grid: GridSpec) -> TrainConfig:
    return TrainConfig(
        variant=VariantConfig(variant=Variant.VIDEO_SPIN_PAIRED, pairs_per_batch=4),
        embedder=EmbedderConfig(backbone=Backbone.SMALL_CNN, embedding_dim=16, input_side=32),
        grid=small_grid,
        epochs=2,
        steps_per_epoch=3,
        seed=0,
        log_every=0,
    )


@pytest.fixture
def make_sequence() -> Callable[..., RadarSequence]:
    return make_uniform_sequence
