"""Tests for polar projection and the spin augmentation."""

from __future__ import annotations

import math

import numpy as np
import pytest

from radarplace.core.geometry import (
    GridSpec,
    polar_to_cartesian,
    random_spin,
    rotate_frame_quarter_turns,
    spin_polar,
)
from radarplace.core.scan import PolarScan, RadarSequence


def _scan(power: np.ndarray, resolution: float = 1.0) -> PolarScan:
    return PolarScan(power=power.astype(np.float32), timestamp=7, range_resolution=resolution)


class TestGridSpec:
    def test_defaults(self) -> None:
        grid = GridSpec()
        assert grid.side_pixels == 256
        assert grid.metres_per_pixel == 0.5
        assert grid.half_extent == pytest.approx(64.0)

    @pytest.mark.parametrize("side", [15, 17, 8])
    def test_rejects_odd_or_tiny(self, side: int) -> None:
        with pytest.raises(ValueError, match="side_pixels"):
            GridSpec(side_pixels=side)


class TestProjection:
    def test_zero_scan(self) -> None:
        frame = polar_to_cartesian(_scan(np.zeros((64, 32))), GridSpec(64, 1.0))
        assert frame.pixels.shape == (64, 64)
        assert not frame.pixels.any()
        assert frame.source_timestamp == 7

    def test_constant_scan_fills_disc(self) -> None:
        grid = GridSpec(64, 1.0)
        frame = polar_to_cartesian(_scan(np.ones((64, 20))), grid)
        idx = np.arange(64) - grid.centre
        rho = np.hypot(idx[None, :], idx[:, None])
        assert np.allclose(frame.pixels[rho < 19.0], 1.0)
        assert not frame.pixels[rho > 20.0].any()

    def test_single_cell_lands_at_geometric_position(self) -> None:
        grid = GridSpec(64, 1.0)
        power = np.zeros((64, 32))
        a0, r0 = 8, 10
        power[a0, r0] = 1.0
        frame = polar_to_cartesian(_scan(power), grid)
        theta = 2 * math.pi * a0 / 64
        rho = (r0 + 0.5) * 1.0
        expected_col = grid.centre + rho * math.sin(theta)
        expected_row = grid.centre - rho * math.cos(theta)
        row, col = np.unravel_index(np.argmax(frame.pixels), frame.pixels.shape)
        assert abs(row - expected_row) <= 1.0
        assert abs(col - expected_col) <= 1.0

    def test_output_in_unit_interval(self) -> None:
        rng = np.random.default_rng(1)
        frame = polar_to_cartesian(_scan(rng.random((40, 30))), GridSpec(48, 1.5))
        assert frame.pixels.min() >= 0.0
        assert frame.pixels.max() <= 1.0
        assert frame.pixels.dtype == np.float32


class TestSpin:
    def test_shift_zero_is_identity(self) -> None:
        scan = _scan(np.random.default_rng(0).random((16, 4)))
        assert spin_polar(scan, 0) == scan

    def test_shift_equal_to_azimuths_is_an_error(self) -> None:
        scan = _scan(np.zeros((16, 4)))
        with pytest.raises(ValueError, match="Spin shift"):
            spin_polar(scan, 16)
        with pytest.raises(ValueError, match="Spin shift"):
            spin_polar(scan, -1)

    def test_roll_moves_rows_clockwise(self) -> None:
        power = np.zeros((16, 4))
        power[2, 1] = 1.0
        spun = spin_polar(_scan(power), 3)
        assert spun.power[5, 1] == 1.0
        assert spun.power.sum() == 1.0

    @pytest.mark.parametrize("k", [1, 5, 8, 15])
    def test_inverse_spin_restores_scan_exactly(self, k: int) -> None:
        scan = _scan(np.random.default_rng(k).random((16, 4)))
        assert spin_polar(spin_polar(scan, k), 16 - k) == scan

    def test_quarter_spin_matches_image_rotation(self, loop_sequence: RadarSequence) -> None:
        grid = GridSpec(64, 1.0)
        scans = loop_sequence.scans[:20]
        diffs = []
        for scan in scans:
            quarter = scan.azimuths // 4
            spun = polar_to_cartesian(spin_polar(scan, quarter), grid)
            rotated = rotate_frame_quarter_turns(polar_to_cartesian(scan, grid), 1)
            diffs.append(float(np.abs(spun.pixels - rotated.pixels).mean()))
        assert np.mean(diffs) <= 0.02

    def test_half_turn_spin_matches_two_quarter_turns(self, loop_sequence: RadarSequence) -> None:
        grid = GridSpec(32, 2.0)
        scan = loop_sequence.scans[3]
        spun = polar_to_cartesian(spin_polar(scan, scan.azimuths // 2), grid)
        rotated = rotate_frame_quarter_turns(polar_to_cartesian(scan, grid), 2)
        assert np.abs(spun.pixels - rotated.pixels).mean() <= 0.02


class TestRandomSpin:
    def test_reproducible(self) -> None:
        a = [random_spin(np.random.default_rng(5), 400) for _ in range(3)]
        rng = np.random.default_rng(5)
        b = [random_spin(rng, 400)]
        assert a[0] == b[0]
        assert a[0] == a[1] == a[2]

    def test_small_range(self) -> None:
        rng = np.random.default_rng(0)
        values = {random_spin(rng, 4) for _ in range(200)}
        assert values == {0, 1, 2, 3}

    def test_uniform_frequencies(self) -> None:
        rng = np.random.default_rng(11)
        n, azimuths = 100_000, 400
        draws = np.array([random_spin(rng, azimuths) for _ in range(n)])
        counts = np.bincount(draws, minlength=azimuths)
        p = 1.0 / azimuths
        sigma = math.sqrt(n * p * (1 - p))
        assert np.all(np.abs(counts - n * p) <= 5 * sigma)

    def test_rejects_tiny_azimuth_count(self) -> None:
        with pytest.raises(ValueError):
            random_spin(np.random.default_rng(0), 3)
