"""Tests for the on-disk dataset layout and sequence loading."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from radarplace.core.scan import RadarSequence, pose_at
from radarplace.data.ingest import load_sequence, save_sequence
from radarplace.data.layout import (
    POSES_FILE,
    TIMESTAMPS_FILE,
    quantise_power,
    read_meta,
    scan_path,
)
from radarplace.errors import DatasetError, DatasetFormatError, EmptySequenceError


class TestRoundTrip:
    def test_simworld_dataset_round_trips(
        self, dataset_dir: Path, loop_sequence: RadarSequence
    ) -> None:
        loaded = load_sequence(dataset_dir)
        assert len(loaded) == len(loop_sequence)
        assert loaded.name == "loop"
        assert np.array_equal(loaded.scan_timestamps, loop_sequence.scan_timestamps)
        assert loaded.poses == loop_sequence.poses
        err = max(
            float(np.abs(a.power - b.power).max())
            for a, b in zip(loaded.scans, loop_sequence.scans, strict=True)
        )
        assert err <= 1.0 / 255.0

    def test_meta_matches_sensor(self, dataset_dir: Path) -> None:
        meta = read_meta(dataset_dir)
        assert (meta.azimuths, meta.range_bins, meta.range_resolution) == (64, 32, 1.0)
        assert meta.scan_bytes == 64 * 32

    def test_threaded_loading_is_identical(self, dataset_dir: Path) -> None:
        serial = load_sequence(dataset_dir)
        threaded = load_sequence(dataset_dir, workers=4)
        assert serial.scans == threaded.scans
        assert serial.poses == threaded.poses

    def test_hundred_scan_sequence(self, tmp_path: Path, make_sequence) -> None:
        seq = make_sequence(100)
        save_sequence(seq, tmp_path / "seq")
        loaded = load_sequence(tmp_path / "seq")
        assert len(loaded) == 100
        assert np.all(np.diff(loaded.scan_timestamps) > 0)

    def test_positions_come_from_pose_track(self, dataset_dir: Path) -> None:
        seq = load_sequence(dataset_dir)
        scan = seq.scans[5]
        assert pose_at(seq, scan.timestamp) == seq.poses[5]

    def test_quantisation(self) -> None:
        q = quantise_power(np.array([0.0, 0.5, 1.0, 1.0 / 255.0]))
        assert q.tolist() == [0, 128, 255, 1]


class TestLoadErrors:
    def test_missing_directory(self, tmp_path: Path) -> None:
        with pytest.raises(DatasetError, match="not found"):
            load_sequence(tmp_path / "nope")

    def test_zero_scans(self, tmp_path: Path, make_sequence) -> None:
        root = tmp_path / "seq"
        save_sequence(make_sequence(3), root)
        (root / TIMESTAMPS_FILE).write_text("", encoding="utf-8")
        with pytest.raises(EmptySequenceError):
            load_sequence(root)

    def test_wrong_scan_length_names_file(self, tmp_path: Path, make_sequence) -> None:
        seq = make_sequence(3)
        root = save_sequence(seq, tmp_path / "seq")
        bad = scan_path(root, seq.scans[1].timestamp)
        bad.write_bytes(b"\x00" * 5)
        with pytest.raises(DatasetFormatError, match=bad.name) as info:
            load_sequence(root)
        assert info.value.path == bad

    def test_non_monotone_timestamps_name_index(self, tmp_path: Path, make_sequence) -> None:
        seq = make_sequence(4)
        root = save_sequence(seq, tmp_path / "seq")
        stamps = [s.timestamp for s in seq.scans]
        stamps[2], stamps[3] = stamps[3], stamps[2]
        (root / TIMESTAMPS_FILE).write_text("".join(f"{t}\n" for t in stamps), encoding="utf-8")
        with pytest.raises(DatasetFormatError, match="index 3"):
            load_sequence(root)

    def test_bad_pose_header(self, tmp_path: Path, make_sequence) -> None:
        root = save_sequence(make_sequence(3), tmp_path / "seq")
        path = root / POSES_FILE
        path.write_text("t,x,y,yaw\n" + path.read_text().split("\n", 1)[1])
        with pytest.raises(DatasetFormatError, match="header"):
            load_sequence(root)

    def test_uncovered_scans_dropped_with_warning(
        self, tmp_path: Path, make_sequence, caplog: pytest.LogCaptureFixture
    ) -> None:
        root = save_sequence(make_sequence(40), tmp_path / "seq")
        path = root / POSES_FILE
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]) + "\n")
        with caplog.at_level("WARNING"):
            seq = load_sequence(root)
        assert len(seq) == 38
        assert "Dropped 2 of 40" in caplog.text

    def test_too_many_uncovered_scans(self, tmp_path: Path, make_sequence) -> None:
        root = save_sequence(make_sequence(10), tmp_path / "seq")
        path = root / POSES_FILE
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-3]) + "\n")
        with pytest.raises(DatasetFormatError, match="outside pose coverage"):
            load_sequence(root)

    def test_refuses_empty_sequence(self, tmp_path: Path) -> None:
        with pytest.raises(EmptySequenceError):
            save_sequence(RadarSequence("empty", (), ()), tmp_path / "e")
