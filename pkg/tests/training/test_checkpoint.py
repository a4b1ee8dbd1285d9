"""Tests for checkpoint archives."""

from __future__ import annotations

import json
import zipfile
from pathlib import Path

import numpy as np
import pytest
import torch

from radarplace.errors import CheckpointIntegrityError
from radarplace.training.checkpoint import CheckpointData, load_checkpoint, save_checkpoint


def _data() -> CheckpointData:
    return CheckpointData(
        settings={"variant.name": "vTR2", "loss.temperature": "0.1"},
        fingerprint="abc123",
        seed=7,
        step=42,
        rng_state=np.random.default_rng(7).bit_generator.state,
        model_state={"w": torch.arange(6, dtype=torch.float32).reshape(2, 3)},
        optimizer_state={"state": {}, "param_groups": [{"lr": 3e-4, "params": [0]}]},
    )


def _rewrite_member(path: Path, name: str, payload: bytes) -> None:
    with zipfile.ZipFile(path) as zf:
        members = {n: zf.read(n) for n in zf.namelist()}
    members[name] = payload
    with zipfile.ZipFile(path, "w") as zf:
        for n, blob in members.items():
            zf.writestr(n, blob)


class TestSaveLoad:
    def test_round_trip(self, tmp_path: Path) -> None:
        path = save_checkpoint(tmp_path / "ck" / "a.ckpt", _data())
        loaded = load_checkpoint(path)
        assert loaded.settings == _data().settings
        assert (loaded.fingerprint, loaded.seed, loaded.step) == ("abc123", 7, 42)
        assert torch.equal(loaded.model_state["w"], _data().model_state["w"])
        assert loaded.optimizer_state is not None
        assert loaded.optimizer_state["param_groups"][0]["lr"] == 3e-4

    def test_rng_state_resumes_stream(self, tmp_path: Path) -> None:
        rng = np.random.default_rng(7)
        rng.random(5)
        data = CheckpointData(
            settings={},
            fingerprint="f",
            seed=7,
            step=1,
            rng_state=rng.bit_generator.state,
            model_state={},
        )
        expected = rng.random(3)
        loaded = load_checkpoint(save_checkpoint(tmp_path / "r.ckpt", data))
        restored = np.random.default_rng()
        restored.bit_generator.state = loaded.rng_state
        assert np.array_equal(restored.random(3), expected)

    def test_no_temporary_left_behind(self, tmp_path: Path) -> None:
        save_checkpoint(tmp_path / "a.ckpt", _data())
        assert [p.name for p in tmp_path.iterdir()] == ["a.ckpt"]


class TestIntegrity:
    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(CheckpointIntegrityError, match="not found"):
            load_checkpoint(tmp_path / "none.ckpt")

    def test_garbage_file(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"definitely not a zip archive")
        with pytest.raises(CheckpointIntegrityError, match="Unreadable"):
            load_checkpoint(path)

    def test_truncated_file(self, tmp_path: Path) -> None:
        path = save_checkpoint(tmp_path / "a.ckpt", _data())
        path.write_bytes(path.read_bytes()[:100])
        with pytest.raises(CheckpointIntegrityError):
            load_checkpoint(path)

    def test_tampered_weights(self, tmp_path: Path) -> None:
        path = save_checkpoint(tmp_path / "a.ckpt", _data())
        _rewrite_member(path, "state.pt", b"\x00" * 64)
        with pytest.raises(CheckpointIntegrityError, match="digest mismatch"):
            load_checkpoint(path)

    def test_foreign_manifest(self, tmp_path: Path) -> None:
        path = save_checkpoint(tmp_path / "a.ckpt", _data())
        _rewrite_member(path, "manifest.json", json.dumps({"format": "other"}).encode())
        with pytest.raises(CheckpointIntegrityError, match="not a radarplace checkpoint"):
            load_checkpoint(path)

    def test_future_version(self, tmp_path: Path) -> None:
        path = save_checkpoint(tmp_path / "a.ckpt", _data())
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
        manifest["version"] = 99
        _rewrite_member(path, "manifest.json", json.dumps(manifest).encode())
        with pytest.raises(CheckpointIntegrityError, match="version"):
            load_checkpoint(path)
