"""Self-describing training checkpoints.

A checkpoint is a zip archive holding two members:

``manifest.json``
    ``format`` (``"radarplace-checkpoint"``), ``version``, ``settings``
    (flat ``key -> value`` strings), ``fingerprint``, ``seed``, ``step``,
    ``rng_state`` (numpy bit-generator state) and ``state_sha256``.
``state.pt``
    ``torch.save`` of ``{"model": ..., "optimizer": ...}`` state dicts.

The manifest digest of ``state.pt`` is verified on every load.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import pickle  # nosec B403 - only for UnpicklingError; loads use weights_only
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Final

import torch

from radarplace.errors import CheckpointIntegrityError

_LOGGER = logging.getLogger(__name__)

FORMAT_NAME: Final = "radarplace-checkpoint"
FORMAT_VERSION: Final = 1
_MANIFEST = "manifest.json"
_STATE = "state.pt"


@dataclass(frozen=True, slots=True)
class CheckpointData:
    """Everything needed to rebuild a model or continue training."""

    settings: dict[str, str]
    fingerprint: str
    seed: int
    step: int
    rng_state: dict[str, Any]
    model_state: dict[str, torch.Tensor]
    optimizer_state: dict[str, Any] | None = None


def save_checkpoint(path: Path | str, data: CheckpointData) -> Path:
    """Write *data* to *path* atomically."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    buf = io.BytesIO()
    torch.save({"model": data.model_state, "optimizer": data.optimizer_state}, buf)
    state_bytes = buf.getvalue()
    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "settings": data.settings,
        "fingerprint": data.fingerprint,
        "seed": data.seed,
        "step": data.step,
        "rng_state": data.rng_state,
        "state_sha256": hashlib.sha256(state_bytes).hexdigest(),
    }

    tmp = target.with_name(target.name + ".tmp")
    with zipfile.ZipFile(tmp, "w", compression=zipfile.ZIP_STORED) as zf:
        zf.writestr(_MANIFEST, json.dumps(manifest, indent=2, sort_keys=True))
        zf.writestr(_STATE, state_bytes)
    os.replace(tmp, target)
    _LOGGER.info("Saved checkpoint at step %d to %s", data.step, target)
    return target


def load_checkpoint(path: Path | str) -> CheckpointData:
    """Read and verify a checkpoint written by :func:`save_checkpoint`."""
    source = Path(path)
    if not source.is_file():
        raise CheckpointIntegrityError(f"Checkpoint not found: {source}")
    try:
        with zipfile.ZipFile(source) as zf:
            manifest = json.loads(zf.read(_MANIFEST).decode("utf-8"))
            state_bytes = zf.read(_STATE)
    except (zipfile.BadZipFile, KeyError, OSError, UnicodeDecodeError, ValueError) as exc:
        raise CheckpointIntegrityError(f"Unreadable checkpoint {source}: {exc}") from exc

    if not isinstance(manifest, dict) or manifest.get("format") != FORMAT_NAME:
        raise CheckpointIntegrityError(f"{source} is not a radarplace checkpoint")
    if manifest.get("version") != FORMAT_VERSION:
        raise CheckpointIntegrityError(
            f"{source}: unsupported checkpoint version {manifest.get('version')!r}"
        )
    if hashlib.sha256(state_bytes).hexdigest() != manifest.get("state_sha256"):
        raise CheckpointIntegrityError(f"{source}: weight digest mismatch")

    try:
        state = torch.load(io.BytesIO(state_bytes), map_location="cpu", weights_only=True)
        return CheckpointData(
            settings={str(k): str(v) for k, v in manifest["settings"].items()},
            fingerprint=str(manifest["fingerprint"]),
            seed=int(manifest["seed"]),
            step=int(manifest["step"]),
            rng_state=dict(manifest["rng_state"]),
            model_state=state["model"],
            optimizer_state=state["optimizer"],
        )
    except (KeyError, TypeError, ValueError, RuntimeError, EOFError, pickle.UnpicklingError) as exc:
        raise CheckpointIntegrityError(f"Malformed checkpoint {source}: {exc}") from exc
