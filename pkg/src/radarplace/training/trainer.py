"""Optimisation loop: sampling -> embedder -> instance loss -> Adam."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Final

import numpy as np
import torch

from radarplace.core.geometry import GridSpec
from radarplace.core.scan import RadarSequence
from radarplace.errors import ConfigError, ConfigMismatchError, TrainingDivergedError
from radarplace.runtime import enable_determinism
from radarplace.training.checkpoint import CheckpointData, load_checkpoint, save_checkpoint
from radarplace.training.embedder import (
    EmbedderConfig,
    EmbeddingNet,
    frames_to_tensor,
    init_model,
)
from radarplace.training.loss import LossConfig, instance_loss
from radarplace.training.sampling import VariantConfig, build_batch, pool_frame_count

_LOGGER = logging.getLogger(__name__)

ADAM_BETAS: Final = (0.9, 0.999)
ADAM_EPS: Final = 1e-8
LOSS_LOG_FILE: Final = "loss.csv"
FINAL_CHECKPOINT: Final = "final.ckpt"
CHECKPOINT_DIR: Final = "checkpoints"


@dataclass(frozen=True, slots=True)
class TrainConfig:
    """Hyper-parameters of one training run."""

    variant: VariantConfig = field(default_factory=VariantConfig)
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    grid: GridSpec = field(default_factory=GridSpec)
    learning_rate: float = 3e-4
    epochs: int = 10
    seed: int = 0
    steps_per_epoch: int | None = None
    checkpoint_every: int = 0
    log_every: int = 50

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0: {self.learning_rate!r}", "train.learning_rate")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1: {self.epochs!r}", "train.epochs")
        if self.steps_per_epoch is not None and self.steps_per_epoch < 1:
            raise ConfigError(
                f"steps_per_epoch must be >= 1: {self.steps_per_epoch!r}", "train.steps_per_epoch"
            )
        if self.checkpoint_every < 0:
            raise ConfigError(
                f"checkpoint_every must be >= 0: {self.checkpoint_every!r}", "train.checkpoint_every"
            )
        if self.embedder.input_side != self.grid.side_pixels:
            raise ConfigError(
                f"Embedder input side {self.embedder.input_side} != grid side "
                f"{self.grid.side_pixels}",
                "grid.side_pixels",
            )

    def resolved_steps_per_epoch(self, frame_count: int) -> int:
        """Explicit value, else one pass worth of anchors."""
        if self.steps_per_epoch is not None:
            return self.steps_per_epoch
        return max(1, frame_count // self.variant.pairs_per_batch)


@dataclass(frozen=True, slots=True)
class TrainResult:
    """Outputs of a finished run."""

    checkpoint: Path
    loss_log: Path
    losses: tuple[float, ...]
    final_step: int


def make_optimizer(model: EmbeddingNet, learning_rate: float) -> torch.optim.Adam:
    return torch.optim.Adam(
        model.parameters(),
        lr=learning_rate,
        betas=ADAM_BETAS,
        eps=ADAM_EPS,
        weight_decay=0.0,
    )


def optimisation_step(
    model: EmbeddingNet,
    optimizer: torch.optim.Optimizer,
    instances: torch.Tensor,
    augmentations: torch.Tensor,
    loss_cfg: LossConfig,
    *,
    step: int = 0,
) -> float:
    """One forward/backward/update; returns the loss value.

    Raises :class:`TrainingDivergedError` before updating when the loss is
    not finite.
    """
    model.train()
    batch = instances.shape[0]
    features = model(torch.cat([instances, augmentations]))
    loss = instance_loss(features[:batch], features[batch:], loss_cfg)
    value = float(loss.item())
    if not math.isfinite(value):
        raise TrainingDivergedError(step, value)
    optimizer.zero_grad(set_to_none=True)
    loss.backward()
    optimizer.step()
    return value


class Trainer:
    """Owns the model, optimiser and sampler RNG of a run.

    Single writer: the model is updated only from :meth:`step_once`.
    """

    __slots__ = (
        "_cfg",
        "_pool",
        "_out_dir",
        "_model",
        "_optimizer",
        "_rng",
        "_step",
        "_steps_per_epoch",
        "_losses",
    )

    def __init__(
        self,
        cfg: TrainConfig,
        pool: list[RadarSequence],
        out_dir: Path | str,
    ) -> None:
        if not pool or pool_frame_count(pool) == 0:
            raise ValueError("Training pool is empty")
        enable_determinism()
        self._cfg = cfg
        self._pool = pool
        self._out_dir = Path(out_dir)
        self._model = init_model(cfg.embedder, cfg.seed)
        self._optimizer = make_optimizer(self._model, cfg.learning_rate)
        self._rng = np.random.default_rng(cfg.seed)
        self._step = 0
        self._steps_per_epoch = cfg.resolved_steps_per_epoch(pool_frame_count(pool))
        self._losses: list[float] = []

    # ── Properties ───────────────────────────────────────────────────────

    @property
    def model(self) -> EmbeddingNet:
        return self._model

    @property
    def step(self) -> int:
        return self._step

    @property
    def total_steps(self) -> int:
        return self._cfg.epochs * self._steps_per_epoch

    @property
    def loss_log_path(self) -> Path:
        return self._out_dir / LOSS_LOG_FILE

    def epoch_of(self, step: int) -> int:
        return (step - 1) // self._steps_per_epoch + 1

    # ── Training ─────────────────────────────────────────────────────────

    def step_once(self) -> float:
        step = self._step + 1
        pairs = build_batch(self._pool, self._cfg.variant, self._rng, self._cfg.grid)
        instances = frames_to_tensor([p.instance for p in pairs])
        augmentations = frames_to_tensor([p.augmentation for p in pairs])
        value = optimisation_step(
            self._model,
            self._optimizer,
            instances,
            augmentations,
            self._cfg.loss,
            step=step,
        )
        self._step = step
        self._losses.append(value)
        return value

    def run(self, until_step: int | None = None) -> TrainResult:
        """Train up to *until_step* (default: the configured total)."""
        last = self.total_steps if until_step is None else min(until_step, self.total_steps)
        self._out_dir.mkdir(parents=True, exist_ok=True)
        _LOGGER.info(
            "Training %s from step %d to %d (%d steps/epoch)",
            self._cfg.variant.variant,
            self._step,
            last,
            self._steps_per_epoch,
        )
        with self.loss_log_path.open("a", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            if fh.tell() == 0:
                writer.writerow(["step", "epoch", "loss"])
            while self._step < last:
                value = self.step_once()
                writer.writerow([self._step, self.epoch_of(self._step), repr(value)])
                if self._cfg.log_every and self._step % self._cfg.log_every == 0:
                    fh.flush()
                    _LOGGER.info("step %d/%d loss %.5f", self._step, last, value)
                every = self._cfg.checkpoint_every
                if every and self._step % every == 0:
                    fh.flush()
                    self.save(self._out_dir / CHECKPOINT_DIR / f"step_{self._step:07d}.ckpt")

        final = self.save(self._out_dir / FINAL_CHECKPOINT)
        return TrainResult(
            checkpoint=final,
            loss_log=self.loss_log_path,
            losses=tuple(self._losses),
            final_step=self._step,
        )

    # ── Checkpointing ────────────────────────────────────────────────────

    def save(self, path: Path) -> Path:
        from radarplace.config import train_fingerprint, train_items

        return save_checkpoint(
            path,
            CheckpointData(
                settings=train_items(self._cfg),
                fingerprint=train_fingerprint(self._cfg),
                seed=self._cfg.seed,
                step=self._step,
                rng_state=self._rng.bit_generator.state,
                model_state=self._model.state_dict(),
                optimizer_state=self._optimizer.state_dict(),
            ),
        )

    def restore(self, data: CheckpointData) -> None:
        self._model.load_state_dict(data.model_state)
        if data.optimizer_state is not None:
            self._optimizer.load_state_dict(data.optimizer_state)
        self._rng.bit_generator.state = data.rng_state
        self._step = data.step
        self._truncate_loss_log(data.step)

    def _truncate_loss_log(self, step: int) -> None:
        path = self.loss_log_path
        if not path.is_file():
            return
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        kept = [rows[0]] + [r for r in rows[1:] if r and int(r[0]) <= step] if rows else []
        with path.open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(kept)


# ── Entry points ─────────────────────────────────────────────────────────────


def train(
    cfg: TrainConfig,
    pool: list[RadarSequence],
    out_dir: Path | str,
    *,
    until_step: int | None = None,
) -> TrainResult:
    """Train from scratch, writing ``loss.csv`` and checkpoints to *out_dir*."""
    return Trainer(cfg, pool, out_dir).run(until_step)


def resume(
    checkpoint: Path | str,
    pool: list[RadarSequence],
    out_dir: Path | str,
    *,
    cfg: TrainConfig | None = None,
    until_step: int | None = None,
) -> TrainResult:
    """Continue a run from *checkpoint* with its stored RNG state.

    When *cfg* is given it must match the checkpoint's configuration;
    otherwise :class:`ConfigMismatchError` lists the differing keys.
    """
    from radarplace.config import train_config_from_items, train_fingerprint, train_items

    data = load_checkpoint(checkpoint)
    stored = train_config_from_items(data.settings)
    if cfg is None:
        cfg = stored
    elif train_fingerprint(cfg) != data.fingerprint:
        current = train_items(cfg)
        diff = {
            key: (data.settings.get(key, "<unset>"), current.get(key, "<unset>"))
            for key in sorted(set(current) | set(data.settings))
            if data.settings.get(key) != current.get(key)
        }
        summary = ", ".join(f"{k}: {old} -> {new}" for k, (old, new) in diff.items())
        raise ConfigMismatchError(f"Checkpoint configuration differs ({summary})", diff)

    trainer = Trainer(cfg, pool, out_dir)
    trainer.restore(data)
    _LOGGER.info("Resumed from %s at step %d", checkpoint, data.step)
    return trainer.run(until_step)


def load_model(checkpoint: Path | str) -> tuple[EmbeddingNet, TrainConfig]:
    """Rebuild the trained embedder stored in *checkpoint* (inference mode)."""
    from radarplace.config import train_config_from_items

    data = load_checkpoint(checkpoint)
    cfg = train_config_from_items(data.settings)
    model = init_model(cfg.embedder, cfg.seed)
    model.load_state_dict(data.model_state)
    model.eval()
    return model, cfg
