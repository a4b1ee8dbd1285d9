"""Convolutional embedder mapping Cartesian frames to unit vectors.

Architecture: backbone feature map -> global average pool -> linear layer
to ``embedding_dim`` -> L2 normalisation (``1e-12`` added to the norm).

``small_cnn`` is five stride-2 3x3 conv blocks with 16, 32, 64, 128 and
128 channels, each followed by ReLU. ``vgg19`` is the torchvision feature
extractor with a single-channel first convolution.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from radarplace.core.enums import Backbone
from radarplace.core.geometry import CartesianFrame
from radarplace.core.types import Timestamp
from radarplace.errors import ConfigError

NORM_EPS = 1e-12
SMALL_CNN_CHANNELS = (16, 32, 64, 128, 128)


@dataclass(frozen=True, slots=True)
class EmbedderConfig:
    """Backbone choice and output size of the embedder."""

    backbone: Backbone = Backbone.VGG19
    embedding_dim: int = 128
    input_side: int = 256
    pretrained: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.backbone, Backbone):
            try:
                object.__setattr__(self, "backbone", Backbone(self.backbone))
            except ValueError:
                raise ConfigError(f"Unknown backbone {self.backbone!r}", "embedder.backbone") from None
        if self.embedding_dim < 8:
            raise ConfigError(
                f"embedding_dim must be >= 8: {self.embedding_dim!r}", "embedder.embedding_dim"
            )
        if self.input_side < 16:
            raise ConfigError(f"input_side too small: {self.input_side!r}", "embedder.input_side")


@dataclass(frozen=True, slots=True)
class Embedding:
    """Unit-norm embedding of one frame."""

    vector: np.ndarray
    source_timestamp: Timestamp


# ── Network ──────────────────────────────────────────────────────────────────


def _small_cnn() -> tuple[nn.Module, int]:
    layers: list[nn.Module] = []
    in_ch = 1
    for out_ch in SMALL_CNN_CHANNELS:
        layers += [nn.Conv2d(in_ch, out_ch, kernel_size=3, stride=2, padding=1), nn.ReLU(inplace=True)]
        in_ch = out_ch
    return nn.Sequential(*layers), in_ch


def _vgg19(pretrained: bool) -> tuple[nn.Module, int]:
    from torchvision.models import VGG19_Weights, vgg19

    weights = VGG19_Weights.IMAGENET1K_V1 if pretrained else None
    features: nn.Sequential = vgg19(weights=weights).features
    first = features[0]
    assert isinstance(first, nn.Conv2d)
    mono = nn.Conv2d(1, first.out_channels, kernel_size=3, padding=1)
    if pretrained:
        with torch.no_grad():
            mono.weight.copy_(first.weight.mean(dim=1, keepdim=True))
            assert first.bias is not None and mono.bias is not None
            mono.bias.copy_(first.bias)
    features[0] = mono
    return features, 512


class EmbeddingNet(nn.Module):
    """Backbone plus pooling/linear/normalisation head."""

    def __init__(self, cfg: EmbedderConfig) -> None:
        super().__init__()
        self.cfg = cfg
        if cfg.backbone is Backbone.SMALL_CNN:
            self.backbone, channels = _small_cnn()
        elif cfg.backbone is Backbone.VGG19:
            self.backbone, channels = _vgg19(cfg.pretrained)
        else:  # pragma: no cover - guarded by EmbedderConfig
            raise ConfigError(f"Unknown backbone {cfg.backbone!r}", "embedder.backbone")
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.head = nn.Linear(channels, cfg.embedding_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        side = self.cfg.input_side
        if x.ndim != 4 or x.shape[1] != 1 or x.shape[2] != side or x.shape[3] != side:
            raise ValueError(f"Expected input of shape (B, 1, {side}, {side}), got {tuple(x.shape)!r}")
        feats = self.pool(self.backbone(x)).flatten(1)
        raw = self.head(feats)
        return raw / (raw.norm(dim=1, keepdim=True) + NORM_EPS)


def init_model(cfg: EmbedderConfig, seed: int) -> EmbeddingNet:
    """Build an :class:`EmbeddingNet` with seed-reproducible weights.

    The global torch RNG state is left untouched.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return EmbeddingNet(cfg)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


# ── Inference ────────────────────────────────────────────────────────────────


def frames_to_tensor(frames: Sequence[CartesianFrame]) -> torch.Tensor:
    """Stack frames into a ``(B, 1, S, S)`` float tensor."""
    if not frames:
        raise ValueError("No frames to stack")
    sides = {f.pixels.shape for f in frames}
    if len(sides) != 1:
        raise ValueError(f"Frames have mixed shapes: {sorted(sides)!r}")
    stacked = np.stack([f.pixels for f in frames]).astype(np.float32, copy=False)
    return torch.from_numpy(stacked).unsqueeze(1)


def embed(
    model: EmbeddingNet,
    frames: Sequence[CartesianFrame],
    *,
    batch_size: int = 64,
) -> list[Embedding]:
    """Embed *frames* in inference mode; one unit vector per frame."""
    if not frames:
        return []
    side = model.cfg.input_side
    for frame in frames:
        if frame.pixels.shape != (side, side):
            raise ValueError(f"Frame shape {frame.pixels.shape!r} does not match input side {side}")

    was_training = model.training
    model.eval()
    out: list[Embedding] = []
    try:
        with torch.inference_mode():
            for start in range(0, len(frames), batch_size):
                chunk = frames[start : start + batch_size]
                vectors = model(frames_to_tensor(chunk)).numpy()
                out.extend(
                    Embedding(vector=v.copy(), source_timestamp=f.source_timestamp)
                    for v, f in zip(vectors, chunk, strict=True)
                )
    finally:
        model.train(was_training)
    return out
