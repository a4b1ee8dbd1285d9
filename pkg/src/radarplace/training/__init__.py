"""Batch sampling, the embedder, the instance loss and the training loop."""

from radarplace.training.embedder import EmbedderConfig, EmbeddingNet, embed, init_model
from radarplace.training.loss import LossConfig, instance_loss
from radarplace.training.sampling import VariantConfig, build_batch, build_sample
from radarplace.training.trainer import TrainConfig, load_model, resume, train

__all__ = [
    "EmbedderConfig",
    "EmbeddingNet",
    "LossConfig",
    "TrainConfig",
    "VariantConfig",
    "build_batch",
    "build_sample",
    "embed",
    "init_model",
    "instance_loss",
    "load_model",
    "resume",
    "train",
]
