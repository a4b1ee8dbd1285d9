"""Tests for the frame embedder."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from radarplace.core.enums import Backbone
from radarplace.core.geometry import CartesianFrame
from radarplace.errors import ConfigError
from radarplace.training.embedder import (
    EmbedderConfig,
    embed,
    frames_to_tensor,
    init_model,
    parameter_count,
)

CFG = EmbedderConfig(backbone=Backbone.SMALL_CNN, embedding_dim=16, input_side=32)


def _frames(n: int, seed: int = 0, side: int = 32) -> list[CartesianFrame]:
    rng = np.random.default_rng(seed)
    return [
        CartesianFrame(pixels=rng.random((side, side), dtype=np.float32), source_timestamp=i)
        for i in range(n)
    ]


class TestEmbedderConfig:
    def test_defaults(self) -> None:
        cfg = EmbedderConfig()
        assert cfg.backbone is Backbone.VGG19
        assert cfg.embedding_dim == 128
        assert cfg.input_side == 256

    def test_rejects_small_dimension(self) -> None:
        with pytest.raises(ConfigError, match="embedding_dim") as info:
            EmbedderConfig(embedding_dim=7)
        assert info.value.key == "embedder.embedding_dim"

    def test_backbone_from_string(self) -> None:
        cfg = EmbedderConfig(backbone="small_cnn")  # type: ignore[arg-type]
        assert cfg.backbone is Backbone.SMALL_CNN

    def test_unknown_backbone(self) -> None:
        with pytest.raises(ConfigError, match="resnet"):
            EmbedderConfig(backbone="resnet")  # type: ignore[arg-type]


class TestEmbeddingNet:
    def test_outputs_are_unit_vectors(self) -> None:
        model = init_model(CFG, seed=0)
        out = embed(model, _frames(5))
        assert len(out) == 5
        for e in out:
            assert e.vector.shape == (16,)
            assert abs(float(np.linalg.norm(e.vector)) - 1.0) <= 1e-5

    def test_blank_frame_still_unit(self) -> None:
        model = init_model(CFG, seed=0)
        blank = CartesianFrame(pixels=np.zeros((32, 32), dtype=np.float32), source_timestamp=0)
        (e,) = embed(model, [blank])
        assert abs(float(np.linalg.norm(e.vector)) - 1.0) <= 1e-5

    def test_same_seed_same_weights(self) -> None:
        a = init_model(CFG, seed=4).state_dict()
        b = init_model(CFG, seed=4).state_dict()
        c = init_model(CFG, seed=5).state_dict()
        assert all(torch.equal(a[k], b[k]) for k in a)
        assert not all(torch.equal(a[k], c[k]) for k in a)

    def test_init_leaves_global_rng_alone(self) -> None:
        torch.manual_seed(123)
        expected = torch.rand(3)
        torch.manual_seed(123)
        init_model(CFG, seed=9)
        assert torch.equal(torch.rand(3), expected)

    def test_small_backbone_is_small(self) -> None:
        assert parameter_count(init_model(CFG, seed=0)) < 2_000_000

    def test_wrong_input_shape(self) -> None:
        model = init_model(CFG, seed=0)
        with pytest.raises(ValueError, match="Expected input"):
            model(torch.zeros(2, 1, 16, 16))
        with pytest.raises(ValueError, match="does not match"):
            embed(model, _frames(1, side=16))

    def test_gradients_reach_every_parameter(self) -> None:
        model = init_model(CFG, seed=0)
        out = model(frames_to_tensor(_frames(4)))
        out[:, 0].sum().backward()
        for name, param in model.named_parameters():
            assert param.grad is not None, name
            assert torch.isfinite(param.grad).all(), name
            assert param.grad.abs().sum() > 0, name

    def test_inference_is_repeatable_and_restores_mode(self) -> None:
        model = init_model(CFG, seed=0)
        model.train()
        frames = _frames(7, seed=2)
        a = np.stack([e.vector for e in embed(model, frames)])
        b = np.stack([e.vector for e in embed(model, frames)])
        chunked = np.stack([e.vector for e in embed(model, frames, batch_size=3)])
        assert np.array_equal(a, b)
        np.testing.assert_allclose(chunked, a, atol=1e-6)
        assert model.training

    def test_embeddings_keep_timestamps(self) -> None:
        out = embed(init_model(CFG, seed=0), _frames(3))
        assert [e.source_timestamp for e in out] == [0, 1, 2]

    def test_empty_input(self) -> None:
        assert embed(init_model(CFG, seed=0), []) == []


class TestFramesToTensor:
    def test_shape(self) -> None:
        t = frames_to_tensor(_frames(3))
        assert t.shape == (3, 1, 32, 32)
        assert t.dtype == torch.float32

    def test_mixed_shapes(self) -> None:
        with pytest.raises(ValueError, match="mixed"):
            frames_to_tensor(_frames(1) + _frames(1, side=16))
