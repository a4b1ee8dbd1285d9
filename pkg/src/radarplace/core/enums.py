"""Core enumerations for batch variants and backbones."""

from __future__ import annotations

from enum import StrEnum


class Variant(StrEnum):
    """Batch construction strategy.

    ``vR`` spins the instance, ``vT`` pairs it with a frame 2 s later,
    ``vTR`` does both, ``vTR2`` additionally pins a distant negative pair.
    """

    SPIN = "vR"
    VIDEO = "vT"
    VIDEO_SPIN = "vTR"
    VIDEO_SPIN_PAIRED = "vTR2"

    @property
    def uses_video(self) -> bool:
        return self is not Variant.SPIN

    @property
    def uses_negative_pair(self) -> bool:
        return self is Variant.VIDEO_SPIN_PAIRED

    @classmethod
    def parse(cls, text: str) -> Variant:
        """Parse a variant name such as ``'vTR2'``."""
        try:
            return cls(text.strip())
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ValueError(f"Unknown variant {text!r} (expected one of {names})") from None


class Backbone(StrEnum):
    """Convolutional feature extractors available to the embedder."""

    VGG19 = "vgg19"
    SMALL_CNN = "small_cnn"
