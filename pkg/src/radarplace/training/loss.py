"""Instance-invariance / instance-spreading objective.

With ``P(i|j) = softmax_i(f_i . g_j / tau)`` over the instances ``f`` of a
batch and augmentations ``g``::

    L = -(1/B) * [ sum_i log P(i|i) + sum_i sum_{j != i} log(1 - P(i|j)) ]

Everything is evaluated in the log domain; ``log(1 - P(i|j))`` is the
log-sum-exp over the other instances minus the full log-sum-exp.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

UNIT_NORM_TOLERANCE = 1e-3


@dataclass(frozen=True, slots=True)
class LossConfig:
    """Softmax temperature of the instance objective."""

    temperature: float = 0.1

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0: {self.temperature!r}")


def _check_unit_rows(name: str, x: torch.Tensor) -> None:
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty (B, D) matrix, got {tuple(x.shape)!r}")
    with torch.no_grad():
        err = (x.norm(dim=1) - 1.0).abs().max().item()
    if err > UNIT_NORM_TOLERANCE:
        raise ValueError(f"{name} rows must be unit norm (max deviation {err:.3g})")


def instance_loss(
    instances: torch.Tensor,
    augmentations: torch.Tensor,
    cfg: LossConfig | None = None,
) -> torch.Tensor:
    """Scalar loss for ``B`` instance rows and their ``B`` augmentation rows."""
    cfg = cfg or LossConfig()
    _check_unit_rows("instances", instances)
    _check_unit_rows("augmentations", augmentations)
    if instances.shape != augmentations.shape:
        raise ValueError(
            f"Shape mismatch: {tuple(instances.shape)!r} vs {tuple(augmentations.shape)!r}"
        )

    batch = instances.shape[0]
    # logits[k, j] = f_k . g_j / tau ; softmax runs down each column
    logits = instances @ augmentations.T / cfg.temperature
    log_norm = torch.logsumexp(logits, dim=0)
    attract = (logits.diagonal() - log_norm).sum()
    if batch == 1:
        return -attract

    eye = torch.eye(batch, dtype=torch.bool, device=logits.device)
    # others[i, k, j] = logits[k, j] with k == i removed
    others = logits.unsqueeze(0).expand(batch, batch, batch)
    others = others.masked_fill(eye.unsqueeze(2), float("-inf"))
    log_not_p = torch.logsumexp(others, dim=1) - log_norm.unsqueeze(0)
    spread = log_not_p.masked_select(~eye).sum()
    return -(attract + spread) / batch
