"""Embedding databases, place-recognition metrics and report output."""

from radarplace.evaluation.metrics import (
    distance_matrix,
    f_scores,
    ground_truth_matrix,
    pr_curve,
    recall_at_n,
    recall_at_precision,
)
from radarplace.evaluation.models import EmbeddingSet, EvalConfig, EvalReport, FScores, PRPoint
from radarplace.evaluation.service import build_embedding_set, evaluate, rotation_invariance_rate

__all__ = [
    "EmbeddingSet",
    "EvalConfig",
    "EvalReport",
    "FScores",
    "PRPoint",
    "build_embedding_set",
    "distance_matrix",
    "evaluate",
    "f_scores",
    "ground_truth_matrix",
    "pr_curve",
    "recall_at_n",
    "recall_at_precision",
    "rotation_invariance_rate",
]
