"""Place-recognition metrics over distance and ground-truth matrices.

Conventions:

* ground truth is ``position distance <= boundary``;
* precision/recall use each query's single nearest database entry;
* queries without any ground-truth match are left out of every recall
  denominator (they still count as predictions for precision);
* ranking ties resolve to the lower database index.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

from radarplace.core.types import Metres
from radarplace.errors import UndefinedRecallError
from radarplace.evaluation.models import EmbeddingSet, FScores, PRPoint

type DistanceMatrix = npt.NDArray[np.float64]
type BoolMatrix = npt.NDArray[np.bool_]

_PRECISION_EPS = 1e-12
F_BETAS = (1.0, 2.0, 0.5)


# ── Matrices ─────────────────────────────────────────────────────────────────


def distance_matrix(queries: EmbeddingSet, database: EmbeddingSet) -> DistanceMatrix:
    """Euclidean embedding distance for every query/database pair."""
    if queries.dim != database.dim:
        raise ValueError(f"Embedding dimension mismatch: {queries.dim} vs {database.dim}")
    return cdist(
        queries.embeddings.astype(np.float64),
        database.embeddings.astype(np.float64),
        metric="euclidean",
    )


def ground_truth_matrix(
    queries: EmbeddingSet,
    database: EmbeddingSet,
    boundary: Metres,
) -> BoolMatrix:
    """``True`` where query and database positions lie within *boundary*."""
    if not boundary > 0:
        raise ValueError(f"boundary must be > 0: {boundary!r}")
    return cdist(queries.positions, database.positions, metric="euclidean") <= boundary


def _check_pair(dist: DistanceMatrix, gt: BoolMatrix) -> tuple[DistanceMatrix, BoolMatrix]:
    d = np.asarray(dist, dtype=np.float64)
    g = np.asarray(gt, dtype=bool)
    if d.ndim != 2 or d.shape != g.shape:
        raise ValueError(f"Shape mismatch: dist {d.shape!r} vs gt {g.shape!r}")
    if d.shape[0] < 1 or d.shape[1] < 1:
        raise ValueError(f"Empty matrices: {d.shape!r}")
    return d, g


def _localisable(gt: BoolMatrix) -> npt.NDArray[np.bool_]:
    mask = gt.any(axis=1)
    if not mask.any():
        raise UndefinedRecallError("No query has a ground-truth match in the database")
    return mask


def nearest_neighbours(dist: DistanceMatrix) -> npt.NDArray[np.intp]:
    """Index of each query's closest database entry (lowest index on ties)."""
    return np.argmin(np.asarray(dist), axis=1)


def top_n(dist: DistanceMatrix, n: int) -> npt.NDArray[np.intp]:
    return np.argsort(np.asarray(dist), axis=1, kind="stable")[:, :n]


# ── Recall@N ─────────────────────────────────────────────────────────────────


def recall_at_n(dist: DistanceMatrix, gt: BoolMatrix, n: int) -> float:
    """Fraction of localisable queries with a true match among their *n* best."""
    d, g = _check_pair(dist, gt)
    if n < 1 or n > d.shape[1]:
        raise ValueError(f"n must lie in [1, {d.shape[1]}]: {n!r}")
    mask = _localisable(g)
    hits = np.take_along_axis(g, top_n(d, n), axis=1).any(axis=1)
    return float(hits[mask].mean())


# ── Precision / recall ───────────────────────────────────────────────────────


def pr_curve(dist: DistanceMatrix, gt: BoolMatrix) -> list[PRPoint]:
    """Precision and recall swept over every distinct nearest-neighbour distance.

    At threshold ``t`` a query predicts its nearest neighbour when that
    distance is ``<= t``. Thresholds are strictly increasing.
    """
    d, g = _check_pair(dist, gt)
    localisable = int(_localisable(g).sum())
    nn = nearest_neighbours(d)
    rows = np.arange(d.shape[0])
    nn_dist = d[rows, nn]
    correct = g[rows, nn]

    order = np.argsort(nn_dist, kind="stable")
    sorted_dist = nn_dist[order]
    tp_cum = np.cumsum(correct[order])
    thresholds, first = np.unique(sorted_dist, return_index=True)
    last = np.append(first[1:], len(sorted_dist)) - 1

    curve: list[PRPoint] = []
    for t, idx in zip(thresholds, last, strict=True):
        predicted = int(idx) + 1
        tp = int(tp_cum[idx])
        curve.append(PRPoint(float(t), tp / predicted, tp / localisable))
    return curve


def recall_at_precision(curve: Sequence[PRPoint], target_percent: float) -> float:
    """Best recall among points with precision ``>= target``; 0 if none."""
    if not curve:
        raise ValueError("PR curve is empty")
    point = operating_point(curve, target_percent)
    return 0.0 if point is None else point.recall


def operating_point(curve: Sequence[PRPoint], target_percent: float) -> PRPoint | None:
    """Highest-recall point meeting the target (lowest threshold on ties)."""
    if not 0 < target_percent <= 100:
        raise ValueError(f"target must lie in (0, 100]: {target_percent!r}")
    floor = target_percent / 100.0 - _PRECISION_EPS
    best: PRPoint | None = None
    for point in curve:
        if point.precision >= floor and (best is None or point.recall > best.recall):
            best = point
    return best


def f_scores(curve: Sequence[PRPoint]) -> FScores:
    """Maximum F1, F2 and F0.5 over the curve."""
    if not curve:
        raise ValueError("PR curve is empty")
    p = np.array([pt.precision for pt in curve], dtype=np.float64)
    r = np.array([pt.recall for pt in curve], dtype=np.float64)
    scores = []
    for beta in F_BETAS:
        b2 = beta * beta
        denom = b2 * p + r
        f = np.divide((1.0 + b2) * p * r, denom, out=np.zeros_like(p), where=denom > 0)
        scores.append(float(f.max()))
    return FScores(*scores)


# ── Match matrices ───────────────────────────────────────────────────────────


def match_matrix_at_threshold(dist: DistanceMatrix, threshold: float | None) -> BoolMatrix:
    """Predicted matches: each query's nearest neighbour if within *threshold*."""
    d = np.asarray(dist, dtype=np.float64)
    out = np.zeros(d.shape, dtype=bool)
    if threshold is None:
        return out
    rows = np.arange(d.shape[0])
    nn = nearest_neighbours(d)
    keep = d[rows, nn] <= threshold
    out[rows[keep], nn[keep]] = True
    return out


def match_matrix_top_n(dist: DistanceMatrix, n: int) -> BoolMatrix:
    """Predicted matches: the *n* best candidates of every query."""
    d = np.asarray(dist, dtype=np.float64)
    if n < 1:
        raise ValueError(f"n must be >= 1: {n!r}")
    out = np.zeros(d.shape, dtype=bool)
    np.put_along_axis(out, top_n(d, min(n, d.shape[1])), True, axis=1)
    return out
