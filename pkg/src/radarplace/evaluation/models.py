"""Data models produced and consumed by evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from radarplace.core.types import Metres

UNIT_ROW_TOLERANCE = 1e-5


@dataclass(frozen=True, slots=True, eq=False)
class EmbeddingSet:
    """Embeddings of one traversal with their timestamps and positions."""

    embeddings: npt.NDArray[np.float32]
    timestamps: npt.NDArray[np.int64]
    positions: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        emb = np.asarray(self.embeddings, dtype=np.float32)
        ts = np.asarray(self.timestamps, dtype=np.int64)
        pos = np.asarray(self.positions, dtype=np.float64)
        if emb.ndim != 2 or emb.shape[0] < 1:
            raise ValueError(f"embeddings must be a non-empty (N, D) matrix: {emb.shape!r}")
        n = emb.shape[0]
        if ts.shape != (n,) or pos.shape != (n, 2):
            raise ValueError(
                f"Misaligned arrays: embeddings {emb.shape!r}, timestamps {ts.shape!r}, "
                f"positions {pos.shape!r}"
            )
        err = float(np.abs(np.linalg.norm(emb.astype(np.float64), axis=1) - 1.0).max())
        if err > UNIT_ROW_TOLERANCE:
            raise ValueError(f"Embedding rows must be unit norm (max deviation {err:.3g})")
        for arr in (emb, ts, pos):
            arr.flags.writeable = False
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return int(self.embeddings.shape[0])

    @property
    def dim(self) -> int:
        return int(self.embeddings.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingSet):
            return NotImplemented
        return (
            np.array_equal(self.embeddings, other.embeddings)
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.positions, other.positions)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, slots=True)
class EvalConfig:
    """Boundaries and operating points of an evaluation."""

    boundary: Metres = 25.0
    alternate_boundary: Metres | None = 50.0
    n_candidates: tuple[int, ...] = (1, 2, 3)
    precision_targets: tuple[float, ...] = (95.0, 98.0, 99.0)
    match_precision: float = 80.0
    match_candidates: int = 25
    query_spin: bool = False
    spin_seed: int = 0
    rotation_audit: bool = False

    def __post_init__(self) -> None:
        if not self.boundary > 0:
            raise ValueError(f"boundary must be > 0: {self.boundary!r}")
        if self.alternate_boundary is not None and not self.alternate_boundary > 0:
            raise ValueError(f"alternate_boundary must be > 0: {self.alternate_boundary!r}")
        if not self.n_candidates or min(self.n_candidates) < 1:
            raise ValueError(f"n_candidates must be >= 1: {self.n_candidates!r}")
        for target in (*self.precision_targets, self.match_precision):
            if not 0 < target <= 100:
                raise ValueError(f"Precision targets must lie in (0, 100]: {target!r}")
        if self.match_candidates < 1:
            raise ValueError(f"match_candidates must be >= 1: {self.match_candidates!r}")


@dataclass(frozen=True, slots=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


@dataclass(frozen=True, slots=True)
class FScores:
    f1: float
    f2: float
    f_half: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.f1, self.f2, self.f_half)


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Scalar metrics of one query/database evaluation plus matrix file names.

    ``files`` maps ``distance``, ``ground_truth``, ``match_recall_at_p`` and
    ``match_recall_at_n`` to paths relative to the report directory.
    """

    n_queries: int
    n_database: int
    n_localisable: int
    boundary: Metres
    pr_curve: tuple[PRPoint, ...]
    recall_at_p: dict[float, float]
    recall_at_n: dict[int, float]
    f_scores: FScores
    match_threshold: float | None
    match_candidates: int
    alternate_boundary: Metres | None = None
    alternate_recall_at_p: dict[float, float] = field(default_factory=dict)
    rotation_invariance: float | None = None
    files: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_queries": self.n_queries,
            "n_database": self.n_database,
            "n_localisable": self.n_localisable,
            "boundary": self.boundary,
            "pr_curve": [[p.threshold, p.precision, p.recall] for p in self.pr_curve],
            "recall_at_p": {_key(k): v for k, v in self.recall_at_p.items()},
            "recall_at_n": {str(k): v for k, v in self.recall_at_n.items()},
            "f_scores": {"f1": self.f_scores.f1, "f2": self.f_scores.f2, "f0.5": self.f_scores.f_half},
            "match_threshold": self.match_threshold,
            "match_candidates": self.match_candidates,
            "alternate_boundary": self.alternate_boundary,
            "alternate_recall_at_p": {_key(k): v for k, v in self.alternate_recall_at_p.items()},
            "rotation_invariance": self.rotation_invariance,
            "files": dict(self.files),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvalReport:
        f = data["f_scores"]
        return cls(
            n_queries=int(data["n_queries"]),
            n_database=int(data["n_database"]),
            n_localisable=int(data["n_localisable"]),
            boundary=float(data["boundary"]),
            pr_curve=tuple(PRPoint(float(t), float(p), float(r)) for t, p, r in data["pr_curve"]),
            recall_at_p={float(k): float(v) for k, v in data["recall_at_p"].items()},
            recall_at_n={int(k): float(v) for k, v in data["recall_at_n"].items()},
            f_scores=FScores(float(f["f1"]), float(f["f2"]), float(f["f0.5"])),
            match_threshold=_opt_float(data.get("match_threshold")),
            match_candidates=int(data["match_candidates"]),
            alternate_boundary=_opt_float(data.get("alternate_boundary")),
            alternate_recall_at_p={
                float(k): float(v) for k, v in data.get("alternate_recall_at_p", {}).items()
            },
            rotation_invariance=_opt_float(data.get("rotation_invariance")),
            files={str(k): str(v) for k, v in data.get("files", {}).items()},
        )


def _key(percent: float) -> str:
    short = f"{percent:g}"
    return short if float(short) == percent else repr(float(percent))


def _opt_float(value: Any) -> float | None:
    return None if value is None else float(value)
