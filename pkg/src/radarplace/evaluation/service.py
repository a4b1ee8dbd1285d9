"""Embedding databases, report assembly and report/embedding files."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Final

import numpy as np
from scipy.spatial.distance import cdist

from radarplace.core.geometry import GridSpec, polar_to_cartesian, random_spin, spin_polar
from radarplace.core.scan import RadarSequence, pose_at
from radarplace.errors import DatasetError, DatasetFormatError
from radarplace.evaluation.matrix_io import (
    read_float_matrix,
    write_bool_matrix,
    write_float_matrix,
)
from radarplace.evaluation.metrics import (
    distance_matrix,
    f_scores,
    ground_truth_matrix,
    match_matrix_at_threshold,
    match_matrix_top_n,
    operating_point,
    pr_curve,
    recall_at_n,
    recall_at_precision,
)
from radarplace.evaluation.models import EmbeddingSet, EvalConfig, EvalReport
from radarplace.training.embedder import EmbeddingNet, embed

_LOGGER = logging.getLogger(__name__)

EMBEDDINGS_BIN: Final = "embeddings.bin"
EMBEDDINGS_CSV: Final = "embeddings.csv"
REPORT_FILE: Final = "report.json"
DISTANCE_FILE: Final = "distance.bin"
GROUND_TRUTH_FILE: Final = "ground_truth.bin"
MATCH_P_FILE: Final = "match_recall_at_p.bin"
MATCH_N_FILE: Final = "match_recall_at_n.bin"
_CSV_HEADER: Final = ("index", "timestamp", "x", "y")
AUDIT_PERCENTILE: Final = 10.0


# ── Embedding databases ──────────────────────────────────────────────────────


def build_embedding_set(
    model: EmbeddingNet,
    seq: RadarSequence,
    grid: GridSpec | None = None,
    *,
    spin_rng: np.random.Generator | None = None,
    batch_size: int = 64,
) -> EmbeddingSet:
    """Embed every scan of *seq*; positions come from :func:`pose_at`.

    With *spin_rng* each scan is given an independent random spin first.
    """
    if not len(seq):
        raise ValueError(f"Sequence {seq.name!r} is empty")
    grid = grid or GridSpec(side_pixels=model.cfg.input_side)
    frames = []
    for scan in seq.scans:
        if spin_rng is not None:
            scan = spin_polar(scan, random_spin(spin_rng, scan.azimuths))
        frames.append(polar_to_cartesian(scan, grid))
    vectors = embed(model, frames, batch_size=batch_size)
    positions = [pose_at(seq, scan.timestamp).position for scan in seq.scans]
    return EmbeddingSet(
        embeddings=np.stack([e.vector for e in vectors]),
        timestamps=seq.scan_timestamps.copy(),
        positions=np.array(positions, dtype=np.float64),
    )


def rotation_invariance_rate(
    model: EmbeddingNet,
    seq: RadarSequence,
    grid: GridSpec | None = None,
    rng: np.random.Generator | None = None,
    *,
    percentile: float = AUDIT_PERCENTILE,
) -> float:
    """Fraction of frames whose spun copy embeds closer than the given
    percentile of their distances to every other frame."""
    if len(seq) < 2:
        raise ValueError("Rotation audit needs at least two frames")
    rng = rng if rng is not None else np.random.default_rng(0)
    plain = build_embedding_set(model, seq, grid)
    spun = build_embedding_set(model, seq, grid, spin_rng=rng)
    e = plain.embeddings.astype(np.float64)
    s = spun.embeddings.astype(np.float64)
    self_dist = np.linalg.norm(e - s, axis=1)
    others = cdist(e, e)
    np.fill_diagonal(others, np.nan)
    cutoff = np.nanpercentile(others, percentile, axis=1)
    return float(np.mean(self_dist < cutoff))


def save_embedding_set(es: EmbeddingSet, out_dir: Path | str) -> Path:
    """Write ``embeddings.bin`` and ``embeddings.csv`` into *out_dir*."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_float_matrix(out / EMBEDDINGS_BIN, es.embeddings)
    with (out / EMBEDDINGS_CSV).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for i, (ts, (x, y)) in enumerate(zip(es.timestamps, es.positions, strict=True)):
            writer.writerow([i, int(ts), repr(float(x)), repr(float(y))])
    _LOGGER.info("Wrote %d embeddings to %s", len(es), out)
    return out


def load_embedding_set(root: Path | str) -> EmbeddingSet:
    src = Path(root)
    csv_path = src / EMBEDDINGS_CSV
    if not csv_path.is_file():
        raise DatasetError(f"Embedding table not found: {csv_path}", csv_path)
    embeddings = read_float_matrix(src / EMBEDDINGS_BIN)
    stamps: list[int] = []
    positions: list[tuple[float, float]] = []
    with csv_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader, ())) != _CSV_HEADER:
            raise DatasetFormatError(f"{csv_path}: unexpected header", csv_path)
        for line_no, row in enumerate(reader, start=2):
            try:
                index, ts, x, y = row
                if int(index) != len(stamps):
                    raise ValueError(f"index {index} out of order")
                stamps.append(int(ts))
                positions.append((float(x), float(y)))
            except ValueError as exc:
                raise DatasetFormatError(f"{csv_path}:{line_no}: {exc}", csv_path) from exc
    if len(stamps) != embeddings.shape[0]:
        raise DatasetFormatError(
            f"{src}: {embeddings.shape[0]} embeddings but {len(stamps)} table rows", src
        )
    try:
        return EmbeddingSet(
            embeddings=embeddings,
            timestamps=np.array(stamps, dtype=np.int64),
            positions=np.array(positions, dtype=np.float64).reshape(-1, 2),
        )
    except ValueError as exc:
        raise DatasetFormatError(f"{src}: {exc}", src) from exc


# ── Evaluation ───────────────────────────────────────────────────────────────


def evaluate(
    queries: EmbeddingSet,
    database: EmbeddingSet,
    cfg: EvalConfig | None = None,
    out_dir: Path | str | None = None,
    *,
    rotation_invariance: float | None = None,
) -> EvalReport:
    """Compute every metric; with *out_dir* also write matrices and report."""
    cfg = cfg or EvalConfig()
    dist = distance_matrix(queries, database)
    gt = ground_truth_matrix(queries, database, cfg.boundary)
    curve = pr_curve(dist, gt)
    n_db = len(database)

    recall_n = {n: recall_at_n(dist, gt, n) for n in cfg.n_candidates if n <= n_db}
    skipped = [n for n in cfg.n_candidates if n > n_db]
    if skipped:
        _LOGGER.warning("Skipping Recall@N for N=%s: database holds %d entries", skipped, n_db)

    alternate: dict[float, float] = {}
    if cfg.alternate_boundary is not None:
        alt_gt = ground_truth_matrix(queries, database, cfg.alternate_boundary)
        alt_curve = pr_curve(dist, alt_gt)
        alternate = {p: recall_at_precision(alt_curve, p) for p in cfg.precision_targets}

    point = operating_point(curve, cfg.match_precision)
    threshold = None if point is None else point.threshold
    match_n = min(cfg.match_candidates, n_db)

    files: dict[str, str] = {}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_float_matrix(out / DISTANCE_FILE, dist)
        write_bool_matrix(out / GROUND_TRUTH_FILE, gt)
        write_bool_matrix(out / MATCH_P_FILE, match_matrix_at_threshold(dist, threshold))
        write_bool_matrix(out / MATCH_N_FILE, match_matrix_top_n(dist, match_n))
        files = {
            "distance": DISTANCE_FILE,
            "ground_truth": GROUND_TRUTH_FILE,
            "match_recall_at_p": MATCH_P_FILE,
            "match_recall_at_n": MATCH_N_FILE,
        }

    report = EvalReport(
        n_queries=len(queries),
        n_database=n_db,
        n_localisable=int(gt.any(axis=1).sum()),
        boundary=cfg.boundary,
        pr_curve=tuple(curve),
        recall_at_p={p: recall_at_precision(curve, p) for p in cfg.precision_targets},
        recall_at_n=recall_n,
        f_scores=f_scores(curve),
        match_threshold=threshold,
        match_candidates=match_n,
        alternate_boundary=cfg.alternate_boundary,
        alternate_recall_at_p=alternate,
        rotation_invariance=rotation_invariance,
        files=files,
    )
    if out_dir is not None:
        write_report(report, Path(out_dir) / REPORT_FILE)
    return report


def write_report(report: EvalReport, path: Path | str) -> Path:
    target = Path(path)
    target.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    _LOGGER.info("Wrote evaluation report to %s", target)
    return target


def read_report(path: Path | str) -> EvalReport:
    source = Path(path)
    if not source.is_file():
        raise DatasetError(f"Report not found: {source}", source)
    try:
        return EvalReport.from_dict(json.loads(source.read_text(encoding="utf-8")))
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetFormatError(f"Malformed report {source}: {exc}", source) from exc
