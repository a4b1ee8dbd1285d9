"""PNG output for evaluation matrices and curves.

Matrix images have one pixel per cell. Distances map linearly from the
matrix minimum (black) to its maximum (white); a constant matrix is black.
Ground truth is white where true. Match images colour true positives green
and false positives red over black, with unmatched true cells dark grey.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING, Final

import numpy as np
import numpy.typing as npt

from radarplace.evaluation.matrix_io import read_bool_matrix, read_float_matrix
from radarplace.evaluation.models import EvalReport
from radarplace.runtime import ensure_gui_application

if TYPE_CHECKING:
    from PyQt6.QtCore import QRectF
    from PyQt6.QtGui import QImage, QPainter

_LOGGER = logging.getLogger(__name__)

TRUE_POSITIVE: Final = (0, 200, 0)
FALSE_POSITIVE: Final = (220, 0, 0)
MISSED: Final = (64, 64, 64)
BACKGROUND: Final = (0, 0, 0)
SERIES_COLOURS: Final = (
    (30, 90, 200),
    (230, 120, 20),
    (40, 160, 60),
    (200, 40, 40),
    (130, 80, 180),
    (120, 120, 120),
)

COMPARE_RECALL_AT_P: Final = "compare_recall_at_p.png"
COMPARE_RECALL_AT_N: Final = "compare_recall_at_n.png"

_PLOT_W: Final = 480
_PLOT_H: Final = 360
_MARGIN: Final = 44


# ── Matrix images ────────────────────────────────────────────────────────────


def _to_qimage(rgb: npt.NDArray[np.uint8]) -> QImage:
    from PyQt6.QtGui import QImage

    ensure_gui_application()
    h, w, _ = rgb.shape
    data = np.ascontiguousarray(rgb).tobytes()
    # copy() detaches the image from the borrowed buffer
    return QImage(data, w, h, 3 * w, QImage.Format.Format_RGB888).copy()


def distance_rgb(dist: npt.ArrayLike) -> npt.NDArray[np.uint8]:
    d = np.asarray(dist, dtype=np.float64)
    lo, hi = float(d.min()), float(d.max())
    scaled = np.zeros_like(d) if hi <= lo else (d - lo) / (hi - lo)
    grey = np.rint(scaled * 255.0).astype(np.uint8)
    return np.repeat(grey[:, :, None], 3, axis=2)


def ground_truth_rgb(gt: npt.ArrayLike) -> npt.NDArray[np.uint8]:
    grey = np.where(np.asarray(gt, dtype=bool), 255, 0).astype(np.uint8)
    return np.repeat(grey[:, :, None], 3, axis=2)


def match_rgb(predicted: npt.ArrayLike, gt: npt.ArrayLike) -> npt.NDArray[np.uint8]:
    pred = np.asarray(predicted, dtype=bool)
    truth = np.asarray(gt, dtype=bool)
    if pred.shape != truth.shape:
        raise ValueError(f"Shape mismatch: {pred.shape!r} vs {truth.shape!r}")
    rgb = np.empty((*pred.shape, 3), dtype=np.uint8)
    rgb[:] = BACKGROUND
    rgb[truth & ~pred] = MISSED
    rgb[pred & truth] = TRUE_POSITIVE
    rgb[pred & ~truth] = FALSE_POSITIVE
    return rgb


def _save(image: QImage, path: Path) -> Path:
    if not image.save(str(path), "PNG"):
        raise OSError(f"Could not write image {path}")
    return path


def render_matrices(
    report: EvalReport,
    report_dir: Path | str,
    out_dir: Path | str | None = None,
) -> list[Path]:
    """Write distance, ground-truth and both match-matrix PNGs."""
    src = Path(report_dir)
    out = Path(out_dir) if out_dir is not None else src
    out.mkdir(parents=True, exist_ok=True)
    missing = {"distance", "ground_truth", "match_recall_at_p", "match_recall_at_n"} - set(report.files)
    if missing:
        raise ValueError(f"Report lacks matrix files: {sorted(missing)!r}")

    dist = read_float_matrix(src / report.files["distance"])
    gt = read_bool_matrix(src / report.files["ground_truth"])
    images = {
        "distance": distance_rgb(dist),
        "ground_truth": ground_truth_rgb(gt),
        "match_recall_at_p": match_rgb(read_bool_matrix(src / report.files["match_recall_at_p"]), gt),
        "match_recall_at_n": match_rgb(read_bool_matrix(src / report.files["match_recall_at_n"]), gt),
    }
    written = [_save(_to_qimage(rgb), out / f"{name}.png") for name, rgb in images.items()]
    _LOGGER.info("Wrote %d matrix images to %s", len(written), out)
    return written


# ── Plots ────────────────────────────────────────────────────────────────────


def render_pr_curve(report: EvalReport, path: Path | str) -> Path:
    """Precision (y) against recall (x), both on ``[0, 1]``."""
    from PyQt6.QtCore import QPointF, QRectF, Qt
    from PyQt6.QtGui import QColor, QImage, QPainter, QPainterPath, QPen

    ensure_gui_application()
    image = QImage(_PLOT_W, _PLOT_H, QImage.Format.Format_RGB32)
    image.fill(QColor(255, 255, 255))
    rect = QRectF(_MARGIN, _MARGIN / 2, _PLOT_W - 1.5 * _MARGIN, _PLOT_H - 1.5 * _MARGIN)

    p = QPainter(image)
    try:
        p.setRenderHint(QPainter.RenderHint.Antialiasing)
        _draw_axes(p, rect, "recall", "precision")
        if report.pr_curve:
            path_ = QPainterPath()
            for i, pt in enumerate(report.pr_curve):
                xy = QPointF(
                    rect.left() + pt.recall * rect.width(),
                    rect.bottom() - pt.precision * rect.height(),
                )
                if i == 0:
                    path_.moveTo(xy)
                else:
                    path_.lineTo(xy)
            p.setPen(QPen(QColor(30, 90, 200), 1.5))
            p.setBrush(Qt.BrushStyle.NoBrush)
            p.drawPath(path_)
    finally:
        p.end()
    return _save(image, Path(path))


def render_recall_at_n(report: EvalReport, path: Path | str) -> Path:
    """Bar chart of Recall@N for every evaluated N."""
    from PyQt6.QtCore import QRectF, Qt
    from PyQt6.QtGui import QColor, QImage, QPainter

    ensure_gui_application()
    image = QImage(_PLOT_W, _PLOT_H, QImage.Format.Format_RGB32)
    image.fill(QColor(255, 255, 255))
    rect = QRectF(_MARGIN, _MARGIN / 2, _PLOT_W - 1.5 * _MARGIN, _PLOT_H - 1.5 * _MARGIN)

    p = QPainter(image)
    try:
        _draw_axes(p, rect, "N", "recall")
        items = sorted(report.recall_at_n.items())
        if items:
            slot = rect.width() / len(items)
            p.setPen(Qt.PenStyle.NoPen)
            for i, (n, value) in enumerate(items):
                h = value * rect.height()
                bar = QRectF(rect.left() + i * slot + slot * 0.2, rect.bottom() - h, slot * 0.6, h)
                p.fillRect(bar, QColor(30, 90, 200))
                p.setPen(QColor(0, 0, 0))
                p.drawText(
                    QRectF(rect.left() + i * slot, rect.bottom() + 2, slot, 14),
                    Qt.AlignmentFlag.AlignHCenter | Qt.AlignmentFlag.AlignTop,
                    str(n),
                )
                p.setPen(Qt.PenStyle.NoPen)
    finally:
        p.end()
    return _save(image, Path(path))


def _draw_axes(p: QPainter, rect: QRectF, x_label: str, y_label: str) -> None:
    from PyQt6.QtCore import QPointF, QRectF, Qt
    from PyQt6.QtGui import QColor, QPen

    p.setPen(QPen(QColor(200, 200, 200), 0.5, Qt.PenStyle.DotLine))
    for frac in (0.25, 0.5, 0.75, 1.0):
        y = rect.bottom() - frac * rect.height()
        p.drawLine(QPointF(rect.left(), y), QPointF(rect.right(), y))
    p.setPen(QPen(QColor(0, 0, 0), 1.0))
    p.drawLine(rect.bottomLeft(), rect.bottomRight())
    p.drawLine(rect.bottomLeft(), rect.topLeft())
    for frac in (0.0, 0.5, 1.0):
        y = rect.bottom() - frac * rect.height()
        p.drawText(
            QRectF(0, y - 7, rect.left() - 4, 14),
            Qt.AlignmentFlag.AlignRight | Qt.AlignmentFlag.AlignVCenter,
            f"{frac:.1f}",
        )
    p.drawText(
        QRectF(rect.left(), rect.bottom() + 14, rect.width(), 14),
        Qt.AlignmentFlag.AlignHCenter,
        x_label,
    )
    p.drawText(
        QRectF(0, 0, rect.left() + 40, rect.top()),
        Qt.AlignmentFlag.AlignLeft | Qt.AlignmentFlag.AlignVCenter,
        y_label,
    )


# ── Comparison across runs ───────────────────────────────────────────────────


def _grouped_bars(
    groups: Sequence[str],
    series: Sequence[tuple[str, Sequence[float | None]]],
    x_label: str,
    y_label: str,
    path: Path,
) -> Path:
    """One cluster per group, one bar per series; ``None`` leaves a gap."""
    from PyQt6.QtCore import QRectF, Qt
    from PyQt6.QtGui import QColor, QImage, QPainter

    ensure_gui_application()
    image = QImage(_PLOT_W, _PLOT_H, QImage.Format.Format_RGB32)
    image.fill(QColor(255, 255, 255))
    rect = QRectF(_MARGIN, _MARGIN / 2, _PLOT_W - 1.5 * _MARGIN, _PLOT_H - 1.5 * _MARGIN)

    p = QPainter(image)
    try:
        _draw_axes(p, rect, x_label, y_label)
        if groups and series:
            slot = rect.width() / len(groups)
            bar_w = slot * 0.8 / len(series)
            for g, name in enumerate(groups):
                left = rect.left() + g * slot + slot * 0.1
                for s, (_, values) in enumerate(series):
                    value = values[g]
                    if value is None:
                        continue
                    h = value * rect.height()
                    colour = QColor(*SERIES_COLOURS[s % len(SERIES_COLOURS)])
                    p.fillRect(QRectF(left + s * bar_w, rect.bottom() - h, bar_w, h), colour)
                p.setPen(QColor(0, 0, 0))
                p.drawText(
                    QRectF(rect.left() + g * slot, rect.bottom() + 2, slot, 14),
                    Qt.AlignmentFlag.AlignHCenter | Qt.AlignmentFlag.AlignTop,
                    name,
                )
            # legend along the top margin, right-aligned
            x = rect.right()
            for s in reversed(range(len(series))):
                label = series[s][0]
                width = 10 + 4 + 7 * len(label)
                x -= width + 8
                colour = QColor(*SERIES_COLOURS[s % len(SERIES_COLOURS)])
                p.fillRect(QRectF(x, 6, 10, 10), colour)
                p.setPen(QColor(0, 0, 0))
                p.drawText(
                    QRectF(x + 14, 2, width - 14, 18),
                    Qt.AlignmentFlag.AlignLeft | Qt.AlignmentFlag.AlignVCenter,
                    label,
                )
    finally:
        p.end()
    return _save(image, path)


def render_comparison(
    reports: Sequence[tuple[str, EvalReport]],
    out_dir: Path | str,
) -> list[Path]:
    """Grouped Recall@P and Recall@N bar charts, one series per labelled report.

    Groups are the union of precision targets (and of N) over all reports;
    a report without a value for a group gets no bar there.
    """
    if not reports:
        raise ValueError("Need at least one report to compare")
    labels = [label for label, _ in reports]
    if len(set(labels)) != len(labels):
        raise ValueError(f"Duplicate report labels: {labels!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    targets = sorted({t for _, r in reports for t in r.recall_at_p})
    ns = sorted({n for _, r in reports for n in r.recall_at_n})
    by_p = [(label, [r.recall_at_p.get(t) for t in targets]) for label, r in reports]
    by_n = [(label, [r.recall_at_n.get(n) for n in ns]) for label, r in reports]
    written = [
        _grouped_bars(
            [f"{t:g}%" for t in targets], by_p, "precision target", "recall", out / COMPARE_RECALL_AT_P
        ),
        _grouped_bars([str(n) for n in ns], by_n, "N", "recall", out / COMPARE_RECALL_AT_N),
    ]
    _LOGGER.info("Compared %d reports in %s", len(reports), out)
    return written


def render_all(report: EvalReport, report_dir: Path | str, out_dir: Path | str | None = None) -> list[Path]:
    out = Path(out_dir) if out_dir is not None else Path(report_dir)
    written = render_matrices(report, report_dir, out)
    written.append(render_pr_curve(report, out / "pr_curve.png"))
    written.append(render_recall_at_n(report, out / "recall_at_n.png"))
    return written
