"""Process-level switches: deterministic torch kernels and headless Qt."""

from __future__ import annotations

import logging
import os
import sys
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from PyQt6.QtGui import QGuiApplication

_LOGGER = logging.getLogger(__name__)

_determinism_enabled = False


def is_headless() -> bool:
    return (
        sys.platform.startswith("linux")
        and "DISPLAY" not in os.environ
        and "WAYLAND_DISPLAY" not in os.environ
    )


def enable_determinism() -> None:
    """Single-threaded, deterministic torch kernels (idempotent)."""
    global _determinism_enabled
    if _determinism_enabled:
        return
    import torch

    torch.use_deterministic_algorithms(True, warn_only=True)
    torch.backends.cudnn.benchmark = False
    torch.set_num_threads(1)
    _determinism_enabled = True
    _LOGGER.debug("Deterministic torch kernels enabled")


def ensure_gui_application() -> QGuiApplication:
    """Return the running Qt application, creating an offscreen one if needed."""
    from PyQt6.QtGui import QGuiApplication

    app = QGuiApplication.instance()
    if app is not None:
        assert isinstance(app, QGuiApplication)
        return app
    if is_headless() and "QT_QPA_PLATFORM" not in os.environ:
        os.environ["QT_QPA_PLATFORM"] = "offscreen"
        _LOGGER.debug("No display found; using the offscreen Qt platform")
    return QGuiApplication([sys.argv[0] if sys.argv else "radarplace"])
