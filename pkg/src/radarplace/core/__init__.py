"""Core domain layer: scans, poses, sequences and projection geometry.

Quick start::

    from radarplace.core import GridSpec, polar_to_cartesian, spin_polar

    frame = polar_to_cartesian(spin_polar(scan, 100), GridSpec())
"""

from radarplace.core.enums import Backbone, Variant
from radarplace.core.geometry import (
    CartesianFrame,
    GridSpec,
    polar_to_cartesian,
    random_spin,
    rotate_frame_quarter_turns,
    spin_polar,
)
from radarplace.core.scan import PolarScan, PoseRecord, RadarSequence, pose_at
from radarplace.core.types import Metres, Radians, Seconds, Timestamp

__all__ = [
    # Enums
    "Backbone",
    "Variant",
    # Types
    "Metres",
    "Radians",
    "Seconds",
    "Timestamp",
    # Domain objects
    "CartesianFrame",
    "GridSpec",
    "PolarScan",
    "PoseRecord",
    "RadarSequence",
    # Operations
    "polar_to_cartesian",
    "pose_at",
    "random_spin",
    "rotate_frame_quarter_turns",
    "spin_polar",
]
