"""Scalar type aliases and unit/angle helpers.

Conventions:
    Timestamps are integer microseconds since the epoch.
    Bearings are radians measured clockwise from vehicle-forward.
    Yaw is the world-frame heading, counter-clockwise from the +x axis.
"""

from __future__ import annotations

import math

type Timestamp = int  # microseconds
type Seconds = float
type Metres = float
type Radians = float

US_PER_SECOND = 1_000_000


def seconds_to_us(seconds: Seconds) -> int:
    """Convert seconds to integer microseconds (rounded)."""
    return int(round(seconds * US_PER_SECOND))


def us_to_seconds(us: int) -> Seconds:
    return us / US_PER_SECOND


def wrap_angle(angle: Radians) -> Radians:
    """Wrap an angle into ``[-pi, pi)``."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def shortest_arc(start: Radians, end: Radians) -> Radians:
    """Signed smallest rotation taking *start* onto *end*."""
    return wrap_angle(end - start)
