"""Dataset layout, loading and the synthetic radar world."""

from radarplace.data.ingest import load_sequence, save_sequence
from radarplace.data.simworld import (
    SimConfig,
    TraversalSpec,
    World,
    generate_traversal,
    generate_world,
    render_scan,
)

__all__ = [
    "SimConfig",
    "TraversalSpec",
    "World",
    "generate_traversal",
    "generate_world",
    "load_sequence",
    "render_scan",
    "save_sequence",
]
