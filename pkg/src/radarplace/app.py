"""Application entry point."""

from __future__ import annotations

from collections.abc import Sequence

from radarplace.cli import run


def main(argv: Sequence[str] | None = None) -> int:
    """Run the radarplace command line and return its exit code."""
    return run(argv)


if __name__ == "__main__":
    raise SystemExit(main())
