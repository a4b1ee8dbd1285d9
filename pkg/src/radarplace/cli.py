"""Command-line surface: ``simgen``, ``train``, ``embed``, ``eval`` and ``plot``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from enum import IntEnum
from pathlib import Path
from typing import Final

import numpy as np

from radarplace import __version__
from radarplace.config import RunSettings, load_settings
from radarplace.errors import (
    BatchConstructionError,
    CheckpointIntegrityError,
    ConfigError,
    ConfigMismatchError,
    DatasetError,
    FrameGapError,
    PoseRangeError,
    RadarPlaceError,
    TrainingDivergedError,
    UndefinedRecallError,
)

_LOGGER = logging.getLogger(__name__)

EFFECTIVE_CONFIG: Final = "effective_config.txt"
EMBEDDING_INFO: Final = "embedding_info.json"


class ExitCode(IntEnum):
    OK = 0
    UNEXPECTED = 1
    USAGE = 2
    BAD_INPUT = 3
    RUN_FAILED = 4


_EPILOG: Final = """\
exit codes:
  0  success
  1  unexpected internal error
  2  usage or configuration error (unknown key, bad value, config mismatch)
  3  missing or malformed input data, embeddings, report or checkpoint
  4  run failure (batch construction, divergence, undefined metric, I/O)
"""


def exit_code_for(exc: BaseException) -> ExitCode:
    """Map an exception to the documented exit code."""
    if isinstance(exc, ConfigError | ConfigMismatchError):
        return ExitCode.USAGE
    if isinstance(exc, DatasetError | CheckpointIntegrityError | PoseRangeError):
        return ExitCode.BAD_INPUT
    if isinstance(
        exc,
        BatchConstructionError | FrameGapError | TrainingDivergedError | UndefinedRecallError | OSError,
    ):
        return ExitCode.RUN_FAILED
    return ExitCode.UNEXPECTED


# ── Parser ───────────────────────────────────────────────────────────────────


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat 'key = value' configuration file")
    p.add_argument(
        "-s",
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radarplace",
        description="Unsupervised place recognition from radar scan sequences.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_, description=help_, epilog=_EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common(p)
        return p

    add("simgen", "render a synthetic traversal (sim.* keys) into a dataset directory")

    p = add("train", "train an embedder on one or more dataset directories")
    p.add_argument("sequences", nargs="*", type=Path, help="dataset directories (else train.sequences)")
    p.add_argument("--resume", type=Path, metavar="CKPT", help="continue from a checkpoint")
    p.add_argument("--workers", type=int, default=1, help="scan-loading threads")

    p = add("embed", "embed every scan of a dataset with a trained checkpoint")
    p.add_argument("sequence", type=Path, help="dataset directory")
    p.add_argument("--checkpoint", type=Path, required=True, metavar="CKPT")
    p.add_argument(
        "--query",
        action="store_true",
        help="treat the sequence as queries (spun when eval.query_spin is true)",
    )
    p.add_argument("--workers", type=int, default=1, help="scan-loading threads")

    p = add("eval", "evaluate query embeddings against a database")
    p.add_argument("--queries", type=Path, required=True, help="embed output for the queries")
    p.add_argument("--database", type=Path, required=True, help="embed output for the database")

    p = add("plot", "render PNG matrices and curves from one or more evaluation directories")
    p.add_argument("report_dirs", nargs="+", type=Path, metavar="REPORT_DIR", help="eval output directories")
    p.add_argument(
        "--label",
        dest="labels",
        action="append",
        default=[],
        help="legend label per REPORT_DIR, in order (default: directory names)",
    )
    return parser


# ── Commands ─────────────────────────────────────────────────────────────────


def _settings(args: argparse.Namespace, base: dict[str, str] | None = None) -> RunSettings:
    settings = load_settings(args.config, args.overrides, base=base)
    args.out.mkdir(parents=True, exist_ok=True)
    settings.write(args.out / EFFECTIVE_CONFIG)
    return settings


def _cmd_simgen(args: argparse.Namespace) -> int:
    from radarplace.data.simworld import generate_from_spec

    settings = _settings(args)
    seq = generate_from_spec(settings.sim.traversal, settings.sim.sensor, args.out)
    print(f"{len(seq)} scans written to {args.out}")
    return ExitCode.OK


def _cmd_train(args: argparse.Namespace) -> int:
    from radarplace.data.ingest import load_sequence
    from radarplace.training.checkpoint import load_checkpoint
    from radarplace.training.trainer import resume, train

    base = load_checkpoint(args.resume).settings if args.resume else None
    if args.sequences:
        # recorded in the effective-config snapshot
        joined = ", ".join(str(p) for p in args.sequences)
        args.overrides = [*args.overrides, f"train.sequences={joined}"]
    settings = _settings(args, base)
    paths = [Path(p) for p in settings.sequences]
    if not paths:
        raise ConfigError("No training sequences given (positional or train.sequences)", "train.sequences")
    pool = [load_sequence(p, workers=args.workers) for p in paths]
    if args.resume:
        result = resume(args.resume, pool, args.out, cfg=settings.train)
    else:
        result = train(settings.train, pool, args.out)
    print(f"trained {result.final_step} steps; checkpoint {result.checkpoint}")
    return ExitCode.OK


def _cmd_embed(args: argparse.Namespace) -> int:
    from radarplace.data.ingest import load_sequence
    from radarplace.evaluation.service import (
        build_embedding_set,
        rotation_invariance_rate,
        save_embedding_set,
    )
    from radarplace.training.trainer import load_model

    settings = _settings(args)
    model, train_cfg = load_model(args.checkpoint)
    seq = load_sequence(args.sequence, workers=args.workers)
    spun = bool(args.query and settings.eval.query_spin)
    spin_rng = np.random.default_rng(settings.eval.spin_seed) if spun else None
    es = build_embedding_set(model, seq, train_cfg.grid, spin_rng=spin_rng)
    save_embedding_set(es, args.out)

    audit = None
    if settings.eval.rotation_audit:
        audit = rotation_invariance_rate(
            model, seq, train_cfg.grid, np.random.default_rng(settings.eval.spin_seed + 1)
        )
        _LOGGER.info("Rotation invariance rate %.4f", audit)
    info = {
        "sequence": str(args.sequence),
        "checkpoint": str(args.checkpoint),
        "spun": spun,
        "rotation_invariance": audit,
    }
    (args.out / EMBEDDING_INFO).write_text(json.dumps(info, indent=2) + "\n", encoding="utf-8")
    print(f"{len(es)} embeddings written to {args.out}")
    return ExitCode.OK


def _read_audit(embed_dir: Path) -> float | None:
    path = embed_dir / EMBEDDING_INFO
    if not path.is_file():
        return None
    try:
        value = json.loads(path.read_text(encoding="utf-8")).get("rotation_invariance")
    except (ValueError, AttributeError) as exc:
        raise DatasetError(f"Malformed {path}: {exc}", path) from exc
    return None if value is None else float(value)


def _cmd_eval(args: argparse.Namespace) -> int:
    from radarplace.evaluation.service import evaluate, load_embedding_set

    settings = _settings(args)
    queries = load_embedding_set(args.queries)
    database = load_embedding_set(args.database)
    report = evaluate(
        queries,
        database,
        settings.eval,
        args.out,
        rotation_invariance=_read_audit(args.queries),
    )
    recall = ", ".join(f"R@{n}={v:.4f}" for n, v in sorted(report.recall_at_n.items()))
    print(f"{recall}; F1={report.f_scores.f1:.4f}; report in {args.out}")
    return ExitCode.OK


def _cmd_plot(args: argparse.Namespace) -> int:
    from radarplace.evaluation.render import render_all, render_comparison
    from radarplace.evaluation.service import REPORT_FILE, read_report

    _settings(args)
    dirs: list[Path] = args.report_dirs
    labels: list[str] = args.labels or [d.name for d in dirs]
    if len(labels) != len(dirs):
        raise ConfigError(f"Got {len(labels)} --label values for {len(dirs)} report directories")
    if len(set(labels)) != len(labels):
        raise ConfigError(f"Report labels must be distinct: {labels!r}")

    reports = [(label, read_report(d / REPORT_FILE)) for label, d in zip(labels, dirs, strict=True)]
    if len(dirs) == 1:
        written = render_all(reports[0][1], dirs[0], args.out)
    else:
        written = []
        for (label, report), d in zip(reports, dirs, strict=True):
            written += render_all(report, d, args.out / label)
        written += render_comparison(reports, args.out)
    print(f"{len(written)} images written to {args.out}")
    return ExitCode.OK


_COMMANDS: Final[dict[str, Callable[[argparse.Namespace], int]]] = {
    "simgen": _cmd_simgen,
    "train": _cmd_train,
    "embed": _cmd_embed,
    "eval": _cmd_eval,
    "plot": _cmd_plot,
}


def run_command(command: str, args: argparse.Namespace) -> int:
    """Run one command, mapping failures to exit codes with a one-line diagnostic."""
    try:
        return int(_COMMANDS[command](args))
    except (RadarPlaceError, OSError) as exc:
        code = exit_code_for(exc)
        print(f"radarplace {command}: error: {exc}", file=sys.stderr)
        _LOGGER.debug("Command %s failed", command, exc_info=True)
        return int(code)
    except Exception as exc:
        print(f"radarplace {command}: unexpected error: {exc!r}", file=sys.stderr)
        _LOGGER.debug("Command %s crashed", command, exc_info=True)
        return int(ExitCode.UNEXPECTED)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return run_command(args.command, args)
