"""Run settings and the flat ``key = value`` configuration format.

Example::

    # ablation run
    variant.name = vTR2
    train.learning_rate = 3e-4
    eval.precision_targets = 95, 98, 99

Blank lines and ``#`` comments are ignored. Every key belongs to one of the
sections ``variant``, ``grid``, ``embedder``, ``loss``, ``train``, ``eval``
and ``sim``; unknown keys are rejected. ``embedder.input_side`` is not a
key: it always follows ``grid.side_pixels``.
"""

from __future__ import annotations

import hashlib
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, Final

from radarplace.core.enums import Backbone, Variant
from radarplace.core.geometry import GridSpec
from radarplace.data.simworld import PathKind, SimConfig, TraversalSpec
from radarplace.errors import ConfigError
from radarplace.evaluation.models import EvalConfig
from radarplace.training.embedder import EmbedderConfig
from radarplace.training.loss import LossConfig
from radarplace.training.sampling import VariantConfig
from radarplace.training.trainer import TrainConfig

# Keys that may change between a checkpoint and its resumed run.
_UNFINGERPRINTED: Final = frozenset({"train.epochs", "train.checkpoint_every", "train.log_every"})
_TRAIN_SECTIONS: Final = ("variant.", "grid.", "embedder.", "loss.", "train.")


@dataclass(frozen=True, slots=True)
class SimSettings:
    sensor: SimConfig = field(default_factory=SimConfig)
    traversal: TraversalSpec = field(default_factory=TraversalSpec)


@dataclass(frozen=True, slots=True)
class RunSettings:
    """Every configurable value of a run."""

    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    sim: SimSettings = field(default_factory=SimSettings)
    sequences: tuple[str, ...] = ()

    def to_items(self) -> dict[str, str]:
        return {k.name: k.kind.format(getattr(_target(self, k.target), k.field)) for k in _KEYS}

    def to_text(self) -> str:
        """Effective configuration, every key, sorted."""
        lines = [f"{name} = {value}" for name, value in sorted(self.to_items().items())]
        return "\n".join(lines) + "\n"

    def write(self, path: Path | str) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.to_text(), encoding="utf-8")
        return target

    def fingerprint(self) -> str:
        return train_fingerprint(self.train)

    @classmethod
    def from_items(cls, items: Mapping[str, str]) -> RunSettings:
        """Build settings from (possibly partial) items over the defaults."""
        merged = dict(_DEFAULT_ITEMS)
        for name, value in items.items():
            if name not in _KEY_INDEX:
                raise ConfigError(f"Unknown configuration key {name!r}", name)
            merged[name] = value
        return _build(merged)


# ── Value kinds ──────────────────────────────────────────────────────────────


@dataclass(frozen=True, slots=True)
class _Kind:
    parse: Callable[[str], Any]
    format: Callable[[Any], str]


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"true", "yes", "on", "1"}:
        return True
    if lowered in {"false", "no", "off", "0"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _optional(inner: _Kind, word: str) -> _Kind:
    return _Kind(
        parse=lambda t: None if t.strip().lower() == word else inner.parse(t),
        format=lambda v: word if v is None else inner.format(v),
    )


def _items_of(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _enum(cls: type[StrEnum]) -> _Kind:
    return _Kind(parse=lambda t: cls(t.strip()), format=lambda v: str(v.value))


_INT = _Kind(parse=lambda t: int(t.strip()), format=str)
_FLOAT = _Kind(parse=_parse_float, format=lambda v: repr(float(v)))
_BOOL = _Kind(parse=_parse_bool, format=lambda v: "true" if v else "false")
_INTS = _Kind(
    parse=lambda t: tuple(int(p) for p in _items_of(t)),
    format=lambda v: ", ".join(str(x) for x in v),
)
_FLOATS = _Kind(
    parse=lambda t: tuple(_parse_float(p) for p in _items_of(t)),
    format=lambda v: ", ".join(repr(float(x)) for x in v),
)
_STRS = _Kind(parse=lambda t: tuple(_items_of(t)), format=lambda v: ", ".join(v))
_VARIANT = _Kind(parse=Variant.parse, format=lambda v: str(v.value))


@dataclass(frozen=True, slots=True)
class _Key:
    name: str
    target: str
    field: str
    kind: _Kind


_KEYS: Final[tuple[_Key, ...]] = (
    _Key("variant.name", "variant", "variant", _VARIANT),
    _Key("variant.positive_offset", "variant", "positive_offset", _FLOAT),
    _Key("variant.negative_offset", "variant", "negative_offset", _FLOAT),
    _Key("variant.negative_aug_offset", "variant", "negative_aug_offset", _FLOAT),
    _Key("variant.time_tolerance", "variant", "time_tolerance", _FLOAT),
    _Key("variant.pairs_per_batch", "variant", "pairs_per_batch", _INT),
    _Key("grid.side_pixels", "grid", "side_pixels", _INT),
    _Key("grid.metres_per_pixel", "grid", "metres_per_pixel", _FLOAT),
    _Key("embedder.backbone", "embedder", "backbone", _enum(Backbone)),
    _Key("embedder.embedding_dim", "embedder", "embedding_dim", _INT),
    _Key("embedder.pretrained", "embedder", "pretrained", _BOOL),
    _Key("loss.temperature", "loss", "temperature", _FLOAT),
    _Key("train.learning_rate", "train", "learning_rate", _FLOAT),
    _Key("train.epochs", "train", "epochs", _INT),
    _Key("train.seed", "train", "seed", _INT),
    _Key("train.steps_per_epoch", "train", "steps_per_epoch", _optional(_INT, "auto")),
    _Key("train.checkpoint_every", "train", "checkpoint_every", _INT),
    _Key("train.log_every", "train", "log_every", _INT),
    _Key("train.sequences", "run", "sequences", _STRS),
    _Key("eval.boundary", "eval", "boundary", _FLOAT),
    _Key("eval.alternate_boundary", "eval", "alternate_boundary", _optional(_FLOAT, "none")),
    _Key("eval.n_candidates", "eval", "n_candidates", _INTS),
    _Key("eval.precision_targets", "eval", "precision_targets", _FLOATS),
    _Key("eval.match_precision", "eval", "match_precision", _FLOAT),
    _Key("eval.match_candidates", "eval", "match_candidates", _INT),
    _Key("eval.query_spin", "eval", "query_spin", _BOOL),
    _Key("eval.spin_seed", "eval", "spin_seed", _INT),
    _Key("eval.rotation_audit", "eval", "rotation_audit", _BOOL),
    _Key("sim.azimuths", "sensor", "azimuths", _INT),
    _Key("sim.range_bins", "sensor", "range_bins", _INT),
    _Key("sim.range_resolution", "sensor", "range_resolution", _FLOAT),
    _Key("sim.scan_rate", "sensor", "scan_rate", _FLOAT),
    _Key("sim.speckle_noise_sigma", "sensor", "speckle_noise_sigma", _FLOAT),
    _Key("sim.beam_width", "sensor", "beam_width", _optional(_FLOAT, "auto")),
    _Key("sim.seed", "sensor", "seed", _INT),
    _Key("sim.world_seed", "traversal", "world_seed", _INT),
    _Key("sim.n_scatterers", "traversal", "n_scatterers", _INT),
    _Key("sim.extent", "traversal", "extent", _FLOAT),
    _Key("sim.speed", "traversal", "speed", _FLOAT),
    _Key("sim.path", "traversal", "path", _enum(PathKind)),
    _Key("sim.loop_radius", "traversal", "loop_radius", _FLOAT),
    _Key("sim.loop_vertices", "traversal", "loop_vertices", _INT),
    _Key("sim.laps", "traversal", "laps", _INT),
    _Key("sim.path_length", "traversal", "path_length", _FLOAT),
    _Key("sim.reverse", "traversal", "reverse", _BOOL),
)
_KEY_INDEX: Final = {k.name: k for k in _KEYS}


def known_keys() -> list[str]:
    return sorted(_KEY_INDEX)


def _target(settings: RunSettings, target: str) -> Any:
    match target:
        case "variant":
            return settings.train.variant
        case "grid":
            return settings.train.grid
        case "embedder":
            return settings.train.embedder
        case "loss":
            return settings.train.loss
        case "train":
            return settings.train
        case "eval":
            return settings.eval
        case "sensor":
            return settings.sim.sensor
        case "traversal":
            return settings.sim.traversal
        case "run":
            return settings
    raise ValueError(f"Unknown settings target {target!r}")


def _build(items: Mapping[str, str]) -> RunSettings:
    groups: dict[str, dict[str, Any]] = {}
    for name, text in items.items():
        key = _KEY_INDEX[name]
        try:
            value = key.kind.parse(text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"Invalid value for {name}: {text!r} ({exc})", name) from None
        groups.setdefault(key.target, {})[key.field] = value

    def make(target: str, factory: Callable[..., Any], **extra: Any) -> Any:
        try:
            return factory(**groups.get(target, {}), **extra)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"Invalid {target} settings: {exc}", target) from None

    grid = make("grid", GridSpec)
    train = make(
        "train",
        TrainConfig,
        variant=make("variant", VariantConfig),
        embedder=make("embedder", EmbedderConfig, input_side=grid.side_pixels),
        loss=make("loss", LossConfig),
        grid=grid,
    )
    return RunSettings(
        train=train,
        eval=make("eval", EvalConfig),
        sim=SimSettings(
            sensor=make("sensor", SimConfig),
            traversal=make("traversal", TraversalSpec),
        ),
        **groups.get("run", {}),
    )


_DEFAULT_ITEMS: Final[dict[str, str]] = RunSettings().to_items()


# ── Parsing ──────────────────────────────────────────────────────────────────


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; keys are validated, values are not."""
    items: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        name = name.strip()
        if not sep or not name:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got {raw.strip()!r}")
        if name not in _KEY_INDEX:
            raise ConfigError(f"{source}:{line_no}: unknown configuration key {name!r}", name)
        if name in items:
            raise ConfigError(f"{source}:{line_no}: duplicate key {name!r}", name)
        items[name] = value.strip()
    return items


def parse_overrides(overrides: Iterable[str]) -> dict[str, str]:
    """``KEY=VALUE`` strings from the command line."""
    items: dict[str, str] = {}
    for entry in overrides:
        name, sep, value = entry.partition("=")
        name = name.strip()
        if not sep or not name:
            raise ConfigError(f"Override must look like KEY=VALUE: {entry!r}")
        if name not in _KEY_INDEX:
            raise ConfigError(f"Unknown configuration key {name!r}", name)
        items[name] = value.strip()
    return items


def load_settings(
    path: Path | str | None = None,
    overrides: Iterable[str] = (),
    *,
    base: Mapping[str, str] | None = None,
) -> RunSettings:
    """Defaults, then *base*, then the config file at *path*, then *overrides*."""
    items: dict[str, str] = dict(base or {})
    if path is not None:
        source = Path(path)
        if not source.is_file():
            raise ConfigError(f"Config file not found: {source}")
        items.update(parse_config_text(source.read_text(encoding="utf-8"), str(source)))
    items.update(parse_overrides(overrides))
    return RunSettings.from_items(items)


# ── Training subset ──────────────────────────────────────────────────────────


def train_items(cfg: TrainConfig) -> dict[str, str]:
    """Items of the ``variant``/``grid``/``embedder``/``loss``/``train`` keys."""
    items = RunSettings(train=cfg).to_items()
    return {
        k: v for k, v in items.items() if k.startswith(_TRAIN_SECTIONS) and k != "train.sequences"
    }


def train_fingerprint(cfg: TrainConfig) -> str:
    """SHA-256 over the keys that shape the model and its sampling."""
    h = hashlib.sha256(usedforsecurity=False)
    for name, value in sorted(train_items(cfg).items()):
        if name in _UNFINGERPRINTED:
            continue
        h.update(f"{name}={value}\n".encode())
    return h.hexdigest()


def train_config_from_items(items: Mapping[str, str]) -> TrainConfig:
    """Rebuild a :class:`TrainConfig` from stored training items."""
    return RunSettings.from_items(
        {k: v for k, v in items.items() if k.startswith(_TRAIN_SECTIONS)}
    ).train
