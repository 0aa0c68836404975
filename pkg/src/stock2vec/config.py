"""Run configuration: one JSON file, command-line overrides, a resolved snapshot."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import normalize_order
from .errors import ConfigError, InputFileNotFound
from .pipeline import DEFAULT_DIMS, DEFAULT_EPSILON, DEFAULT_HIGH_DIM
from .sgns import Hyperparams

logger = logging.getLogger(__name__)

RESOLVED_NAME = "config.resolved.json"


@dataclass(frozen=True)
class TargetSpec:
    name: str
    path: Path
    target_column: str
    ticker_column: str = "ticker"
    baseline_columns: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "path": str(self.path),
            "target_column": self.target_column,
            "ticker_column": self.ticker_column,
            "baseline_columns": None if self.baseline_columns is None else list(self.baseline_columns),
        }


@dataclass(frozen=True)
class RunConfig:
    price_csv: Path | None = None
    company_csv: Path | None = None
    alias_csv: Path | None = None
    targets: tuple[TargetSpec, ...] = ()
    out_dir: Path = Path("out")
    order: str = "descending"
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    sweep_dims: tuple[int, ...] = DEFAULT_DIMS
    epsilon: float = DEFAULT_EPSILON
    high_dim: int = DEFAULT_HIGH_DIM
    train_fraction: float = 0.7
    seed: int = 1
    workers: int = 1
    n_trees: int = 100
    importance_repeats: int = 20
    aic_counts_variance: bool = False

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if not self.sweep_dims or any(int(d) < 1 for d in self.sweep_dims):
            raise ConfigError(f"sweep_dims must be positive integers, got {list(self.sweep_dims)}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.high_dim < 1:
            raise ConfigError(f"high_dim must be positive, got {self.high_dim}")
        if self.n_trees < 1 or self.importance_repeats < 1:
            raise ConfigError("n_trees and importance_repeats must be positive")

    @property
    def hp(self) -> Hyperparams:
        """Hyperparameters with the run-level seed and worker count applied."""
        return self.hyperparams.with_(seed=self.seed, workers=self.workers)

    def check_inputs(self, *names: str) -> None:
        """Raise :class:`InputFileNotFound` unless each named path is set and exists."""
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise ConfigError(f"{name} is not set in the config")
            if not Path(path).is_file():
                raise InputFileNotFound(f"{name}: file not found: {path}")

    def check_targets(self) -> None:
        for t in self.targets:
            if not t.path.is_file():
                raise InputFileNotFound(f"target {t.name}: file not found: {t.path}")

    def to_dict(self) -> dict:
        def p(x):
            return None if x is None else str(x)

        return {
            "price_csv": p(self.price_csv),
            "company_csv": p(self.company_csv),
            "alias_csv": p(self.alias_csv),
            "targets": [t.to_dict() for t in self.targets],
            "out_dir": p(self.out_dir),
            "order": self.order,
            "hyperparams": {k: v for k, v in self.hyperparams.to_dict().items() if k not in ("seed", "workers")},
            "sweep_dims": list(self.sweep_dims),
            "epsilon": self.epsilon,
            "high_dim": self.high_dim,
            "train_fraction": self.train_fraction,
            "seed": self.seed,
            "workers": self.workers,
            "n_trees": self.n_trees,
            "importance_repeats": self.importance_repeats,
            "aic_counts_variance": self.aic_counts_variance,
        }

    def write_resolved(self, out_dir=None) -> Path:
        out = Path(out_dir or self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / RESOLVED_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        return path


_KNOWN = set(RunConfig.__dataclass_fields__)


def _as_int(name, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return value


def _as_bool(name, value) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{name} must be true or false, got {value!r}")
    return value


def _resolve(base: Path, value) -> Path | None:
    if value is None:
        return None
    path = Path(value).expanduser()
    return path if path.is_absolute() else base / path


def _targets(raw, base: Path) -> tuple[TargetSpec, ...]:
    if not isinstance(raw, list):
        raise ConfigError("targets must be a list")
    out = []
    for i, t in enumerate(raw):
        if not isinstance(t, dict) or "path" not in t or "target_column" not in t:
            raise ConfigError(f"targets[{i}] needs at least 'path' and 'target_column'")
        cols = t.get("baseline_columns")
        out.append(TargetSpec(
            name=str(t.get("name", t["target_column"])),
            path=_resolve(base, t["path"]),
            target_column=str(t["target_column"]),
            ticker_column=str(t.get("ticker_column", "ticker")),
            baseline_columns=None if cols is None else tuple(str(c) for c in cols),
        ))
    names = [t.name for t in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"target names must be unique, got {names}")
    return tuple(out)


def build_config(raw: dict | None = None, base_dir=None, **overrides) -> RunConfig:
    """Merge ``raw`` (parsed JSON) with ``overrides`` (flags; ``None`` = not given).

    Relative paths inside ``raw`` resolve against ``base_dir``; override paths
    are taken as given.
    """
    raw = dict(raw or {})
    unknown = set(raw) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
            if key == "out_dir":
                raw[key] = str(Path(value).resolve())

    hp_raw = raw.get("hyperparams", {})
    if not isinstance(hp_raw, dict):
        raise ConfigError("hyperparams must be an object")
    bad = set(hp_raw) - set(Hyperparams.__dataclass_fields__)
    if bad:
        raise ConfigError(f"unknown hyperparameter(s): {sorted(bad)}")
    try:
        order = normalize_order(raw.get("order", "descending"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    seed = _as_int("seed", raw.get("seed", 1))
    workers = _as_int("workers", raw.get("workers", 1))
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    if workers < 1:
        raise ConfigError(f"workers must be positive, got {workers}")
    try:
        hp = Hyperparams(**{**hp_raw, "seed": seed, "workers": workers})
        return RunConfig(
            price_csv=_resolve(base, raw.get("price_csv")),
            company_csv=_resolve(base, raw.get("company_csv")),
            alias_csv=_resolve(base, raw.get("alias_csv")),
            targets=_targets(raw.get("targets", []), base),
            out_dir=_resolve(base, raw.get("out_dir", "out")),
            order=order,
            hyperparams=hp,
            sweep_dims=tuple(_as_int("sweep_dims", d) for d in raw.get("sweep_dims", DEFAULT_DIMS)),
            epsilon=float(raw.get("epsilon", DEFAULT_EPSILON)),
            high_dim=_as_int("high_dim", raw.get("high_dim", DEFAULT_HIGH_DIM)),
            train_fraction=float(raw.get("train_fraction", 0.7)),
            seed=seed,
            workers=workers,
            n_trees=_as_int("n_trees", raw.get("n_trees", 100)),
            importance_repeats=_as_int("importance_repeats", raw.get("importance_repeats", 20)),
            aic_counts_variance=_as_bool("aic_counts_variance", raw.get("aic_counts_variance", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path=None, **overrides) -> RunConfig:
    """Read a JSON config (optional) and apply flag overrides."""
    if path is None:
        return build_config({}, Path.cwd(), **overrides)
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return build_config(raw, path.resolve().parent, **overrides)
