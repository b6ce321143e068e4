"""Run configuration files.

A run config is one flat YAML mapping holding the model description (the
same keys a model's config_dict emits) plus the simulation keys n_steps
and ic_seed. Anything nested or non-scalar is rejected up front so a
config file can never smuggle structure the models don't expect.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .errors import DataFormatError
from .models import build_model
from .models.base import DecomposableModel

RUN_KEYS = ("n_steps", "ic_seed")

_SCALAR = (str, int, float, bool, type(None))


@dataclass(frozen=True)
class RunConfig:
    model_config: dict
    n_steps: int
    ic_seed: int

    def build(self) -> DecomposableModel:
        return build_model(self.model_config)


def parse_run_config(raw: dict, source: str = "<config>") -> RunConfig:
    if not isinstance(raw, dict):
        raise DataFormatError(
            f"{source}: config must be a flat key-value mapping, got {type(raw).__name__}"
        )
    for key, value in raw.items():
        if not isinstance(key, str):
            raise DataFormatError(f"{source}: config keys must be strings, got {key!r}")
        if not isinstance(value, _SCALAR):
            raise DataFormatError(
                f"{source}: config values must be scalars; key {key!r} is {type(value).__name__}"
            )
    if "model" not in raw:
        raise DataFormatError(f"{source}: config is missing the 'model' key")
    n_steps = int(raw.get("n_steps", 100))
    if n_steps < 1:
        raise DataFormatError(f"{source}: n_steps must be >= 1, got {n_steps}")
    ic_seed = int(raw.get("ic_seed", 0))
    model_config = {k: v for k, v in raw.items() if k not in RUN_KEYS}
    return RunConfig(model_config=model_config, n_steps=n_steps, ic_seed=ic_seed)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise
    except (yaml.YAMLError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"{path}: not a valid YAML config: {exc}") from exc
    return parse_run_config(raw, source=path)


def dump_config(cfg: RunConfig, path: str) -> None:
    data = dict(cfg.model_config)
    data["n_steps"] = cfg.n_steps
    data["ic_seed"] = cfg.ic_seed
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, sort_keys=True)
