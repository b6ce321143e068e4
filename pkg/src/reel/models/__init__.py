"""Concrete decomposable models and the registry used by configs."""

from __future__ import annotations

from .base import (
    DOMAIN_FREQUENCY,
    DOMAIN_VALUE,
    DOMAIN_VFDD,
    DecomposableModel,
    ModelState,
    ParamVector,
)
from .heat import HeatModel, laser_flux
from .nanovoid import NanovoidModel, nanovoid_free_energy
from .sintering import (
    SinteringModel,
    discrete_free_energy,
    interp_h,
    sintering_chemical_potential,
)

MODEL_REGISTRY: dict[str, type[DecomposableModel]] = {
    HeatModel.name: HeatModel,
    SinteringModel.name: SinteringModel,
    NanovoidModel.name: NanovoidModel,
}


def build_model(cfg: dict) -> DecomposableModel:
    """Instantiate a model from a flat config mapping (see config module)."""
    try:
        name = cfg["model"]
    except KeyError:
        raise ValueError("config is missing the 'model' key") from None
    try:
        cls = MODEL_REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown model {name!r}; known: {sorted(MODEL_REGISTRY)}"
        ) from None
    return cls.from_config(cfg)


__all__ = [
    "DOMAIN_FREQUENCY",
    "DOMAIN_VALUE",
    "DOMAIN_VFDD",
    "DecomposableModel",
    "HeatModel",
    "MODEL_REGISTRY",
    "ModelState",
    "NanovoidModel",
    "ParamVector",
    "SinteringModel",
    "build_model",
    "discrete_free_energy",
    "interp_h",
    "laser_flux",
    "nanovoid_free_energy",
    "sintering_chemical_potential",
]
