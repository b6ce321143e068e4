"""Decomposable-model abstraction: states, named parameters, channel features.

A decomposable model writes each evolving field's time derivative as an
inner product between parameter functions phi(theta) (plain numbers
derived from the named parameters) and feature fields W(state) that never
depend on theta. The learner only ever sees the coefficient vectors, the
per-parameter jacobian, and the feature fields; everything model-specific
lives behind this interface.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..errors import GridMismatchError
from ..field import GridSpec, ScalarField

# domain routing tags for the preprocessing stage
DOMAIN_VFDD = "vfdd"
DOMAIN_VALUE = "value"
DOMAIN_FREQUENCY = "frequency"


@dataclass(frozen=True, eq=False)
class ModelState:
    """Named fields on a shared grid at one time index."""

    grid: GridSpec
    fields: Mapping[str, ScalarField]
    t_index: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "fields", dict(self.fields))
        for name, f in self.fields.items():
            if f.grid != self.grid:
                raise GridMismatchError(
                    f"field {name!r} grid {f.grid} does not match state grid {self.grid}"
                )
        if self.t_index < 0:
            raise ValueError(f"t_index must be >= 0, got {self.t_index}")

    def field(self, name: str) -> ScalarField:
        return self.fields[name]

    def advanced(self, new_fields: Mapping[str, ScalarField]) -> ModelState:
        """Successor state at t_index + 1."""
        return ModelState(self.grid, new_fields, self.t_index + 1)


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Named theta bound to a model that maps it to coefficient space.

    values() is the flat coefficient vector across the model's channels
    in channel order; jacobian() stacks the per-coefficient derivatives
    with one column per named parameter.
    """

    names: tuple[str, ...]
    theta: np.ndarray
    model: DecomposableModel = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.theta, dtype=np.float64)
        if arr.shape != (len(self.names),):
            raise ValueError(
                f"theta shape {arr.shape} does not match {len(self.names)} names"
            )
        if self.names != self.model.param_names:
            raise ValueError("names do not match the model's parameter names")
        arr.setflags(write=False)
        object.__setattr__(self, "theta", arr)

    def values(self) -> np.ndarray:
        coeffs = self.model.channel_coefficients(self.theta)
        return np.concatenate([coeffs[c] for c in self.model.channels])

    def jacobian(self) -> np.ndarray:
        jacs = self.model.channel_jacobians(self.theta)
        return np.vstack([jacs[c] for c in self.model.channels])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.theta)}

    def get(self, name: str) -> float:
        return float(self.theta[self.names.index(name)])


class DecomposableModel(ABC):
    """Interface every concrete model implements.

    Class attributes set by subclasses: `name`, `channels` (field names in
    canonical order), `param_names`. Instances are immutable after
    construction; feature evaluation is pure.
    """

    name: str
    channels: tuple[str, ...]
    param_names: tuple[str, ...]

    grid: GridSpec

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    @property
    @abstractmethod
    def theta_true(self) -> np.ndarray:
        """Parameters used to generate synthetic ground truth."""

    @property
    @abstractmethod
    def feature_counts(self) -> dict[str, int]:
        """Number of feature fields per channel."""

    @property
    def feature_count(self) -> int:
        return sum(self.feature_counts[c] for c in self.channels)

    def params(self, theta: np.ndarray | None = None) -> ParamVector:
        if theta is None:
            theta = self.theta_true
        return ParamVector(self.param_names, np.asarray(theta, dtype=np.float64), self)

    @abstractmethod
    def channel_coefficients(self, theta: np.ndarray) -> dict[str, np.ndarray]:
        """Coefficient vector phi(theta) per channel."""

    @abstractmethod
    def channel_jacobians(self, theta: np.ndarray) -> dict[str, np.ndarray]:
        """d phi_i / d theta_j per channel, shape (feature_count_c, n_params)."""

    @abstractmethod
    def features(self, state: ModelState) -> dict[str, list[ScalarField]]:
        """Theta-independent feature fields per channel."""

    @abstractmethod
    def monolithic_rhs(
        self, state: ModelState, theta: np.ndarray | None = None
    ) -> dict[str, ScalarField]:
        """Right-hand side without the inner-product factorization.

        For models with Arrhenius mobilities this evaluates the exact
        exponential, so it differs from the decomposed form by the
        truncation remainder; elsewhere the two agree to rounding.
        """

    @abstractmethod
    def initial_state(self, seed: int = 0) -> ModelState:
        """Seeded initial condition."""

    @abstractmethod
    def domain_policy(self) -> dict[str, str]:
        """Per-channel routing: DOMAIN_VFDD, DOMAIN_VALUE or DOMAIN_FREQUENCY."""

    @abstractmethod
    def stable_dt(self) -> float:
        """Explicit-Euler budget for this model's stiffest channel."""

    @abstractmethod
    def config_dict(self) -> dict:
        """Flat, JSON-ready description sufficient to reconstruct the model."""

    def decomposed_rhs(
        self, state: ModelState, theta: np.ndarray | None = None
    ) -> dict[str, ScalarField]:
        """Inner product phi(theta) . W(state), channel by channel."""
        if theta is None:
            theta = self.theta_true
        coeffs = self.channel_coefficients(np.asarray(theta, dtype=np.float64))
        feats = self.features(state)
        out = {}
        for ch in self.channels:
            acc = np.zeros(self.grid.shape)
            for c, w in zip(coeffs[ch], feats[ch]):
                acc = acc + c * w.values
            out[ch] = ScalarField(self.grid, acc)
        return out

    def predicted_change(
        self, state: ModelState, theta: np.ndarray | None = None
    ) -> dict[str, ScalarField]:
        """dt times the decomposed right-hand side."""
        rhs = self.decomposed_rhs(state, theta)
        return {ch: ScalarField(self.grid, self.grid.dt * f.values) for ch, f in rhs.items()}

    def soft_ranges(self) -> dict[str, tuple[float, float]]:
        """Physical ranges; excursions warn but do not abort."""
        return {}

    def hard_limits(self) -> dict[str, float]:
        """Absolute bounds beyond which a trajectory counts as diverged."""
        return {ch: 1e6 for ch in self.channels}
