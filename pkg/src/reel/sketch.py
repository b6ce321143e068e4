"""Seeded random-projection matrices and sketching of long vectors.

Entries are i.i.d. standard normal scaled by 1/sqrt(n), drawn row-major
from a named generator (numpy PCG64) so the same (n, d, seed) triple
yields bitwise-identical matrices anywhere. Projections preserve squared
norms in expectation; `jl_sandwich_trial` measures how often a given
family of seeds keeps a difference vector's norm within (1 +/- delta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Recorded in dataset headers so sketches stay portable.
PRNG_NAME = "numpy-pcg64-standard-normal-v1"


@dataclass(frozen=True)
class ProjectionSpec:
    """Definition of an n-by-d Gaussian projection matrix."""

    n: int
    d: int
    seed: int
    entry_law: str = PRNG_NAME
    _matrix_cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1 or self.n > self.d:
            raise ValueError(
                f"projected dimension must satisfy 1 <= n <= d, got n={self.n}, d={self.d}"
            )

    def matrix(self) -> np.ndarray:
        """The (n, d) matrix y/sqrt(n), materialized lazily and cached."""
        if not self._matrix_cache:
            rng = np.random.default_rng(self.seed)
            p = rng.standard_normal((self.n, self.d)) / np.sqrt(self.n)
            p.setflags(write=False)
            self._matrix_cache.append(p)
        return self._matrix_cache[0]


@dataclass(frozen=True, eq=False)
class Sketch:
    """A projected vector together with the spec that produced it."""

    spec: ProjectionSpec
    values: np.ndarray  # length n, float64 or complex128

    def __post_init__(self) -> None:
        if self.values.shape != (self.spec.n,):
            raise ValueError(
                f"sketch length {self.values.shape} does not match spec n={self.spec.n}"
            )


def make_projection(n: int, d: int, seed: int) -> ProjectionSpec:
    """Deterministic projection spec; same (n, d, seed) -> same matrix."""
    return ProjectionSpec(n=int(n), d=int(d), seed=int(seed))


def project(spec: ProjectionSpec, x: np.ndarray) -> Sketch:
    """Apply the projection matrix to a length-d vector.

    Complex input is handled by the same real matrix acting on real and
    imaginary parts, i.e. plain P @ x.
    """
    x = np.asarray(x)
    if x.shape != (spec.d,):
        raise ValueError(f"expected vector of length {spec.d}, got shape {x.shape}")
    return Sketch(spec, spec.matrix() @ x)


def jl_sandwich_trial(
    specs: list[ProjectionSpec], x: np.ndarray, y: np.ndarray, delta: float
) -> float:
    """Fraction of projections preserving ||x - y||^2 within (1 +/- delta).

    Success for one spec means
        (1 - delta) ||x - y||^2 <= ||P (x - y)||^2 <= (1 + delta) ||x - y||^2,
    with complex vectors measured in the modulus norm. A zero difference
    counts as success for every spec.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"x and y must have the same length, got {x.shape} vs {y.shape}")
    diff = x - y
    ref = float(np.vdot(diff, diff).real)
    hits = 0
    for spec in specs:
        proj = project(spec, diff).values
        val = float(np.vdot(proj, proj).real)
        if (1.0 - delta) * ref <= val <= (1.0 + delta) * ref:
            hits += 1
    return hits / len(specs)


def seed_family(base_seed: int, count: int, n: int, d: int) -> list[ProjectionSpec]:
    """Projection specs for seeds base_seed .. base_seed+count-1."""
    return [make_projection(n, d, base_seed + i) for i in range(count)]
