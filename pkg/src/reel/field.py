"""2D periodic grids, scalar fields, and finite-difference stencils.

All fields live on a uniform nx-by-ny grid with periodic boundaries in
both directions. Arrays are float64, shape (nx, ny), and the canonical
flattening is row-major (cell (i, j) -> index i*ny + j); every consumer
of flattened fields (spectral masks, projections, dataset files) relies
on that single convention.

Fields are immutable values: the backing array is marked read-only at
construction and every stencil returns a fresh field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: cell counts, spacing, and timestep."""

    nx: int
    ny: int
    dx: float
    dt: float

    def __post_init__(self) -> None:
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid must be at least 4x4, got {self.nx}x{self.ny}")
        if not (self.dx > 0.0):
            raise ValueError(f"dx must be positive, got {self.dx}")
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def ncells(self) -> int:
        return self.nx * self.ny


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real-valued field on a GridSpec. Immutable after construction.

    eq=False: comparing backing arrays elementwise inside a generated
    __eq__ is ambiguous; compare .values explicitly where needed.
    """

    grid: GridSpec
    values: np.ndarray  # (nx, ny) float64, C-order, read-only

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.shape != self.grid.shape:
            raise ValueError(
                f"field shape {arr.shape} does not match grid {self.grid.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, grid: GridSpec) -> ScalarField:
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> ScalarField:
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_vector(cls, grid: GridSpec, vec: np.ndarray) -> ScalarField:
        """Rebuild a field from its canonical row-major flattening."""
        return cls(grid, np.asarray(vec, dtype=np.float64).reshape(grid.shape))

    def vector(self) -> np.ndarray:
        """Canonical row-major flattening (index i*ny + j)."""
        return self.values.ravel()


def require_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"incompatible grids: {a.grid} vs {b.grid}")


def laplacian(f: ScalarField) -> ScalarField:
    """5-point Laplacian with periodic wrap.

    result[i,j] = (f[i+1,j] + f[i-1,j] + f[i,j+1] + f[i,j-1] - 4 f[i,j]) / dx^2
    """
    a = f.values
    lap = (
        np.roll(a, -1, axis=0)
        + np.roll(a, 1, axis=0)
        + np.roll(a, -1, axis=1)
        + np.roll(a, 1, axis=1)
        - 4.0 * a
    ) / (f.grid.dx * f.grid.dx)
    return ScalarField(f.grid, lap)


def grad_sq(f: ScalarField) -> ScalarField:
    """Pointwise squared gradient magnitude, centered differences.

    (df/dx)^2 + (df/dy)^2 with df/dx ~ (f[i+1,j] - f[i-1,j]) / (2 dx),
    periodic wrap in both axes.
    """
    a = f.values
    two_dx = 2.0 * f.grid.dx
    gx = (np.roll(a, -1, axis=0) - np.roll(a, 1, axis=0)) / two_dx
    gy = (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / two_dx
    return ScalarField(f.grid, gx * gx + gy * gy)


def div_flux(m: ScalarField, mu: ScalarField) -> ScalarField:
    """Conservative divergence of a mobility-weighted gradient: div(m grad mu).

    The flux through each cell face uses the arithmetic mean of m at the
    two adjacent cells times the face-normal difference of mu over dx;
    the divergence is the net face flux over dx. Every face flux enters
    two cells with opposite signs, so the grid sum of the output vanishes
    (discrete divergence theorem).
    """
    require_same_grid(m, mu)
    mv, uv = m.values, mu.values
    dx = m.grid.dx
    # east/north face fluxes (between cell i and i+1 along each axis)
    flux_e = 0.5 * (mv + np.roll(mv, -1, axis=0)) * (np.roll(uv, -1, axis=0) - uv) / dx
    flux_n = 0.5 * (mv + np.roll(mv, -1, axis=1)) * (np.roll(uv, -1, axis=1) - uv) / dx
    div = (flux_e - np.roll(flux_e, 1, axis=0) + flux_n - np.roll(flux_n, 1, axis=1)) / dx
    return ScalarField(m.grid, div)


def div_flux_abs_bound(m_bound: ScalarField, mu: ScalarField) -> ScalarField:
    """Pointwise bound |div(m_err grad mu)| <= div_flux_abs_bound(|m_err|, mu).

    Same face decomposition as div_flux but with absolute values of every
    face contribution, so the result dominates div_flux(m_err, mu) for any
    m_err with |m_err| <= m_bound pointwise.
    """
    require_same_grid(m_bound, mu)
    mv, uv = m_bound.values, mu.values
    dx = m_bound.grid.dx
    abs_e = 0.5 * (mv + np.roll(mv, -1, axis=0)) * np.abs(np.roll(uv, -1, axis=0) - uv) / dx
    abs_n = 0.5 * (mv + np.roll(mv, -1, axis=1)) * np.abs(np.roll(uv, -1, axis=1) - uv) / dx
    bound = (abs_e + np.roll(abs_e, 1, axis=0) + abs_n + np.roll(abs_n, 1, axis=1)) / dx
    return ScalarField(m_bound.grid, bound)
