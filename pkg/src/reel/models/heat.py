"""Heat diffusion with a stationary Gaussian laser source.

dT/dt = (k lap(T) + Q) / rho_cp on a periodic grid. The equation is
exactly decomposable: coefficients [k/rho_cp, 1/rho_cp] against features
[lap(T), Q]. Temperature and material constants are kept in O(1)
nondimensional units.
"""

from __future__ import annotations

import numpy as np

from ..field import GridSpec, ScalarField, laplacian
from .base import DOMAIN_VFDD, DecomposableModel, ModelState


def laser_flux(
    grid: GridSpec, gamma: float, omega: float, center: tuple[float, float] | None = None
) -> ScalarField:
    """Gaussian flux 2*gamma/(pi omega^2) exp(-(x^2+y^2)/(2 omega^2)).

    `center` is in cell coordinates, defaulting to the grid midpoint.
    Distances use the minimal periodic image so the spot is unaffected by
    where it sits relative to the wrap seam.
    """
    if not (omega > 0.0):
        raise ValueError(f"spot radius must be > 0, got {omega}")
    if gamma < 0.0:
        raise ValueError(f"laser power must be >= 0, got {gamma}")
    if center is None:
        center = (grid.nx / 2.0, grid.ny / 2.0)
    cx, cy = center
    ii = np.arange(grid.nx)[:, None]
    jj = np.arange(grid.ny)[None, :]
    # minimal-image offsets in physical units
    x = ((ii - cx + grid.nx / 2.0) % grid.nx - grid.nx / 2.0) * grid.dx
    y = ((jj - cy + grid.ny / 2.0) % grid.ny - grid.ny / 2.0) * grid.dx
    peak = 2.0 * gamma / (np.pi * omega * omega)
    q = peak * np.exp(-(x * x + y * y) / (2.0 * omega * omega))
    return ScalarField(grid, np.broadcast_to(q, grid.shape).copy())


class HeatModel(DecomposableModel):
    name = "heat"
    channels = ("T",)
    param_names = ("k", "rho_cp")

    def __init__(
        self,
        grid: GridSpec,
        k: float = 0.8,
        rho_cp: float = 1.6,
        gamma: float = 4.0,
        omega: float = 4.0,
        center: tuple[float, float] | None = None,
        t_ambient: float = 1.0,
        ic_amplitude: float = 0.2,
        c_stab: float = 0.2,
    ):
        if k <= 0.0 or rho_cp <= 0.0:
            raise ValueError("conductivity and heat capacity must be positive")
        self.grid = grid
        self.k = float(k)
        self.rho_cp = float(rho_cp)
        self.gamma = float(gamma)
        self.omega = float(omega)
        self.center = center
        self.t_ambient = float(t_ambient)
        self.ic_amplitude = float(ic_amplitude)
        self.c_stab = float(c_stab)
        self.q_field = laser_flux(grid, gamma, omega, center)

    @property
    def theta_true(self) -> np.ndarray:
        return np.array([self.k, self.rho_cp])

    @property
    def feature_counts(self) -> dict[str, int]:
        return {"T": 2}

    def channel_coefficients(self, theta: np.ndarray) -> dict[str, np.ndarray]:
        k, rho_cp = theta
        return {"T": np.array([k / rho_cp, 1.0 / rho_cp])}

    def channel_jacobians(self, theta: np.ndarray) -> dict[str, np.ndarray]:
        k, rho_cp = theta
        return {
            "T": np.array(
                [
                    [1.0 / rho_cp, -k / rho_cp**2],
                    [0.0, -1.0 / rho_cp**2],
                ]
            )
        }

    def features(self, state: ModelState) -> dict[str, list[ScalarField]]:
        return {"T": [laplacian(state.field("T")), self.q_field]}

    def monolithic_rhs(
        self, state: ModelState, theta: np.ndarray | None = None
    ) -> dict[str, ScalarField]:
        if theta is None:
            theta = self.theta_true
        k, rho_cp = theta
        lap = laplacian(state.field("T"))
        rhs = (k * lap.values + self.q_field.values) / rho_cp
        return {"T": ScalarField(self.grid, rhs)}

    def initial_state(self, seed: int = 0) -> ModelState:
        """Ambient temperature plus a smooth seeded perturbation.

        The perturbation is a band of low-wavenumber Fourier modes with
        1/(p^2+q^2) amplitude decay, so it is smooth at any resolution.
        """
        rng = np.random.default_rng(seed)
        ii = np.arange(self.grid.nx)[:, None] / self.grid.nx
        jj = np.arange(self.grid.ny)[None, :] / self.grid.ny
        pert = np.zeros(self.grid.shape)
        for p in range(1, 4):
            for q in range(1, 4):
                amp = self.ic_amplitude * rng.standard_normal() / (p * p + q * q)
                phase = rng.uniform(0.0, 2.0 * np.pi)
                pert = pert + amp * np.cos(2.0 * np.pi * (p * ii + q * jj) + phase)
        t0 = ScalarField(self.grid, self.t_ambient + pert)
        return ModelState(self.grid, {"T": t0})

    def domain_policy(self) -> dict[str, str]:
        return {"T": DOMAIN_VFDD}

    def stable_dt(self) -> float:
        alpha = self.k / self.rho_cp
        return self.c_stab * self.grid.dx**2 / alpha

    def config_dict(self) -> dict:
        center = self.center if self.center is not None else (self.grid.nx / 2.0, self.grid.ny / 2.0)
        return {
            "model": self.name,
            "nx": self.grid.nx,
            "ny": self.grid.ny,
            "dx": self.grid.dx,
            "dt": self.grid.dt,
            "k": self.k,
            "rho_cp": self.rho_cp,
            "gamma": self.gamma,
            "omega": self.omega,
            "center_x": float(center[0]),
            "center_y": float(center[1]),
            "t_ambient": self.t_ambient,
            "ic_amplitude": self.ic_amplitude,
            "c_stab": self.c_stab,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> HeatModel:
        grid = GridSpec(int(cfg["nx"]), int(cfg["ny"]), float(cfg["dx"]), float(cfg["dt"]))
        center = None
        if "center_x" in cfg and "center_y" in cfg:
            center = (float(cfg["center_x"]), float(cfg["center_y"]))
        return cls(
            grid,
            k=float(cfg.get("k", 0.8)),
            rho_cp=float(cfg.get("rho_cp", 1.6)),
            gamma=float(cfg.get("gamma", 4.0)),
            omega=float(cfg.get("omega", 4.0)),
            center=center,
            t_ambient=float(cfg.get("t_ambient", 1.0)),
            ic_amplitude=float(cfg.get("ic_amplitude", 0.2)),
            c_stab=float(cfg.get("c_stab", 0.2)),
        )
