"""Solid-state sintering under a laser: density, grain orders, temperature.

Channels:
  phi      conserved density, Cahn-Hilliard with a four-mode mobility
           (volume, vapor, surface, grain-boundary transport), each mode
           Arrhenius-activated and expanded to `taylor_order` in
           q/(kB T) so the channel is decomposable
  eta_k    non-conserved grain order parameters, Allen-Cahn
  T        temperature with laser source, as in the heat model

The free energy density is
  f = A phi^2 (1-phi)^2
    + B [phi^2 + 6(1-phi) S2 - 4(2-phi) S3 + 3 S2^2],
S2 = sum eta_k^2, S3 = sum eta_k^3, plus face-difference gradient
penalties eps_phi/2 |grad phi|^2 and eps_eta/2 |grad eta_k|^2. A, B and
the gradient coefficients are fixed model constants; the learnable theta
covers the four (D_l0, Q_l) Arrhenius pairs, the Allen-Cahn mobility and
the thermal pair (k, rho_cp).
"""

from __future__ import annotations

import math

import numpy as np

from ..field import GridSpec, ScalarField, div_flux, laplacian
from ..taylor import arrhenius_mobility_weights
from .base import DOMAIN_FREQUENCY, DOMAIN_VALUE, DecomposableModel, ModelState
from .heat import laser_flux

MODES = ("vol", "vap", "surf", "gb")


def interp_h(phi: ScalarField, form: str = "paper") -> ScalarField:
    """Mobility interpolant h(phi).

    form="paper" evaluates phi^3 (15 - 10 phi + 6 phi^2) verbatim, which
    gives h(1) = 11; form="standard" uses the usual normalized
    phi^3 (10 - 15 phi + 6 phi^2) with h(1) = 1.
    """
    p = phi.values
    if form == "paper":
        vals = p**3 * (15.0 - 10.0 * p + 6.0 * p * p)
    elif form == "standard":
        vals = p**3 * (10.0 - 15.0 * p + 6.0 * p * p)
    else:
        raise ValueError(f"unknown interpolant form {form!r}")
    return ScalarField(phi.grid, vals)


def bulk_dfdphi(phi: np.ndarray, s2: np.ndarray, s3: np.ndarray, a: float, b: float) -> np.ndarray:
    return 2.0 * a * phi * (1.0 - phi) * (1.0 - 2.0 * phi) + b * (
        2.0 * phi - 6.0 * s2 + 4.0 * s3
    )


def bulk_dfdeta(phi: np.ndarray, eta: np.ndarray, s2: np.ndarray, b: float) -> np.ndarray:
    return 12.0 * b * ((1.0 - phi) * eta - (2.0 - phi) * eta * eta + s2 * eta)


def sintering_chemical_potential(
    state: ModelState, eps_phi: float, a_well: float, b_well: float
) -> ScalarField:
    """mu = df/dphi - eps_phi lap(phi) for the declared free energy."""
    phi = state.field("phi")
    etas = [state.field(n).values for n in sorted(state.fields) if n.startswith("eta_")]
    s2 = sum(e * e for e in etas) if etas else np.zeros(phi.grid.shape)
    s3 = sum(e**3 for e in etas) if etas else np.zeros(phi.grid.shape)
    bulk = bulk_dfdphi(phi.values, s2, s3, a_well, b_well)
    return ScalarField(phi.grid, bulk - eps_phi * laplacian(phi).values)


def discrete_free_energy(
    state: ModelState, eps_phi: float, eps_eta: float, a_well: float, b_well: float
) -> float:
    """Cell-sum free energy whose exact gradient is the chemical potential.

    Gradient penalties are accumulated over faces as eps/2 ((f_E - f)/dx)^2
    so that differentiating the sum w.r.t. one cell reproduces the 5-point
    Laplacian; a centered-difference quadrature would not.
    """
    grid = state.grid
    phi = state.field("phi").values
    etas = [state.field(n).values for n in sorted(state.fields) if n.startswith("eta_")]
    s2 = sum(e * e for e in etas) if etas else np.zeros(grid.shape)
    s3 = sum(e**3 for e in etas) if etas else np.zeros(grid.shape)
    f_bulk = a_well * phi**2 * (1.0 - phi) ** 2 + b_well * (
        phi**2 + 6.0 * (1.0 - phi) * s2 - 4.0 * (2.0 - phi) * s3 + 3.0 * s2 * s2
    )

    def face_energy(arr: np.ndarray, eps: float) -> float:
        gx = (np.roll(arr, -1, axis=0) - arr) / grid.dx
        gy = (np.roll(arr, -1, axis=1) - arr) / grid.dx
        return 0.5 * eps * float(np.sum(gx * gx) + np.sum(gy * gy))

    total = float(np.sum(f_bulk)) + face_energy(phi, eps_phi)
    for e in etas:
        total += face_energy(e, eps_eta)
    return total * grid.dx * grid.dx


class SinteringModel(DecomposableModel):
    name = "sintering"
    param_names = (
        "d_vol0",
        "q_vol",
        "d_vap0",
        "q_vap",
        "d_surf0",
        "q_surf",
        "d_gb0",
        "q_gb",
        "l_gb",
        "k_cond",
        "rho_cp",
    )

    def __init__(
        self,
        grid: GridSpec,
        d_vol0: float = 0.02,
        q_vol: float = 0.3,
        d_vap0: float = 0.002,
        q_vap: float = 0.5,
        d_surf0: float = 0.04,
        q_surf: float = 0.4,
        d_gb0: float = 0.03,
        q_gb: float = 0.6,
        l_gb: float = 0.5,
        k_cond: float = 0.5,
        rho_cp: float = 1.0,
        a_well: float = 1.0,
        b_well: float = 1.0,
        eps_phi: float = 4.0,
        eps_eta: float = 4.0,
        v_m: float = 1.0,
        k_b: float = 1.0,
        taylor_order: int = 4,
        n_grains: int = 2,
        h_form: str = "paper",
        gamma: float = 2.0,
        omega: float = 8.0,
        center: tuple[float, float] | None = None,
        t_ambient: float = 1.0,
        particle_radius: float | None = None,
        c_stab: float = 0.2,
    ):
        if taylor_order < 0:
            raise ValueError(f"taylor_order must be >= 0, got {taylor_order}")
        if n_grains < 1:
            raise ValueError(f"n_grains must be >= 1, got {n_grains}")
        if h_form not in ("paper", "standard"):
            raise ValueError(f"unknown interpolant form {h_form!r}")
        self.grid = grid
        self.d0 = {"vol": float(d_vol0), "vap": float(d_vap0), "surf": float(d_surf0), "gb": float(d_gb0)}
        self.q = {"vol": float(q_vol), "vap": float(q_vap), "surf": float(q_surf), "gb": float(q_gb)}
        self.l_gb = float(l_gb)
        self.k_cond = float(k_cond)
        self.rho_cp = float(rho_cp)
        self.a_well = float(a_well)
        self.b_well = float(b_well)
        self.eps_phi = float(eps_phi)
        self.eps_eta = float(eps_eta)
        self.v_m = float(v_m)
        self.k_b = float(k_b)
        self.taylor_order = int(taylor_order)
        self.n_grains = int(n_grains)
        self.h_form = h_form
        self.gamma = float(gamma)
        self.omega = float(omega)
        self.center = center
        self.t_ambient = float(t_ambient)
        # default particle size scales with the grid
        self.particle_radius = float(particle_radius) if particle_radius is not None else grid.nx * 0.22
        self.c_stab = float(c_stab)
        self.eta_names = tuple(f"eta_{k + 1}" for k in range(self.n_grains))
        self.channels = ("phi",) + self.eta_names + ("T",)
        self.q_field = laser_flux(grid, gamma, omega, center)

    # ---- parameter side ----

    @property
    def theta_true(self) -> np.ndarray:
        vals = []
        for l in MODES:
            vals += [self.d0[l], self.q[l]]
        vals += [self.l_gb, self.k_cond, self.rho_cp]
        return np.array(vals)

    @property
    def feature_counts(self) -> dict[str, int]:
        counts = {"phi": len(MODES) * (self.taylor_order + 1)}
        for n in self.eta_names:
            counts[n] = 1
        counts["T"] = 2
        return counts

    def channel_coefficients(self, theta: np.ndarray) -> dict[str, np.ndarray]:
        phi_coeffs = []
        for m, _ in enumerate(MODES):
            d0, q = theta[2 * m], theta[2 * m + 1]
            phi_coeffs.extend(d0 * q**i for i in range(self.taylor_order + 1))
        out = {"phi": np.array(phi_coeffs)}
        for n in self.eta_names:
            out[n] = np.array([theta[8]])
        out["T"] = np.array([theta[9] / theta[10], 1.0 / theta[10]])
        return out

    def channel_jacobians(self, theta: np.ndarray) -> dict[str, np.ndarray]:
        order = self.taylor_order
        jac_phi = np.zeros((len(MODES) * (order + 1), self.n_params))
        for m, _ in enumerate(MODES):
            d0, q = theta[2 * m], theta[2 * m + 1]
            for i in range(order + 1):
                row = m * (order + 1) + i
                jac_phi[row, 2 * m] = q**i
                if i >= 1:
                    jac_phi[row, 2 * m + 1] = i * d0 * q ** (i - 1)
        out = {"phi": jac_phi}
        for n in self.eta_names:
            jac = np.zeros((1, self.n_params))
            jac[0, 8] = 1.0
            out[n] = jac
        k, rho_cp = theta[9], theta[10]
        jac_t = np.zeros((2, self.n_params))
        jac_t[0, 9] = 1.0 / rho_cp
        jac_t[0, 10] = -k / rho_cp**2
        jac_t[1, 10] = -1.0 / rho_cp**2
        out["T"] = jac_t
        return out

    # ---- state side ----

    def _eta_sums(self, state: ModelState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        etas = [state.field(n).values for n in self.eta_names]
        s1 = sum(etas)
        s2 = sum(e * e for e in etas)
        s3 = sum(e**3 for e in etas)
        return s1, s2, s3

    def carriers(self, state: ModelState) -> dict[str, ScalarField]:
        """Mobility carriers per transport mode, independent of theta."""
        phi = state.field("phi")
        h = interp_h(phi, self.h_form).values
        p = phi.values
        s1, s2, _ = self._eta_sums(state)
        # sum_{i != j} eta_i eta_j over ordered pairs = S1^2 - S2
        return {
            "vol": ScalarField(self.grid, h),
            "vap": ScalarField(self.grid, 1.0 - h),
            "surf": ScalarField(self.grid, p * (1.0 - p)),
            "gb": ScalarField(self.grid, s1 * s1 - s2),
        }

    def chemical_potential(self, state: ModelState) -> ScalarField:
        return sintering_chemical_potential(state, self.eps_phi, self.a_well, self.b_well)

    def _eta_rhs_fields(self, state: ModelState) -> dict[str, np.ndarray]:
        """-dF/deta_k per grain (the Allen-Cahn direction, without L)."""
        phi = state.field("phi").values
        _, s2, _ = self._eta_sums(state)
        out = {}
        for n in self.eta_names:
            eta = state.field(n)
            bulk = bulk_dfdeta(phi, eta.values, s2, self.b_well)
            out[n] = self.eps_eta * laplacian(eta).values - bulk
        return out

    def features(self, state: ModelState) -> dict[str, list[ScalarField]]:
        mu = self.chemical_potential(state)
        weights = arrhenius_mobility_weights(
            self.k_b * state.field("T").values, self.taylor_order, vm=self.v_m
        )
        carriers = self.carriers(state)
        phi_feats = []
        for l in MODES:
            for w in weights:
                phi_feats.append(div_flux(ScalarField(self.grid, w * carriers[l].values), mu))
        out = {"phi": phi_feats}
        for n, rhs in self._eta_rhs_fields(state).items():
            out[n] = [ScalarField(self.grid, rhs)]
        out["T"] = [laplacian(state.field("T")), self.q_field]
        return out

    def monolithic_rhs(
        self, state: ModelState, theta: np.ndarray | None = None
    ) -> dict[str, ScalarField]:
        """Exact-exponential mobility, no Taylor truncation."""
        if theta is None:
            theta = self.theta_true
        t_field = state.field("T").values
        kb_t = self.k_b * t_field
        carriers = self.carriers(state)
        mobility = np.zeros(self.grid.shape)
        for m, l in enumerate(MODES):
            d0, q = theta[2 * m], theta[2 * m + 1]
            mobility = mobility + d0 * np.exp(-q / kb_t) * self.v_m / kb_t * carriers[l].values
        mu = self.chemical_potential(state)
        out = {"phi": div_flux(ScalarField(self.grid, mobility), mu)}
        l_gb = theta[8]
        for n, rhs in self._eta_rhs_fields(state).items():
            out[n] = ScalarField(self.grid, l_gb * rhs)
        k, rho_cp = theta[9], theta[10]
        lap_t = laplacian(state.field("T")).values
        out["T"] = ScalarField(self.grid, (k * lap_t + self.q_field.values) / rho_cp)
        return out

    def remainder_mobility_bound(self, state: ModelState, theta: np.ndarray | None = None) -> ScalarField:
        """Pointwise bound on |exact mobility - truncated mobility|.

        Per mode: D_l0 * x^(n+1)/(n+1)! * V_m/(kB T) * |carrier|, the
        Lagrange remainder at x = Q_l/(kB T).
        """
        if theta is None:
            theta = self.theta_true
        kb_t = self.k_b * state.field("T").values
        carriers = self.carriers(state)
        fact = math.factorial(self.taylor_order + 1)
        bound = np.zeros(self.grid.shape)
        for m, l in enumerate(MODES):
            d0, q = theta[2 * m], theta[2 * m + 1]
            x = q / kb_t
            bound = bound + d0 * x ** (self.taylor_order + 1) / fact * self.v_m / kb_t * np.abs(
                carriers[l].values
            )
        return ScalarField(self.grid, bound)

    def initial_state(self, seed: int = 0) -> ModelState:
        """Overlapping circular particles with tanh interfaces of width 3dx.

        Particle centers sit on a ring around the grid midpoint with
        seeded jitter of radii and positions; phi is the smooth union of
        the particle profiles, eta_k follows particle k suppressed where
        others overlap, T is uniform ambient.
        """
        rng = np.random.default_rng(seed)
        grid = self.grid
        width = 3.0 * grid.dx
        cx0, cy0 = grid.nx / 2.0, grid.ny / 2.0
        radii = self.particle_radius * (1.0 + 0.08 * rng.uniform(-1.0, 1.0, self.n_grains))
        if self.n_grains == 1:
            centers = [(cx0, cy0)]
        else:
            # neighbors overlap: ring radius just under the mean particle radius
            ring = 0.75 * float(np.mean(radii))
            angles = 2.0 * np.pi * np.arange(self.n_grains) / self.n_grains
            angles = angles + rng.uniform(-0.1, 0.1, self.n_grains)
            centers = [
                (
                    cx0 + ring * np.cos(a) / grid.dx + rng.uniform(-1.0, 1.0),
                    cy0 + ring * np.sin(a) / grid.dx + rng.uniform(-1.0, 1.0),
                )
                for a in angles
            ]
        ii = np.arange(grid.nx)[:, None]
        jj = np.arange(grid.ny)[None, :]
        profiles = []
        for (cx, cy), r in zip(centers, radii):
            x = ((ii - cx + grid.nx / 2.0) % grid.nx - grid.nx / 2.0) * grid.dx
            y = ((jj - cy + grid.ny / 2.0) % grid.ny - grid.ny / 2.0) * grid.dx
            dist = np.sqrt(x * x + y * y)
            profiles.append(0.5 * (1.0 - np.tanh(2.0 * (dist - r) / width)))
        one_minus = np.ones(grid.shape)
        for p in profiles:
            one_minus = one_minus * (1.0 - p)
        phi = 1.0 - one_minus
        fields = {"phi": ScalarField(grid, phi)}
        for k, p in enumerate(profiles):
            others = np.ones(grid.shape)
            for q, other in enumerate(profiles):
                if q != k:
                    others = others * (1.0 - 0.5 * other)
            fields[self.eta_names[k]] = ScalarField(grid, p * others)
        fields["T"] = ScalarField.constant(grid, self.t_ambient)
        return ModelState(grid, fields)

    def domain_policy(self) -> dict[str, str]:
        policy = {"phi": DOMAIN_VALUE}
        for n in self.eta_names:
            policy[n] = DOMAIN_VALUE
        policy["T"] = DOMAIN_FREQUENCY
        return policy

    def soft_ranges(self) -> dict[str, tuple[float, float]]:
        ranges = {"phi": (-0.1, 1.1)}
        for n in self.eta_names:
            ranges[n] = (-0.1, 1.1)
        return ranges

    def hard_limits(self) -> dict[str, float]:
        limits = {"phi": 10.0, "T": 1e6}
        for n in self.eta_names:
            limits[n] = 10.0
        return limits

    def stable_dt(self) -> float:
        h_max = 11.0 if self.h_form == "paper" else 1.0
        carrier_max = {"vol": h_max, "vap": 1.0, "surf": 0.25, "gb": 1.0}
        kb_t0 = self.k_b * self.t_ambient
        mob = sum(
            self.d0[l] * math.exp(-self.q[l] / kb_t0) * self.v_m / kb_t0 * carrier_max[l]
            for l in MODES
        )
        budget_phi = self.c_stab * self.grid.dx**4 / (mob * self.eps_phi)
        budget_eta = self.c_stab * self.grid.dx**2 / (self.l_gb * self.eps_eta)
        budget_t = self.c_stab * self.grid.dx**2 / (self.k_cond / self.rho_cp)
        return min(budget_phi, budget_eta, budget_t)

    def config_dict(self) -> dict:
        center = self.center if self.center is not None else (self.grid.nx / 2.0, self.grid.ny / 2.0)
        cfg = {
            "model": self.name,
            "nx": self.grid.nx,
            "ny": self.grid.ny,
            "dx": self.grid.dx,
            "dt": self.grid.dt,
            "l_gb": self.l_gb,
            "k_cond": self.k_cond,
            "rho_cp": self.rho_cp,
            "a_well": self.a_well,
            "b_well": self.b_well,
            "eps_phi": self.eps_phi,
            "eps_eta": self.eps_eta,
            "v_m": self.v_m,
            "k_b": self.k_b,
            "taylor_order": self.taylor_order,
            "n_grains": self.n_grains,
            "h_form": self.h_form,
            "gamma": self.gamma,
            "omega": self.omega,
            "center_x": float(center[0]),
            "center_y": float(center[1]),
            "t_ambient": self.t_ambient,
            "particle_radius": self.particle_radius,
            "c_stab": self.c_stab,
        }
        for l in MODES:
            cfg[f"d_{l}0"] = self.d0[l]
            cfg[f"q_{l}"] = self.q[l]
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> SinteringModel:
        grid = GridSpec(int(cfg["nx"]), int(cfg["ny"]), float(cfg["dx"]), float(cfg["dt"]))
        kwargs = {}
        for key in (
            "d_vol0", "q_vol", "d_vap0", "q_vap", "d_surf0", "q_surf", "d_gb0", "q_gb",
            "l_gb", "k_cond", "rho_cp", "a_well", "b_well", "eps_phi", "eps_eta",
            "v_m", "k_b", "gamma", "omega", "t_ambient", "particle_radius", "c_stab",
        ):
            if key in cfg:
                kwargs[key] = float(cfg[key])
        if "taylor_order" in cfg:
            kwargs["taylor_order"] = int(cfg["taylor_order"])
        if "n_grains" in cfg:
            kwargs["n_grains"] = int(cfg["n_grains"])
        if "h_form" in cfg:
            kwargs["h_form"] = str(cfg["h_form"])
        if "center_x" in cfg and "center_y" in cfg:
            kwargs["center"] = (float(cfg["center_x"]), float(cfg["center_y"]))
        return cls(grid, **kwargs)
