"""User-facing property suites behind `reel verify`.

Desk-scale versions of the library's correctness properties. Each suite
returns rows of (name, ok, detail); the CLI renders them as a table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import learn, sim
from .field import GridSpec, ScalarField
from .models import HeatModel, NanovoidModel, SinteringModel
from .sketch import jl_sandwich_trial, seed_family
from .spectral import idft2, vfdd
from .taylor import expand_exp_ratio, remainder_bound_exp


@dataclass(frozen=True)
class VerifyRow:
    name: str
    ok: bool
    detail: str


def suite_vfdd(seed: int) -> list[VerifyRow]:
    grid = GridSpec(16, 16, 1.0, 0.1)
    rng = np.random.default_rng(seed)
    rows = []
    fields = [ScalarField(grid, rng.standard_normal(grid.shape)) for _ in range(100)]
    for label in ("beta=0", "beta=median", "beta=+inf"):
        worst = 0.0
        for f in fields:
            if label == "beta=0":
                beta = 0.0
            elif label == "beta=median":
                beta = float(np.median(np.abs(np.fft.fft2(f.values))))
            else:
                beta = math.inf
            pair = vfdd(f, beta)
            err = np.abs(pair.reconstruct().values - f.values).max()
            worst = max(worst, err / max(np.abs(f.values).max(), 1e-300))
        rows.append(VerifyRow(f"vfdd reconstruct {label}", worst <= 1e-10, f"max rel err {worst:.2e}"))
    return rows


def suite_jl(seed: int) -> list[VerifyRow]:
    d, delta, trials = 1024, 0.5, 100
    n = math.ceil(0.05 * d)
    rng = np.random.default_rng(seed)
    rows = []
    for k in (5, 20):
        x = np.zeros(d)
        y = np.zeros(d)
        x[rng.choice(d, k, replace=False)] = rng.standard_normal(k)
        y[rng.choice(d, k, replace=False)] = rng.standard_normal(k)
        specs = seed_family(seed, trials, n, d)
        rate = jl_sandwich_trial(specs, x, y, delta)
        rows.append(
            VerifyRow(f"jl sandwich {k}-sparse n={n}", rate >= 0.95, f"success rate {rate:.2f}")
        )
    return rows


def suite_taylor(_: int) -> list[VerifyRow]:
    rows = []
    for x in (0.1, 0.5, 1.0, 2.0, 5.0):
        ok = True
        margin = np.inf
        for order in range(1, 7):
            err = abs(math.exp(-x) - float(expand_exp_ratio(order)(np.asarray(x))))
            bound = remainder_bound_exp(x, order).bound_value
            ok &= err <= bound
            margin = min(margin, bound - err)
        rows.append(VerifyRow(f"taylor bound x={x:g}", ok, f"min slack {margin:.2e}"))
    return rows


def _models_for_check() -> list:
    return [
        HeatModel(GridSpec(16, 16, 1.0, 0.1)),
        SinteringModel(GridSpec(16, 16, 1.0, 0.01)),
        NanovoidModel(GridSpec(16, 16, 1.0, 0.005)),
    ]


def suite_gradcheck(seed: int) -> list[VerifyRow]:
    rows = []
    for model in _models_for_check():
        traj = sim.rollout(model, n_steps=8, ic_seed=seed)
        cds = learn.preprocess(traj, model, keep_frac=0.2, r=0.5, seed=seed)
        rng = np.random.default_rng(seed + 1)
        worst = 0.0
        for _ in range(3):
            theta = model.theta_true * rng.uniform(0.7, 1.3, model.n_params)
            g = learn.grad_reel(theta, cds)
            for k in range(model.n_params):
                h = 1e-6 * max(1.0, abs(theta[k]))
                e = np.zeros(model.n_params)
                e[k] = h
                fd = (learn.loss_reel(theta + e, cds) - learn.loss_reel(theta - e, cds)) / (2 * h)
                denom = max(abs(fd), abs(g[k]), 1e-12)
                worst = max(worst, abs(g[k] - fd) / denom)
        rows.append(VerifyRow(f"gradcheck {model.name}", worst < 1e-5, f"max rel err {worst:.2e}"))
    return rows


def suite_conservation(seed: int) -> list[VerifyRow]:
    rows = []
    sm = SinteringModel(GridSpec(32, 32, 1.0, 0.01))
    traj = sim.rollout(sm, n_steps=50, ic_seed=seed)
    s0 = float(traj.states[0].field("phi").values.sum())
    s1 = float(traj.states[-1].field("phi").values.sum())
    drift = abs(s1 - s0) / max(abs(s0), 1e-300)
    rows.append(VerifyRow("conservation sintering phi", drift <= 1e-6, f"rel drift {drift:.2e}"))

    nm = NanovoidModel(
        GridSpec(32, 32, 1.0, 0.005),
        r_rec=0.0,
        xi_amplitude=0.0,
        zeta_amplitude=0.0,
        p_v_rate=0.0,
        p_i_rate=0.0,
        p_eta_rate=0.0,
    )
    traj = sim.rollout(nm, n_steps=50, ic_seed=seed)
    for ch in ("c_v", "c_i"):
        s0 = float(traj.states[0].field(ch).values.sum())
        s1 = float(traj.states[-1].field(ch).values.sum())
        drift = abs(s1 - s0) / max(abs(s0), 1e-300)
        rows.append(
            VerifyRow(f"conservation nanovoid {ch} (sources off)", drift <= 1e-6, f"rel drift {drift:.2e}")
        )
    return rows


_SUITES = {
    "vfdd": suite_vfdd,
    "jl": suite_jl,
    "taylor": suite_taylor,
    "gradcheck": suite_gradcheck,
    "conservation": suite_conservation,
}


def run_suite(name: str, seed: int) -> list[VerifyRow]:
    if name not in _SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(_SUITES)}")
    return _SUITES[name](seed)
