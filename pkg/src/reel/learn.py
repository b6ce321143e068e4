"""The REEL pipeline: decomposition + projection preprocessing, losses,
analytic gradients, SGD, and rollout evaluation.

Preprocessing runs once per trajectory: every temporal update is split
into value/frequency components (per the model's domain policy), the
feature fields are split with the same per-timestep masks, and both
sides are pushed through seeded Gaussian projections. Training then
touches only the compressed sketches; the uncompressed baseline keeps
full-dimensional cached features and minimizes the plain squared
mismatch.
"""

from __future__ import annotations

import json
import math
import struct
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DataFormatError, DivergenceError, GridMismatchError
from .field import ScalarField
from .models import build_model
from .models.base import DOMAIN_FREQUENCY, DOMAIN_VALUE, DOMAIN_VFDD, DecomposableModel, ModelState
from .sim import FORMAT_VERSION, Trajectory, rollout
from .sketch import PRNG_NAME, ProjectionSpec, make_projection
from .spectral import FrequencyMask, decompose_with_mask, dft2, vfdd

LR_GRID = (1e1, 3e0, 1e0, 3e-1, 1e-1, 3e-2, 1e-2, 1e-3, 1e-4, 1e-5)

_MAGIC = b"REEL"
_HEADER_OFFSET = 16


@dataclass(frozen=True)
class TrainConfig:
    """SGD hyperparameters. lr = 0 is allowed and leaves theta unchanged."""

    lr: float
    epochs: int
    batch_size: int = 32
    lam: float = 1.0
    seed: int = 0
    theta_scale: np.ndarray | None = None  # defaults to the model's nominal values

    def __post_init__(self) -> None:
        if self.lr < 0.0:
            raise ValueError(f"lr must be >= 0, got {self.lr}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lam < 0.0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")


@dataclass(eq=False)
class CompressedDataset:
    """Sketched updates and features, all a trained model ever sees.

    Per channel ch with m_ch features and T timesteps:
      gt_val[ch]   (T, n_val)  real sketches of the value components
      gt_freq[ch]  (T, n_freq) complex sketches of the kept spectra
      feat_val[ch] (T, m_ch, n_val)
      feat_freq[ch](T, m_ch, n_freq)
      masks[ch]    (T, nx, ny) bool, the per-timestep frequency masks
    With identity=True the "sketches" are the uncompressed components
    (n = d), which realizes the decomposed target loss L_T.
    """

    model: DecomposableModel
    channels: tuple[str, ...]
    n_timesteps: int
    dt: float
    n_val: int
    n_freq: int
    identity: bool
    val_spec: ProjectionSpec | None
    freq_spec: ProjectionSpec | None
    r: float
    beta_used: dict[str, float]
    keep_frac: float | None
    lam_default: float
    gt_val: dict[str, np.ndarray]
    gt_freq: dict[str, np.ndarray]
    feat_val: dict[str, np.ndarray]
    feat_freq: dict[str, np.ndarray]
    masks: dict[str, np.ndarray]

    @property
    def feature_counts(self) -> dict[str, int]:
        return {ch: self.feat_val[ch].shape[1] for ch in self.channels}

    def loss(self, theta: np.ndarray, lam: float | None = None, idx: np.ndarray | None = None) -> float:
        return loss_reel(theta, self, lam, idx)

    def grad(self, theta: np.ndarray, lam: float | None = None, idx: np.ndarray | None = None) -> np.ndarray:
        return grad_reel(theta, self, lam, idx)


class BaselineDataset:
    """Uncompressed cached features realizing the plain squared loss.

    Features are evaluated once at construction; each epoch then works
    on (T, m, d) arrays without ever touching the trajectory again.
    """

    def __init__(self, traj: Trajectory, model: DecomposableModel):
        _require_compatible(traj, model)
        self.model = model
        self.channels = tuple(model.channels)
        self.dt = model.grid.dt
        self.n_timesteps = traj.n_states - 1
        d = model.grid.ncells
        counts = model.feature_counts
        self.gt = {ch: np.empty((self.n_timesteps, d)) for ch in self.channels}
        self.feats = {ch: np.empty((self.n_timesteps, counts[ch], d)) for ch in self.channels}
        for t in range(self.n_timesteps):
            state = traj.states[t]
            nxt = traj.states[t + 1]
            feats = model.features(state)
            for ch in self.channels:
                self.gt[ch][t] = nxt.field(ch).values.ravel() - state.field(ch).values.ravel()
                for i, w in enumerate(feats[ch]):
                    self.feats[ch][t, i] = w.vector()

    def loss(self, theta: np.ndarray, lam: float | None = None, idx: np.ndarray | None = None) -> float:
        coeffs = self.model.channel_coefficients(np.asarray(theta, dtype=np.float64))
        total = 0.0
        for ch in self.channels:
            fv = self.feats[ch] if idx is None else self.feats[ch][idx]
            gv = self.gt[ch] if idx is None else self.gt[ch][idx]
            res = self.dt * np.einsum("i,tin->tn", coeffs[ch], fv) - gv
            total += float(np.sum(res * res))
        return total

    def grad(self, theta: np.ndarray, lam: float | None = None, idx: np.ndarray | None = None) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        coeffs = self.model.channel_coefficients(theta)
        jacs = self.model.channel_jacobians(theta)
        grad = np.zeros(self.model.n_params)
        for ch in self.channels:
            fv = self.feats[ch] if idx is None else self.feats[ch][idx]
            gv = self.gt[ch] if idx is None else self.gt[ch][idx]
            res = self.dt * np.einsum("i,tin->tn", coeffs[ch], fv) - gv
            g_c = 2.0 * self.dt * np.einsum("tin,tn->i", fv, res)
            grad += jacs[ch].T @ g_c
        return grad


def _require_compatible(traj: Trajectory, model: DecomposableModel) -> None:
    if traj.grid != model.grid:
        raise GridMismatchError(
            f"trajectory grid {traj.grid} does not match model grid {model.grid}"
        )
    if tuple(traj.field_names) != tuple(model.channels):
        raise ValueError(
            f"trajectory fields {traj.field_names} do not match model channels {model.channels}"
        )


def pooled_percentile_threshold(changes: list[ScalarField], keep_fraction: float) -> float:
    """Threshold keeping about `keep_fraction` of DFT bins pooled over steps."""
    if not (0.0 < keep_fraction <= 1.0):
        raise ValueError(f"keep fraction must be in (0, 1], got {keep_fraction}")
    mags = np.concatenate([np.abs(dft2(f).coeffs).ravel() for f in changes])
    if keep_fraction >= 1.0:
        return 0.0  # strict threshold at zero keeps every nonzero bin
    return float(np.quantile(mags, 1.0 - keep_fraction))


def preprocess(
    traj: Trajectory,
    model: DecomposableModel,
    beta: float | None = None,
    keep_frac: float | None = None,
    r: float = 0.1,
    seed: int = 0,
    lam: float = 1.0,
    identity: bool = False,
) -> CompressedDataset:
    """Decompose and sketch a trajectory. Pure function of its arguments.

    Channels routed to a fixed domain by the model get degenerate masks
    (all-false keeps everything in value space, all-true everything in
    frequency space); vfdd channels derive a per-timestep mask from the
    ground-truth update at threshold beta. `keep_frac` resolves beta per
    channel from the pooled magnitude distribution. With identity=True
    no projection is applied (n = d).
    """
    _require_compatible(traj, model)
    if traj.n_states < 2:
        raise ValueError("trajectory too short to preprocess (need >= 2 states)")
    if not (0.0 < r <= 1.0):
        raise ValueError(f"compression ratio must be in (0, 1], got {r}")
    d = model.grid.ncells
    if r * d < 1.0:
        raise ValueError(f"r*d = {r * d:g} < 1: nothing would survive projection")
    policy = model.domain_policy()
    if any(p == DOMAIN_VFDD for p in policy.values()) and beta is None and keep_frac is None:
        raise ValueError("model routes channels through vfdd: pass beta or keep_frac")

    grid = model.grid
    T = traj.n_states - 1
    counts = model.feature_counts

    changes = {ch: traj.changes(ch) for ch in model.channels}
    beta_used: dict[str, float] = {}
    for ch in model.channels:
        if policy[ch] == DOMAIN_VFDD:
            beta_used[ch] = (
                float(beta)
                if beta is not None
                else pooled_percentile_threshold(changes[ch], keep_frac)
            )

    if identity:
        n = d
        val_spec = freq_spec = None
        p_val = p_freq = None
    else:
        n = math.ceil(r * d)
        val_spec = make_projection(n, d, seed)
        freq_spec = make_projection(n, d, seed + 1)
        p_val = val_spec.matrix()
        p_freq = freq_spec.matrix()

    # zero-filled so skipped (structurally empty) components stay zero
    gt_val = {ch: np.zeros((T, n)) for ch in model.channels}
    gt_freq = {ch: np.zeros((T, n), dtype=np.complex128) for ch in model.channels}
    feat_val = {ch: np.zeros((T, counts[ch], n)) for ch in model.channels}
    feat_freq = {ch: np.zeros((T, counts[ch], n), dtype=np.complex128) for ch in model.channels}
    masks = {ch: np.empty((T, grid.nx, grid.ny), dtype=bool) for ch in model.channels}

    for t in range(T):
        feats = model.features(traj.states[t])
        for ch in model.channels:
            delta = changes[ch][t]
            if policy[ch] == DOMAIN_VFDD:
                pair = vfdd(delta, beta_used[ch])
                mask = pair.mask
            elif policy[ch] == DOMAIN_VALUE:
                mask = FrequencyMask.none(grid)
                pair = decompose_with_mask(delta, mask)
            else:
                mask = FrequencyMask.all(grid)
                pair = decompose_with_mask(delta, mask)
            masks[ch][t] = mask.keep
            has_freq = bool(mask.keep.any())
            has_val = not bool(mask.keep.all())
            pairs = [decompose_with_mask(w, mask) for w in feats[ch]]
            wv = np.stack([p.s_val.vector() for p in pairs]) if pairs else np.zeros((0, d))
            wf = (
                np.stack([p.s_freq.vector() for p in pairs])
                if pairs
                else np.zeros((0, d), dtype=np.complex128)
            )
            if identity:
                if has_val:
                    gt_val[ch][t] = pair.s_val.vector()
                    feat_val[ch][t] = wv
                if has_freq:
                    gt_freq[ch][t] = pair.s_freq.vector()
                    feat_freq[ch][t] = wf
            else:
                if has_val:
                    gt_val[ch][t] = p_val @ pair.s_val.vector()
                    feat_val[ch][t] = wv @ p_val.T
                if has_freq:
                    gt_freq[ch][t] = p_freq @ pair.s_freq.vector()
                    feat_freq[ch][t] = wf @ p_freq.T

    return CompressedDataset(
        model=model,
        channels=tuple(model.channels),
        n_timesteps=T,
        dt=grid.dt,
        n_val=n,
        n_freq=n,
        identity=identity,
        val_spec=val_spec,
        freq_spec=freq_spec,
        r=r,
        beta_used=beta_used,
        keep_frac=keep_frac,
        lam_default=lam,
        gt_val=gt_val,
        gt_freq=gt_freq,
        feat_val=feat_val,
        feat_freq=feat_freq,
        masks=masks,
    )


def loss_baseline(theta: np.ndarray, traj: Trajectory, model: DecomposableModel) -> float:
    """Plain squared mismatch over full fields, straight from the states.

    Reference implementation; training uses BaselineDataset, which caches
    the same features and must agree with this to rounding.
    """
    _require_compatible(traj, model)
    theta = np.asarray(theta, dtype=np.float64)
    coeffs = model.channel_coefficients(theta)
    dt = model.grid.dt
    total = 0.0
    for t in range(traj.n_states - 1):
        state = traj.states[t]
        nxt = traj.states[t + 1]
        feats = model.features(state)
        for ch in model.channels:
            pred = np.zeros(model.grid.shape)
            for c, w in zip(coeffs[ch], feats[ch]):
                pred = pred + c * w.values
            res = dt * pred - (nxt.field(ch).values - state.field(ch).values)
            total += float(np.sum(res * res))
    return total


def loss_reel(
    theta: np.ndarray,
    cds: CompressedDataset,
    lam: float | None = None,
    idx: np.ndarray | None = None,
) -> float:
    """Compressed two-part loss: value sketches + lam * frequency sketches."""
    if lam is None:
        lam = cds.lam_default
    if lam < 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    theta = np.asarray(theta, dtype=np.float64)
    coeffs = cds.model.channel_coefficients(theta)
    total = 0.0
    for ch in cds.channels:
        fv = cds.feat_val[ch] if idx is None else cds.feat_val[ch][idx]
        gv = cds.gt_val[ch] if idx is None else cds.gt_val[ch][idx]
        res_v = cds.dt * np.einsum("i,tin->tn", coeffs[ch], fv) - gv
        total += float(np.sum(res_v * res_v))
        if lam > 0.0:
            ff = cds.feat_freq[ch] if idx is None else cds.feat_freq[ch][idx]
            gf = cds.gt_freq[ch] if idx is None else cds.gt_freq[ch][idx]
            res_f = cds.dt * np.einsum("i,tin->tn", coeffs[ch], ff) - gf
            total += lam * float(np.sum(res_f.real**2 + res_f.imag**2))
    return total


def grad_reel(
    theta: np.ndarray,
    cds: CompressedDataset,
    lam: float | None = None,
    idx: np.ndarray | None = None,
) -> np.ndarray:
    """Analytic gradient of loss_reel via the coefficient jacobian."""
    if lam is None:
        lam = cds.lam_default
    theta = np.asarray(theta, dtype=np.float64)
    coeffs = cds.model.channel_coefficients(theta)
    jacs = cds.model.channel_jacobians(theta)
    grad = np.zeros(cds.model.n_params)
    for ch in cds.channels:
        fv = cds.feat_val[ch] if idx is None else cds.feat_val[ch][idx]
        gv = cds.gt_val[ch] if idx is None else cds.gt_val[ch][idx]
        res_v = cds.dt * np.einsum("i,tin->tn", coeffs[ch], fv) - gv
        g_c = 2.0 * cds.dt * np.einsum("tin,tn->i", fv, res_v)
        if lam > 0.0:
            ff = cds.feat_freq[ch] if idx is None else cds.feat_freq[ch][idx]
            gf = cds.gt_freq[ch] if idx is None else cds.gt_freq[ch][idx]
            res_f = cds.dt * np.einsum("i,tin->tn", coeffs[ch], ff) - gf
            g_c = g_c + lam * 2.0 * cds.dt * np.real(
                np.einsum("tin,tn->i", ff, np.conj(res_f))
            )
        grad += jacs[ch].T @ g_c
    return grad


@dataclass(eq=False)
class TrainResult:
    theta_hat: np.ndarray
    loss_history: np.ndarray  # (epochs,)
    wall_ms: np.ndarray  # (epochs,) update-loop time only
    theta_history: np.ndarray  # (epochs, n_params)
    lr: float
    seed: int
    theta_init: np.ndarray


def train(
    data: CompressedDataset | BaselineDataset | Trajectory,
    model: DecomposableModel,
    config: TrainConfig,
) -> TrainResult:
    """Mini-batch SGD over timesteps. Deterministic for a fixed seed.

    A Trajectory argument selects the uncompressed baseline (features are
    cached once up front); a CompressedDataset runs entirely in sketch
    space. Per-epoch wall clock covers the update loop only, so the two
    paths are timed on identical work shapes.
    """
    if isinstance(data, Trajectory):
        data = BaselineDataset(data, model)
    if data.model is not model and tuple(data.model.param_names) != tuple(model.param_names):
        raise ValueError("dataset was built for a different model family")
    lam = config.lam if isinstance(data, CompressedDataset) else None

    rng = np.random.default_rng(config.seed)
    scale = (
        np.asarray(config.theta_scale, dtype=np.float64)
        if config.theta_scale is not None
        else model.theta_true
    )
    if scale.shape != (model.n_params,):
        raise ValueError(f"theta_scale must have {model.n_params} entries")
    theta = scale * rng.uniform(0.5, 1.5, model.n_params)
    theta_init = theta.copy()

    T = data.n_timesteps
    n_batches = max(1, math.ceil(T / config.batch_size))
    loss_history = np.empty(config.epochs)
    wall_ms = np.empty(config.epochs)
    theta_history = np.empty((config.epochs, model.n_params))

    for epoch in range(config.epochs):
        perm = rng.permutation(T)
        start = time.perf_counter()
        for b in range(n_batches):
            idx = perm[b * config.batch_size : (b + 1) * config.batch_size]
            if idx.size == 0:
                continue
            g = data.grad(theta, lam=lam, idx=idx)
            theta = theta - config.lr * g
        wall_ms[epoch] = (time.perf_counter() - start) * 1e3
        loss = data.loss(theta, lam=lam)
        if not np.isfinite(loss) or not np.all(np.isfinite(theta)):
            raise DivergenceError(
                f"training diverged at epoch {epoch} (loss={loss}); "
                f"lower the learning rate (lr={config.lr:g})"
            )
        loss_history[epoch] = loss
        theta_history[epoch] = theta

    return TrainResult(
        theta_hat=theta,
        loss_history=loss_history,
        wall_ms=wall_ms,
        theta_history=theta_history,
        lr=config.lr,
        seed=config.seed,
        theta_init=theta_init,
    )


def grid_search_lr(
    data: CompressedDataset | BaselineDataset | Trajectory,
    model: DecomposableModel,
    config: TrainConfig,
    grid: tuple[float, ...] = LR_GRID,
    probe_epochs: int = 25,
) -> float:
    """Pick the learning rate with the lowest finite probe loss."""
    if isinstance(data, Trajectory):
        data = BaselineDataset(data, model)
    best_lr, best_loss = None, np.inf
    for lr in grid:
        probe = TrainConfig(
            lr=lr,
            epochs=probe_epochs,
            batch_size=config.batch_size,
            lam=config.lam,
            seed=config.seed,
            theta_scale=config.theta_scale,
        )
        try:
            result = train(data, model, probe)
        except DivergenceError:
            continue
        final = float(result.loss_history[-1])
        if final < best_loss:
            best_lr, best_loss = lr, final
    if best_lr is None:
        raise DivergenceError("every learning rate in the grid diverged")
    return best_lr


@dataclass(eq=False)
class EvalResult:
    mse: dict[str, float]  # per field, mean over surviving ICs and cells
    diverged: list[int]  # indices of ICs whose theta_hat rollout blew up
    n_evaluated: int


def evaluate_rollout_mse(
    theta_hat: np.ndarray,
    model: DecomposableModel,
    initial_conditions: list,
    n_steps: int,
) -> EvalResult:
    """Final-state MSE between theta_hat rollouts and true rollouts.

    `initial_conditions` holds ModelStates or IC seeds. Diverging
    rollouts are flagged and excluded from the mean, never silently
    dropped.
    """
    sums = {ch: 0.0 for ch in model.channels}
    diverged: list[int] = []
    n_ok = 0
    for i, ic in enumerate(initial_conditions):
        state = ic if isinstance(ic, ModelState) else model.initial_state(int(ic))
        try:
            traj_hat = rollout(model, state, n_steps, theta=np.asarray(theta_hat, dtype=np.float64))
        except DivergenceError:
            diverged.append(i)
            continue
        traj_true = rollout(model, state, n_steps)
        final_hat = traj_hat.states[-1]
        final_true = traj_true.states[-1]
        for ch in model.channels:
            diff = final_hat.field(ch).values - final_true.field(ch).values
            sums[ch] += float(np.mean(diff * diff))
        n_ok += 1
    mse = {ch: (sums[ch] / n_ok if n_ok else float("nan")) for ch in model.channels}
    return EvalResult(mse=mse, diverged=diverged, n_evaluated=n_ok)


# ---- compressed dataset persistence ----


def save_compressed(cds: CompressedDataset, path: str) -> None:
    """Write sketches to the shared binary container (kind "compressed").

    Payload, per timestep, per channel: the mask as packed bits, then
    gt_val, gt_freq (interleaved re/im), feat_val, feat_freq, all 64-bit
    little-endian floats.
    """
    grid = cds.model.grid
    header = {
        "kind": "compressed",
        "format_version": FORMAT_VERSION,
        "prng": PRNG_NAME,
        "model_config": cds.model.config_dict(),
        "channels": list(cds.channels),
        "feature_counts": {ch: int(m) for ch, m in cds.feature_counts.items()},
        "n_timesteps": cds.n_timesteps,
        "n_val": cds.n_val,
        "n_freq": cds.n_freq,
        "identity": cds.identity,
        "seed_val": None if cds.val_spec is None else cds.val_spec.seed,
        "seed_freq": None if cds.freq_spec is None else cds.freq_spec.seed,
        "r": cds.r,
        "beta_used": {ch: float(b) for ch, b in cds.beta_used.items()},
        "keep_frac": cds.keep_frac,
        "lam": cds.lam_default,
        "nx": grid.nx,
        "ny": grid.ny,
        "dx": grid.dx,
        "dt": grid.dt,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for t in range(cds.n_timesteps):
            for ch in cds.channels:
                fh.write(np.packbits(cds.masks[ch][t].ravel()).tobytes())
                fh.write(cds.gt_val[ch][t].astype("<f8", copy=False).tobytes())
                fh.write(cds.gt_freq[ch][t].astype("<c16", copy=False).tobytes())
                fh.write(cds.feat_val[ch][t].astype("<f8", copy=False).tobytes())
                fh.write(cds.feat_freq[ch][t].astype("<c16", copy=False).tobytes())


def load_compressed(path: str) -> CompressedDataset:
    header = read_header_compressed(path)
    model = build_model(header["model_config"])
    channels = tuple(header["channels"])
    T = int(header["n_timesteps"])
    n_val = int(header["n_val"])
    n_freq = int(header["n_freq"])
    counts = {ch: int(m) for ch, m in header["feature_counts"].items()}
    grid = model.grid
    d = grid.ncells
    mask_bytes = (d + 7) // 8
    identity = bool(header["identity"])
    val_spec = None if identity else make_projection(n_val, d, int(header["seed_val"]))
    freq_spec = None if identity else make_projection(n_freq, d, int(header["seed_freq"]))

    gt_val = {ch: np.empty((T, n_val)) for ch in channels}
    gt_freq = {ch: np.empty((T, n_freq), dtype=np.complex128) for ch in channels}
    feat_val = {ch: np.empty((T, counts[ch], n_val)) for ch in channels}
    feat_freq = {ch: np.empty((T, counts[ch], n_freq), dtype=np.complex128) for ch in channels}
    masks = {ch: np.empty((T, grid.nx, grid.ny), dtype=bool) for ch in channels}

    with open(path, "rb") as fh:
        fh.seek(8)
        (header_len,) = struct.unpack("<Q", fh.read(8))
        fh.seek(_HEADER_OFFSET + header_len)

        def take(nbytes: int, what: str) -> bytes:
            raw = fh.read(nbytes)
            if len(raw) < nbytes:
                raise DataFormatError(
                    f"{path}: payload truncated at offset {fh.tell()} while reading {what}"
                )
            return raw

        for t in range(T):
            for ch in channels:
                bits = np.frombuffer(take(mask_bytes, f"mask[{ch}][{t}]"), dtype=np.uint8)
                masks[ch][t] = np.unpackbits(bits, count=d).astype(bool).reshape(grid.shape)
                gt_val[ch][t] = np.frombuffer(take(n_val * 8, "gt_val"), dtype="<f8")
                gt_freq[ch][t] = np.frombuffer(take(n_freq * 16, "gt_freq"), dtype="<c16")
                m = counts[ch]
                feat_val[ch][t] = np.frombuffer(take(m * n_val * 8, "feat_val"), dtype="<f8").reshape(m, n_val)
                feat_freq[ch][t] = np.frombuffer(take(m * n_freq * 16, "feat_freq"), dtype="<c16").reshape(m, n_freq)
        if fh.read(1):
            raise DataFormatError(f"{path}: trailing bytes after expected payload end")

    return CompressedDataset(
        model=model,
        channels=channels,
        n_timesteps=T,
        dt=grid.dt,
        n_val=n_val,
        n_freq=n_freq,
        identity=identity,
        val_spec=val_spec,
        freq_spec=freq_spec,
        r=float(header["r"]),
        beta_used={ch: float(b) for ch, b in header.get("beta_used", {}).items()},
        keep_frac=header.get("keep_frac"),
        lam_default=float(header["lam"]),
        gt_val=gt_val,
        gt_freq=gt_freq,
        feat_val=feat_val,
        feat_freq=feat_freq,
        masks=masks,
    )


def read_header_compressed(path: str) -> dict:
    from .sim import read_header as _read

    header = _read(path)
    if header.get("kind") != "compressed":
        raise DataFormatError(
            f"{path}: file holds a {header.get('kind', 'trajectory')!r} payload, "
            "not a compressed dataset"
        )
    for key in ("model_config", "channels", "n_timesteps", "n_val", "n_freq", "feature_counts", "lam"):
        if key not in header:
            raise DataFormatError(f"{path}: compressed header is missing key {key!r}")
    return header
