"""Explicit-Euler forward simulation and the binary trajectory container.

File layout (all integers little-endian):

  bytes 0..3    magic b"REEL"
  bytes 4..7    format version, u32
  bytes 8..15   header length H, u64
  bytes 16..    H bytes of UTF-8 JSON header
  then          per state, per field, nx*ny float64 values in row-major
                order

The header carries the full model config (which includes theta_true and
any source seeds), the field names in payload order, and the state
count, so a file is self-describing and the payload can be skipped for
header-only inspection.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, DivergenceError
from .field import GridSpec, ScalarField
from .models.base import DecomposableModel, ModelState
from .sketch import PRNG_NAME

FORMAT_VERSION = 1
_MAGIC = b"REEL"
_HEADER_OFFSET = 16  # magic + version + header length


@dataclass(eq=False)
class Trajectory:
    """States at t = 0..T plus the config that generated them."""

    grid: GridSpec
    model_config: dict
    states: list[ModelState]
    field_names: tuple[str, ...]
    ic_seed: int = 0
    theta: np.ndarray | None = None  # parameters the rollout actually used
    param_names: tuple[str, ...] = ()

    @property
    def n_states(self) -> int:
        return len(self.states)

    def changes(self, name: str) -> list[ScalarField]:
        out = []
        for prev, nxt in zip(self.states[:-1], self.states[1:]):
            out.append(
                ScalarField(self.grid, nxt.field(name).values - prev.field(name).values)
            )
        return out


def step(
    model: DecomposableModel,
    state: ModelState,
    dt: float | None = None,
    theta: np.ndarray | None = None,
) -> ModelState:
    """One explicit-Euler step. Rejects dt beyond the stability budget."""
    if dt is None:
        dt = model.grid.dt
    budget = model.stable_dt()
    if dt > budget:
        raise ValueError(
            f"dt={dt:g} exceeds the explicit-Euler stability budget {budget:g} "
            f"for model {model.name!r}"
        )
    rhs = model.decomposed_rhs(state, theta)
    soft = model.soft_ranges()
    limits = model.hard_limits()
    new_fields = {}
    for ch in model.channels:
        vals = state.field(ch).values + dt * rhs[ch].values
        if not np.all(np.isfinite(vals)):
            raise DivergenceError(
                f"field {ch!r} became non-finite at step {state.t_index}"
            )
        peak = float(np.max(np.abs(vals)))
        if peak > limits[ch]:
            raise DivergenceError(
                f"field {ch!r} exceeded divergence limit {limits[ch]:g} "
                f"(|value| up to {peak:g}) at step {state.t_index}"
            )
        if ch in soft:
            lo, hi = soft[ch]
            if float(np.min(vals)) < lo or peak > hi:
                warnings.warn(
                    f"field {ch!r} left its physical range [{lo}, {hi}] "
                    f"at step {state.t_index}",
                    RuntimeWarning,
                    stacklevel=2,
                )
        new_fields[ch] = ScalarField(model.grid, vals)
    return state.advanced(new_fields)


def rollout(
    model: DecomposableModel,
    initial: ModelState | None = None,
    n_steps: int = 1,
    theta: np.ndarray | None = None,
    ic_seed: int = 0,
) -> Trajectory:
    """Simulate n_steps explicit-Euler steps from a (seeded) initial state."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if initial is None:
        initial = model.initial_state(ic_seed)
    states = [initial]
    for _ in range(n_steps):
        states.append(step(model, states[-1], theta=theta))
    used = model.theta_true if theta is None else np.asarray(theta, dtype=np.float64)
    return Trajectory(
        grid=model.grid,
        model_config=model.config_dict(),
        states=states,
        field_names=tuple(model.channels),
        ic_seed=ic_seed,
        theta=used,
        param_names=tuple(model.param_names),
    )


def extract_changes(traj: Trajectory) -> dict[str, list[ScalarField]]:
    """Per-field temporal updates u(t+dt) - u(t), one list entry per step."""
    if traj.n_states < 2:
        raise ValueError("need at least 2 states to extract changes")
    return {name: traj.changes(name) for name in traj.field_names}


def save(traj: Trajectory, path: str) -> None:
    header = {
        "kind": "trajectory",
        "format_version": FORMAT_VERSION,
        "prng": PRNG_NAME,
        "model_config": traj.model_config,
        "field_names": list(traj.field_names),
        "n_states": traj.n_states,
        "nx": traj.grid.nx,
        "ny": traj.grid.ny,
        "dx": traj.grid.dx,
        "dt": traj.grid.dt,
        "ic_seed": traj.ic_seed,
        "theta": None if traj.theta is None else [float(v) for v in traj.theta],
        "param_names": list(traj.param_names),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for st in traj.states:
            for name in traj.field_names:
                fh.write(st.field(name).values.astype("<f8", copy=False).tobytes())


def read_header(path: str) -> dict:
    """Parse and validate the header without touching the payload."""
    with open(path, "rb") as fh:
        prefix = fh.read(_HEADER_OFFSET)
        if len(prefix) < _HEADER_OFFSET:
            raise DataFormatError(
                f"{path}: truncated before byte {_HEADER_OFFSET}; not a dataset file"
            )
        if prefix[:4] != _MAGIC:
            raise DataFormatError(
                f"{path}: bad magic {prefix[:4]!r} at offset 0, expected {_MAGIC!r}"
            )
        (version,) = struct.unpack("<I", prefix[4:8])
        if version != FORMAT_VERSION:
            raise DataFormatError(
                f"{path}: unsupported format version {version} at offset 4"
            )
        (header_len,) = struct.unpack("<Q", prefix[8:16])
        blob = fh.read(header_len)
        if len(blob) < header_len:
            raise DataFormatError(
                f"{path}: header truncated at offset {_HEADER_OFFSET + len(blob)}, "
                f"expected {header_len} header bytes"
            )
    try:
        header = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: header is not valid JSON: {exc}") from exc
    for key in ("model_config", "nx", "ny", "dx", "dt"):
        if key not in header:
            raise DataFormatError(f"{path}: header is missing key {key!r}")
    return header


def load(path: str) -> Trajectory:
    header = read_header(path)
    kind = header.get("kind", "trajectory")
    if kind != "trajectory":
        raise DataFormatError(f"{path}: file holds a {kind!r} payload, not a trajectory")
    for key in ("field_names", "n_states"):
        if key not in header:
            raise DataFormatError(f"{path}: trajectory header is missing key {key!r}")
    nx, ny = int(header["nx"]), int(header["ny"])
    grid = GridSpec(nx, ny, float(header["dx"]), float(header["dt"]))
    field_names = tuple(header["field_names"])
    n_states = int(header["n_states"])
    cells = nx * ny
    frame_bytes = cells * 8
    with open(path, "rb") as fh:
        fh.seek(8)
        (header_len,) = struct.unpack("<Q", fh.read(8))
        payload_start = _HEADER_OFFSET + header_len
        fh.seek(payload_start)
        states = []
        for t in range(n_states):
            fields = {}
            for name in field_names:
                raw = fh.read(frame_bytes)
                if len(raw) < frame_bytes:
                    raise DataFormatError(
                        f"{path}: payload truncated at offset {fh.tell()} "
                        f"(state {t}, field {name!r})"
                    )
                arr = np.frombuffer(raw, dtype="<f8").reshape(nx, ny)
                fields[name] = ScalarField(grid, arr)
            states.append(ModelState(grid, fields, t_index=t))
        extra = fh.read(1)
        if extra:
            raise DataFormatError(
                f"{path}: trailing bytes after expected payload end at offset "
                f"{payload_start + n_states * len(field_names) * frame_bytes}"
            )
    theta = header.get("theta")
    return Trajectory(
        grid=grid,
        model_config=header["model_config"],
        states=states,
        field_names=field_names,
        ic_seed=int(header.get("ic_seed", 0)),
        theta=None if theta is None else np.asarray(theta, dtype=np.float64),
        param_names=tuple(header.get("param_names", ())),
    )
