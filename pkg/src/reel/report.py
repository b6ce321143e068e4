"""Run reports: fixed-column CSV output plus optional PNG rendering.

CSV is the primary artifact. The training CSV always has the columns
epoch, loss, wall_ms, then one column per theta component, in the
model's parameter order. PNG rendering is opt-in and never load-bearing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field

import numpy as np

from .learn import EvalResult, TrainResult
from .models.base import DecomposableModel, ModelState

EVAL_CSV_HEADER = ("field", "mse")


def write_train_csv(path: str, param_names: tuple[str, ...], result: TrainResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "wall_ms", *param_names])
        for epoch in range(len(result.loss_history)):
            writer.writerow(
                [
                    epoch,
                    repr(float(result.loss_history[epoch])),
                    repr(float(result.wall_ms[epoch])),
                    *(repr(float(v)) for v in result.theta_history[epoch]),
                ]
            )


def write_eval_csv(path: str, result: EvalResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVAL_CSV_HEADER)
        for name, value in result.mse.items():
            writer.writerow([name, repr(float(value))])


@dataclass(eq=False)
class RunReport:
    """Everything a training run printed, reproducible from (config, seeds)."""

    command: str
    config_echo: dict
    seeds: dict
    r: float | None
    preprocess_s: float | None
    result: TrainResult
    param_names: tuple[str, ...]
    theta_true: np.ndarray | None
    mse: dict | None = None

    def render_text(self) -> str:
        lines = [f"reel {self.command}"]
        lines.append("config:")
        for key in sorted(self.config_echo):
            lines.append(f"  {key}: {self.config_echo[key]}")
        lines.append("seeds: " + ", ".join(f"{k}={v}" for k, v in sorted(self.seeds.items())))
        if self.r is not None:
            lines.append(f"compression ratio r: {self.r:g}")
        if self.preprocess_s is not None:
            lines.append(f"preprocessing time: {self.preprocess_s:.3f} s")
        lines.append(f"learning rate: {self.result.lr:g}")
        n_ep = len(self.result.loss_history)
        lines.append(f"epochs: {n_ep}, total update wall: {self.result.wall_ms.sum():.1f} ms")
        show = sorted(set([0, n_ep - 1] + list(range(0, n_ep, max(1, n_ep // 10)))))
        lines.append("epoch      loss           wall_ms")
        for e in show:
            lines.append(
                f"{e:5d}  {self.result.loss_history[e]:14.6e}  {self.result.wall_ms[e]:8.2f}"
            )
        lines.append("theta_hat:")
        for name, val in zip(self.param_names, self.result.theta_hat):
            lines.append(f"  {name}: {val:.10g}")
        if self.theta_true is not None:
            rel = np.abs(self.result.theta_hat / self.theta_true - 1.0)
            lines.append("relative error vs nominal theta:")
            for name, r_ in zip(self.param_names, rel):
                lines.append(f"  {name}: {r_:.3e}")
        if self.mse:
            lines.append("rollout MSE:")
            for name, val in self.mse.items():
                lines.append(f"  {name}: {val:.6e}")
        return "\n".join(lines) + "\n"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_loss_png(path: str, result: TrainResult) -> None:
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    epochs = np.arange(len(result.loss_history))
    ax1.semilogy(epochs, result.loss_history)
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("loss")
    ax1.set_title("training loss")
    ax2.plot(epochs, result.wall_ms)
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("wall ms")
    ax2.set_title("per-epoch update wall time")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_state_png(path: str, state: ModelState, channels: tuple[str, ...]) -> None:
    plt = _pyplot()
    n = len(channels)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.0), squeeze=False)
    for ax, name in zip(axes[0], channels):
        im = ax.imshow(state.field(name).values, origin="lower", cmap="viridis")
        ax.set_title(name)
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_comparison_png(
    path: str,
    model: DecomposableModel,
    state_true: ModelState,
    state_hat: ModelState,
) -> None:
    """Side-by-side final states: nominal theta, learned theta, difference."""
    plt = _pyplot()
    channels = model.channels
    n = len(channels)
    fig, axes = plt.subplots(n, 3, figsize=(10.5, 3.0 * n), squeeze=False)
    for row, name in enumerate(channels):
        a = state_true.field(name).values
        b = state_hat.field(name).values
        for col, (arr, title) in enumerate(
            ((a, f"{name} (nominal)"), (b, f"{name} (learned)"), (b - a, f"{name} (difference)"))
        ):
            im = axes[row][col].imshow(arr, origin="lower", cmap="viridis")
            axes[row][col].set_title(title)
            fig.colorbar(im, ax=axes[row][col], fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
