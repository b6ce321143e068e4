"""Command-line driver.

Subcommands: simulate, preprocess, train, eval, verify. Exit codes are
part of the contract: 0 success, 1 usage/configuration error, 2
data-format error, 3 numerical divergence.

Note the spectral convention: the forward transform is unnormalized, so
--beta thresholds scale with grid size. --keep-top sidesteps that by
picking the threshold from the observed magnitude distribution.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

import numpy as np

from . import learn, report, sim
from .config import load_config
from .errors import DataFormatError, DivergenceError
from .models import build_model
from .models.base import DecomposableModel

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here says 1."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise SystemExit2(message)


class SystemExit2(Exception):
    """Usage error carrying the message; mapped to exit code 1 in main."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="roll a model forward and write a trajectory file")
    p_sim.add_argument("config", help="YAML run config")
    p_sim.add_argument("out", help="output trajectory path")
    p_sim.add_argument("--steps", type=_positive_int, default=None, help="override n_steps")
    p_sim.add_argument("--ic-seed", type=int, default=None, help="override ic_seed")

    p_pre = sub.add_parser("preprocess", help="decompose + sketch a trajectory")
    p_pre.add_argument("dataset", help="trajectory file from `reel simulate`")
    p_pre.add_argument("out", help="output compressed dataset path")
    thresh = p_pre.add_mutually_exclusive_group()
    thresh.add_argument("--beta", type=float, default=None, help="spectral threshold (unnormalized DFT units)")
    thresh.add_argument("--keep-top", type=float, default=None, metavar="FRAC",
                        help="keep about this fraction of bins (picks beta from the data)")
    p_pre.add_argument("--ratio", type=float, default=0.1, help="compression ratio r = n/d")
    p_pre.add_argument("--seed", type=int, default=0, help="projection seed")
    p_pre.add_argument("--lambda", dest="lam", type=float, default=1.0,
                       help="frequency-part weight stored as the dataset default")

    p_tr = sub.add_parser("train", help="SGD on a compressed dataset (or --baseline trajectory)")
    p_tr.add_argument("data", help="compressed dataset, or trajectory with --baseline")
    p_tr.add_argument("out_csv", help="training log CSV (epoch, loss, wall_ms, theta...)")
    p_tr.add_argument("--baseline", action="store_true",
                      help="train the uncompressed squared loss on a raw trajectory")
    p_tr.add_argument("--epochs", type=_positive_int, default=200)
    p_tr.add_argument("--lr", type=float, default=None,
                      help="learning rate; omit to grid-search")
    p_tr.add_argument("--batch-size", type=_positive_int, default=32)
    p_tr.add_argument("--lambda", dest="lam", type=float, default=None,
                      help="frequency-part weight (default: the dataset's stored value)")
    p_tr.add_argument("--seed", type=int, default=0, help="init + shuffling seed")
    p_tr.add_argument("--theta-out", default=None, help="write theta_hat as a name,value CSV")
    p_tr.add_argument("--png", default=None, metavar="PREFIX",
                      help="render loss curves to PREFIX_loss.png")

    p_ev = sub.add_parser("eval", help="rollout MSE of a learned theta against the nominal model")
    p_ev.add_argument("theta_file", help="name,value CSV from `reel train --theta-out`")
    p_ev.add_argument("config", help="YAML run config of the model family")
    p_ev.add_argument("--rollout-steps", type=_positive_int, default=200)
    p_ev.add_argument("--n-ics", type=_positive_int, default=20)
    p_ev.add_argument("--seed", type=int, default=1000, help="base seed for held-out ICs")
    p_ev.add_argument("--out-csv", default=None, help="write the field,mse table here")
    p_ev.add_argument("--png", default=None, metavar="PREFIX",
                      help="render PREFIX_compare.png for the first IC")

    p_vf = sub.add_parser("verify", help="run a property suite and print a pass/fail table")
    p_vf.add_argument("--suite", required=True,
                      choices=("vfdd", "jl", "taylor", "gradcheck", "conservation"))
    p_vf.add_argument("--seed", type=int, default=0)

    return parser


def cmd_simulate(args: argparse.Namespace) -> int:
    rc = load_config(args.config)
    model = rc.build()
    n_steps = args.steps if args.steps is not None else rc.n_steps
    ic_seed = args.ic_seed if args.ic_seed is not None else rc.ic_seed
    t0 = time.perf_counter()
    traj = sim.rollout(model, n_steps=n_steps, ic_seed=ic_seed)
    sim.save(traj, args.out)
    print(
        f"simulated {model.name} {model.grid.nx}x{model.grid.ny}, {n_steps} steps, "
        f"ic_seed={ic_seed}: {args.out} ({time.perf_counter() - t0:.2f} s)"
    )
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace) -> int:
    traj = sim.load(args.dataset)
    model = build_model(traj.model_config)
    t0 = time.perf_counter()
    cds = learn.preprocess(
        traj,
        model,
        beta=args.beta,
        keep_frac=args.keep_top,
        r=args.ratio,
        seed=args.seed,
        lam=args.lam,
    )
    elapsed = time.perf_counter() - t0
    learn.save_compressed(cds, args.out)
    d = model.grid.ncells
    print(
        f"preprocessed {cds.n_timesteps} steps: d={d} -> n={cds.n_val} "
        f"(r={args.ratio:g}), seed={args.seed}, "
        + (f"beta={args.beta:g}" if args.beta is not None else f"keep_top={args.keep_top}")
        + f", {elapsed:.2f} s -> {args.out}"
    )
    if cds.beta_used:
        print("resolved beta: " + ", ".join(f"{ch}={b:.6g}" for ch, b in cds.beta_used.items()))
    return EXIT_OK


def _save_theta(path: str, names: tuple[str, ...], theta: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "value"])
        for name, value in zip(names, theta):
            writer.writerow([name, repr(float(value))])


def _load_theta(path: str, model: DecomposableModel) -> np.ndarray:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["name", "value"]:
        raise DataFormatError(f"{path}: expected a name,value CSV header")
    values = {}
    for row in rows[1:]:
        if len(row) != 2:
            raise DataFormatError(f"{path}: malformed row {row!r}")
        try:
            values[row[0]] = float(row[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}: non-numeric value in row {row!r}") from exc
    missing = [n for n in model.param_names if n not in values]
    if missing:
        raise DataFormatError(f"{path}: missing parameters {missing} for model {model.name!r}")
    return np.array([values[n] for n in model.param_names])


def cmd_train(args: argparse.Namespace) -> int:
    if args.baseline:
        traj = sim.load(args.data)
        model = build_model(traj.model_config)
        data = learn.BaselineDataset(traj, model)
        seeds = {"train": args.seed, "ic": traj.ic_seed}
        r = None
        lam = None
    else:
        header = learn.read_header_compressed(args.data)
        data = learn.load_compressed(args.data)
        model = data.model
        seeds = {"train": args.seed, "projection": header.get("seed_val")}
        r = data.r
        lam = args.lam if args.lam is not None else data.lam_default
    lr = args.lr
    base_cfg = learn.TrainConfig(
        lr=0.0 if lr is None else lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lam=1.0 if lam is None else lam,
        seed=args.seed,
    )
    if lr is None:
        lr = learn.grid_search_lr(data, model, base_cfg)
        print(f"grid-searched learning rate: {lr:g}")
    cfg = learn.TrainConfig(
        lr=lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lam=base_cfg.lam,
        seed=args.seed,
    )
    result = learn.train(data, model, cfg)
    report.write_train_csv(args.out_csv, model.param_names, result)
    if args.theta_out:
        _save_theta(args.theta_out, model.param_names, result.theta_hat)
    rr = report.RunReport(
        command="train" + (" --baseline" if args.baseline else ""),
        config_echo=model.config_dict(),
        seeds=seeds,
        r=r,
        preprocess_s=None,
        result=result,
        param_names=model.param_names,
        theta_true=model.theta_true,
    )
    sys.stdout.write(rr.render_text())
    print(f"training log: {args.out_csv}")
    if args.png:
        report.render_loss_png(f"{args.png}_loss.png", result)
        print(f"figures: {args.png}_loss.png")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    rc = load_config(args.config)
    model = rc.build()
    theta = _load_theta(args.theta_file, model)
    ics = [args.seed + i for i in range(args.n_ics)]
    result = learn.evaluate_rollout_mse(theta, model, ics, args.rollout_steps)
    for name, value in result.mse.items():
        print(f"{name}: mse {value:.6e}")
    if result.diverged:
        print(f"diverged rollouts (excluded): {result.diverged}")
    print(f"evaluated {result.n_evaluated}/{args.n_ics} initial conditions")
    if args.out_csv:
        report.write_eval_csv(args.out_csv, result)
        print(f"mse table: {args.out_csv}")
    if args.png:
        state0 = model.initial_state(ics[0])
        traj_true = sim.rollout(model, state0, args.rollout_steps)
        traj_hat = sim.rollout(model, state0, args.rollout_steps, theta=theta)
        report.render_comparison_png(
            f"{args.png}_compare.png", model, traj_true.states[-1], traj_hat.states[-1]
        )
        print(f"figures: {args.png}_compare.png")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from . import verify

    rows = verify.run_suite(args.suite, args.seed)
    width = max(len(r.name) for r in rows)
    all_ok = True
    for row in rows:
        status = "PASS" if row.ok else "FAIL"
        print(f"{row.name:<{width}}  {status}  {row.detail}")
        all_ok &= row.ok
    print(f"suite {args.suite}: " + ("PASS" if all_ok else "FAIL"))
    return EXIT_OK if all_ok else EXIT_DATA


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "simulate": cmd_simulate,
            "preprocess": cmd_preprocess,
            "train": cmd_train,
            "eval": cmd_eval,
            "verify": cmd_verify,
        }[args.command]
        return handler(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_DATA
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
