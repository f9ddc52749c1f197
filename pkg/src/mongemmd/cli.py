"""Command-line entry point.

Subcommands:
    generate   draw a synthetic point cloud and write it as CSV
    train      fit the transport map from a YAML config; writes loss.csv,
               model.ckpt, eval.json into the config's out_dir
    eval       push a CSV through a saved checkpoint and report statistics
    compare    neural map vs Sinkhorn baseline across sample sizes

Exit codes: 0 success, 2 usage/config/input problems, 3 numeric failure
during computation. All artifacts are written atomically, so an interrupted
run never leaves a truncated file.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import checkpoint as ckpt
from .config import RunConfig, load_config
from .data import DatasetFamily, DatasetSpec, generate, read_points_csv, write_points_csv
from .errors import InputError, NumericError
from .evaluation import evaluate
from .kernel import KernelSpec
from .sinkhorn import compare_runs, comparison_to_csv
from .train import LossHistory, TrainState, train
from .util import atomic_write_text

CONFIG_KEYS = """\
config file keys (YAML; defaults in parentheses):
  label                   free-form run name ("run")
  out_dir                 artifact directory, required for train/compare
  source / target         point clouds; fields:
    family                isotropic_gaussian | two_moons | two_circles
    n                     points (500), seed (1 source, 2 target)
    mean, variance        gaussian location ([0,0] / [5,5]) and spread (1.0)
    noise                 curve jitter SD (0.05), factor: inner radius (0.5)
  kernel:
    family                gaussian | matern ("gaussian")
    alpha                 gaussian bandwidth (1.0)
    matern_order          half | three_halves | five_halves ("three_halves")
    lengthscale           matern lengthscale (1.0)
  cost:
    family                squared_euclidean (the only choice)
  train:
    epochs (3000)         full passes over the data
    batch_size (500)      points per update; == data size -> one batch/epoch
    inv_lambda (1e-6)     cost weight 1/lambda; 0 trains pure matching
    hidden_widths ([64])  hidden layer sizes
    hidden_activation     relu | tanh ("relu")
    learning_rate (1e-4)  adam step size; beta1 (0.9), beta2 (0.999),
    adam_eps (1e-8)       adam stabilizer
    seed (0)              init + shuffling seed; shuffle (true)
  eval:
    n (1000)              held-out test points per side
    seed_offset (10000)   test seed = data seed + offset
  compare:
    sizes ([200,1000,2000])  data sizes to benchmark
    epsilon (null)           sinkhorn regularization; null -> 0.1 * median cost
    max_iters (10000), tol (1e-9), seed (0)
    size_cap (4096)          refuse larger sizes (dense cost matrix memory)
"""


def _mean_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise InputError(f"--mean expects comma-separated numbers, got {text!r}") from exc


def cmd_generate(args) -> int:
    spec = DatasetSpec(
        family=args.family,
        n=args.n,
        seed=args.seed,
        noise=args.noise,
        factor=args.factor,
        mean=_mean_arg(args.mean),
        variance=args.variance,
    )
    points = generate(spec)
    write_points_csv(args.out, points)
    print(f"wrote {points.shape[0]} points to {args.out}")
    return 0


def _test_specs(cfg: RunConfig) -> tuple[DatasetSpec, DatasetSpec]:
    off = cfg.eval.seed_offset
    src = replace(cfg.source, n=cfg.eval.n, seed=cfg.source.seed + off)
    tgt = replace(cfg.target, n=cfg.eval.n, seed=cfg.target.seed + off)
    return src, tgt


def _prepare_out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create out_dir {out}: {exc}") from exc
    return out


def cmd_train(args) -> int:
    cfg = load_config(args.config, args.set)
    out = _prepare_out_dir(cfg)
    ckpt_path = out / "model.ckpt"
    loss_path = out / "loss.csv"

    source = generate(cfg.source)
    target = generate(cfg.target)

    state = None
    prior = LossHistory()
    if args.resume and ckpt_path.exists():
        params, opt, epoch = ckpt.load_train_state(ckpt_path)
        state = TrainState(params=params, optimizer=opt, epoch=epoch)
        if loss_path.exists():
            stored = LossHistory.from_csv(loss_path.read_text(encoding="utf-8"))
            for i, e in enumerate(stored.epochs):
                if e <= epoch:
                    prior.epochs.append(e)
                    prior.objective.append(stored.objective[i])
                    prior.mmd2.append(stored.mmd2[i])
                    prior.cost.append(stored.cost[i])
        print(f"resuming {cfg.label} at epoch {epoch}", file=sys.stderr)

    every = max(1, cfg.train.epochs // 10)

    def progress(epoch, values):
        if not args.quiet and (epoch % every == 0 or epoch == cfg.train.epochs):
            print(
                f"epoch {epoch}: objective={values.objective:.6g} "
                f"mmd2={values.mmd2:.6g} cost={values.mean_cost:.6g}",
                file=sys.stderr,
            )

    state, hist = train(cfg.train, source, target, state=state, progress=progress)
    prior.extend(hist)

    ckpt.save_train_state(ckpt_path, state.params, state.optimizer, state.epoch)
    atomic_write_text(loss_path, prior.to_csv())

    src_spec, tgt_spec = _test_specs(cfg)
    report = evaluate(
        state.params, generate(src_spec), generate(tgt_spec), cfg.train.kernel, cfg.train.cost
    )
    atomic_write_text(out / "eval.json", report.to_json())

    mean = ", ".join(f"{v:.4f}" for v in report.mean)
    sd = ", ".join(f"{v:.4f}" for v in report.sd)
    print(f"trained {cfg.train.epochs} epochs; artifacts in {out}")
    print(f"pushforward mean [{mean}] sd [{sd}] "
          f"cost {report.transport_cost:.4f} mmd2 {report.mmd2:.3e}")
    return 0


def _kernel_from_flags(args) -> KernelSpec:
    return KernelSpec(
        family=args.kernel_family,
        alpha=args.alpha,
        matern_order=args.matern_order,
        lengthscale=args.lengthscale,
    )


def cmd_eval(args) -> int:
    params = ckpt.load_params(args.checkpoint)
    source = read_points_csv(args.source)
    target = read_points_csv(args.target)
    report = evaluate(params, source, target, _kernel_from_flags(args))
    text = report.to_json()
    if args.out:
        atomic_write_text(Path(args.out), text)
        print(f"wrote report to {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args.config, args.set)
    out = _prepare_out_dir(cfg)
    cap = cfg.compare.size_cap
    worst = max(cfg.compare.sizes)
    if worst > cap:
        per_matrix = 8 * worst * worst
        raise InputError(
            f"compare size {worst} exceeds size_cap {cap}: the dense cost matrix "
            f"needs {per_matrix / 1e9:.2f} GB and the solver holds several arrays "
            f"of that footprint; raise compare.size_cap only with enough memory"
        )
    gaussian = DatasetFamily.ISOTROPIC_GAUSSIAN
    if cfg.source.family is not gaussian or cfg.target.family is not gaussian:
        raise InputError("compare requires isotropic_gaussian source and target")
    rows = compare_runs(
        cfg.train,
        sizes=cfg.compare.sizes,
        source_mean=cfg.source.mean,
        target_mean=cfg.target.mean,
        variance=cfg.source.variance,
        epsilon=cfg.compare.epsilon,
        max_iters=cfg.compare.max_iters,
        tol=cfg.compare.tol,
        seed=cfg.compare.seed,
    )
    csv_text = comparison_to_csv(rows)
    path = out / "comparison.csv"
    atomic_write_text(path, csv_text)
    if not args.quiet:
        print(csv_text, end="", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mongemmd",
        description="Neural transport maps with a kernel matching penalty, "
                    "plus a Sinkhorn baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "generate", help="draw a synthetic point cloud and write CSV",
        description="Draw a synthetic point cloud and write it as CSV "
                    "(header x0,x1,...; 17 significant digits).",
    )
    p.add_argument("--family", required=True,
                   choices=["isotropic_gaussian", "two_moons", "two_circles"])
    p.add_argument("--n", type=int, required=True, help="number of points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.05, help="curve jitter SD")
    p.add_argument("--factor", type=float, default=0.5, help="inner circle radius")
    p.add_argument("--mean", default="0,0", help="gaussian mean, comma separated")
    p.add_argument("--variance", type=float, default=1.0, help="gaussian variance")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser(
        "train", help="fit the transport map from a YAML config",
        description="Train the map described by the config; writes loss.csv, "
                    "model.ckpt and eval.json into out_dir.",
        epilog=CONFIG_KEYS, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("config", help="YAML config path")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, e.g. --set train.epochs=100")
    p.add_argument("--resume", action="store_true",
                   help="continue from out_dir/model.ckpt if present")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser(
        "eval", help="evaluate a checkpoint on CSV data",
        description="Load a checkpoint, push the source CSV through the map, "
                    "and report pushforward statistics against the target CSV.",
    )
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--source", required=True, help="source points CSV")
    p.add_argument("--target", required=True, help="target points CSV")
    p.add_argument("--out", help="write the JSON report here (default: stdout)")
    p.add_argument("--kernel-family", default="gaussian", choices=["gaussian", "matern"])
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--matern-order", default="three_halves",
                   choices=["half", "three_halves", "five_halves"])
    p.add_argument("--lengthscale", type=float, default=1.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "compare", help="benchmark neural map vs sinkhorn across sizes",
        description="Run both methods on the Gaussian translation task at the "
                    "configured sizes and write comparison.csv into out_dir.",
        epilog=CONFIG_KEYS, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("config", help="YAML config path")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, e.g. --set compare.sizes=[200]")
    p.add_argument("--quiet", action="store_true", help="suppress the table echo")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
