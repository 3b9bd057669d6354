"""Command line entry point: ``topodense <command> [flags]``.

Exit codes: 0 success, 2 usage error, 3 input-data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bounds, io
from .analysis import estimate_c_beta, lifetime_distribution, mass_concentration_by_class
from .persistence import barcode, is_beta_connected
from .sampler import ConfigurationError, LabeledDataset
from .trainer import (
    ModelConfig,
    latents_by_class,
    make_blobs,
    train,
    train_test_split,
)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


def _g(x: float) -> str:
    return f"{x:.15g}"


def _unit(name):
    def conv(s):
        v = float(s)
        if not 0.0 <= v <= 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1]")
        return v

    return conv


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _int_list(s):
    try:
        vals = [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {s!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("expected positive integers")
    return vals


def cmd_bound_eval(args):
    if args.p > args.q:
        raise UsageError(f"--p ({args.p}) must not exceed --q ({args.q})")
    print(_g(bounds.psi(args.p, args.q, args.b, args.l)))


def cmd_bound_solve(args):
    print(_g(bounds.min_extension_mass(args.p, args.l, args.b, args.c_beta)))


def cmd_bound_curve(args):
    if args.p_steps < 2:
        raise UsageError("--p-steps must be >= 2")
    grid = np.linspace(0.0, 1.0, args.p_steps)
    if args.kind == "extension":
        header = ["p", "l", "R"]
        rows = [
            (float(p), l, bounds.min_extension_mass(float(p), l, args.b, args.c_beta))
            for l in sorted(args.l_list)
            for p in grid
        ]
    elif args.kind == "critical":
        header = ["p", "threshold", "concentrates"]
        rows = [
            (
                float(p),
                bounds.critical_mass_threshold(float(p), args.b),
                int(bounds.critical_mass_holds(float(p), args.b, args.c_beta)),
            )
            for p in grid
        ]
    else:
        p0 = args.p
        q_grid = p0 + (1.0 - p0) * grid
        header = ["p", "l", "q", "psi"]
        rows = [
            (p0, l, float(q), bounds.psi(p0, min(float(q), 1.0), args.b, l))
            for l in sorted(args.l_list)
            for q in q_grid
        ]
    try:
        io.write_csv(args.out, header, rows)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_DATA


def cmd_barcode(args):
    points = io.read_point_cloud(args.input)
    bc = barcode(points)
    if args.out:
        io.write_barcode_csv(args.out, bc)
    else:
        print("i,j,death")
        for e in bc.edges:
            print(f"{e.i},{e.j},{_g(e.length)}")
    if args.beta is not None:
        if args.beta <= 0:
            raise UsageError("--beta must be positive")
        print(f"connected: {str(is_beta_connected(points, args.beta)).lower()}")


def _experiment_data(data: dict):
    if data["source"] == "csv":
        train_set = io.read_dataset_csv(data["train_csv"])
        test_set = io.read_dataset_csv(data["test_csv"], train_set.num_classes)
        K = max(train_set.num_classes, test_set.num_classes)
        return (
            LabeledDataset(train_set.features, train_set.labels, K),
            LabeledDataset(test_set.features, test_set.labels, K),
        )
    full = make_blobs(
        data["num_classes"],
        data["per_class"],
        data["dim"],
        sigma=data["sigma"],
        seed=data["seed"],
        center_scale=data["center_scale"],
    )
    return train_test_split(full, data["train_size"], seed=data["seed"])


def cmd_train(args):
    cfg = io.load_config(args.config)
    train_set, test_set = _experiment_data(cfg.data)
    mcfg = ModelConfig(
        input_dim=train_set.features.shape[1],
        hidden_layers=cfg.model["hidden_layers"],
        latent_dim=cfg.model["latent_dim"],
        num_classes=train_set.num_classes,
        leaky_slope=cfg.model["leaky_slope"],
    )
    result = train(mcfg, cfg.train, train_set, test_set)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = ["epoch", "ce_loss", "topo_loss", "train_err", "test_err", "mean_death", "lr"]
    io.write_csv(out / "metrics.csv", cols, ([row[c] for c in cols] for row in result.trace))
    io.save_checkpoint(
        out / "checkpoint.json", result.model, replace(cfg.train, lambda_topo=result.lambda_topo)
    )
    io.write_dataset_csv(out / "train.csv", train_set)
    io.write_dataset_csv(out / "test.csv", test_set)
    last = result.trace[-1]
    print(
        f"epochs={cfg.train.epochs} train_err={_g(last['train_err'])} "
        f"test_err={_g(last['test_err'])} mean_death={_g(last['mean_death'])}"
    )


def cmd_analyze(args):
    model, train_cfg = io.load_checkpoint(args.checkpoint)
    data = io.read_dataset_csv(args.data, model.config.num_classes)
    b = args.b or (train_cfg["sampler"]["b"] if train_cfg else 16)
    beta = args.beta or (train_cfg["beta"] if train_cfg else 1.0)
    z_by_class = latents_by_class(model, data)
    if args.mode == "lifetimes":
        edges = np.linspace(0.0, args.hist_max, args.bins + 1) if args.hist_max else None
        stats = lifetime_distribution(z_by_class, b, args.trials, args.seed, edges, args.threads)
        io.write_csv(args.out, ["bin_lo", "bin_hi", "count"], stats.histogram_rows())
        print(f"trials={stats.trials} mean={_g(stats.mean)} variance={_g(stats.variance)}")
    elif args.mode == "cbeta":
        est = estimate_c_beta(z_by_class, b, beta, args.trials, args.seed, threads=args.threads)
        rows = [(k, est.per_class[k], est.per_class_se[k], est.trials) for k in sorted(est.per_class)]
        rows.append(("pooled", est.pooled, est.pooled_se, est.trials * len(est.per_class)))
        io.write_csv(args.out, ["class", "c_beta", "se", "trials"], rows)
        print(f"pooled c_beta={_g(est.pooled)}")
    else:
        if not args.reference:
            raise UsageError("--mode mass requires --reference (training data CSV)")
        ref = io.read_dataset_csv(args.reference, model.config.num_classes)
        anchors = latents_by_class(model, ref)
        ext = args.beta_estimate or beta
        r_max = args.r_max or float(
            max(np.ptp(np.concatenate(list(z_by_class.values())), axis=0).max(), 1.0)
        )
        r_grid = np.linspace(0.0, r_max, args.r_steps)
        per, pooled = mass_concentration_by_class(
            anchors, z_by_class, r_grid, ext, args.max_anchors, args.seed
        )
        rows = [(k, m.r, m.p_hat, m.q_hat) for k in sorted(per) for m in per[k]]
        rows += [("pooled", m.r, m.p_hat, m.q_hat) for m in pooled]
        io.write_csv(args.out, ["class", "r", "p_hat", "q_hat"], rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topodense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("bound-eval", help="evaluate psi(p, q; b, l)")
    p.add_argument("--p", type=_unit("p"), required=True)
    p.add_argument("--q", type=_unit("q"), required=True)
    p.add_argument("--b", type=_positive_int, required=True)
    p.add_argument("--l", type=_positive_int, default=1)
    p.set_defaults(func=cmd_bound_eval)

    p = sub.add_parser("bound-solve", help="smallest extension mass R(p, l) for given c_beta")
    p.add_argument("--p", type=_unit("p"), required=True)
    p.add_argument("--b", type=_positive_int, required=True)
    p.add_argument("--l", type=_positive_int, default=1)
    p.add_argument("--c-beta", dest="c_beta", type=_unit("c-beta"), required=True)
    p.set_defaults(func=cmd_bound_solve)

    p = sub.add_parser("bound-curve", help="write bound curves as CSV")
    p.add_argument("--b", type=_positive_int, required=True)
    p.add_argument("--l-list", dest="l_list", type=_int_list, default=[1])
    p.add_argument("--c-beta", dest="c_beta", type=_unit("c-beta"), default=0.5)
    p.add_argument("--p-steps", dest="p_steps", type=int, default=101)
    p.add_argument("--kind", choices=("extension", "critical", "psi"), default="extension",
                   help="extension: (p, l, R); critical: (p, threshold); psi: sweep q at fixed --p")
    p.add_argument("--p", type=_unit("p"), default=0.1, help="fixed p for --kind psi")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bound_curve)

    p = sub.add_parser("barcode", help="0-dim Vietoris-Rips death-times of a point cloud")
    p.add_argument("--in", dest="input", required=True, help="CSV or JSON point cloud")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--out", default=None, help="write (i, j, death) CSV instead of stdout")
    p.set_defaults(func=cmd_barcode)

    p = sub.add_parser("train", help="train a model from an INI experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("analyze", help="estimators on a trained model")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="dataset CSV (features..., label)")
    p.add_argument("--mode", choices=("lifetimes", "cbeta", "mass"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--b", type=_positive_int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--beta-estimate", dest="beta_estimate", type=float, default=None,
                   help="extension used for mass estimates (default: --beta)")
    p.add_argument("--trials", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=_positive_int, default=20)
    p.add_argument("--hist-max", dest="hist_max", type=float, default=None)
    p.add_argument("--reference", default=None, help="training data CSV providing anchors")
    p.add_argument("--r-steps", dest="r_steps", type=_positive_int, default=50)
    p.add_argument("--r-max", dest="r_max", type=float, default=None)
    p.add_argument("--max-anchors", dest="max_anchors", type=_positive_int, default=500)
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="worker threads for barcode batches; output does not depend on it")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ConfigurationError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
