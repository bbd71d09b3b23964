"""Command line interface.

Subcommands:
  simulate    build a labeled synthetic channel dataset
  preprocess  mask + normalize a dataset
  stats       per-category channel statistics of a dataset
  train       train the conditional recurrent GAN
  generate    sample channels from a checkpoint
  evaluate    compare generated datasets against a reference
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from chanforge import preprocess as PP
from chanforge import simkit
from chanforge.datasets import load_dataset, save_dataset


def _cmd_simulate(args):
    if args.config:
        with open(args.config) as f:
            spec = json.load(f)
        configs = [simkit.ScenarioConfig(**c) for c in spec["scenarios"]]
        n_per = int(spec.get("n_per_config", args.n_per_config))
    else:
        configs = [
            simkit.ScenarioConfig(category=simkit.WEAK,
                                  n_snapshots=args.snapshots,
                                  n_delay_bins=args.delay_bins),
            simkit.ScenarioConfig(category=simkit.STRONG,
                                  n_snapshots=args.snapshots,
                                  n_delay_bins=args.delay_bins),
        ]
        n_per = args.n_per_config
    ds = simkit.build_dataset(configs, n_per, master_seed=args.seed)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} channels to {args.out}")


def _cmd_preprocess(args):
    ds = load_dataset(getattr(args, "in"))
    out = PP.preprocess_dataset(ds, threshold=args.threshold)
    save_dataset(out, args.out)
    b = out.manifest["bounds"]
    print(f"wrote normalized dataset to {args.out} "
          f"(bounds [{b['p_min']:.2f}, {b['p_max']:.2f}] dB)")


def _cmd_stats(args):
    from chanforge.stats import stats_summary
    ds = load_dataset(getattr(args, "in"))
    summary = stats_summary(ds)
    payload = summary.to_json_dict()
    if not args.samples:
        payload.pop("samples")
    with open(args.out, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    for cat, means in summary.means.items():
        line = ", ".join(f"{k}={v:.4g}" for k, v in means.items())
        print(f"{cat}: {line}")
    print(f"wrote {args.out}")


def _cmd_train(args):
    from chanforge.train import TrainConfig, train
    ds = load_dataset(args.data)
    if args.config:
        with open(args.config) as f:
            cfg = TrainConfig(**json.load(f))
    else:
        cfg = TrainConfig()
    if args.epochs is not None:
        cfg = dataclasses.replace(cfg, epochs=args.epochs)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    _, history = train(ds, cfg, out_dir=args.out)
    last = history.rows[-1]
    print(f"finished {last['step'] + 1} steps; final losses: "
          f"D={last['loss_d']:.4f} G={last['loss_total']:.4f}")
    print(f"checkpoint and train_log.csv in {args.out}")


def _cmd_generate(args):
    from chanforge.train import generate, load_checkpoint
    ckpt = load_checkpoint(args.ckpt)
    ds = generate(ckpt, label=args.label, n=args.n, seed=args.seed)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} generated '{args.label}' channels to {args.out}")


def _cmd_evaluate(args):
    from chanforge.evalreport import evaluate, render_figures, write_report
    reference = load_dataset(args.ref)
    generated = {}
    for item in args.gen:
        if "=" not in item:
            raise SystemExit(f"--gen expects method=dir, got {item!r}")
        name, path = item.split("=", 1)
        generated[name] = load_dataset(path)
    report = evaluate(reference, generated)
    paths = write_report(report, args.out)
    if not args.no_figures:
        render_figures(report, reference, generated, args.out)
    for feat, ranked in report.rankings.items():
        print(f"{feat}: best -> worst: {', '.join(ranked)}")
    print(f"report files: {', '.join(sorted(paths.values()))}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chanforge", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="build a synthetic channel dataset")
    ps.add_argument("--config", help="JSON file with scenario configs")
    ps.add_argument("--out", required=True)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--n-per-config", type=int, default=300)
    ps.add_argument("--snapshots", type=int, default=300)
    ps.add_argument("--delay-bins", type=int, default=300)
    ps.set_defaults(func=_cmd_simulate)

    pp = sub.add_parser("preprocess", help="mask + normalize a dataset")
    pp.add_argument("--in", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--threshold", type=float, default=PP.DEFAULT_THRESHOLD_DB)
    pp.set_defaults(func=_cmd_preprocess)

    pt = sub.add_parser("stats", help="per-category channel statistics")
    pt.add_argument("--in", required=True)
    pt.add_argument("--out", default="summary.json")
    pt.add_argument("--samples", action="store_true",
                    help="include per-channel samples in the JSON")
    pt.set_defaults(func=_cmd_stats)

    tr = sub.add_parser("train", help="train the conditional recurrent GAN")
    tr.add_argument("--data", required=True)
    tr.add_argument("--config", help="JSON TrainConfig")
    tr.add_argument("--out", required=True)
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--seed", type=int)
    tr.set_defaults(func=_cmd_train)

    pg = sub.add_parser("generate", help="sample channels from a checkpoint")
    pg.add_argument("--ckpt", required=True)
    pg.add_argument("--label", required=True, choices=["weak", "strong"])
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out", required=True)
    pg.set_defaults(func=_cmd_generate)

    pe = sub.add_parser("evaluate", help="compare generated datasets to a reference")
    pe.add_argument("--ref", required=True)
    pe.add_argument("--gen", nargs="+", required=True, metavar="METHOD=DIR")
    pe.add_argument("--out", required=True)
    pe.add_argument("--no-figures", action="store_true")
    pe.set_defaults(func=_cmd_evaluate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
