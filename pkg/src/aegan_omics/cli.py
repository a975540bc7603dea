"""``pipeline`` command line.

Exit codes: 0 success, 2 config/validation error, 3 data error, 4 numeric
failure. The last stderr line is always one JSON record describing the outcome.
"""
import argparse
import json
import logging
import os
import statistics
import sys

from . import pipeline
from .errors import ConfigError, PipelineError

LOG_ENV = "AEGAN_LOG_LEVEL"


def _final_record(status, exit_code, **fields):
    record = {"event": "pipeline-exit", "status": status, "exit_code": exit_code, **fields}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _cmd_run(args):
    cfg = pipeline.load_config(args.config, seed=args.seed, out_dir=args.out,
                               gan_enabled=False if args.no_gan else None)
    if not cfg.out_dir:
        raise ConfigError("no output directory: pass --out or set [run] out")
    report, _ = pipeline.run_pipeline(cfg)
    return {"out": cfg.out_dir, "accuracy": report.accuracy, "auc": report.auc}


def _cmd_sweep(args):
    """Run once per seed into ``<out>/seed-<n>`` and write mean/stdev per metric."""
    keys = ("accuracy", "precision", "recall", "f1", "auc")
    per_seed = {}
    for seed in args.seeds:
        cfg = pipeline.load_config(args.config, seed=seed,
                                   out_dir=os.path.join(args.out, f"seed-{seed}"),
                                   gan_enabled=False if args.no_gan else None)
        report, _ = pipeline.run_pipeline(cfg)
        per_seed[str(seed)] = {k: getattr(report, k) for k in keys}
    summary = {"seeds": list(args.seeds), "per_seed": per_seed,
               "mean": {k: statistics.fmean(v[k] for v in per_seed.values()) for k in keys},
               "stdev": {k: (statistics.stdev([v[k] for v in per_seed.values()])
                             if len(per_seed) > 1 else 0.0) for k in keys}}
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"out": args.out, "mean_accuracy": summary["mean"]["accuracy"]}


def _cmd_stage(args):
    cfg = None
    if args.command == "select":
        cfg = pipeline.load_config(args.config, seed=args.seed, out_dir=args.out,
                                   gan_enabled=False if args.no_gan else None)
    pipeline.run_stage(args.command, in_dir=getattr(args, "in_dir", None), out_dir=args.out,
                       cfg=cfg)
    return {"out": args.out}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pipeline",
        description="Feature selection, per-matrix autoencoders, GAN class balancing and a "
                    "dense classifier over several feature matrices.",
        epilog=f"Exit codes: 0 ok, 2 config, 3 data, 4 numeric. Log level via ${LOG_ENV}.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every stage end to end")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--no-gan", action="store_true", help="skip GAN balancing (ablation)")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="run over several seeds and average the metrics")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--seeds", type=int, nargs="+", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--no-gan", action="store_true")
    sweep.set_defaults(func=_cmd_sweep)

    sel = sub.add_parser("select", help="load, split and select features")
    sel.add_argument("--config", required=True)
    sel.add_argument("--seed", type=int)
    sel.add_argument("--out", required=True)
    sel.add_argument("--no-gan", action="store_true")
    sel.set_defaults(func=_cmd_stage)

    for name, help_text in (("train-ae", "train per-matrix autoencoders"),
                            ("fuse", "concatenate latent blocks"),
                            ("oversample", "GAN-balance the training rows"),
                            ("train-clf", "train the dense classifier"),
                            ("evaluate", "score the test partition and write the report")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--in", dest="in_dir", required=True)
        p.add_argument("--out", required=True)
        p.set_defaults(func=_cmd_stage)
    return parser


def main(argv=None):
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        info = args.func(args)
    except PipelineError as err:
        _final_record("error", err.exit_code, command=args.command, stage=err.stage,
                      error=type(err).__name__, message=str(err))
        return err.exit_code
    _final_record("ok", 0, command=args.command, **info)
    return 0


if __name__ == "__main__":
    sys.exit(main())
