"""Command line interface.

Subcommands:

* ``sweep``    - run the configured Monte Carlo grid and export CSV + manifest
* ``trial``    - run a single seeded frame and print its record (verbose trace)
* ``validate`` - check a configuration and exit nonzero on violations
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

from .sim import SweepConfig, export, run_sweep, run_trial


def _load_config(path):
    if path is None:
        return SweepConfig()
    with open(path) as fh:
        return SweepConfig.from_dict(json.load(fh))


def _apply_overrides(cfg, args):
    updates = {}
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        updates["base_seed"] = args.seed
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(
        prog="otfssim",
        description="Delay-Doppler link simulator: pilot schemes, channel "
                    "estimation and equalization sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run the Monte Carlo grid and export results")
    sweep.add_argument("--config", help="JSON sweep configuration file")
    sweep.add_argument("--output-dir", default="results", help="export directory")
    sweep.add_argument("--trials", type=int, help="override trials per grid point")
    sweep.add_argument("--seed", type=int, help="override the base seed")
    sweep.add_argument("--threads", type=int, default=1,
                       help="worker processes (results identical to serial)")

    trial = sub.add_parser("trial", help="run one seeded frame and print its record")
    trial.add_argument("--config", help="JSON sweep configuration file")
    trial.add_argument("--scheme", default="s1d", choices=("s1d", "ep"))
    trial.add_argument("--equalizer", default="mrc", choices=("mrc", "lmmse"))
    trial.add_argument("--alpha", type=float, default=0.4)
    trial.add_argument("--seed", type=int, default=1)
    trial.add_argument("--n-iter", type=int, help="override estimation passes")

    validate = sub.add_parser("validate", help="check a configuration file")
    validate.add_argument("--config", help="JSON sweep configuration file")
    return parser


def _cmd_sweep(args):
    cfg = _apply_overrides(_load_config(args.config), args)
    start = time.perf_counter()
    result = run_sweep(cfg, threads=args.threads, progress=_print_point)
    csv_path, manifest_path = export(result, args.output_dir)
    elapsed = time.perf_counter() - start
    print(f"wrote {csv_path} and {manifest_path} in {elapsed:.1f} s")
    return 0


def _print_point(p):
    print(f"{p.scheme:>4} {p.equalizer:>5} alpha={p.alpha:<5.3g} "
          f"nmse={p.nmse:.3e} ber={p.ber:.3e} "
          f"papr={p.papr_mean_db:.2f}dB se={p.se:.3f}")


def _cmd_trial(args):
    cfg = _load_config(args.config)
    if args.n_iter is not None:
        cfg = dataclasses.replace(cfg, n_iter=args.n_iter)
    record, trace = run_trial(cfg, args.scheme, args.equalizer, args.alpha,
                              args.seed, with_trace=True)
    for row in trace:
        print(f"pass {row['iteration']}: nmse={row['nmse']:.6e} ber={row['ber']:.6e}")
    print(json.dumps(dataclasses.asdict(record), indent=2, sort_keys=True))
    return 0


def _cmd_validate(args):
    cfg = _load_config(args.config)
    problems = cfg.validate()
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return 1
    print("configuration ok")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"sweep": _cmd_sweep, "trial": _cmd_trial, "validate": _cmd_validate}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
