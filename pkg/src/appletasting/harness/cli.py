"""Command-line entry point: ``appletasting {run,sweep,list-problems,validate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from ..envs import PROBLEM_DESCRIPTIONS
from .config import ConfigError, load_config
from .experiment import SWEEP_AXES, run_experiment, sweep


def _parse_values(text: str, axis: str):
    cast = float if axis == "lambda" else int
    return [cast(v) for v in text.split(",") if v.strip()]


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    update = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.reps is not None:
        update["reps"] = args.reps
    if update:
        cfg = cfg.model_copy(update=update)
    summary = run_experiment(cfg, args.out)
    print(json.dumps(summary.to_dict(), indent=2))
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    rows = sweep(cfg, args.axis, _parse_values(args.values, args.axis), args.out)
    for row in rows:
        print(f"{row['axis']}={row['value']:<6} {row['policy']:<22} median={row['final_regret_median']:.3f} "
              f"mean={row['final_regret_mean']:.3f} scaled_mean={row['scaled_mean']:.3f}")
    return 0


def _cmd_list(args) -> int:
    for pid, desc in PROBLEM_DESCRIPTIONS.items():
        print(f"{pid:<4} {desc}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: {len(cfg.policies)} policies, {cfg.reps} reps, seed {cfg.seed}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="appletasting", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a replicated experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="repeat an experiment over one parameter axis")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("list-problems", help="describe the builtin problems")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
