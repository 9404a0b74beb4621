"""Command-line interface.

Subcommands: `run` executes a full experiment and writes all artifacts,
`trial` runs a single seeded trial, `shuffle-control` recomputes the
time-shuffled divergence from a recorded belief dump, and `report` prints
a digest of a finished run. Flag values win over the DYADREG_OUT
environment variable, which wins over the config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import CONDITION_NAMES, ConfigError, ExperimentConfig, load_config
from .harness import (
    load_beliefs_csv,
    load_trial_csv,
    run_experiment,
    run_trial,
    shuffle_seed,
    write_beliefs_csv,
    write_trial_csv,
)
from .metrics import ALIGNMENT_WINDOW, aggregate_conditions, auc_window, shuffle_control
from .probability import make_rng

ENV_OUT = "DYADREG_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadreg",
        description="Simulate a parent-infant dyad co-regulating a shared "
        "visceral state through a naming game.",
    )
    sub = parser.add_subparsers(dest="command")

    def add_common(p, single_condition=False):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="root seed")
        p.add_argument("--iterations", type=int, help="two-round exchanges per trial")
        p.add_argument("--out", help="artifact directory")
        p.add_argument(
            "--dump-beliefs",
            action="store_true",
            default=None,
            help="also write per-round belief vectors",
        )
        if single_condition:
            p.add_argument(
                "--condition",
                choices=CONDITION_NAMES,
                default=None,
                help="negotiation rule (default mhng)",
            )
        else:
            p.add_argument(
                "--conditions",
                nargs="+",
                choices=CONDITION_NAMES,
                default=None,
                help="negotiation rules to run",
            )

    p_run = sub.add_parser("run", help="run a full experiment")
    add_common(p_run)
    p_run.add_argument("--trials", type=int, help="seeded repetitions per condition")
    p_run.add_argument("--workers", type=int, help="trial-level processes")
    p_run.add_argument(
        "--print-default-config",
        action="store_true",
        help="print the default config as JSON and exit",
    )

    p_trial = sub.add_parser("trial", help="run one seeded trial")
    add_common(p_trial, single_condition=True)
    p_trial.add_argument("--trial-index", type=int, default=0)

    p_shuf = sub.add_parser(
        "shuffle-control", help="recompute the time-shuffled divergence for a trial"
    )
    p_shuf.add_argument("--run", required=True, help="run directory with artifacts")
    p_shuf.add_argument("--condition", choices=CONDITION_NAMES, default="mhng")
    p_shuf.add_argument("--trial-index", type=int, default=0)
    p_shuf.add_argument("--seed", type=int, help="override the permutation seed")
    p_shuf.add_argument(
        "--window-start", type=int, default=ALIGNMENT_WINDOW[0], help="first iteration"
    )
    p_shuf.add_argument(
        "--window-end", type=int, default=ALIGNMENT_WINDOW[1], help="last iteration"
    )

    p_rep = sub.add_parser("report", help="print a digest of a finished run")
    p_rep.add_argument("--run", required=True, help="run directory with artifacts")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    for name in ("seed", "iterations", "trials", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    if getattr(args, "conditions", None):
        changes["conditions"] = tuple(args.conditions)
    if getattr(args, "condition", None):
        changes["conditions"] = (args.condition,)
    if getattr(args, "dump_beliefs", None):
        changes["dump_beliefs"] = True
    if getattr(args, "out", None):
        changes["out_dir"] = args.out
    elif os.environ.get(ENV_OUT):
        changes["out_dir"] = os.environ[ENV_OUT]
    return cfg.replaced(**changes)


def _cmd_run(args) -> int:
    if args.print_default_config:
        print(ExperimentConfig().to_json(), end="")
        return 0
    config = _resolve_config(args)
    manifest = run_experiment(config)
    summary_path = Path(config.out_dir) / "summary.json"
    summary = json.loads(summary_path.read_text())
    for cond in config.conditions:
        e = summary["conditions"][cond]
        print(
            f"{cond:>6}: mean c_norm {e['mean_c_norm']:.4f} "
            f"+/- {e['std_c_norm']:.4f} over {e['n_trials']} trials"
        )
    print(f"ranking: {' > '.join(summary['c_norm_ranking'])}")
    print(f"artifacts: {config.out_dir} ({len(manifest.artifacts)} files)")
    return 0


def _cmd_trial(args) -> int:
    config = _resolve_config(args)
    condition = config.conditions[0]
    log = run_trial(config, condition, args.trial_index)
    trials_dir = Path(config.out_dir) / "trials"
    trials_dir.mkdir(parents=True, exist_ok=True)
    path = trials_dir / f"{condition}_t{args.trial_index:02d}.csv"
    write_trial_csv(log, path)
    print(f"wrote {path}")
    if config.dump_beliefs:
        bpath = trials_dir / f"{condition}_t{args.trial_index:02d}_beliefs.csv"
        write_beliefs_csv(log, bpath)
        print(f"wrote {bpath}")
    mean_c = float(log.iteration_series("c_norm").mean())
    print(f"{condition} trial {args.trial_index}: seed {log.seed}, mean c_norm {mean_c:.4f}")
    return 0


def _cmd_shuffle(args) -> int:
    run_dir = Path(args.run)
    config_path = run_dir / "config.json"
    if not config_path.is_file():
        print(f"error: no config.json under {run_dir}", file=sys.stderr)
        return 1
    config = ExperimentConfig.from_json(config_path.read_text())
    name = f"{args.condition}_t{args.trial_index:02d}_beliefs.csv"
    belief_path = run_dir / "trials" / name
    if not belief_path.is_file():
        print(
            f"error: {belief_path} not found; rerun with --dump-beliefs",
            file=sys.stderr,
        )
        return 1
    beliefs = load_beliefs_csv(belief_path)
    parent_seq = beliefs["parent_iterations"]
    infant_seq = beliefs["infant_iterations"]
    n = parent_seq.shape[0]
    lo, hi = args.window_start - 1, args.window_end - 1
    if not 0 <= lo < hi < n:
        print(
            f"error: window [{args.window_start}, {args.window_end}] "
            f"needs more than the {n} recorded iterations",
            file=sys.stderr,
        )
        return 1
    perm_seed = (
        args.seed
        if args.seed is not None
        else shuffle_seed(config.seed, args.condition, args.trial_index)
    )
    original = shuffle_control(parent_seq, infant_seq, permutation=np.arange(n))
    shuffled = shuffle_control(parent_seq, infant_seq, rng=make_rng(perm_seed))
    result = {
        "condition": args.condition,
        "trial": args.trial_index,
        "permutation_seed": perm_seed,
        "window": [args.window_start, args.window_end],
        "auc_original": auc_window(original, lo, hi),
        "auc_shuffled": auc_window(shuffled, lo, hi),
        "jsd_median_original": float(np.median(original[lo : hi + 1])),
        "jsd_median_shuffled": float(np.median(shuffled[lo : hi + 1])),
    }
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _cmd_report(args) -> int:
    run_dir = Path(args.run)
    trials_dir = run_dir / "trials"
    if not trials_dir.is_dir():
        print(f"error: no trials directory under {run_dir}", file=sys.stderr)
        return 1
    paths = sorted(
        p for p in trials_dir.glob("*.csv") if not p.name.endswith("_beliefs.csv")
    )
    if not paths:
        print(f"error: no trial CSVs under {trials_dir}", file=sys.stderr)
        return 1
    logs = [load_trial_csv(p) for p in paths]
    agg = aggregate_conditions(logs)
    print(f"{'condition':>10} {'trials':>6} {'mean':>8} {'std':>8} {'sem':>8}")
    for cond in sorted(agg, key=lambda c: agg[c]["mean_c_norm"], reverse=True):
        e = agg[cond]
        print(
            f"{cond:>10} {e['n_trials']:>6} {e['mean_c_norm']:>8.4f} "
            f"{e['std_c_norm']:>8.4f} {e['sem_c_norm']:>8.4f}"
        )
    ranking = sorted(agg, key=lambda c: agg[c]["mean_c_norm"], reverse=True)
    print(f"ranking: {' > '.join(ranking)}")
    summary_path = run_dir / "summary.json"
    if summary_path.is_file():
        summary = json.loads(summary_path.read_text())
        for cond, entry in sorted(summary["conditions"].items()):
            aucs = [t for t in entry["trials"] if "auc_original" in t]
            if aucs:
                orig = np.mean([t["auc_original"] for t in aucs])
                shuf = np.mean([t["auc_shuffled"] for t in aucs])
                print(f"{cond}: mean AUC original {orig:.3f}, shuffled {shuf:.3f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    handlers = {
        "run": _cmd_run,
        "trial": _cmd_trial,
        "shuffle-control": _cmd_shuffle,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
