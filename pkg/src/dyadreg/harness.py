"""Trial and experiment orchestration.

A trial is a fully seeded simulation of one condition; an experiment maps
trials over conditions, writes CSV and JSON artifacts, and records a
manifest. Every random draw descends from the root seed through labelled
sub-seeds, so reruns and parallel runs produce identical artifacts.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .agents import AgentKind, init_agent
from .config import ExperimentConfig, save_config
from .dialogue import Condition, run_iteration
from .environment import (
    Action,
    EnvParams,
    N_STATES,
    PriorPreference,
    VisceralState,
    build_prior_preference,
    build_transition_model,
    identity_sensory_map,
)
from .metrics import (
    ALIGNMENT_WINDOW,
    SPIKE_RANGE,
    IterationMetrics,
    RoundRecord,
    TrialLog,
    aggregate_conditions,
    auc_window,
    c_norm,
    jsd_latent,
    kld_A_error,
    kld_B_error,
    shuffle_control,
)
from .plots import emit_plots
from .probability import derive_seed, make_rng

START_STATE = VisceralState(2, 2)

CSV_HEADER = [
    "condition",
    "trial",
    "iteration",
    "round",
    "speaker",
    "proposed_w",
    "listener_own_w",
    "accepted",
    "acceptance_prob",
    "shared_w",
    "action",
    "true_x",
    "true_y",
    "rare_branch",
    "c_norm",
    "jsd_z",
    "kld_A",
    "kld_B_sleep",
]

BELIEF_HEADER = ["iteration", "round", "agent"] + [f"q{i:02d}" for i in range(N_STATES)]


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def trial_seed(root_seed: int, condition: str, trial_index: int) -> int:
    """Sub-seed of one trial, stable across orderings and worker counts."""
    return derive_seed(root_seed, condition, trial_index)


def shuffle_seed(root_seed: int, condition: str, trial_index: int, k: int = 0) -> int:
    """Sub-seed of the k-th shuffle permutation for one trial."""
    return derive_seed(root_seed, condition, trial_index, "shuffle", k)


def build_world(config: ExperimentConfig):
    """Transition model and preference surface described by a config."""
    params = EnvParams(
        branch_prob=config.branch_prob,
        eat_gain=config.eat_gain,
        temp_high_min=config.temp_high_min,
    )
    world = build_transition_model(params)
    if config.c_values is not None:
        pref = PriorPreference(np.asarray(config.c_values, dtype=float))
    else:
        pref = build_prior_preference(config.c_sigma, config.c_floor)
    return world, pref


def run_trial(config: ExperimentConfig, condition, trial_index: int) -> TrialLog:
    """One seeded trial: `iterations` two-round exchanges from the fixed
    start state, with metrics recorded after every round."""
    cond = condition if isinstance(condition, Condition) else Condition(condition)
    world, pref = build_world(config)
    seed = trial_seed(config.seed, cond.value, trial_index)
    rng = make_rng(seed)
    parent = init_agent(
        AgentKind.PARENT, world, pref, config.dirichlet_prior, config.preference_mode
    )
    infant = init_agent(
        AgentKind.INFANT, world, pref, config.dirichlet_prior, config.preference_mode
    )
    sensory_true = identity_sensory_map()
    n = config.iterations
    log = TrialLog(cond.value, trial_index, seed)
    log.parent_beliefs = np.empty((n, N_STATES))
    log.infant_beliefs = np.empty((n, N_STATES))
    if config.dump_beliefs:
        log.parent_round_beliefs = np.empty((2 * n, N_STATES))
        log.infant_round_beliefs = np.empty((2 * n, N_STATES))
    persist = config.mh_current_w == "persistent"
    state = START_STATE
    current_w = None
    for it in range(1, n + 1):
        records = []

        def on_round(idx, outcome, stp, _it=it):
            records.append(
                RoundRecord(
                    condition=cond.value,
                    trial=trial_index,
                    iteration=_it,
                    round=idx + 1,
                    speaker=outcome.speaker.value,
                    proposed_w=outcome.proposed_w,
                    listener_own_w=outcome.listener_own_w,
                    accepted=outcome.accepted,
                    acceptance_prob=outcome.acceptance_prob,
                    shared_w=outcome.shared_w,
                    action=outcome.action,
                    true_x=stp.next_state.x,
                    true_y=stp.next_state.y,
                    rare_branch=stp.rare_branch,
                    c_norm=c_norm(stp.next_state, pref),
                    jsd_z=jsd_latent(parent.belief, infant.belief),
                    kld_A=kld_A_error(sensory_true, parent.A),
                    kld_B_sleep=kld_B_error(world.tensor, infant.B, Action.SLEEP),
                )
            )
            if config.dump_beliefs:
                row = 2 * (_it - 1) + idx
                log.parent_round_beliefs[row] = parent.belief.probs
                log.infant_round_beliefs[row] = infant.belief.probs

        result = run_iteration(
            parent,
            infant,
            world,
            state,
            cond,
            rng,
            round_order=config.round_order,
            current_w=current_w,
            persist_w=persist,
            on_round=on_round,
        )
        state = result.state
        if persist:
            current_w = result.shared_w
        log.rounds.extend(records)
        last = records[-1]
        log.iterations.append(
            IterationMetrics(
                iteration=it,
                c_norm=last.c_norm,
                jsd_z=last.jsd_z,
                kld_A=last.kld_A,
                kld_B_sleep=last.kld_B_sleep,
                rare_branch=any(r.rare_branch for r in records),
            )
        )
        log.parent_beliefs[it - 1] = parent.belief.probs
        log.infant_beliefs[it - 1] = infant.belief.probs
    log.final_obs_concentration = parent.obs_concentration.copy()
    log.final_trans_concentration = infant.trans_concentration.copy()
    return log


# -- CSV artifacts ---------------------------------------------------------


def write_trial_csv(log: TrialLog, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in log.rounds:
            writer.writerow(
                [
                    r.condition,
                    r.trial,
                    r.iteration,
                    r.round,
                    r.speaker,
                    r.proposed_w,
                    r.listener_own_w,
                    int(r.accepted),
                    _fmt(r.acceptance_prob),
                    r.shared_w,
                    r.action,
                    r.true_x,
                    r.true_y,
                    int(r.rare_branch),
                    _fmt(r.c_norm),
                    _fmt(r.jsd_z),
                    _fmt(r.kld_A),
                    _fmt(r.kld_B_sleep),
                ]
            )


def load_trial_csv(path, seed: int = -1) -> TrialLog:
    """Rebuild a trial log (rounds and per-iteration metrics) from its CSV.

    Belief matrices and final counts are not part of the CSV; the seed is
    unknown unless supplied."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"no data rows in {path}")
    records = [
        RoundRecord(
            condition=row[0],
            trial=int(row[1]),
            iteration=int(row[2]),
            round=int(row[3]),
            speaker=row[4],
            proposed_w=int(row[5]),
            listener_own_w=int(row[6]),
            accepted=bool(int(row[7])),
            acceptance_prob=float(row[8]),
            shared_w=int(row[9]),
            action=int(row[10]),
            true_x=int(row[11]),
            true_y=int(row[12]),
            rare_branch=bool(int(row[13])),
            c_norm=float(row[14]),
            jsd_z=float(row[15]),
            kld_A=float(row[16]),
            kld_B_sleep=float(row[17]),
        )
        for row in rows
    ]
    log = TrialLog(records[0].condition, records[0].trial, seed, rounds=records)
    by_iter: dict[int, list[RoundRecord]] = {}
    for r in records:
        by_iter.setdefault(r.iteration, []).append(r)
    for it in sorted(by_iter):
        group = by_iter[it]
        last = group[-1]
        log.iterations.append(
            IterationMetrics(
                iteration=it,
                c_norm=last.c_norm,
                jsd_z=last.jsd_z,
                kld_A=last.kld_A,
                kld_B_sleep=last.kld_B_sleep,
                rare_branch=any(r.rare_branch for r in group),
            )
        )
    return log


def write_beliefs_csv(log: TrialLog, path):
    if log.parent_round_beliefs is None or log.infant_round_beliefs is None:
        raise ValueError("trial was run without belief dumps")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BELIEF_HEADER)
        n_rows = log.parent_round_beliefs.shape[0]
        for row in range(n_rows):
            it, rd = row // 2 + 1, row % 2 + 1
            for agent, beliefs in (
                ("parent", log.parent_round_beliefs),
                ("infant", log.infant_round_beliefs),
            ):
                writer.writerow([it, rd, agent] + [_fmt(v) for v in beliefs[row]])


def load_beliefs_csv(path) -> dict:
    """Belief vectors keyed by agent, as (rounds, states) arrays plus the
    per-iteration view (each iteration's second round)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != BELIEF_HEADER:
            raise ValueError(f"unexpected belief CSV header in {path}")
        parent_rows, infant_rows = [], []
        for row in reader:
            target = parent_rows if row[2] == "parent" else infant_rows
            target.append((int(row[0]), int(row[1]), [float(v) for v in row[3:]]))
    if not parent_rows or len(parent_rows) != len(infant_rows):
        raise ValueError(f"malformed belief dump in {path}")
    parent_rows.sort(key=lambda r: (r[0], r[1]))
    infant_rows.sort(key=lambda r: (r[0], r[1]))
    parent = np.array([r[2] for r in parent_rows])
    infant = np.array([r[2] for r in infant_rows])
    second = [i for i, r in enumerate(parent_rows) if r[1] == 2]
    return {
        "parent_rounds": parent,
        "infant_rounds": infant,
        "parent_iterations": parent[second],
        "infant_iterations": infant[second],
    }


# -- summaries ---------------------------------------------------------------


def _alignment_stats(config: ExperimentConfig, log: TrialLog) -> dict:
    """Windowed alignment numbers for one trial: divergence median and AUC
    in the alignment window, the shuffled AUC, and the rare-vs-ordinary
    divergence means over the spike range."""
    series = log.iteration_series("jsd_z")
    n = series.size
    lo, hi = ALIGNMENT_WINDOW[0] - 1, ALIGNMENT_WINDOW[1] - 1
    out: dict = {"trial": log.trial_index}
    if hi < n:
        out["jsd_median"] = float(np.median(series[lo : hi + 1]))
        out["auc_original"] = auc_window(series, lo, hi)
        shuffled_aucs = []
        for k in range(config.shuffle_permutations):
            rng = make_rng(shuffle_seed(config.seed, log.condition, log.trial_index, k))
            shuffled = shuffle_control(log.parent_beliefs, log.infant_beliefs, rng=rng)
            shuffled_aucs.append(auc_window(shuffled, lo, hi))
        out["auc_shuffled"] = float(np.mean(shuffled_aucs))
    s_lo, s_hi = SPIKE_RANGE[0] - 1, min(SPIKE_RANGE[1] - 1, n - 1)
    if s_lo <= s_hi:
        rare = log.iteration_series("rare_branch")[s_lo : s_hi + 1]
        window = series[s_lo : s_hi + 1]
        if rare.any() and not rare.all():
            out["jsd_mean_rare"] = float(window[rare].mean())
            out["jsd_mean_ordinary"] = float(window[~rare].mean())
    return out


def build_summary(config: ExperimentConfig, logs) -> dict:
    """Cross-trial summary: comfort moments per condition, their ranking,
    mean metric curves, and per-trial alignment statistics."""
    agg = aggregate_conditions(logs)
    by_condition: dict[str, list[TrialLog]] = {}
    for log in logs:
        by_condition.setdefault(log.condition, []).append(log)
    conditions: dict[str, dict] = {}
    for cond, data in agg.items():
        members = by_condition[cond]
        entry = {
            "n_trials": data["n_trials"],
            "mean_c_norm": data["mean_c_norm"],
            "std_c_norm": data["std_c_norm"],
            "sem_c_norm": data["sem_c_norm"],
            "per_trial_mean_c_norm": [float(v) for v in data["per_trial_mean_c_norm"]],
            "trials": [
                _alignment_stats(config, log)
                for log in sorted(members, key=lambda lg: lg.trial_index)
            ],
        }
        curves = data["curves"]
        snapshots = {}
        for name in ("kld_A", "kld_B_sleep"):
            curve = curves[name]
            snap = {"first": float(curve[0]), "last": float(curve[-1])}
            if curve.size >= ALIGNMENT_WINDOW[0]:
                snap["iter20"] = float(curve[ALIGNMENT_WINDOW[0] - 1])
            snapshots[name] = snap
        entry["kld_snapshots"] = snapshots
        conditions[cond] = entry
    ranking = sorted(conditions, key=lambda c: conditions[c]["mean_c_norm"], reverse=True)
    return {
        "iterations": config.iterations,
        "conditions": conditions,
        "c_norm_ranking": ranking,
    }


# -- the full experiment -----------------------------------------------------


@dataclass
class RunManifest:
    """What a run produced and how to reproduce it. The timings entry is
    wall-clock bookkeeping and is not reproducible."""

    version: str
    config: dict
    trial_seeds: dict
    artifacts: list
    timings: dict

    def to_json(self) -> str:
        body = {
            "version": self.version,
            "config": self.config,
            "trial_seeds": self.trial_seeds,
            "artifacts": self.artifacts,
            "timings": self.timings,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        return cls(
            version=data["version"],
            config=data["config"],
            trial_seeds=data["trial_seeds"],
            artifacts=data["artifacts"],
            timings=data.get("timings", {}),
        )


def load_manifest(run_dir) -> RunManifest:
    path = Path(run_dir) / "manifest.json"
    if not path.is_file():
        raise FileNotFoundError(f"no manifest at {path}")
    return RunManifest.from_json(path.read_text())


def _run_job(args) -> TrialLog:
    config, condition, trial_index = args
    return run_trial(config, condition, trial_index)


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Run every (condition, trial) pair and write all artifacts.

    Artifacts are byte-stable for a given config regardless of the worker
    count; only the manifest's timings entry varies between runs.
    """
    t0 = time.perf_counter()
    out = Path(config.out_dir)
    trials_dir = out / "trials"
    trials_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(config, cond, t) for cond in config.conditions for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            logs = list(pool.map(_run_job, jobs))
    else:
        logs = [_run_job(job) for job in jobs]

    artifacts = ["config.json", "summary.json", "summary_cnorm.csv", "summary_auc.csv"]
    for log in logs:
        name = f"{log.condition}_t{log.trial_index:02d}.csv"
        write_trial_csv(log, trials_dir / name)
        artifacts.append(f"trials/{name}")
        if config.dump_beliefs:
            bname = name[:-4] + "_beliefs.csv"
            write_beliefs_csv(log, trials_dir / bname)
            artifacts.append(f"trials/{bname}")

    summary = build_summary(config, logs)
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    # The snapshot normalizes the two knobs that cannot change the results
    # (where the run lives, how many processes computed it), so artifacts
    # are byte-identical across locations and worker counts.
    snapshot = config.replaced(out_dir=".", workers=1)
    save_config(snapshot, out / "config.json")

    with open(out / "summary_cnorm.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "mean_c_norm", "std_c_norm", "sem_c_norm", "n_trials"])
        for cond in config.conditions:
            e = summary["conditions"][cond]
            writer.writerow(
                [cond, _fmt(e["mean_c_norm"]), _fmt(e["std_c_norm"]), _fmt(e["sem_c_norm"]), e["n_trials"]]
            )

    with open(out / "summary_auc.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "trial", "auc_original", "auc_shuffled"])
        for cond in config.conditions:
            for row in summary["conditions"][cond]["trials"]:
                if "auc_original" in row:
                    writer.writerow(
                        [cond, row["trial"], _fmt(row["auc_original"]), _fmt(row["auc_shuffled"])]
                    )

    agg = aggregate_conditions(logs)
    for cond in config.conditions:
        curves = agg[cond]["curves"]
        name = f"curves_{cond}.csv"
        with open(out / name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "c_norm", "jsd_z", "kld_A", "kld_B_sleep"])
            for i in range(config.iterations):
                writer.writerow(
                    [i + 1]
                    + [_fmt(curves[k][i]) for k in ("c_norm", "jsd_z", "kld_A", "kld_B_sleep")]
                )
        artifacts.append(name)

    artifacts.extend(emit_plots(out, config, summary))

    manifest = RunManifest(
        version=__version__,
        config=snapshot.to_dict(),
        trial_seeds={
            cond: [trial_seed(config.seed, cond, t) for t in range(config.trials)]
            for cond in config.conditions
        },
        artifacts=sorted(artifacts),
        timings={"total_seconds": round(time.perf_counter() - t0, 3)},
    )
    (out / "manifest.json").write_text(manifest.to_json())
    return manifest
