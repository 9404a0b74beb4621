"""Measures taken during and after trials.

Comfort of the true state, learning error of each agent's imprecise
matrix, divergence between the two agents' beliefs, windowed AUC, the
temporal-shuffle control, and cross-trial aggregation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .environment import PriorPreference, VisceralState
from .probability import KL_FLOOR, Categorical, js_divergence

# Iteration window (1-based, inclusive) for alignment medians and AUC.
ALIGNMENT_WINDOW = (20, 50)
# Iteration range scanned when comparing rare-branch vs ordinary rounds.
SPIKE_RANGE = (20, 1000)


def c_norm(state: VisceralState, pref: PriorPreference) -> float:
    """Comfort of the true state, scaled so the best cell scores 1."""
    return float(pref.values[state.flat] / pref.max_value)


def mean_column_kl(true_cols: np.ndarray, learned_cols: np.ndarray) -> float:
    """Average KL between matching columns of two column-stochastic
    matrices, the vectorized twin of the scalar divergence: learned cells
    are floored at KL_FLOOR and renormalized per column."""
    p = np.asarray(true_cols, dtype=float)
    q = np.asarray(learned_cols, dtype=float)
    if p.shape != q.shape or p.ndim != 2:
        raise ValueError(f"column shapes must match: {p.shape} vs {q.shape}")
    q = np.maximum(q, KL_FLOOR)
    q = q / q.sum(axis=0, keepdims=True)
    terms = np.where(p > 0.0, p * (np.log(np.where(p > 0.0, p, 1.0)) - np.log(q)), 0.0)
    return float(terms.sum(axis=0).mean())


def kld_A_error(sensory_true: np.ndarray, sensory_learned: np.ndarray) -> float:
    """Mean per-state KL from the exact sensory columns to the learned ones."""
    return mean_column_kl(sensory_true, sensory_learned)


def kld_B_error(
    dynamics_true: np.ndarray, dynamics_learned: np.ndarray, action: int
) -> float:
    """Mean per-state KL between the exact and learned transition columns
    of one action."""
    if dynamics_true.shape != dynamics_learned.shape or dynamics_true.ndim != 3:
        raise ValueError("dynamics tensors must share a (n, n, actions) shape")
    return mean_column_kl(dynamics_true[:, :, action], dynamics_learned[:, :, action])


def jsd_latent(parent_belief: Categorical, infant_belief: Categorical) -> float:
    """Jensen-Shannon divergence between the two agents' beliefs."""
    return js_divergence(parent_belief, infant_belief)


def auc_window(series, start: int, end: int) -> float:
    """Trapezoidal area of series over the inclusive 0-based index window
    [start, end], with unit spacing between samples."""
    s = np.asarray(series, dtype=float)
    if s.ndim != 1:
        raise ValueError("series must be 1-d")
    if not (0 <= start < end < s.size):
        raise ValueError(f"window [{start}, {end}] out of range for length {s.size}")
    return float(np.trapezoid(s[start : end + 1]))


def shuffle_control(
    parent_seq,
    infant_seq,
    rng: Optional[np.random.Generator] = None,
    permutation=None,
) -> np.ndarray:
    """Belief divergence series with the infant side permuted in time.

    Breaking simultaneity tells apart genuine moment-to-moment coupling
    from two sequences that merely share a stationary profile. Pass either
    an explicit permutation or a generator to draw one.
    """
    p_seq = np.asarray(parent_seq, dtype=float)
    i_seq = np.asarray(infant_seq, dtype=float)
    if p_seq.shape != i_seq.shape or p_seq.ndim != 2:
        raise ValueError("belief sequences must share a (steps, states) shape")
    n = p_seq.shape[0]
    if permutation is None:
        if rng is None:
            raise ValueError("need a permutation or a generator to draw one")
        permutation = rng.permutation(n)
    perm = np.asarray(permutation)
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("permutation must rearrange exactly the sequence indices")
    return np.array(
        [
            js_divergence(Categorical(p_seq[t]), Categorical(i_seq[perm[t]]))
            for t in range(n)
        ]
    )


@dataclass(frozen=True)
class RoundRecord:
    """Everything logged about a single round, one CSV row."""

    condition: str
    trial: int
    iteration: int
    round: int
    speaker: str
    proposed_w: int
    listener_own_w: int
    accepted: bool
    acceptance_prob: float
    shared_w: int
    action: int
    true_x: int
    true_y: int
    rare_branch: bool
    c_norm: float
    jsd_z: float
    kld_A: float
    kld_B_sleep: float


@dataclass(frozen=True)
class IterationMetrics:
    """Per-iteration view: the second round's metrics, with the rare flag
    raised if either round branched."""

    iteration: int
    c_norm: float
    jsd_z: float
    kld_A: float
    kld_B_sleep: float
    rare_branch: bool


@dataclass
class TrialLog:
    """Full record of one seeded trial."""

    condition: str
    trial_index: int
    seed: int
    rounds: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    parent_beliefs: Optional[np.ndarray] = None
    infant_beliefs: Optional[np.ndarray] = None
    parent_round_beliefs: Optional[np.ndarray] = None
    infant_round_beliefs: Optional[np.ndarray] = None
    final_obs_concentration: Optional[np.ndarray] = None
    final_trans_concentration: Optional[np.ndarray] = None

    def iteration_series(self, name: str) -> np.ndarray:
        vals = [getattr(m, name) for m in self.iterations]
        dtype = bool if name == "rare_branch" else float
        return np.asarray(vals, dtype=dtype)


def aggregate_conditions(logs: Iterable[TrialLog]) -> dict:
    """Cross-trial summary per condition.

    For each condition: the per-trial mean comfort with mean, sample
    standard deviation and standard error across trials, plus pointwise
    mean curves of every per-iteration metric.
    """
    groups: dict[str, list[TrialLog]] = {}
    for log in logs:
        groups.setdefault(log.condition, []).append(log)
    if not groups:
        raise ValueError("no trial logs to aggregate")
    out: dict[str, dict] = {}
    for condition, members in groups.items():
        per_trial = np.array(
            [log.iteration_series("c_norm").mean() for log in members]
        )
        n = per_trial.size
        std = float(per_trial.std(ddof=1)) if n > 1 else 0.0
        curves = {
            name: np.vstack([log.iteration_series(name) for log in members]).mean(axis=0)
            for name in ("c_norm", "jsd_z", "kld_A", "kld_B_sleep")
        }
        out[condition] = {
            "n_trials": n,
            "per_trial_mean_c_norm": per_trial,
            "mean_c_norm": float(per_trial.mean()),
            "std_c_norm": std,
            "sem_c_norm": std / np.sqrt(n) if n > 1 else 0.0,
            "curves": curves,
        }
    return out
