"""Ground-truth visceral world.

A 6x6 grid of internal states (energy x temperature), five caregiving
actions with deterministic main effects and a rare temperature branch,
identity observation emission, and the prior preference surface that
defines which states count as comfortable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .probability import Categorical

N_LEVELS = 6
N_STATES = N_LEVELS * N_LEVELS
N_ACTIONS = 5


class Action(IntEnum):
    COOL = 0
    WARM = 1
    EAT = 2
    PLAY = 3
    SLEEP = 4


@dataclass(frozen=True)
class VisceralState:
    """One cell of the grid: x is energy, y is body temperature."""

    x: int
    y: int

    def __post_init__(self):
        if not (0 <= self.x < N_LEVELS and 0 <= self.y < N_LEVELS):
            raise ValueError(f"state out of range: ({self.x}, {self.y})")

    @property
    def flat(self) -> int:
        return self.y * N_LEVELS + self.x

    @classmethod
    def from_flat(cls, index: int) -> "VisceralState":
        if not 0 <= index < N_STATES:
            raise ValueError(f"flat index out of range: {index}")
        return cls(x=index % N_LEVELS, y=index // N_LEVELS)


@dataclass(frozen=True)
class EnvParams:
    """Knobs of the world dynamics.

    branch_prob    chance that Eat/Play/Sleep also shifts temperature
    eat_gain       energy gained by Eat
    temp_high_min  y at or above this drifts hotter on a branch, below
                   drifts colder
    """

    branch_prob: float = 0.2
    eat_gain: int = 2
    temp_high_min: int = 3

    def __post_init__(self):
        if not 0.0 <= self.branch_prob <= 1.0:
            raise ValueError("branch_prob must lie in [0, 1]")


@dataclass(frozen=True)
class TransitionModel:
    """Exact dynamics as a stochastic tensor plus branch lookup tables.

    tensor[z_next, z_prev, a] is the transition probability; main_next and
    rare_next give the flat successor per (z_prev, a), with rare_next = -1
    where no distinct rare branch exists.
    """

    tensor: np.ndarray
    main_next: np.ndarray
    rare_next: np.ndarray
    branch_prob: float


@dataclass(frozen=True)
class StepOutcome:
    next_state: VisceralState
    rare_branch: bool
    infant_obs: int
    parent_obs: int


def _clamp(v: int) -> int:
    return min(max(v, 0), N_LEVELS - 1)


def build_transition_model(params: EnvParams = EnvParams()) -> TransitionModel:
    """Assemble the exact transition tensor from the action rules.

    Cool and Warm trade one unit of energy for a temperature step down or
    up. Eat, Play and Sleep change energy by +eat_gain, -1 and 0, and with
    probability branch_prob also push temperature away from the middle
    (down when y < temp_high_min, up otherwise). Coordinates clamp to the
    grid; when clamping collapses the branch onto the main successor the
    two merge into a single certain transition.
    """
    tensor = np.zeros((N_STATES, N_STATES, N_ACTIONS))
    main_next = np.zeros((N_STATES, N_ACTIONS), dtype=np.int64)
    rare_next = np.full((N_STATES, N_ACTIONS), -1, dtype=np.int64)
    energy_delta = {Action.EAT: params.eat_gain, Action.PLAY: -1, Action.SLEEP: 0}
    for z in range(N_STATES):
        s = VisceralState.from_flat(z)
        for action in Action:
            if action is Action.COOL:
                main, rare = (s.x - 1, s.y - 1), None
            elif action is Action.WARM:
                main, rare = (s.x - 1, s.y + 1), None
            else:
                dx = energy_delta[action]
                dy = 1 if s.y >= params.temp_high_min else -1
                main, rare = (s.x + dx, s.y), (s.x + dx, s.y + dy)
            m = _clamp(main[1]) * N_LEVELS + _clamp(main[0])
            main_next[z, action] = m
            if rare is None:
                tensor[m, z, action] = 1.0
                continue
            r = _clamp(rare[1]) * N_LEVELS + _clamp(rare[0])
            if r == m:
                tensor[m, z, action] = 1.0
            else:
                tensor[m, z, action] = 1.0 - params.branch_prob
                tensor[r, z, action] = params.branch_prob
                rare_next[z, action] = r
    for arr in (tensor, main_next, rare_next):
        arr.setflags(write=False)
    return TransitionModel(tensor, main_next, rare_next, params.branch_prob)


def step(
    model: TransitionModel, state: VisceralState, action: int, rng: np.random.Generator
) -> StepOutcome:
    """Advance the true state by one action, consuming exactly one uniform.

    rare_branch is set only when a distinct rare successor was sampled;
    both observation channels emit the flat index of the landing state.
    """
    z = state.flat
    rare = int(model.rare_next[z, action])
    u = rng.random()
    fired = rare >= 0 and u < model.branch_prob
    nxt = rare if fired else int(model.main_next[z, action])
    return StepOutcome(VisceralState.from_flat(nxt), fired, nxt, nxt)


@dataclass(frozen=True)
class PriorPreference:
    """Strictly positive comfort score per state, flat-indexed."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (N_STATES,):
            raise ValueError(f"preference must have shape ({N_STATES},)")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("preference values must be finite and positive")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def max_value(self) -> float:
        return float(self.values.max())


def build_prior_preference(sigma: float = 1.25, floor: float = 0.01) -> PriorPreference:
    """Radial comfort bump centred between the four middle cells.

    Each cell scores exp(-d^2 / (2 sigma^2)) for its Euclidean distance d
    from (2.5, 2.5), floored at `floor` so every state keeps support.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if floor <= 0.0:
        raise ValueError("floor must be positive")
    xs = np.arange(N_LEVELS, dtype=float)
    gx, gy = np.meshgrid(xs, xs)
    d2 = (gx - 2.5) ** 2 + (gy - 2.5) ** 2
    vals = np.maximum(np.exp(-d2 / (2.0 * sigma * sigma)), floor)
    return PriorPreference(vals.reshape(-1))


def preferred_obs_distribution(
    pref: PriorPreference, mode: str = "linear"
) -> Categorical:
    """Preference surface as a distribution over observations.

    "linear" divides by the sum; "softmax" exponentiates first (with max
    subtraction) and then normalizes.
    """
    if mode == "linear":
        return Categorical(pref.values / pref.values.sum())
    if mode == "softmax":
        w = np.exp(pref.values - pref.values.max())
        return Categorical(w / w.sum())
    raise ValueError(f"unknown preference mode: {mode!r}")


def identity_sensory_map() -> np.ndarray:
    """Exact observation model: each state emits its own one-hot cue."""
    eye = np.eye(N_STATES)
    eye.setflags(write=False)
    return eye
