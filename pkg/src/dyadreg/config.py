"""Experiment configuration: a flat dataclass with JSON round-tripping.

Every knob of a run lives here so a config file plus a seed pins the
entire experiment.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

CONDITION_NAMES = ("mhng", "a-led", "b-led")
ROUND_ORDERS = ("infant-first", "parent-first")
CURRENT_W_MODES = ("fresh", "persistent")
PREFERENCE_MODES = ("linear", "softmax")
N_STATES = 36


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """All knobs of one experiment.

    conditions       which negotiation rules to run
    trials           seeded repetitions per condition
    iterations       two-round exchanges per trial
    seed             root seed; every trial derives its own from it
    round_order      which agent speaks in the first round
    mh_current_w     "fresh" draws the listener's stance every round,
                     "persistent" carries the agreed symbol forward
    preference_mode  how the comfort surface becomes a distribution
    shuffle_permutations  permutations averaged in the shuffle control
    dirichlet_prior  flat concentration for the learned matrices
    branch_prob / eat_gain / temp_high_min  world dynamics knobs
    c_sigma / c_floor  comfort bump shape; c_values overrides it outright
    out_dir          artifact directory for full runs
    dump_beliefs     also write per-round belief vectors
    workers          trial-level process parallelism
    """

    conditions: tuple = CONDITION_NAMES
    trials: int = 10
    iterations: int = 1000
    seed: int = 0
    round_order: str = "infant-first"
    mh_current_w: str = "fresh"
    preference_mode: str = "linear"
    shuffle_permutations: int = 1
    dirichlet_prior: float = 1.0
    branch_prob: float = 0.2
    eat_gain: int = 2
    temp_high_min: int = 3
    c_sigma: float = 1.25
    c_floor: float = 0.01
    c_values: tuple | None = None
    out_dir: str = "runs/latest"
    dump_beliefs: bool = False
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.conditions, (list, str)):
            self.conditions = (
                (self.conditions,)
                if isinstance(self.conditions, str)
                else tuple(self.conditions)
            )
        if self.c_values is not None:
            self.c_values = tuple(float(v) for v in self.c_values)
        self.validate()

    def validate(self):
        if not self.conditions:
            raise ConfigError("need at least one condition")
        for c in self.conditions:
            if c not in CONDITION_NAMES:
                raise ConfigError(f"unknown condition {c!r}, expected {CONDITION_NAMES}")
        if len(set(self.conditions)) != len(self.conditions):
            raise ConfigError("conditions must be unique")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise ConfigError("iterations must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.round_order not in ROUND_ORDERS:
            raise ConfigError(f"round_order must be one of {ROUND_ORDERS}")
        if self.mh_current_w not in CURRENT_W_MODES:
            raise ConfigError(f"mh_current_w must be one of {CURRENT_W_MODES}")
        if self.preference_mode not in PREFERENCE_MODES:
            raise ConfigError(f"preference_mode must be one of {PREFERENCE_MODES}")
        if not isinstance(self.shuffle_permutations, int) or self.shuffle_permutations < 1:
            raise ConfigError("shuffle_permutations must be a positive integer")
        if not self.dirichlet_prior > 0.0:
            raise ConfigError("dirichlet_prior must be positive")
        if not 0.0 <= self.branch_prob <= 1.0:
            raise ConfigError("branch_prob must lie in [0, 1]")
        if not isinstance(self.eat_gain, int) or self.eat_gain < 0:
            raise ConfigError("eat_gain must be a non-negative integer")
        if not isinstance(self.temp_high_min, int) or not 0 <= self.temp_high_min <= 6:
            raise ConfigError("temp_high_min must lie in [0, 6]")
        if not self.c_sigma > 0.0:
            raise ConfigError("c_sigma must be positive")
        if not self.c_floor > 0.0:
            raise ConfigError("c_floor must be positive")
        if self.c_values is not None:
            if len(self.c_values) != N_STATES:
                raise ConfigError(f"c_values needs exactly {N_STATES} entries")
            if any(v <= 0.0 for v in self.c_values):
                raise ConfigError("c_values must be strictly positive")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["conditions"] = list(self.conditions)
        if self.c_values is not None:
            d["c_values"] = list(self.c_values)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_dict(data)

    def replaced(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return ExperimentConfig.from_json(p.read_text())


def save_config(config: ExperimentConfig, path):
    Path(path).write_text(config.to_json())
