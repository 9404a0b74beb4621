"""Active-inference agents.

Each agent filters a belief over the 36 latent states, scores candidate
actions by expected free energy (ambiguity plus risk against its comfort
preference), turns those scores into a posterior over symbols, and learns
whichever generative matrix it lacks through Dirichlet count updates: the
parent learns the observation map, the infant learns the dynamics.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .environment import (
    N_ACTIONS,
    N_STATES,
    PriorPreference,
    TransitionModel,
    identity_sensory_map,
    preferred_obs_distribution,
)
from .probability import KL_FLOOR, Categorical, dirichlet_mean, softmax_neg


class AgentKind(Enum):
    PARENT = "parent"
    INFANT = "infant"


def predict_belief(belief: Categorical, transitions: np.ndarray, action: int) -> Categorical:
    """Push a belief one step through the dynamics for the given action."""
    return Categorical(transitions[:, :, action] @ belief.probs)


def update_belief(belief_pred: Categorical, sensory: np.ndarray, obs: int) -> Categorical:
    """Bayes correction of a predicted belief by an observed cue.

    If the likelihood wipes out the entire prediction, the normalized
    likelihood row is used alone so the belief never degenerates.
    """
    like = sensory[obs, :]
    post = like * belief_pred.probs
    total = post.sum()
    if total <= 0.0:
        post = like
        total = post.sum()
        if total <= 0.0:
            raise ValueError(f"observation {obs} has an all-zero likelihood row")
    return Categorical(post / total)


class Agent:
    """One member of the dyad.

    Holds the sensory map A[obs, z], the dynamics B[z', z, a], the symbol
    interpretation E[a, w], the comfort preference, a persistent belief,
    and the Dirichlet concentrations behind whichever of A or B is being
    learned. The learned matrix is always the mean of its concentrations,
    so batch replay of the same updates reproduces it exactly.
    """

    def __init__(
        self,
        kind: AgentKind,
        sensory: np.ndarray,
        transitions: np.ndarray,
        preference: PriorPreference,
        preferred_obs: Categorical,
        obs_concentration: np.ndarray | None = None,
        trans_concentration: np.ndarray | None = None,
    ):
        self.kind = kind
        self.preference = preference
        self.preferred_obs = preferred_obs
        self._log_pref = np.log(np.maximum(preferred_obs.probs, KL_FLOOR))
        self.E = np.eye(N_ACTIONS)
        self.obs_concentration = obs_concentration
        self.trans_concentration = trans_concentration
        self.A = sensory
        self.B = transitions
        self._belief = Categorical.uniform(N_STATES)
        self._refresh_sensory_entropy()
        self._symbol_cache: Categorical | None = None

    # -- belief ----------------------------------------------------------

    @property
    def belief(self) -> Categorical:
        return self._belief

    @belief.setter
    def belief(self, value: Categorical):
        if len(value) != N_STATES:
            raise ValueError("belief support must match the state space")
        self._belief = value
        self._symbol_cache = None

    def predict(self, action: int) -> Categorical:
        return predict_belief(self._belief, self.B, action)

    def assimilate(self, action: int, obs: int) -> tuple[Categorical, Categorical]:
        """Predict through `action`, correct by `obs`, adopt the result.

        Returns (previous belief, new belief); the pair is what dynamics
        learning needs.
        """
        prev = self._belief
        self.belief = update_belief(self.predict(action), self.A, obs)
        return prev, self._belief

    # -- action and symbol scoring ----------------------------------------

    def efe_per_action(self) -> np.ndarray:
        """Expected free energy of every action from the current belief.

        Ambiguity is the belief-weighted entropy of the sensory columns
        after the one-step prediction; risk is the KL from the predicted
        observation distribution to the comfort distribution.
        """
        q_pred = np.tensordot(self._belief.probs, self.B, axes=(0, 1))
        ambiguity = self._sensory_entropy @ q_pred
        q_obs = self.A @ q_pred
        logs = np.where(q_obs > 0.0, np.log(np.where(q_obs > 0.0, q_obs, 1.0)), 0.0)
        risk = (q_obs * (logs - self._log_pref[:, None])).sum(axis=0)
        return ambiguity + risk

    def expected_free_energy(self, action: int) -> float:
        return float(self.efe_per_action()[action])

    def symbol_posterior(self) -> Categorical:
        """Distribution over symbols: softmax of minus the symbol scores,
        where each symbol inherits the free energy of the actions it maps
        to through E."""
        if self._symbol_cache is None:
            g = self.E.T @ self.efe_per_action()
            self._symbol_cache = softmax_neg(g)
        return self._symbol_cache

    # -- learning ----------------------------------------------------------

    def learn_A(self, posterior: Categorical, obs: int):
        """Accumulate belief mass into the observation counts for `obs`."""
        if self.obs_concentration is None:
            raise ValueError(f"{self.kind.value} does not learn the sensory map")
        self.obs_concentration[:, obs] += posterior.probs
        self.A = dirichlet_mean(self.obs_concentration, axis=1).T
        self._refresh_sensory_entropy()
        self._symbol_cache = None

    def learn_B(self, prev_posterior: Categorical, posterior: Categorical, action: int):
        """Accumulate the outer product of consecutive beliefs into the
        transition counts for `action`."""
        if self.trans_concentration is None:
            raise ValueError(f"{self.kind.value} does not learn the dynamics")
        self.trans_concentration[:, :, action] += np.outer(
            posterior.probs, prev_posterior.probs
        )
        slice_a = self.trans_concentration[:, :, action]
        self.B[:, :, action] = slice_a / slice_a.sum(axis=0, keepdims=True)
        self._symbol_cache = None

    def _refresh_sensory_entropy(self):
        a = self.A
        self._sensory_entropy = -np.where(a > 0.0, a * np.log(np.where(a > 0.0, a, 1.0)), 0.0).sum(axis=0)


def init_agent(
    kind: AgentKind,
    truth: TransitionModel,
    preference: PriorPreference,
    prior_concentration: float = 1.0,
    preference_mode: str = "linear",
) -> Agent:
    """Fresh agent with a uniform belief.

    The parent keeps the exact dynamics and starts a flat Dirichlet over
    the sensory map; the infant keeps the exact (identity) sensory map and
    starts a flat Dirichlet over the dynamics.
    """
    if prior_concentration <= 0.0:
        raise ValueError("prior concentration must be positive")
    preferred = preferred_obs_distribution(preference, preference_mode)
    if kind is AgentKind.PARENT:
        alpha = np.full((N_STATES, N_STATES), prior_concentration)
        return Agent(
            kind,
            sensory=dirichlet_mean(alpha, axis=1).T,
            transitions=truth.tensor,
            preference=preference,
            preferred_obs=preferred,
            obs_concentration=alpha,
        )
    if kind is AgentKind.INFANT:
        beta = np.full((N_STATES, N_STATES, N_ACTIONS), prior_concentration)
        return Agent(
            kind,
            sensory=identity_sensory_map(),
            transitions=dirichlet_mean(beta, axis=0),
            preference=preference,
            preferred_obs=preferred,
            trans_concentration=beta,
        )
    raise ValueError(f"unknown agent kind: {kind!r}")
