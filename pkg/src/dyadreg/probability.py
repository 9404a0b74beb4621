"""Finite-support probability primitives shared across the simulator.

Categorical vectors, Shannon entropy, KL and Jensen-Shannon divergences,
a negative softmax, Dirichlet means, and deterministic seeded sampling.
All logarithms are natural, so every information quantity is in nats.
"""

from __future__ import annotations

import hashlib

import numpy as np

# Constructor renormalizes drift below this and rejects anything larger.
RENORM_TOL = 1e-6
# Floor applied to the second argument of kl_divergence so divergences
# against learned matrices with near-empty cells stay finite.
KL_FLOOR = 1e-12


class Categorical:
    """Immutable probability vector over a finite support.

    Entries must be finite and non-negative and sum to one within
    RENORM_TOL; small drift is silently renormalized away.
    """

    __slots__ = ("probs",)

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("need a non-empty 1-d probability vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("probability entries must be finite")
        if np.any(p < 0.0):
            raise ValueError("probability entries must be non-negative")
        total = float(p.sum())
        if abs(total - 1.0) >= RENORM_TOL:
            raise ValueError(f"probabilities sum to {total:.12g}, not 1")
        p = p / total
        p.setflags(write=False)
        self.probs = p

    def __setattr__(self, name, value):
        if hasattr(self, "probs"):
            raise AttributeError("Categorical is immutable")
        object.__setattr__(self, name, value)

    def __len__(self) -> int:
        return self.probs.size

    def __repr__(self) -> str:
        return f"Categorical(n={self.probs.size})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Categorical):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(
            np.array_equal(self.probs, other.probs)
        )

    @classmethod
    def uniform(cls, n: int) -> "Categorical":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def one_hot(cls, n: int, index: int) -> "Categorical":
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)


def entropy(dist: Categorical) -> float:
    """Shannon entropy in nats, with the 0 * ln 0 = 0 convention."""
    p = dist.probs
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def kl_divergence(p: Categorical, q: Categorical) -> float:
    """KL(p || q) in nats.

    Entries of q below KL_FLOOR are clamped up and q is renormalized, so
    the result is finite even when q has empty cells. Supports must match.
    """
    if len(p) != len(q):
        raise ValueError(f"support mismatch: {len(p)} vs {len(q)}")
    qv = q.probs
    if np.any(qv < KL_FLOOR):
        qv = np.maximum(qv, KL_FLOOR)
        qv = qv / qv.sum()
    pv = p.probs
    mask = pv > 0.0
    val = float((pv[mask] * (np.log(pv[mask]) - np.log(qv[mask]))).sum())
    return max(val, 0.0)


def js_divergence(p: Categorical, q: Categorical) -> float:
    """Jensen-Shannon divergence in nats: symmetric, bounded by ln 2.

    Computed directly against the even mixture, with no smoothing; where
    p or q is zero the corresponding term vanishes.
    """
    if len(p) != len(q):
        raise ValueError(f"support mismatch: {len(p)} vs {len(q)}")
    m = 0.5 * (p.probs + q.probs)

    def _half(v: np.ndarray) -> float:
        mask = v > 0.0
        return float((v[mask] * (np.log(v[mask]) - np.log(m[mask]))).sum())

    return max(0.5 * _half(p.probs) + 0.5 * _half(q.probs), 0.0)


def softmax_neg(values) -> Categorical:
    """Normalized exp(-v): the smallest value gets the largest probability.

    The maximum of -v is subtracted before exponentiation, so arbitrarily
    large inputs do not overflow. Values must be finite.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("need a non-empty 1-d value vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("softmax_neg requires finite values")
    w = np.exp(-(v - v.min()))
    return Categorical(w / w.sum())


def sample(dist: Categorical, rng: np.random.Generator) -> int:
    """Draw one index from dist, consuming exactly one uniform from rng."""
    cum = np.cumsum(dist.probs)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return min(idx, len(dist) - 1)


def dirichlet_mean(concentrations, axis: int = 0) -> np.ndarray:
    """Mean of independent Dirichlet distributions stacked along `axis`.

    Each slice of strictly positive concentrations is normalized into a
    probability vector along the given axis.
    """
    c = np.asarray(concentrations, dtype=float)
    if np.any(c <= 0.0) or not np.all(np.isfinite(c)):
        raise ValueError("concentrations must be finite and strictly positive")
    return c / c.sum(axis=axis, keepdims=True)


def derive_seed(root_seed: int, *labels) -> int:
    """Stable 64-bit sub-seed from a root seed and a chain of labels.

    SHA-256 over the decimal root and the stringified labels, separated by
    an unprintable byte so adjacent labels cannot collide by concatenation.
    """
    h = hashlib.sha256()
    h.update(str(int(root_seed)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:8], "little")


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator for a 64-bit seed."""
    return np.random.default_rng(int(seed))
