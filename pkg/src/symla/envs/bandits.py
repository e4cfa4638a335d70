"""Multi-armed Bernoulli bandits with per-lifetime hidden arm probabilities.

Contextless: the observation is the constant vector [1.0]. A reset draws a new
arm-probability vector; every pull pays 0 or 1. The five two-armed settings:

- uniform_indep: p1, p2 independent ~ U[0, 1]
- uniform_dep:   p1 ~ U[0, 1], p2 = 1 - p1
- easy_dep:      p1 ~ U{0.1, 0.9},  p2 = 1 - p1
- medium_dep:    p1 ~ U{0.25, 0.75}, p2 = 1 - p1
- hard_dep:      p1 ~ U{0.4, 0.6},  p2 = 1 - p1

indep_k generalizes uniform_indep to k arms.
"""

from __future__ import annotations

import numpy as np

from ..mathcore import Rng
from .base import Env, EnvShape, EnvStep

BANDIT_KINDS = ("uniform_indep", "uniform_dep", "easy_dep", "medium_dep", "hard_dep", "indep_k")

_TWO_POINT = {"easy_dep": (0.1, 0.9), "medium_dep": (0.25, 0.75), "hard_dep": (0.4, 0.6)}


def draw_arms(kind: str, arms: int, rng: Rng) -> np.ndarray:
    """Sample a hidden arm-probability vector for one lifetime."""
    if kind in ("uniform_indep", "indep_k"):
        return rng.random(arms)
    if kind == "uniform_dep":
        p1 = rng.random()
        return np.array([p1, 1.0 - p1])
    if kind in _TWO_POINT:
        lo, hi = _TWO_POINT[kind]
        p1 = hi if rng.random() < 0.5 else lo
        return np.array([p1, 1.0 - p1])
    raise ValueError(f"unknown bandit kind {kind!r}; expected one of {BANDIT_KINDS}")


def expected_regret(arm_probs: np.ndarray, action: int) -> float:
    """max_i p_i - p_action: expected (not realized) per-pull regret."""
    return float(np.max(arm_probs) - arm_probs[action])


class BanditEnv(Env):
    def __init__(self, kind: str, arms: int = 2, fixed_probs: np.ndarray | None = None):
        if kind not in BANDIT_KINDS:
            raise ValueError(f"unknown bandit kind {kind!r}; expected one of {BANDIT_KINDS}")
        if kind != "indep_k" and arms != 2:
            raise ValueError(f"bandit kind {kind!r} is two-armed; got arms={arms}")
        if arms < 2:
            raise ValueError(f"need at least 2 arms, got {arms}")
        self.kind = kind
        self.shape = EnvShape(obs_dim=1, n_actions=arms, episode_len=100, default_lifetime=100)
        self.fixed_probs = None if fixed_probs is None else np.asarray(fixed_probs, dtype=float)
        self.probs: np.ndarray | None = None
        self._obs = np.ones(1, dtype=np.float32)

    def reset(self, rng: Rng) -> EnvStep:
        if self.fixed_probs is not None:
            self.probs = self.fixed_probs.copy()
        else:
            self.probs = draw_arms(self.kind, self.shape.n_actions, rng)
        return EnvStep(obs=self._obs.copy(), reward=0.0, done=False)

    def step(self, action: int, rng: Rng) -> EnvStep:
        if self.probs is None:
            raise RuntimeError("step() before reset()")
        action = self._check_action(action)
        reward = 1.0 if rng.random() < self.probs[action] else 0.0
        return EnvStep(obs=self._obs.copy(), reward=reward, done=False)

    def expected_regret(self, action: int) -> float:
        if self.probs is None:
            raise RuntimeError("expected_regret() before reset()")
        return expected_regret(self.probs, self._check_action(action))
