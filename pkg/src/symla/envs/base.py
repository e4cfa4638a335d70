"""Environment interface shared by all tasks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mathcore import Rng


class EnvStateError(RuntimeError):
    """step() called on a finished episode without reset()."""


@dataclass
class EnvStep:
    obs: np.ndarray
    reward: float
    done: bool


@dataclass(frozen=True)
class EnvShape:
    obs_dim: int
    n_actions: int
    episode_len: int
    default_lifetime: int


class Env:
    """reset(rng) starts an episode; step(action, rng) advances it.

    One instance is owned by exactly one rollout. Instances hold no global
    state; all randomness comes from the rng arguments.
    """

    shape: EnvShape

    def reset(self, rng: Rng) -> EnvStep:
        raise NotImplementedError

    def step(self, action: int, rng: Rng) -> EnvStep:
        raise NotImplementedError

    def expected_regret(self, action: int) -> float | None:
        """Expected per-step regret of `action`, when payouts are known (bandits)."""
        return None

    def _check_action(self, action: int) -> int:
        action = int(action)
        if not 0 <= action < self.shape.n_actions:
            raise ValueError(f"action {action} out of range [0, {self.shape.n_actions})")
        return action
