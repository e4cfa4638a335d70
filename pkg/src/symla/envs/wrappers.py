"""Observation/action wrappers used for the generalization experiments."""

from __future__ import annotations

import numpy as np

from ..mathcore import F32, Rng, glorot_normal
from .base import Env, EnvShape, EnvStep


class PermuteWrapper(Env):
    """Reindexes observations by obs_perm and routes actions through act_perm.

    The agent's action a reaches the inner environment as act_perm[a]; the
    observation the agent sees is inner_obs[obs_perm]. Expected-regret queries
    are forwarded through the action map, so regret always scores the arm that
    was actually pulled.
    """

    def __init__(self, env: Env, obs_perm: np.ndarray | None = None, act_perm: np.ndarray | None = None):
        self.env = env
        self.shape = env.shape
        self.obs_perm = None if obs_perm is None else np.asarray(obs_perm, dtype=int)
        self.act_perm = None if act_perm is None else np.asarray(act_perm, dtype=int)
        if self.obs_perm is not None and sorted(self.obs_perm) != list(range(env.shape.obs_dim)):
            raise ValueError(f"obs_perm is not a permutation of range({env.shape.obs_dim})")
        if self.act_perm is not None and sorted(self.act_perm) != list(range(env.shape.n_actions)):
            raise ValueError(f"act_perm is not a permutation of range({env.shape.n_actions})")

    def _map_obs(self, step: EnvStep) -> EnvStep:
        if self.obs_perm is not None:
            step.obs = step.obs[self.obs_perm]
        return step

    def _map_action(self, action: int) -> int:
        action = self._check_action(action)
        return int(self.act_perm[action]) if self.act_perm is not None else action

    def reset(self, rng: Rng) -> EnvStep:
        return self._map_obs(self.env.reset(rng))

    def step(self, action: int, rng: Rng) -> EnvStep:
        return self._map_obs(self.env.step(self._map_action(action), rng))

    def expected_regret(self, action: int) -> float | None:
        return self.env.expected_regret(self._map_action(action))


def permutation_from_seed(seed: int, env_shape: EnvShape) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (obs_perm, act_perm) pair for a permute-seed."""
    rng = Rng(seed, (613,))
    return rng.split(0).permutation(env_shape.obs_dim), rng.split(1).permutation(env_shape.n_actions)


class RandomProjectionWrapper(Env):
    """Projects observations through a fixed random linear map to out_dim.

    The projection matrix (entries ~ N(0, 2/(in+out))) is drawn at construction
    and stays fixed for the wrapper's whole lifetime; constructing a fresh
    wrapper per agent lifetime gives each lifetime its own projection.
    """

    def __init__(self, env: Env, rng: Rng, out_dim: int = 16):
        self.env = env
        self.out_dim = out_dim
        self.projection = glorot_normal(out_dim, env.shape.obs_dim, rng)
        self.shape = EnvShape(
            obs_dim=out_dim,
            n_actions=env.shape.n_actions,
            episode_len=env.shape.episode_len,
            default_lifetime=env.shape.default_lifetime,
        )

    def _project(self, step: EnvStep) -> EnvStep:
        step.obs = (self.projection @ step.obs.astype(F32)).astype(F32)
        return step

    def reset(self, rng: Rng) -> EnvStep:
        return self._project(self.env.reset(rng))

    def step(self, action: int, rng: Rng) -> EnvStep:
        return self._project(self.env.step(action, rng))

    def expected_regret(self, action: int) -> float | None:
        return self.env.expected_regret(action)
