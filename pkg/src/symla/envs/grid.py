"""5x5 grid worlds with 3-channel binary observations (75 inputs, 4 move actions).

Channel order: [agent, positive object, negative object] for the heart/trap
world and [agent, target, obstacles] for the dense world. Actions: 0 up, 1 down,
2 left, 3 right; moves off the edge leave the position unchanged.
"""

from __future__ import annotations

import numpy as np

from ..mathcore import F32, Rng
from .base import Env, EnvShape, EnvStateError, EnvStep

GRID = 5
MOVES = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1)}


def _sample_distinct_cells(rng: Rng, n: int) -> list[tuple[int, int]]:
    idx = rng.permutation(GRID * GRID)[:n]
    return [(int(i) // GRID, int(i) % GRID) for i in idx]


def _render(*cells_per_channel: tuple[tuple[int, int], ...]) -> np.ndarray:
    obs = np.zeros((len(cells_per_channel), GRID, GRID), dtype=F32)
    for ch, cells in enumerate(cells_per_channel):
        for r, c in cells:
            obs[ch, r, c] = 1.0
    return obs.ravel()


def _move(pos: tuple[int, int], action: int) -> tuple[int, int]:
    dr, dc = MOVES[action]
    return (
        min(max(pos[0] + dr, 0), GRID - 1),
        min(max(pos[1] + dc, 0), GRID - 1),
    )


class HeartTrapGridEnv(Env):
    """Collect the heart (+1) while avoiding the trap (-1); 20-step episodes.

    swap_rewards=True inverts the payouts (heart -1, trap +1) and nothing else;
    the observation channels keep showing the heart in channel 1 and the trap in
    channel 2. For the agent this is indistinguishable from swapping the two
    object channels of every observation, which tests exploit via reset
    placement injection.
    """

    def __init__(self, swap_rewards: bool = False, episode_len: int = 20):
        self.swap_rewards = swap_rewards
        self.shape = EnvShape(
            obs_dim=3 * GRID * GRID, n_actions=4, episode_len=episode_len, default_lifetime=500
        )
        self.agent: tuple[int, int] | None = None
        self.heart: tuple[int, int] | None = None
        self.trap: tuple[int, int] | None = None
        self._t = 0
        self._done = True

    def reset(self, rng: Rng, placement=None) -> EnvStep:
        if placement is None:
            self.agent, self.heart, self.trap = _sample_distinct_cells(rng, 3)
        else:
            self.agent, self.heart, self.trap = placement
        self._t = 0
        self._done = False
        return EnvStep(obs=self._obs(), reward=0.0, done=False)

    def _obs(self) -> np.ndarray:
        return _render((self.agent,), (self.heart,), (self.trap,))

    def step(self, action: int, rng: Rng) -> EnvStep:
        if self._done or self.agent is None:
            raise EnvStateError("episode finished; call reset()")
        self.agent = _move(self.agent, self._check_action(action))
        self._t += 1
        reward = 0.0
        if self.agent == self.heart:
            reward = -1.0 if self.swap_rewards else 1.0
            self._done = True
        elif self.agent == self.trap:
            reward = 1.0 if self.swap_rewards else -1.0
            self._done = True
        elif self._t >= self.shape.episode_len:
            self._done = True
        return EnvStep(obs=self._obs(), reward=reward, done=self._done)


class DenseGridEnv(Env):
    """Walk to the target; reward is the drop in Manhattan distance each step.

    Rewards along any trajectory telescope to d_start - d_end. The episode ends
    on arrival or after 20 steps. The obstacle channel is all zero in this
    layout.
    """

    def __init__(self, episode_len: int = 20):
        self.shape = EnvShape(
            obs_dim=3 * GRID * GRID, n_actions=4, episode_len=episode_len, default_lifetime=500
        )
        self.agent: tuple[int, int] | None = None
        self.target: tuple[int, int] | None = None
        self._t = 0
        self._done = True

    def reset(self, rng: Rng, placement=None) -> EnvStep:
        if placement is None:
            self.agent, self.target = _sample_distinct_cells(rng, 2)
        else:
            self.agent, self.target = placement
        self._t = 0
        self._done = False
        return EnvStep(obs=self._obs(), reward=0.0, done=False)

    def _obs(self) -> np.ndarray:
        return _render((self.agent,), (self.target,), ())

    def _dist(self) -> int:
        return abs(self.agent[0] - self.target[0]) + abs(self.agent[1] - self.target[1])

    def step(self, action: int, rng: Rng) -> EnvStep:
        if self._done or self.agent is None:
            raise EnvStateError("episode finished; call reset()")
        before = self._dist()
        self.agent = _move(self.agent, self._check_action(action))
        after = self._dist()
        self._t += 1
        self._done = after == 0 or self._t >= self.shape.episode_len
        return EnvStep(obs=self._obs(), reward=float(before - after), done=self._done)
