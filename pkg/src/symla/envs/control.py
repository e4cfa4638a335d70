"""Classic control tasks with the published physics constants.

Internal state is float64; observations are emitted float32. Episodes truncate
at episode_len; stepping a finished episode raises EnvStateError.
"""

from __future__ import annotations

import numpy as np

from ..mathcore import F32, Rng
from .base import Env, EnvShape, EnvStateError, EnvStep


class CartPoleEnv(Env):
    """Cart-pole balancing, Euler-integrated.

    dense=False: reward 1 per step, terminate on |x| > 2.4 or |theta| > 12 deg.
    dense=True: reward 0.5*(cos(theta)+1)*max(0, 1-|x|/2.4) in [0, 1], no early
    termination; pole angle may wrap freely for the whole episode.
    """

    GRAVITY = 9.8
    CART_MASS = 1.0
    POLE_MASS = 0.1
    TOTAL_MASS = CART_MASS + POLE_MASS
    HALF_POLE = 0.5
    POLE_MASS_LENGTH = POLE_MASS * HALF_POLE
    FORCE_MAG = 10.0
    TAU = 0.02
    X_LIMIT = 2.4
    THETA_LIMIT = 12 * 2 * np.pi / 360

    def __init__(self, dense: bool = False, episode_len: int = 200):
        self.dense = dense
        self.shape = EnvShape(obs_dim=4, n_actions=2, episode_len=episode_len, default_lifetime=500)
        self.state: np.ndarray | None = None
        self._t = 0
        self._done = True

    def reset(self, rng: Rng) -> EnvStep:
        self.state = np.asarray(rng.random(4)) * 0.1 - 0.05
        self._t = 0
        self._done = False
        return EnvStep(obs=self.state.astype(F32), reward=0.0, done=False)

    def step(self, action: int, rng: Rng) -> EnvStep:
        if self._done or self.state is None:
            raise EnvStateError("episode finished; call reset()")
        action = self._check_action(action)
        x, x_dot, theta, theta_dot = self.state
        force = self.FORCE_MAG if action == 1 else -self.FORCE_MAG
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        temp = (force + self.POLE_MASS_LENGTH * theta_dot**2 * sin_t) / self.TOTAL_MASS
        theta_acc = (self.GRAVITY * sin_t - cos_t * temp) / (
            self.HALF_POLE * (4.0 / 3.0 - self.POLE_MASS * cos_t**2 / self.TOTAL_MASS)
        )
        x_acc = temp - self.POLE_MASS_LENGTH * theta_acc * cos_t / self.TOTAL_MASS
        x = x + self.TAU * x_dot
        x_dot = x_dot + self.TAU * x_acc
        theta = theta + self.TAU * theta_dot
        theta_dot = theta_dot + self.TAU * theta_acc
        self.state = np.array([x, x_dot, theta, theta_dot])
        self._t += 1

        if self.dense:
            reward = 0.5 * (np.cos(theta) + 1.0) * max(0.0, 1.0 - abs(x) / self.X_LIMIT)
            self._done = self._t >= self.shape.episode_len
        else:
            reward = 1.0
            fell = abs(x) > self.X_LIMIT or abs(theta) > self.THETA_LIMIT
            self._done = fell or self._t >= self.shape.episode_len
        return EnvStep(obs=self.state.astype(F32), reward=float(reward), done=self._done)


def _acrobot_dsdt(s: np.ndarray, torque: float) -> np.ndarray:
    m1 = m2 = 1.0
    l1 = 1.0
    lc1 = lc2 = 0.5
    i1 = i2 = 1.0
    g = 9.8
    theta1, theta2, dtheta1, dtheta2 = s
    d1 = m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * np.cos(theta2)) + i1 + i2
    d2 = m2 * (lc2**2 + l1 * lc2 * np.cos(theta2)) + i2
    phi2 = m2 * lc2 * g * np.cos(theta1 + theta2 - np.pi / 2)
    phi1 = (
        -m2 * l1 * lc2 * dtheta2**2 * np.sin(theta2)
        - 2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * np.sin(theta2)
        + (m1 * lc1 + m2 * l1) * g * np.cos(theta1 - np.pi / 2)
        + phi2
    )
    ddtheta2 = (
        torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1**2 * np.sin(theta2) - phi2
    ) / (m2 * lc2**2 + i2 - d2**2 / d1)
    ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
    return np.array([dtheta1, dtheta2, ddtheta1, ddtheta2])


def _wrap_angle(x: float) -> float:
    return float((x + np.pi) % (2 * np.pi) - np.pi)


class AcrobotEnv(Env):
    """Two-link swing-up; torque in {-1, 0, +1} on the middle joint, RK4 at dt=0.2.

    Reward -1 per step until the tip rises above one link length
    (-cos(t1) - cos(t1 + t2) > 1), then 0 and the episode ends.
    """

    DT = 0.2
    MAX_VEL_1 = 4 * np.pi
    MAX_VEL_2 = 9 * np.pi
    TORQUES = (-1.0, 0.0, 1.0)

    def __init__(self, episode_len: int = 200):
        self.shape = EnvShape(obs_dim=6, n_actions=3, episode_len=episode_len, default_lifetime=500)
        self.state: np.ndarray | None = None
        self._t = 0
        self._done = True

    def _obs(self) -> np.ndarray:
        t1, t2, d1, d2 = self.state
        return np.array([np.cos(t1), np.sin(t1), np.cos(t2), np.sin(t2), d1, d2], dtype=F32)

    def reset(self, rng: Rng) -> EnvStep:
        self.state = np.asarray(rng.random(4)) * 0.2 - 0.1
        self._t = 0
        self._done = False
        return EnvStep(obs=self._obs(), reward=0.0, done=False)

    def step(self, action: int, rng: Rng) -> EnvStep:
        if self._done or self.state is None:
            raise EnvStateError("episode finished; call reset()")
        torque = self.TORQUES[self._check_action(action)]
        s = self.state
        # one RK4 step over [0, DT]
        k1 = _acrobot_dsdt(s, torque)
        k2 = _acrobot_dsdt(s + 0.5 * self.DT * k1, torque)
        k3 = _acrobot_dsdt(s + 0.5 * self.DT * k2, torque)
        k4 = _acrobot_dsdt(s + self.DT * k3, torque)
        ns = s + self.DT / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        ns[0] = _wrap_angle(ns[0])
        ns[1] = _wrap_angle(ns[1])
        ns[2] = np.clip(ns[2], -self.MAX_VEL_1, self.MAX_VEL_1)
        ns[3] = np.clip(ns[3], -self.MAX_VEL_2, self.MAX_VEL_2)
        self.state = ns
        self._t += 1
        swung_up = bool(-np.cos(ns[0]) - np.cos(ns[1] + ns[0]) > 1.0)
        self._done = swung_up or self._t >= self.shape.episode_len
        reward = 0.0 if swung_up else -1.0
        return EnvStep(obs=self._obs(), reward=reward, done=self._done)


class MountainCarEnv(Env):
    """Underpowered car in a valley; actions push left / coast / push right."""

    MIN_POS = -1.2
    MAX_POS = 0.6
    MAX_SPEED = 0.07
    GOAL_POS = 0.5
    FORCE = 0.001
    GRAVITY = 0.0025

    def __init__(self, episode_len: int = 200):
        self.shape = EnvShape(obs_dim=2, n_actions=3, episode_len=episode_len, default_lifetime=500)
        self.state: np.ndarray | None = None
        self._t = 0
        self._done = True

    def reset(self, rng: Rng) -> EnvStep:
        pos = -0.6 + 0.2 * rng.random()
        self.state = np.array([pos, 0.0])
        self._t = 0
        self._done = False
        return EnvStep(obs=self.state.astype(F32), reward=0.0, done=False)

    def step(self, action: int, rng: Rng) -> EnvStep:
        if self._done or self.state is None:
            raise EnvStateError("episode finished; call reset()")
        action = self._check_action(action)
        pos, vel = self.state
        vel += (action - 1) * self.FORCE + np.cos(3 * pos) * (-self.GRAVITY)
        vel = float(np.clip(vel, -self.MAX_SPEED, self.MAX_SPEED))
        pos = float(np.clip(pos + vel, self.MIN_POS, self.MAX_POS))
        if pos == self.MIN_POS and vel < 0:
            vel = 0.0
        self.state = np.array([pos, vel])
        self._t += 1
        reached = pos >= self.GOAL_POS and vel >= 0.0
        self._done = reached or self._t >= self.shape.episode_len
        return EnvStep(obs=self.state.astype(F32), reward=-1.0, done=self._done)
