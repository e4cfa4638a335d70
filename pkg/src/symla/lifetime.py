"""Agent lifetimes: many episodes, one persistent agent state.

A lifetime is `steps` agent-environment interactions. Episode ends reset the
environment only; the agent's recurrent state, previous action and previous
reward carry across the boundary, which is what lets meta-learned agents keep
adapting within a lifetime. The first step feeds reward 0 and a zero one-hot
(no previous action). Fitness is the plain sum of rewards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .agents import Agent, AgentIO, RolloutEngine
from .envs.base import Env
from .mathcore import F32, Rng


@dataclass
class LifetimeResult:
    rewards: np.ndarray  # (steps,) float32
    actions: np.ndarray  # (steps,) int
    expected_regrets: np.ndarray | None  # (steps,) float64; None when unknown
    episode_returns: list[float]

    @property
    def fitness(self) -> float:
        return float(self.rewards.sum())


def random_agent(in_dim: int, n_actions: int) -> Agent:
    """Uniform-random policy used as the inline baseline."""

    def init_state(rng: Rng):
        return None

    def step(state, io: AgentIO, rng: Rng, force_action: int | None = None):
        a = force_action if force_action is not None else int(rng.integers(n_actions))
        return None, int(a)

    return Agent("random", in_dim, n_actions, None, np.zeros(0, dtype=F32), init_state, step)


def run_lifetime(
    agent: Agent, env: Env, steps: int, rng: Rng, env_rng: Rng | None = None
) -> LifetimeResult:
    """Run one lifetime of `steps` interactions; agent state persists across episodes."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    agent_rng = rng.split(0)
    if env_rng is None:
        env_rng = rng.split(1)
    state = agent.init_state(agent_rng)
    obs = env.reset(env_rng).obs
    prev_action: int | None = None
    prev_reward = 0.0
    rewards = np.zeros(steps, dtype=F32)
    actions = np.zeros(steps, dtype=np.int64)
    regrets: list[float] | None = []
    episode_returns: list[float] = []
    episode_acc = 0.0
    for t in range(steps):
        state, a = agent.step(state, AgentIO(obs, prev_reward, prev_action), agent_rng)
        res = env.step(a, env_rng)
        rewards[t] = res.reward
        actions[t] = a
        if regrets is not None:
            reg = env.expected_regret(a)
            if reg is None:
                regrets = None
            else:
                regrets.append(reg)
        episode_acc += res.reward
        prev_action = a
        prev_reward = res.reward
        if res.done:
            episode_returns.append(episode_acc)
            episode_acc = 0.0
            obs = env.reset(env_rng).obs
        else:
            obs = res.obs
    if episode_acc != 0.0 or not episode_returns:
        episode_returns.append(episode_acc)
    return LifetimeResult(
        rewards=rewards,
        actions=actions,
        expected_regrets=None if regrets is None else np.array(regrets),
        episode_returns=episode_returns,
    )


@dataclass
class MetaTestResult:
    rewards: np.ndarray  # (runs, steps)
    regrets: np.ndarray | None  # (runs, steps)
    baseline_rewards: np.ndarray | None
    baseline_regrets: np.ndarray | None

    @property
    def fitness(self) -> np.ndarray:
        return self.rewards.sum(axis=1)

    @property
    def mean_fitness(self) -> float:
        return float(self.fitness.mean())

    @property
    def std_fitness(self) -> float:
        return float(self.fitness.std(ddof=1))

    @property
    def sem_fitness(self) -> float:
        return self.std_fitness / np.sqrt(self.rewards.shape[0])

    @property
    def cum_regret(self) -> np.ndarray | None:
        return None if self.regrets is None else self.regrets.sum(axis=1)

    @property
    def mean_cum_regret(self) -> float | None:
        cr = self.cum_regret
        return None if cr is None else float(cr.mean())

    def reward_curve_vs_random(self) -> np.ndarray | None:
        """Per-step mean reward minus the random baseline's per-step mean reward."""
        if self.baseline_rewards is None:
            return None
        return self.rewards.mean(axis=0) - self.baseline_rewards.mean(axis=0)


def run_meta_test(
    agent: Agent,
    env_factory: Callable[[Rng], Env],
    runs: int,
    steps: int,
    seed: int,
    baseline: bool = True,
) -> MetaTestResult:
    """Evaluate a fixed agent over fresh lifetimes; optionally pair a random baseline.

    The baseline shares each run's environment construction and dynamics
    streams, so comparisons are made on identical task draws.
    """
    root = Rng(seed)
    rewards, regrets = [], []
    base_rewards, base_regrets = [], []
    have_regrets = True
    rand = random_agent(agent.in_dim, agent.n_actions)
    for m in range(runs):
        env = env_factory(root.split(0, m))
        res = run_lifetime(agent, env, steps, rng=root.split(1, m), env_rng=root.split(2, m))
        rewards.append(res.rewards)
        have_regrets = have_regrets and res.expected_regrets is not None
        if res.expected_regrets is not None:
            regrets.append(res.expected_regrets)
        if baseline:
            env_b = env_factory(root.split(0, m))
            res_b = run_lifetime(rand, env_b, steps, rng=root.split(3, m), env_rng=root.split(2, m))
            base_rewards.append(res_b.rewards)
            if res_b.expected_regrets is not None:
                base_regrets.append(res_b.expected_regrets)
    return MetaTestResult(
        rewards=np.stack(rewards),
        regrets=np.stack(regrets) if have_regrets and regrets else None,
        baseline_rewards=np.stack(base_rewards) if baseline else None,
        baseline_regrets=np.stack(base_regrets) if baseline and have_regrets and base_regrets else None,
    )


def evaluate_population(
    engine: RolloutEngine,
    thetas: np.ndarray,
    env_factory: Callable[[Rng], Env],
    evals: int,
    steps: int,
    rng: Rng,
) -> np.ndarray:
    """Mean fitness per population member, all rollouts stepped in lockstep.

    thetas: (pop, dim). Eval slot j shares its environment seed, initial agent
    state and per-step sampling uniforms across the whole population (common
    random numbers), so fitness differences reflect parameter differences.
    """
    if thetas.ndim != 2:
        raise ValueError(f"thetas must be (pop, dim), got {thetas.shape}")
    pop = thetas.shape[0]
    params = engine.wrap(thetas)
    envs = [[env_factory(rng.split(0, j)) for j in range(evals)] for _ in range(pop)]
    env_rngs = [[rng.split(1, j) for j in range(evals)] for _ in range(pop)]
    agent_rngs = [rng.split(2, j) for j in range(evals)]
    states = engine.init_states(agent_rngs, pop)

    obs = np.zeros((pop, evals, engine.in_dim), dtype=F32)
    for g in range(pop):
        for j in range(evals):
            obs[g, j] = envs[g][j].reset(env_rngs[g][j]).obs
    prev_action = np.full((pop, evals), -1, dtype=np.int64)
    reward_in = np.zeros((pop, evals), dtype=F32)
    total = np.zeros((pop, evals), dtype=np.float64)
    for _ in range(steps):
        u = np.array([arng.random() for arng in agent_rngs])
        states, actions, _ = engine.step(params, states, obs, prev_action, reward_in, u)
        for g in range(pop):
            for j in range(evals):
                res = envs[g][j].step(int(actions[g, j]), env_rngs[g][j])
                total[g, j] += res.reward
                reward_in[g, j] = res.reward
                if res.done:
                    obs[g, j] = envs[g][j].reset(env_rngs[g][j]).obs
                else:
                    obs[g, j] = res.obs
        prev_action = actions
    return total.mean(axis=1)
