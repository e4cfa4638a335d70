"""String-name environment registry used by configs and the CLI."""

from __future__ import annotations

from .bandits import BanditEnv
from .base import Env, EnvShape
from .control import AcrobotEnv, CartPoleEnv, MountainCarEnv
from .grid import DenseGridEnv, HeartTrapGridEnv

_BANDITS = {
    "bandit.uniform_indep": "uniform_indep",
    "bandit.uniform_dep": "uniform_dep",
    "bandit.easy_dep": "easy_dep",
    "bandit.medium_dep": "medium_dep",
    "bandit.hard_dep": "hard_dep",
    "bandit.indep_k": "indep_k",
}

_OTHERS = {
    "cartpole": lambda: CartPoleEnv(dense=False),
    "cartpole.dense": lambda: CartPoleEnv(dense=True),
    "acrobot": AcrobotEnv,
    "mountaincar": MountainCarEnv,
    "grid.heart_trap": HeartTrapGridEnv,
    "grid.dense": DenseGridEnv,
}


def env_names() -> list[str]:
    return sorted(list(_BANDITS) + list(_OTHERS))


def make_env(name: str, *, arms: int | None = None, swap_rewards: bool = False) -> Env:
    """Construct a registered environment by name.

    arms applies only to bandit.indep_k (where it is required); swap_rewards
    only to grid.heart_trap.
    """
    if name in _BANDITS:
        kind = _BANDITS[name]
        if swap_rewards:
            raise ValueError(f"swap_rewards is not supported for {name}")
        if kind == "indep_k":
            if arms is None:
                raise ValueError("bandit.indep_k requires an explicit arm count (arms=...)")
            return BanditEnv(kind, arms=arms)
        if arms not in (None, 2):
            raise ValueError(f"{name} is two-armed; got arms={arms}")
        return BanditEnv(kind)
    if name in _OTHERS:
        if arms is not None:
            raise ValueError(f"arms does not apply to {name}")
        if swap_rewards:
            if name != "grid.heart_trap":
                raise ValueError(f"swap_rewards is not supported for {name}")
            return HeartTrapGridEnv(swap_rewards=True)
        return _OTHERS[name]()
    raise ValueError(f"unknown environment {name!r}; known: {', '.join(env_names())}")


def env_shape(name: str, *, arms: int | None = None) -> EnvShape:
    return make_env(name, arms=arms).shape


def is_bandit(name: str) -> bool:
    return name in _BANDITS
