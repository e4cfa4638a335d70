from .bandits import BANDIT_KINDS, BanditEnv, draw_arms, expected_regret
from .base import Env, EnvShape, EnvStateError, EnvStep
from .control import AcrobotEnv, CartPoleEnv, MountainCarEnv
from .grid import DenseGridEnv, HeartTrapGridEnv
from .registry import env_names, env_shape, is_bandit, make_env
from .wrappers import PermuteWrapper, RandomProjectionWrapper, permutation_from_seed

__all__ = [
    "BANDIT_KINDS",
    "BanditEnv",
    "draw_arms",
    "expected_regret",
    "Env",
    "EnvShape",
    "EnvStateError",
    "EnvStep",
    "AcrobotEnv",
    "CartPoleEnv",
    "MountainCarEnv",
    "DenseGridEnv",
    "HeartTrapGridEnv",
    "env_names",
    "env_shape",
    "is_bandit",
    "make_env",
    "PermuteWrapper",
    "RandomProjectionWrapper",
    "permutation_from_seed",
]
