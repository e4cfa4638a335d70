"""Evolution strategies on agent parameters.

Search-gradient estimator over Gaussian perturbations of a flat parameter
vector, with optional antithetic sampling and centered-rank fitness shaping,
ascended with Adam.  Fitness here is "total reward over a lifetime", so the
optimizer maximizes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .mathcore import F32, Rng, ensure_finite


@dataclass
class EsConfig:
    population: int = 64
    sigma: float = 0.2
    lr: float = 0.2
    outer_steps: int = 300
    evals_per_sample: int = 4
    antithetic: bool = True
    rank_shaping: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> None:
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.antithetic and self.population % 2 != 0:
            raise ValueError("antithetic sampling needs an even population")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


def member_noise(rng: Rng, index: int, dim: int, population: int, antithetic: bool) -> np.ndarray:
    """Noise row for one population member, reconstructible from (rng, index).

    With antithetic sampling the second half of the population mirrors the
    first, so member i >= population/2 reuses the draw of its partner with the
    sign flipped.
    """
    if antithetic:
        half = population // 2
        if index >= half:
            return -rng.split(index - half).normal(dim)
    return rng.split(index).normal(dim)


def perturbations(rng: Rng, population: int, dim: int, antithetic: bool) -> np.ndarray:
    """(population, dim) float32 noise matrix; rows match member_noise."""
    if antithetic:
        half = population // 2
        base = np.stack([rng.split(i).normal(dim) for i in range(half)])
        return np.concatenate([base, -base], axis=0)
    return np.stack([rng.split(i).normal(dim) for i in range(population)])


def centered_ranks(values: np.ndarray) -> np.ndarray:
    """Map fitness values to centered ranks in [-0.5, 0.5], averaging ties.

    The best value maps to +0.5, the worst to -0.5, and equal values share the
    mean of the ranks they span, so a constant vector maps to all zeros.
    """
    v = np.asarray(values, dtype=np.float64)
    n = v.shape[0]
    if n < 2:
        return np.zeros(n, dtype=F32)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.arange(1, n + 1, dtype=np.float64)
    # average ranks over tied groups
    sv = v[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sv[j + 1] == sv[i]:
            j += 1
        if j > i:
            ranks[order[i : j + 1]] = 0.5 * (i + 1 + j + 1)
        i = j + 1
    return (((ranks - 1.0) / (n - 1.0)) - 0.5).astype(F32)


def es_gradient_from_fitness(
    fitness: np.ndarray, noise: np.ndarray, sigma: float, rank_shaping: bool
) -> np.ndarray:
    """Search-gradient estimate (1 / (P * sigma)) * sum_i w_i * eps_i."""
    pop = noise.shape[0]
    if fitness.shape != (pop,):
        raise ValueError(f"fitness shape {fitness.shape} does not match population {pop}")
    w = centered_ranks(fitness) if rank_shaping else np.asarray(fitness, dtype=F32)
    grad = (w[:, None].astype(np.float64) * noise.astype(np.float64)).sum(axis=0)
    grad /= pop * sigma
    return ensure_finite(grad.astype(F32), "es gradient")


def es_gradient(
    theta: np.ndarray,
    fitness_fn,
    cfg: EsConfig,
    rng: Rng,
) -> tuple[np.ndarray, np.ndarray]:
    """One search-gradient estimate at theta.

    fitness_fn maps a (population, dim) candidate matrix to a (population,)
    fitness vector.  Returns (gradient, fitness).
    """
    cfg.validate()
    dim = theta.shape[0]
    noise = perturbations(rng, cfg.population, dim, cfg.antithetic)
    candidates = (theta[None, :] + cfg.sigma * noise).astype(F32)
    fitness = np.asarray(fitness_fn(candidates), dtype=F32)
    grad = es_gradient_from_fitness(fitness, noise, cfg.sigma, cfg.rank_shaping)
    return grad, fitness


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "AdamState":
        return cls(np.zeros(dim, dtype=F32), np.zeros(dim, dtype=F32))


def adam_step(
    theta: np.ndarray, grad: np.ndarray, state: AdamState, cfg: EsConfig
) -> np.ndarray:
    """Adam ascent step (gradient points uphill); mutates state, returns new theta."""
    state.t += 1
    g = grad.astype(np.float64)
    m = cfg.beta1 * state.m.astype(np.float64) + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * state.v.astype(np.float64) + (1.0 - cfg.beta2) * g * g
    state.m = m.astype(F32)
    state.v = v.astype(F32)
    mhat = m / (1.0 - cfg.beta1 ** state.t)
    vhat = v / (1.0 - cfg.beta2 ** state.t)
    step = cfg.lr * mhat / (np.sqrt(vhat) + cfg.eps)
    return ensure_finite((theta.astype(np.float64) + step).astype(F32), "adam update")


@dataclass
class EsLogEntry:
    outer_step: int
    mean_fitness: float
    max_fitness: float
    theta_norm: float
    wall_ms: float

    def as_dict(self) -> dict:
        return {
            "outer_step": self.outer_step,
            "mean_fitness": self.mean_fitness,
            "max_fitness": self.max_fitness,
            "theta_norm": self.theta_norm,
            "wall_ms": self.wall_ms,
        }


@dataclass
class EsRun:
    theta: np.ndarray
    adam: AdamState
    history: list = field(default_factory=list)


def run_es(
    theta0: np.ndarray,
    fitness_fn,
    cfg: EsConfig,
    rng: Rng,
    start_step: int = 0,
    adam: AdamState | None = None,
    callback=None,
) -> EsRun:
    """Run the outer loop for cfg.outer_steps updates starting at start_step.

    Step s draws its noise from rng.split(s), so a resumed run retraces the
    same perturbation sequence it would have seen uninterrupted.  callback,
    if given, is called with an EsLogEntry after each update.
    """
    cfg.validate()
    theta = np.asarray(theta0, dtype=F32).copy()
    state = adam if adam is not None else AdamState.zeros(theta.shape[0])
    run = EsRun(theta, state)
    for step in range(start_step, start_step + cfg.outer_steps):
        t0 = time.perf_counter()
        grad, fitness = es_gradient(theta, fitness_fn, cfg, rng.split(step))
        theta = adam_step(theta, grad, state, cfg)
        entry = EsLogEntry(
            outer_step=step,
            mean_fitness=float(fitness.mean()),
            max_fitness=float(fitness.max()),
            theta_norm=float(np.linalg.norm(theta.astype(np.float64))),
            wall_ms=(time.perf_counter() - t0) * 1000.0,
        )
        run.history.append(entry)
        if callback is not None:
            callback(entry, theta, state)
    run.theta = theta
    return run
