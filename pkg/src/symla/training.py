"""Meta-training driver: wires configs, the population evaluator, and ES
together, with JSONL logging, periodic checkpoints, and resumable runs."""

from __future__ import annotations

import dataclasses
import json
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import MetarnnArch, RolloutEngine, SymlaArch, metarnn_init, symla_init
from .checkpoint import Checkpoint, CheckpointError
from .config import EnvConfig, ExperimentConfig
from .envs import RandomProjectionWrapper, env_shape, make_env
from .es import AdamState, run_es
from .lifetime import evaluate_population
from .mathcore import Rng

LOG_NAME = "train_log.jsonl"
CKPT_NAME = "checkpoint.bin"


def build_env_factory(env_cfg: EnvConfig):
    """rng -> Env. The rng seeds construction-time randomness only (the
    random projection, resampled per lifetime); interaction randomness comes
    from the separate stream passed to reset/step."""

    def factory(rng: Rng):
        env = make_env(env_cfg.name, arms=env_cfg.arms)
        if env_cfg.project_dim is not None:
            env = RandomProjectionWrapper(env, rng.split(701), env_cfg.project_dim)
        return env

    return factory


def build_arch(cfg: ExperimentConfig):
    if cfg.agent.kind == "symla":
        return SymlaArch(hidden=cfg.agent.hidden, msg_fwd=cfg.agent.msg_fwd, msg_bwd=cfg.agent.msg_bwd)
    return MetarnnArch(hidden=cfg.agent.hidden)


def agent_dims(cfg: ExperimentConfig) -> tuple[int, int]:
    shape = env_shape(cfg.env.name, arms=cfg.env.arms)
    in_dim = cfg.env.project_dim if cfg.env.project_dim is not None else shape.obs_dim
    return in_dim, shape.n_actions


def init_theta(cfg: ExperimentConfig, rng: Rng) -> np.ndarray:
    arch = build_arch(cfg)
    in_dim, n_actions = agent_dims(cfg)
    if cfg.agent.kind == "symla":
        return symla_init(arch, rng)
    return metarnn_init(arch, in_dim, n_actions, rng)


_WORKER: dict = {}


def _worker_init(kind, in_dim, n_actions, arch_fields, env_fields):
    _WORKER["engine"] = RolloutEngine(
        kind,
        in_dim,
        n_actions,
        SymlaArch(**arch_fields) if kind == "symla" else MetarnnArch(**arch_fields),
    )
    _WORKER["factory"] = build_env_factory(EnvConfig(**env_fields))


def _worker_eval(args):
    thetas_chunk, evals, steps, seed, path = args
    # the chunk result is independent of the chunking because env and
    # evaluation streams are keyed by eval index, not population index
    return evaluate_population(
        _WORKER["engine"], thetas_chunk, _WORKER["factory"], evals, steps, Rng(seed, path)
    )


def _arch_fields(cfg: ExperimentConfig) -> dict:
    if cfg.agent.kind == "symla":
        return {"hidden": cfg.agent.hidden, "msg_fwd": cfg.agent.msg_fwd, "msg_bwd": cfg.agent.msg_bwd}
    return {"hidden": cfg.agent.hidden}


def _env_fields(cfg: ExperimentConfig) -> dict:
    return {"name": cfg.env.name, "arms": cfg.env.arms, "project_dim": cfg.env.project_dim}


class _PopulationFitness:
    """Callable fitness for run_es; advances one evaluation stream per outer
    step so that a resumed run replays the exact remaining streams."""

    def __init__(self, cfg: ExperimentConfig, root: Rng, start_step: int, workers: int, pool):
        self.cfg = cfg
        self.root = root
        self.step = start_step
        self.workers = workers
        self.pool = pool
        in_dim, n_actions = agent_dims(cfg)
        self.engine = RolloutEngine(cfg.agent.kind, in_dim, n_actions, build_arch(cfg))
        self.factory = build_env_factory(cfg.env)

    def __call__(self, candidates: np.ndarray) -> np.ndarray:
        rng = self.root.split(2, self.step)
        self.step += 1
        evals = self.cfg.es.evals_per_sample
        steps = self.cfg.lifetime
        if self.pool is None:
            return evaluate_population(self.engine, candidates, self.factory, evals, steps, rng)
        chunks = np.array_split(candidates, self.workers)
        jobs = [(chunk, evals, steps, rng.seed, rng.path) for chunk in chunks if chunk.shape[0] > 0]
        parts = self.pool.map(_worker_eval, jobs)
        return np.concatenate(parts)


@dataclass
class TrainResult:
    theta: np.ndarray
    adam: AdamState
    outer_step: int
    history: list
    checkpoint_path: Path
    log_path: Path
    config_hash: str


def _save_checkpoint(path, cfg, chash, theta, adam, outer_step) -> None:
    Checkpoint(
        agent_kind=cfg.agent.kind,
        arch_fields=_arch_fields(cfg),
        in_dim=agent_dims(cfg)[0],
        n_actions=agent_dims(cfg)[1],
        env=_env_fields(cfg),
        config_hash=chash,
        seed=cfg.seed,
        outer_step=outer_step,
        theta=theta,
        adam_m=adam.m,
        adam_v=adam.v,
    ).save(path)


def meta_train(
    cfg: ExperimentConfig,
    out_dir,
    resume_from=None,
    workers: int = 1,
    echo=None,
) -> TrainResult:
    """Train per config, writing out_dir/train_log.jsonl and checkpoint.bin.

    resume_from loads a checkpoint written by the same config (hash-checked)
    and continues to cfg.es.outer_steps total updates; the result is
    bit-identical to an uninterrupted run with the same seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt_path = out / CKPT_NAME
    log_path = out / LOG_NAME
    chash = cfg.config_hash()
    root = Rng(cfg.seed)

    if resume_from is not None:
        ck = Checkpoint.load(resume_from)
        if ck.config_hash != chash:
            raise CheckpointError(
                f"checkpoint config hash {ck.config_hash} does not match config {chash}; "
                "refusing to resume with different meta-parameters"
            )
        theta = ck.theta
        adam = AdamState(ck.adam_m.copy(), ck.adam_v.copy(), t=ck.outer_step)
        start = ck.outer_step
    else:
        theta = init_theta(cfg, root.split(0))
        adam = AdamState.zeros(theta.shape[0])
        start = 0

    remaining = cfg.es.outer_steps - start
    if remaining <= 0:
        _save_checkpoint(ckpt_path, cfg, chash, theta, adam, start)
        return TrainResult(theta, adam, start, [], ckpt_path, log_path, chash)

    pool = None
    if workers > 1:
        pool = multiprocessing.get_context("fork").Pool(
            workers,
            initializer=_worker_init,
            initargs=(cfg.agent.kind, *agent_dims(cfg), _arch_fields(cfg), _env_fields(cfg)),
        )
    fitness = _PopulationFitness(cfg, root, start, workers, pool)

    log_fh = open(log_path, "a" if resume_from is not None else "w")
    try:

        def on_step(entry, theta_now, adam_now):
            log_fh.write(json.dumps(entry.as_dict(), sort_keys=True) + "\n")
            log_fh.flush()
            done = entry.outer_step + 1
            if cfg.checkpoint_every > 0 and done % cfg.checkpoint_every == 0:
                _save_checkpoint(ckpt_path, cfg, chash, theta_now, adam_now, done)
            if echo is not None:
                echo(entry)

        run_cfg = dataclasses.replace(cfg.es, outer_steps=remaining)
        run = run_es(theta, fitness, run_cfg, root.split(1), start_step=start, adam=adam, callback=on_step)
    finally:
        log_fh.close()
        if pool is not None:
            pool.close()
            pool.join()

    final_step = start + remaining
    _save_checkpoint(ckpt_path, cfg, chash, run.theta, run.adam, final_step)
    return TrainResult(run.theta, run.adam, final_step, run.history, ckpt_path, log_path, chash)
