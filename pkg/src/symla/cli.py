"""Command-line harness: meta-train, meta-test, invariants."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agents import make_agent
from .checkpoint import Checkpoint, CheckpointError
from .config import ConfigError, load_config
from .envs import (
    PermuteWrapper,
    RandomProjectionWrapper,
    env_shape,
    make_env,
    permutation_from_seed,
)
from .invariants import run_all
from .lifetime import run_meta_test
from .results import summary_dict, write_summary, write_table


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symla", description="Symmetric black-box meta-RL harness")
    sub = p.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("meta-train", help="train meta-parameters from a config file")
    tr.add_argument("--config", required=True, help="path to a JSON experiment config")
    tr.add_argument("--out", default=None, help="output directory (default: runs/<config name>)")
    tr.add_argument("--resume", default=None, metavar="CKPT", help="continue from a checkpoint")
    tr.add_argument("--workers", type=int, default=1, help="parallel population evaluators")

    te = sub.add_parser("meta-test", help="evaluate a trained checkpoint on an environment")
    te.add_argument("--ckpt", required=True, help="checkpoint file from meta-train")
    te.add_argument("--env", required=True, help="registered environment name")
    te.add_argument("--arms", type=int, default=None, help="arm count for bandit.indep_k")
    te.add_argument("--permute-seed", type=int, default=None, help="apply a fixed obs/action permutation")
    te.add_argument("--swap-rewards", action="store_true", help="swap the grid-world payouts")
    te.add_argument("--project-dim", type=int, default=None, help="random obs projection, fresh per lifetime")
    te.add_argument("--runs", type=int, default=100, help="independent meta-test lifetimes")
    te.add_argument("--lifetime", type=int, default=None, help="steps per lifetime (default: env default)")
    te.add_argument("--seed", type=int, default=0)
    te.add_argument("--out", default=None, help="directory for table.csv and summary.json")
    te.add_argument("--no-baseline", action="store_true", help="skip the paired random-policy baseline")

    inv = sub.add_parser("invariants", help="check the architecture's symmetry properties")
    inv.add_argument("--quick", action="store_true", help="smaller instance counts")
    return p


def _cmd_meta_train(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out or cfg.out_dir or f"runs/{cfg.name}"
    print(f"config {cfg.name} (hash {cfg.config_hash()}) -> {out_dir}")
    every = max(1, cfg.es.outer_steps // 20)

    def echo(entry):
        if entry.outer_step % every == 0 or entry.outer_step == cfg.es.outer_steps - 1:
            print(
                f"step {entry.outer_step:6d}  mean {entry.mean_fitness:9.3f}  "
                f"max {entry.max_fitness:9.3f}  |theta| {entry.theta_norm:8.3f}  {entry.wall_ms:7.1f} ms"
            )

    from .training import meta_train

    result = meta_train(cfg, out_dir, resume_from=args.resume, workers=args.workers, echo=echo)
    print(f"done at outer step {result.outer_step}; checkpoint {result.checkpoint_path}")
    return 0


def _cmd_meta_test(args) -> int:
    ck = Checkpoint.load(args.ckpt)
    shape = env_shape(args.env, arms=args.arms)
    in_dim = args.project_dim if args.project_dim is not None else shape.obs_dim
    n_actions = shape.n_actions
    if ck.agent_kind == "metarnn" and (in_dim, n_actions) != (ck.in_dim, ck.n_actions):
        raise CheckpointError(
            f"metarnn parameters are shape-specific: checkpoint was trained for "
            f"obs {ck.in_dim} / actions {ck.n_actions}, but {args.env} needs "
            f"obs {in_dim} / actions {n_actions}"
        )
    agent = make_agent(ck.agent_kind, in_dim, n_actions, arch=ck.arch(), theta=ck.theta)

    if args.permute_seed is not None:
        obs_perm, act_perm = permutation_from_seed(args.permute_seed, shape)
    else:
        obs_perm = act_perm = None

    def factory(rng):
        env = make_env(args.env, arms=args.arms, swap_rewards=args.swap_rewards)
        if obs_perm is not None:
            env = PermuteWrapper(env, obs_perm, act_perm)
        if args.project_dim is not None:
            env = RandomProjectionWrapper(env, rng.split(701), args.project_dim)
        return env

    lifetime = args.lifetime if args.lifetime is not None else shape.default_lifetime
    result = run_meta_test(agent, factory, args.runs, lifetime, args.seed, baseline=not args.no_baseline)

    print(f"agent {ck.agent_kind} ({ck.config_hash}) on {args.env}, {args.runs} runs x {lifetime} steps")
    print(f"mean fitness {result.mean_fitness:.3f} +- {result.sem_fitness:.3f} (sem)")
    if result.mean_cum_regret is not None:
        print(f"mean cumulative regret {result.mean_cum_regret:.3f}")
    if result.baseline_rewards is not None:
        base = float(result.baseline_rewards.sum(axis=1).mean())
        print(f"random baseline fitness {base:.3f}")

    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_table(out / "table.csv", result)
        context = {
            "agent_kind": ck.agent_kind,
            "config_hash": ck.config_hash,
            "env": args.env,
            "seed": args.seed,
            "lifetime": lifetime,
            "arms": args.arms,
            "permute_seed": args.permute_seed,
            "swap_rewards": args.swap_rewards,
            "project_dim": args.project_dim,
        }
        write_summary(out / "summary.json", summary_dict(result, **context))
        print(f"wrote {out / 'table.csv'} and {out / 'summary.json'}")
    return 0


def _cmd_invariants(args) -> int:
    results = run_all(quick=args.quick)
    failed = 0
    for res in results:
        mark = "PASS" if res.passed else "FAIL"
        print(f"[{mark}] {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "meta-train":
            return _cmd_meta_train(args)
        if args.command == "meta-test":
            return _cmd_meta_test(args)
        return _cmd_invariants(args)
    except (ConfigError, CheckpointError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
