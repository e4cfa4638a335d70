"""Meta-test result files: a per-step CSV table and a JSON summary.

Both writers are byte-stable for identical inputs so result files can be
hashed to confirm reproducibility.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .lifetime import MetaTestResult

TABLE_COLUMNS = ("run", "step", "reward", "cum_regret", "baseline_reward")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_table(path, result: MetaTestResult) -> None:
    runs, steps = result.rewards.shape
    cum = None if result.regrets is None else np.cumsum(result.regrets, axis=1)
    lines = [",".join(TABLE_COLUMNS)]
    for m in range(runs):
        for t in range(steps):
            regret = "" if cum is None else _fmt(cum[m, t])
            base = "" if result.baseline_rewards is None else _fmt(result.baseline_rewards[m, t])
            lines.append(f"{m},{t},{_fmt(result.rewards[m, t])},{regret},{base}")
    Path(path).write_text("\n".join(lines) + "\n")


def summary_dict(result: MetaTestResult, **context) -> dict:
    d = dict(context)
    d["runs"] = int(result.rewards.shape[0])
    d["steps"] = int(result.rewards.shape[1])
    d["mean_fitness"] = result.mean_fitness
    d["std_fitness"] = result.std_fitness
    d["sem_fitness"] = result.sem_fitness
    if result.regrets is not None:
        d["mean_cum_regret"] = result.mean_cum_regret
        d["std_cum_regret"] = float(result.cum_regret.std(ddof=1))
    if result.baseline_rewards is not None:
        d["baseline_mean_fitness"] = float(result.baseline_rewards.sum(axis=1).mean())
        if result.baseline_regrets is not None:
            d["baseline_mean_cum_regret"] = float(result.baseline_regrets.sum(axis=1).mean())
    return d


def write_summary(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
