#!/usr/bin/env python3
"""Regenerate the configs/ catalog.

Each experiment family ships in two flavors: the full-scale settings and a
_desk counterpart small enough to run on a laptop in minutes.  Run from the
repository root:  python3 scripts/make_configs.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "configs"

BANDIT_ES = {"population": 512, "sigma": 0.2, "lr": 0.2, "outer_steps": 4000, "evals_per_sample": 100}
CONTROL_ES = {"population": 512, "sigma": 0.035, "lr": 0.01, "outer_steps": 20000, "evals_per_sample": 10}
# lr is retuned for the small population: the full-scale lr of 0.2 assumes the
# far cleaner gradient of 512 samples x 100 evals and diverges at 64 x 4
DESK_BANDIT_ES = {"population": 64, "sigma": 0.2, "lr": 0.05, "outer_steps": 300, "evals_per_sample": 4}
DESK_CONTROL_ES = {"population": 64, "sigma": 0.035, "lr": 0.01, "outer_steps": 300, "evals_per_sample": 2}


def config(name, env, agent_kind, hidden, lifetime, es, desk, arms=None, project_dim=None):
    agent = {"kind": agent_kind, "hidden": hidden}
    env_d = {"name": env}
    if arms is not None:
        env_d["arms"] = arms
    if project_dim is not None:
        env_d["project_dim"] = project_dim
    return {
        "name": name,
        "seed": 0,
        "agent": agent,
        "env": env_d,
        "lifetime": lifetime,
        "meta_test_runs": 100,
        "checkpoint_every": 50 if desk else 100,
        "es": dict(es),
    }


def catalog():
    out = []

    # two-armed bandit families: train on each difficulty setting
    for setting in ("easy_dep", "medium_dep", "hard_dep", "uniform_dep", "uniform_indep"):
        env = f"bandit.{setting}"
        for kind in ("symla", "metarnn"):
            out.append(config(f"fig2_{setting}_{kind}", env, kind, 64, 100, BANDIT_ES, desk=False))
            out.append(
                config(f"fig2_{setting}_{kind}_desk", env, kind, 16 if kind == "symla" else 64, 100, DESK_BANDIT_ES, desk=True)
            )

    # varying numbers of independent arms; grid resizing at test time
    for arms in (2, 5, 10):
        out.append(config(f"fig3_arms{arms}_symla", "bandit.indep_k", "symla", 64, 100, BANDIT_ES, desk=False, arms=arms))
        out.append(
            config(f"fig3_arms{arms}_symla_desk", "bandit.indep_k", "symla", 16, 100, DESK_BANDIT_ES, desk=True, arms=arms)
        )

    # classic control with original ordering; permutations applied at test time
    for env in ("cartpole", "acrobot", "mountaincar"):
        for kind in ("symla", "metarnn"):
            hidden = 16 if kind == "symla" else 128
            out.append(config(f"fig4_{env}_{kind}", env, kind, hidden, 500, CONTROL_ES, desk=False))
            out.append(
                config(f"fig4_{env}_{kind}_desk", env, kind, 16 if kind == "symla" else 64, 100, DESK_CONTROL_ES, desk=True)
            )

    # heart/trap grid world; payout swap applied at test time
    for kind in ("symla", "metarnn"):
        hidden = 16 if kind == "symla" else 128
        out.append(config(f"fig5_heart_trap_{kind}", "grid.heart_trap", kind, hidden, 500, CONTROL_ES, desk=False))
        out.append(
            config(f"fig5_heart_trap_{kind}_desk", "grid.heart_trap", kind, 16 if kind == "symla" else 64, 100, DESK_CONTROL_ES, desk=True)
        )

    # dense grid world with per-lifetime random projections; test on cartpole.dense
    for kind in ("symla", "metarnn"):
        hidden = 16 if kind == "symla" else 128
        out.append(
            config(f"fig6_grid_projected_{kind}", "grid.dense", kind, hidden, 500, CONTROL_ES, desk=False, project_dim=16)
        )
        out.append(
            config(
                f"fig6_grid_projected_{kind}_desk",
                "grid.dense",
                kind,
                16 if kind == "symla" else 64,
                100,
                DESK_CONTROL_ES,
                desk=True,
                project_dim=16,
            )
        )
    return out


def main() -> int:
    sys.path.insert(0, str(ROOT / "src"))
    from symla.config import config_from_dict

    OUT.mkdir(exist_ok=True)
    for cfg in catalog():
        config_from_dict(cfg)  # refuse to write anything that fails validation
        path = OUT / f"{cfg['name']}.json"
        path.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path.relative_to(ROOT)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
