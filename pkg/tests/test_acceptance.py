"""End-to-end acceptance gate: nine numbered criteria, one [PASS]/[FAIL] line
each (run with -s to see the lines for passing tests too).

Criteria 5 and 6 meta-train three desk-scale bandit agents from the shipped
configs; on one core the whole file takes roughly ten minutes.  Criterion 6's
second clause expects a trained MetaRNN to collapse below random under an arm
swap; on these training families the swap is distribution-preserving (both arm
orders are equally likely during training), so a policy that learned cannot
drop below random and the clause fails honestly with the measured value.
"""

from __future__ import annotations

import hashlib
import json
import tempfile
import time
from pathlib import Path

import numpy as np

from symla.agents import make_agent
from symla.checkpoint import Checkpoint
from symla.cli import main as cli_main
from symla.config import config_from_dict, load_config
from symla.envs import (
    BanditEnv,
    DenseGridEnv,
    HeartTrapGridEnv,
    PermuteWrapper,
    draw_arms,
    make_env,
)
from symla.es import EsConfig, es_gradient, member_noise, perturbations
from symla.invariants import (
    metarnn_permutation_suite,
    size_flexibility_report,
    symla_equivariance_suite,
)
from symla.lifetime import random_agent, run_meta_test
from symla.mathcore import F32, Rng
from symla.training import build_env_factory, meta_train

REPO = Path(__file__).resolve().parent.parent
_TRAINED: dict = {}


def report(num, label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {label}: {detail}"
    print(line)
    assert ok, line


def trained(config_name):
    """Meta-train once per session from a shipped desk config; cache the result."""
    if config_name not in _TRAINED:
        cfg = load_config(REPO / "configs" / f"{config_name}.json")
        out = Path(tempfile.mkdtemp(prefix=f"acc_{config_name}_"))
        t0 = time.perf_counter()
        res = meta_train(cfg, out)
        _TRAINED[config_name] = (cfg, res, time.perf_counter() - t0)
    return _TRAINED[config_name]


def agent_from(res):
    ck = Checkpoint.load(res.checkpoint_path)
    return make_agent(ck.agent_kind, ck.in_dim, ck.n_actions, arch=ck.arch(), theta=ck.theta)


def file_sha(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def test_criterion_1_permutation_equivariance():
    t0 = time.perf_counter()
    devs = symla_equivariance_suite(seed=0, instances=100)
    control = metarnn_permutation_suite(seed=0, instances=100)
    elapsed = time.perf_counter() - t0
    frac = float((control > 1e-3).mean())
    ok = float(devs.max()) <= 1e-5 and frac >= 0.90 and elapsed < 60
    report(
        1,
        "permutation equivariance",
        ok,
        f"coupled-rollout max deviation {devs.max():.2e} (<=1e-5); "
        f"negative control {100 * frac:.0f}% above 1e-3 (>=90%); {elapsed:.1f}s",
    )


def test_criterion_2_size_flexibility():
    t0 = time.perf_counter()
    ok, detail = size_flexibility_report(seed=0)
    elapsed = time.perf_counter() - t0
    report(2, "size flexibility", ok and elapsed < 30, f"{detail}; {elapsed:.1f}s")


def test_criterion_3_es_oracle():
    t0 = time.perf_counter()

    def quad(cands):
        return -(cands.astype(np.float64) ** 2).sum(axis=1)

    theta = np.array([1.0, 0.0], dtype=F32)
    cfg = EsConfig(population=10_000, sigma=0.1, rank_shaping=False, antithetic=True)
    grad, _ = es_gradient(theta, quad, cfg, Rng(300))
    quad_ok = abs(grad[0] - (-2.0)) <= 0.1 and abs(grad[1]) <= 0.1

    a = np.array([0.8, -0.5, 1.1], dtype=np.float64)
    th = np.array([0.1, 0.2, -0.3], dtype=F32)
    sigma, pop = 0.2, 64
    rng = Rng(301)
    noise = perturbations(rng, pop, 3, antithetic=True)
    f = (th[None, :] + sigma * noise).astype(F32).astype(np.float64) @ a
    worst = 0.0
    for i in range(pop // 2):
        eps = member_noise(rng, i, 3, pop, antithetic=True)
        got = (f[i] - f[i + pop // 2]) / (2 * sigma)
        worst = max(worst, abs(got - float(eps.astype(np.float64) @ a)))
    elapsed = time.perf_counter() - t0
    ok = quad_ok and worst <= 1e-4 and elapsed < 60
    report(
        3,
        "search-gradient oracle",
        ok,
        f"quadratic estimate [{grad[0]:+.3f}, {grad[1]:+.3f}] vs [-2, 0] (5%); "
        f"antithetic linear worst pair error {worst:.2e} (<=1e-4); {elapsed:.1f}s",
    )


def test_criterion_4_random_policy_regret_oracles():
    t0 = time.perf_counter()
    expect = {
        "easy_dep": (40.0, 1.0),
        "medium_dep": (25.0, 1.0),
        "hard_dep": (10.0, 0.5),
        "uniform_dep": (25.0, 1.0),
        "uniform_indep": (50.0 / 3.0, 1.0),
    }
    agent = random_agent(1, 2)
    measured, ok = {}, True
    for kind, (want, tol) in expect.items():
        res = run_meta_test(
            agent, lambda r, k=kind: make_env(f"bandit.{k}"), 1000, 100, seed=400, baseline=False
        )
        measured[kind] = res.mean_cum_regret
        ok = ok and abs(res.mean_cum_regret - want) <= tol
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 60
    detail = ", ".join(f"{k} {v:.2f}" for k, v in measured.items())
    report(4, "random-policy regret oracles", ok, f"{detail} (targets 40/25/10/25/16.7); {elapsed:.1f}s")


def test_criterion_5_desk_bandit_learning():
    cfg_s, res_s, t_s = trained("fig2_easy_dep_symla_desk")
    cfg_m, res_m, t_m = trained("fig2_easy_dep_metarnn_desk")
    t0 = time.perf_counter()
    reg_s = run_meta_test(
        agent_from(res_s), build_env_factory(cfg_s.env), 100, 100, seed=500, baseline=False
    ).mean_cum_regret
    reg_m = run_meta_test(
        agent_from(res_m), build_env_factory(cfg_m.env), 100, 100, seed=500, baseline=False
    ).mean_cum_regret
    elapsed = t_s + t_m + (time.perf_counter() - t0)
    ok = reg_s < 25 and reg_m < 25 and elapsed < 1800
    report(
        5,
        "desk-scale bandit learning",
        ok,
        f"easy-dep regret: symla {reg_s:.2f}, metarnn {reg_m:.2f} (<25 each, random 40); {elapsed:.0f}s total",
    )


def _swapped_factory(name):
    def factory(rng):
        env = make_env(name)
        return PermuteWrapper(env, np.arange(env.shape.obs_dim), np.array([1, 0]))

    return factory


def test_criterion_6_symla_swap_invariance():
    cfg, res, t_train = trained("fig2_uniform_dep_symla_desk")
    t0 = time.perf_counter()
    agent = agent_from(res)
    plain = run_meta_test(agent, build_env_factory(cfg.env), 100, 100, seed=600, baseline=False)
    swapped = run_meta_test(agent, _swapped_factory(cfg.env.name), 100, 100, seed=600, baseline=False)
    elapsed = t_train + (time.perf_counter() - t0)
    gap = abs(plain.mean_fitness - swapped.mean_fitness)
    two_se = 2.0 * float(np.hypot(plain.sem_fitness, swapped.sem_fitness))
    ok = gap <= two_se and elapsed < 2700
    report(
        6,
        "symla fitness invariant under arm swap",
        ok,
        f"fitness {plain.mean_fitness:.2f} vs swapped {swapped.mean_fitness:.2f}, "
        f"gap {gap:.2f} <= 2se {two_se:.2f}; {elapsed:.0f}s total",
    )


def test_criterion_6_metarnn_swap_collapse():
    _, res, _ = trained("fig2_easy_dep_metarnn_desk")
    swapped = run_meta_test(
        agent_from(res), _swapped_factory("bandit.easy_dep"), 100, 100, seed=600, baseline=False
    )
    reg = swapped.mean_cum_regret
    # Expected to fail: the training distribution already contains both arm
    # orders, so a static swap maps it onto itself and a policy that learned
    # keeps its low regret; collapsing past random (40) is unreachable here.
    report(
        6,
        "metarnn collapse under arm swap (regret > 40)",
        reg > 40,
        f"swapped regret {reg:.2f}, needs > 40; swap is distribution-preserving "
        "on this training family, so the trained policy keeps its unswapped regret",
    )


def test_criterion_7_environment_correctness():
    t0 = time.perf_counter()

    def swap_channels(obs):
        return obs.reshape(3, 25)[[0, 2, 1]].ravel()

    rng = Rng(700)
    coupled_ok = True
    for _ in range(1000):
        cells = rng.permutation(25)[:3]
        agent_c, x_cell, y_cell = [(int(i) // 5, int(i) % 5) for i in cells]
        swapped = HeartTrapGridEnv(swap_rewards=True)
        normal = HeartTrapGridEnv()
        s1 = swapped.reset(rng.split(0), placement=(agent_c, x_cell, y_cell))
        s2 = normal.reset(rng.split(1), placement=(agent_c, y_cell, x_cell))
        coupled_ok &= np.array_equal(s1.obs, swap_channels(s2.obs))
        for t in range(20):
            a = int(rng.integers(4))
            r1 = swapped.step(a, rng.split(2, t))
            r2 = normal.step(a, rng.split(3, t))
            coupled_ok &= (
                np.array_equal(r1.obs, swap_channels(r2.obs))
                and r1.reward == r2.reward
                and r1.done == r2.done
            )
            if r1.done:
                break

    tele_ok = True
    env = DenseGridEnv()
    rng = Rng(701)
    for _ in range(1000):
        step = env.reset(rng)
        d0 = env._dist()
        total = 0.0
        while not step.done:
            step = env.step(int(rng.integers(4)), rng)
            total += step.reward
        tele_ok &= total == d0 - env._dist()

    marginal_ok = True
    for kind in ("uniform_indep", "uniform_dep", "easy_dep", "medium_dep", "hard_dep"):
        rng = Rng(702)
        first = sum(draw_arms(kind, 2, rng)[0] > 0.5 for _ in range(10_000))
        marginal_ok &= abs(first / 10_000 - 0.5) < 0.02

    det_ok = True
    for name in ("bandit.uniform_dep", "cartpole", "acrobot", "mountaincar", "grid.heart_trap", "grid.dense"):
        trace = []
        for _ in range(2):
            env = make_env(name)
            r = Rng(703)
            step = env.reset(r.split(0))
            rows = [step.obs.tobytes()]
            for t in range(30):
                if step.done:
                    step = env.reset(r.split(1, t))
                step = env.step(int(t % env.shape.n_actions), r.split(2, t))
                rows.append(step.obs.tobytes() + bytes([step.done]) + np.float32(step.reward).tobytes())
            trace.append(b"".join(rows))
        det_ok &= trace[0] == trace[1]

    elapsed = time.perf_counter() - t0
    ok = coupled_ok and tele_ok and marginal_ok and det_ok and elapsed < 120
    report(
        7,
        "environment correctness",
        ok,
        f"channel-swap coupling {coupled_ok}, telescoping {tele_ok}, "
        f"marginal symmetry {marginal_ok}, determinism {det_ok}; {elapsed:.1f}s",
    )


def test_criterion_8_reproducibility(tmp_path):
    cfg_d = {
        "name": "repro",
        "seed": 11,
        "agent": {"kind": "symla", "hidden": 8, "msg_fwd": 4, "msg_bwd": 4},
        "env": {"name": "bandit.medium_dep"},
        "lifetime": 20,
        "checkpoint_every": 0,
        "es": {"population": 8, "sigma": 0.2, "lr": 0.05, "outer_steps": 6, "evals_per_sample": 1},
    }
    cfg = config_from_dict(cfg_d)
    a = meta_train(cfg, tmp_path / "a")
    b = meta_train(cfg, tmp_path / "b")
    train_ok = file_sha(a.checkpoint_path) == file_sha(b.checkpoint_path)

    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg_d))
    test_args = [
        "meta-test",
        "--ckpt", str(a.checkpoint_path),
        "--env", "bandit.medium_dep",
        "--runs", "10",
        "--lifetime", "20",
        "--seed", "5",
    ]
    assert cli_main(test_args + ["--out", str(tmp_path / "t1")]) == 0
    assert cli_main(test_args + ["--out", str(tmp_path / "t2")]) == 0
    test_ok = file_sha(tmp_path / "t1" / "table.csv") == file_sha(tmp_path / "t2" / "table.csv") and file_sha(
        tmp_path / "t1" / "summary.json"
    ) == file_sha(tmp_path / "t2" / "summary.json")
    report(
        8,
        "reproducibility",
        train_ok and test_ok,
        f"identical checkpoint checksums {train_ok}, identical result-file hashes {test_ok}",
    )


def test_criterion_9_configs_and_scope_docs():
    missing = []
    parsed = 0
    for fig in (2, 3, 4, 5, 6):
        paths = sorted((REPO / "configs").glob(f"fig{fig}_*.json"))
        if not paths:
            missing.append(f"fig{fig}")
            continue
        full = [p for p in paths if not p.stem.endswith("_desk")]
        desk = [p for p in paths if p.stem.endswith("_desk")]
        if not full or not desk:
            missing.append(f"fig{fig} (need full + desk pair)")
        for p in paths:
            load_config(p)
            parsed += 1
    readme = (REPO / "README.md").read_text() if (REPO / "README.md").exists() else ""
    docs_ok = "20,000" in readme and "512" in readme and "desk" in readme.lower()
    ok = not missing and docs_ok
    report(
        9,
        "experiment catalog and scope documentation",
        ok,
        f"{parsed} configs parsed across fig2..fig6 "
        f"(missing: {missing or 'none'}); full-scale budgets documented in README: {docs_ok}",
    )
