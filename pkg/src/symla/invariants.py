"""Symmetry property checks for the agents.

Three properties are claimed for the grid agent and checked here on random
instances: the learning rule is shared by all cells, the parameter count does
not depend on the grid shape, and jointly permuting observation rows, action
columns and cell states permutes the logits. The monolithic baseline is run
through the same permutation construction as a negative control; it is supposed
to deviate.

Used both by the test suite and the `symla invariants` CLI command.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .agents import (
    MetarnnArch,
    MetarnnParams,
    SymlaArch,
    SymlaParams,
    SymlaState,
    metarnn_init_state,
    metarnn_step_core,
    onehot,
    symla_init_state,
    symla_step_core,
)
from .mathcore import F32, Rng

GRID_SHAPES = [(1, 2), (2, 2), (16, 3), (75, 4), (5, 10)]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def symla_equivariance_deviation(rng: Rng, arch: SymlaArch, a_dim: int, b_dim: int, steps: int = 10) -> float:
    """Max |permuted-run logits - permutation of base-run logits| over a coupled trajectory."""
    theta = rng.split(0).normal(arch.param_count(), std=0.15)
    params = SymlaParams(theta, arch)
    s1 = symla_init_state(arch, a_dim, b_dim, rng.split(1))
    pa = rng.split(2).permutation(a_dim)
    pb = rng.split(3).permutation(b_dim)
    inv_pb = np.argsort(pb)
    s2 = SymlaState(
        h=s1.h[pa][:, pb].copy(),
        c=s1.c[pa][:, pb].copy(),
        fwd_msgs=s1.fwd_msgs[pb].copy(),
        bwd_msgs=s1.bwd_msgs[pa].copy(),
    )
    dev = 0.0
    prev1: int | None = None
    for t in range(steps):
        obs1 = rng.split(4, t).normal(a_dim)
        reward = np.float32(rng.split(5, t).normal(()))
        s1, logits1 = symla_step_core(params, s1, obs1, onehot(prev1, b_dim), reward)
        prev2 = None if prev1 is None else int(inv_pb[prev1])
        s2, logits2 = symla_step_core(params, s2, obs1[pa], onehot(prev2, b_dim), reward)
        dev = max(dev, float(np.max(np.abs(logits2 - logits1[pb]))))
        prev1 = int(rng.split(6, t).integers(b_dim))
    return dev


def metarnn_permutation_deviation(rng: Rng, arch: MetarnnArch, a_dim: int, b_dim: int, steps: int = 10) -> float:
    """Same coupled construction applied to the baseline; large deviations expected."""
    theta = rng.split(0).normal(arch.param_count(a_dim, b_dim), std=0.25)
    params = MetarnnParams(theta, arch, a_dim, b_dim)
    s1 = metarnn_init_state(arch)
    s2 = metarnn_init_state(arch)
    pa = rng.split(2).permutation(a_dim)
    pb = rng.split(3).permutation(b_dim)
    inv_pb = np.argsort(pb)
    dev = 0.0
    prev1: int | None = None
    for t in range(steps):
        obs1 = rng.split(4, t).normal(a_dim)
        reward = np.float32(rng.split(5, t).normal(()))
        s1, logits1 = metarnn_step_core(params, s1, obs1, onehot(prev1, b_dim), reward)
        prev2 = None if prev1 is None else int(inv_pb[prev1])
        s2, logits2 = metarnn_step_core(params, s2, obs1[pa], onehot(prev2, b_dim), reward)
        dev = max(dev, float(np.max(np.abs(logits2 - logits1[pb]))))
        prev1 = int(rng.split(6, t).integers(b_dim))
    return dev


def _random_shapes(rng: Rng, n: int) -> list[tuple[int, int]]:
    return [
        (int(rng.split(7, k).integers(1, 7)), int(rng.split(8, k).integers(2, 7)))
        for k in range(n)
    ]


def symla_equivariance_suite(seed: int = 0, instances: int = 100, arch: SymlaArch | None = None) -> np.ndarray:
    arch = arch or SymlaArch()
    root = Rng(seed)
    devs = []
    for k, (a_dim, b_dim) in enumerate(_random_shapes(root, instances)):
        devs.append(symla_equivariance_deviation(root.split(100, k), arch, a_dim, b_dim))
    return np.array(devs)


def metarnn_permutation_suite(seed: int = 0, instances: int = 100, arch: MetarnnArch | None = None) -> np.ndarray:
    arch = arch or MetarnnArch(32)
    root = Rng(seed)
    devs = []
    for k, (a_dim, b_dim) in enumerate(_random_shapes(root, instances)):
        devs.append(metarnn_permutation_deviation(root.split(200, k), arch, a_dim, b_dim))
    return np.array(devs)


def shared_rule_gap(seed: int = 0, arch: SymlaArch | None = None) -> float:
    """All cells start identical and see identical inputs; updates must match exactly."""
    arch = arch or SymlaArch()
    rng = Rng(seed)
    theta = rng.split(0).normal(arch.param_count(), std=0.3)
    params = SymlaParams(theta, arch)
    a_dim, b_dim = 4, 5
    one_h = rng.split(1).normal(arch.hidden)
    one_c = rng.split(2).normal(arch.hidden)
    state = SymlaState(
        h=np.broadcast_to(one_h, (a_dim, b_dim, arch.hidden)).copy(),
        c=np.broadcast_to(one_c, (a_dim, b_dim, arch.hidden)).copy(),
        fwd_msgs=np.zeros((b_dim, arch.msg_fwd), dtype=F32),
        bwd_msgs=np.zeros((a_dim, arch.msg_bwd), dtype=F32),
    )
    obs = np.full(a_dim, 0.7, dtype=F32)
    state2, _ = symla_step_core(params, state, obs, np.zeros(b_dim, dtype=F32), np.float32(0.3))
    gap = 0.0
    for arr in (state2.h, state2.c):
        gap = max(gap, float(np.max(np.abs(arr - arr[0, 0]))))
    return gap


def sum_pool_gap(seed: int = 0, arch: SymlaArch | None = None) -> float:
    """Permuting the pooled-over axis must not change the pooled messages."""
    arch = arch or SymlaArch()
    rng = Rng(seed)
    theta = rng.split(0).normal(arch.param_count(), std=0.3)
    params = SymlaParams(theta, arch)
    a_dim, b_dim = 6, 4
    s = symla_init_state(arch, a_dim, b_dim, rng.split(1))
    obs = rng.split(2).normal(a_dim)
    base, _ = symla_step_core(params, s, obs, np.zeros(b_dim, dtype=F32), np.float32(0.0))

    pa = rng.split(3).permutation(a_dim)
    s_perm = SymlaState(
        h=s.h[pa].copy(), c=s.c[pa].copy(), fwd_msgs=s.fwd_msgs.copy(), bwd_msgs=s.bwd_msgs[pa].copy()
    )
    perm, _ = symla_step_core(params, s_perm, obs[pa], np.zeros(b_dim, dtype=F32), np.float32(0.0))
    return float(np.max(np.abs(perm.fwd_msgs - base.fwd_msgs)))


def size_flexibility_report(seed: int = 0, arch: SymlaArch | None = None) -> tuple[bool, str]:
    """One parameter vector must run on every grid shape with a constant count."""
    arch = arch or SymlaArch()
    rng = Rng(seed)
    theta = rng.split(0).normal(arch.param_count(), std=0.1)
    counts = set()
    for a_dim, b_dim in GRID_SHAPES:
        params = SymlaParams(theta, arch)
        s = symla_init_state(arch, a_dim, b_dim, rng.split(1, a_dim, b_dim))
        obs = rng.split(2, a_dim, b_dim).normal(a_dim)
        s, logits = symla_step_core(params, s, obs, np.zeros(b_dim, dtype=F32), np.float32(0.0))
        if logits.shape != (b_dim,) or not np.all(np.isfinite(logits)):
            return False, f"bad logits at grid ({a_dim}, {b_dim})"
        counts.add(theta.shape[-1])
    if len(counts) != 1:
        return False, f"parameter count varied: {sorted(counts)}"
    return True, f"count {counts.pop()} constant over {GRID_SHAPES}"


def run_all(quick: bool = False, seed: int = 0) -> list[CheckResult]:
    n = 20 if quick else 100
    results = []
    t0 = time.perf_counter()

    devs = symla_equivariance_suite(seed=seed, instances=n)
    results.append(
        CheckResult(
            "symla permutation equivariance",
            bool(np.max(devs) <= 1e-5),
            f"max deviation {np.max(devs):.2e} over {n} instances (bound 1e-5)",
        )
    )

    neg = metarnn_permutation_suite(seed=seed, instances=n)
    frac = float(np.mean(neg > 1e-3))
    results.append(
        CheckResult(
            "metarnn permutation sensitivity (negative control)",
            frac >= 0.9,
            f"{frac:.0%} of {n} instances deviate > 1e-3 (need >= 90%)",
        )
    )

    arch = SymlaArch()
    expected = arch.param_count()
    results.append(
        CheckResult(
            "parameter count independent of grid shape",
            all(arch.param_count() == expected for _ in GRID_SHAPES),
            f"{expected} parameters at hidden={arch.hidden}, msg={arch.msg_fwd}/{arch.msg_bwd}",
        )
    )

    gap = shared_rule_gap(seed)
    results.append(
        CheckResult("shared rule across cells", gap == 0.0, f"identical-cell update gap {gap:.2e}")
    )

    gap = sum_pool_gap(seed)
    results.append(
        CheckResult("sum pooling is order-invariant", gap <= 1e-6, f"message gap {gap:.2e} (bound 1e-6)")
    )

    ok, detail = size_flexibility_report(seed)
    results.append(CheckResult("size flexibility", ok, detail))

    elapsed = time.perf_counter() - t0
    results.append(CheckResult("suite runtime", True, f"{elapsed:.1f}s"))
    return results
