from __future__ import annotations

import numpy as np
import pytest

from symla.agents import (
    AgentIO,
    MetarnnArch,
    MetarnnParams,
    RolloutEngine,
    SymlaArch,
    SymlaParams,
    agent_param_count,
    make_agent,
    metarnn_init,
    metarnn_init_state,
    metarnn_step_core,
    onehot,
    symla_init,
    symla_init_state,
    symla_step_core,
)
from symla.invariants import (
    GRID_SHAPES,
    metarnn_permutation_suite,
    shared_rule_gap,
    size_flexibility_report,
    sum_pool_gap,
    symla_equivariance_suite,
)
from symla.mathcore import Rng


def test_symla_param_count_default():
    arch = SymlaArch()
    # cell: 4*16*(33+16) + 4*16; two affine projections 16 -> 8
    assert arch.cell_input == 33
    assert arch.param_count() == 4 * 16 * 49 + 64 + 2 * (16 * 8 + 8) == 3472
    assert symla_init(arch, Rng(0)).shape == (3472,)


def test_symla_param_count_shape_independent():
    arch = SymlaArch()
    for a_dim, b_dim in GRID_SHAPES:
        assert agent_param_count("symla", a_dim, b_dim, arch) == 3472


def test_metarnn_param_count_depends_on_shape():
    arch = MetarnnArch(64)
    # 4*64*(1+2+1+64) + 4*64 + (64*2+2)
    assert arch.param_count(1, 2) == 17794
    assert arch.param_count(4, 2) != arch.param_count(1, 2)
    assert metarnn_init(arch, 1, 2, Rng(0)).shape == (17794,)


def test_symla_zero_params_uniform_logits():
    arch = SymlaArch()
    theta = np.zeros(arch.param_count(), dtype=np.float32)
    params = SymlaParams(theta, arch)
    state = symla_init_state(arch, 1, 2, Rng(1))
    state, logits = symla_step_core(
        params, state, np.ones(1, dtype=np.float32), onehot(None, 2), np.float32(0.0)
    )
    assert np.array_equal(logits, np.zeros(2, dtype=np.float32))


def test_metarnn_zero_params_uniform_logits_zero_state():
    arch = MetarnnArch(8)
    theta = np.zeros(arch.param_count(2, 3), dtype=np.float32)
    params = MetarnnParams(theta, arch, 2, 3)
    state = metarnn_init_state(arch)
    state, logits = metarnn_step_core(
        params, state, np.ones(2, dtype=np.float32), onehot(1, 3), np.float32(1.0)
    )
    assert np.array_equal(logits, np.zeros(3, dtype=np.float32))
    assert np.array_equal(state.h, np.zeros(8, dtype=np.float32))


def test_symla_init_state_moments_and_zero_msgs():
    arch = SymlaArch()
    s = symla_init_state(arch, 20, 10, Rng(7))
    assert s.h.shape == (20, 10, 16) and s.c.shape == (20, 10, 16)
    assert abs(float(s.h.mean())) < 0.05 and abs(float(s.h.std()) - 1.0) < 0.05
    assert np.all(s.fwd_msgs == 0) and np.all(s.bwd_msgs == 0)
    # deterministic under the same stream
    s2 = symla_init_state(arch, 20, 10, Rng(7))
    assert np.array_equal(s.h, s2.h)


def test_symla_equivariance_suite():
    devs = symla_equivariance_suite(seed=0, instances=100)
    assert devs.shape == (100,)
    assert float(np.max(devs)) <= 1e-5


def test_metarnn_negative_control():
    devs = metarnn_permutation_suite(seed=0, instances=100)
    assert float(np.mean(devs > 1e-3)) >= 0.9


def test_shared_rule_exact():
    assert shared_rule_gap(0) == 0.0
    assert shared_rule_gap(5) == 0.0


def test_sum_pool_order_invariant():
    assert sum_pool_gap(0) <= 1e-6
    assert sum_pool_gap(3) <= 1e-6


def test_size_flexibility():
    ok, detail = size_flexibility_report(0)
    assert ok, detail


def test_one_theta_runs_on_all_shapes_via_factory():
    rng = Rng(11)
    theta = symla_init(SymlaArch(), rng)
    for a_dim, b_dim in GRID_SHAPES:
        agent = make_agent("symla", a_dim, b_dim, theta=theta)
        state = agent.init_state(rng.split(a_dim, b_dim))
        io = AgentIO(obs=rng.split(1, a_dim, b_dim).normal(a_dim), reward=0.0, prev_action=None)
        state, action = agent.step(state, io, rng.split(2, a_dim, b_dim))
        assert 0 <= action < b_dim


def test_factory_errors():
    with pytest.raises(ValueError, match="unknown agent kind"):
        make_agent("mlp", 2, 2, rng=Rng(0))
    with pytest.raises(ValueError, match="shape-specific"):
        theta = metarnn_init(MetarnnArch(8), 1, 2, Rng(0))
        make_agent("metarnn", 4, 2, arch=MetarnnArch(8), theta=theta)
    with pytest.raises(ValueError):
        make_agent("symla", 0, 2, rng=Rng(0))
    with pytest.raises(ValueError):
        make_agent("symla", 1, 1, rng=Rng(0))
    with pytest.raises(ValueError):
        make_agent("symla", 1, 2)  # neither theta nor rng given


def test_agent_step_deterministic():
    rng = Rng(3)
    agent = make_agent("symla", 3, 4, rng=rng.split(0))
    actions = []
    for trial in range(2):
        srng = Rng(99)
        state = agent.init_state(srng.split(0))
        seq = []
        prev = None
        for t in range(20):
            io = AgentIO(obs=Rng(50, (t,)).normal(3), reward=0.1, prev_action=prev)
            state, a = agent.step(state, io, srng)
            seq.append(a)
            prev = a
        actions.append(seq)
    assert actions[0] == actions[1]


def test_force_action():
    agent = make_agent("metarnn", 2, 3, arch=MetarnnArch(8), rng=Rng(0))
    state = agent.init_state(Rng(1))
    io = AgentIO(obs=np.zeros(2, dtype=np.float32), reward=0.0, prev_action=None)
    _, a = agent.step(state, io, Rng(2), force_action=2)
    assert a == 2


def test_batched_params_match_unbatched():
    """Per-member batched stepping must agree with one-vector stepping."""
    arch = SymlaArch(hidden=8, msg_fwd=4, msg_bwd=4)
    rng = Rng(21)
    pop, evals, a_dim, b_dim = 3, 2, 2, 3
    thetas = np.stack([rng.split(i).normal(arch.param_count(), std=0.2) for i in range(pop)])
    pb = SymlaParams(thetas, arch)
    state = symla_init_state(arch, a_dim, b_dim, rng.split(10), batch=(pop, evals))
    obs = rng.split(11).normal((pop, evals, a_dim))
    oh = np.zeros((pop, evals, b_dim), dtype=np.float32)
    r = rng.split(12).normal((pop, evals))
    state2, logits = symla_step_core(pb, state, obs, oh, r)
    for g in range(pop):
        for e in range(evals):
            ps = SymlaParams(thetas[g], arch)
            import symla.agents as ag

            sub = ag.SymlaState(
                h=state.h[g, e].copy(), c=state.c[g, e].copy(),
                fwd_msgs=state.fwd_msgs[g, e].copy(), bwd_msgs=state.bwd_msgs[g, e].copy(),
            )
            _, lg = symla_step_core(ps, sub, obs[g, e], oh[g, e], r[g, e])
            assert np.max(np.abs(lg - logits[g, e])) < 1e-6


def test_engine_smoke_and_common_uniforms():
    engine = RolloutEngine("symla", 1, 2, SymlaArch(hidden=8, msg_fwd=4, msg_bwd=4))
    rng = Rng(5)
    pop, evals = 4, 3
    thetas = np.stack([rng.split(i).normal(engine.arch.param_count(), std=0.1) for i in range(pop)])
    params = engine.wrap(thetas)
    state = engine.init_states([rng.split(100, j) for j in range(evals)], pop)
    # identical tiled init across the population
    assert np.array_equal(state.h[0], state.h[1])
    obs = np.ones((pop, evals, 1), dtype=np.float32)
    prev = np.full((pop, evals), -1)
    reward = np.zeros((pop, evals), dtype=np.float32)
    u = rng.split(200).random(evals)
    state, actions, logits = engine.step(params, state, obs, prev, reward, u)
    assert actions.shape == (pop, evals)
    assert logits.shape == (pop, evals, 2)
    assert np.all((actions >= 0) & (actions < 2))
