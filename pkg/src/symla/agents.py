"""Agents: a symmetric grid agent (symla) and a monolithic recurrent baseline (metarnn).

The symla agent replaces a dense layer's weight matrix with an in_dim x n_actions
grid of parameter-shared gated cells. Cells exchange sum-pooled forward messages
(width msg_fwd, pooled over the input axis) and backward messages (width msg_bwd,
pooled over the action axis). The environment is wired in through the first
message channels: observation component a into the forward channel of grid row a,
the one-hot previous action into the backward channel of grid column b, and the
previous reward into every cell. Action logits are read from channel 0 of the
forward messages after the last micro tick.

Because all cells share one parameter vector and messages are sum-pooled, the
parameter count is independent of the grid shape, and jointly permuting rows,
columns and cell states permutes the logits (checked in invariants.py).

Both agents accept parameter vectors with an optional leading population axis;
states then carry (pop, evals) leading axes. lifetime.py uses this to step whole
ES populations in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .mathcore import (
    F32,
    GatedCellParams,
    Rng,
    categorical_from_uniform,
    ensure_finite,
    gated_cell_step,
    init_gated_cell,
    linear,
    softmax,
    softmax_sample,
)

MICRO_TICKS = 2
INIT_WEIGHT_STD = 0.05

AGENT_KINDS = ("symla", "metarnn")


@dataclass
class AgentIO:
    """Per-step input to an agent: current observation, previous reward/action."""

    obs: np.ndarray
    reward: float
    prev_action: int | None


@dataclass(frozen=True)
class SymlaArch:
    hidden: int = 16
    msg_fwd: int = 8
    msg_bwd: int = 8

    @property
    def cell_input(self) -> int:
        # [env fwd msg; env bwd msg; reward; fed-back fwd msg; fed-back bwd msg]
        return 2 * self.msg_fwd + 2 * self.msg_bwd + 1

    def param_count(self) -> int:
        cell = GatedCellParams.count(self.hidden, self.cell_input)
        fwd = self.msg_fwd * self.hidden + self.msg_fwd
        bwd = self.msg_bwd * self.hidden + self.msg_bwd
        return cell + fwd + bwd


@dataclass(frozen=True)
class MetarnnArch:
    hidden: int = 64

    def cell_input(self, in_dim: int, n_actions: int) -> int:
        return in_dim + n_actions + 1

    def param_count(self, in_dim: int, n_actions: int) -> int:
        cell = GatedCellParams.count(self.hidden, self.cell_input(in_dim, n_actions))
        head = n_actions * self.hidden + n_actions
        return cell + head


def _check_grid(in_dim: int, n_actions: int) -> None:
    if in_dim < 1:
        raise ValueError(f"in_dim must be >= 1, got {in_dim}")
    if n_actions < 2:
        raise ValueError(f"n_actions must be >= 2, got {n_actions}")


class _FlatViews:
    """Carves shaped views out of a flat (or (pop, flat)) parameter vector."""

    def __init__(self, theta: np.ndarray, expected: int):
        theta = np.ascontiguousarray(theta, dtype=F32)
        if theta.ndim not in (1, 2) or theta.shape[-1] != expected:
            raise ValueError(
                f"parameter vector has shape {theta.shape}, expected length {expected}"
            )
        self.theta = theta
        self.batched = theta.ndim == 2
        self._lead = theta.shape[:-1]
        self._offset = 0

    def take(self, *shape: int) -> np.ndarray:
        size = int(np.prod(shape))
        out = self.theta[..., self._offset : self._offset + size]
        self._offset += size
        return out.reshape(*self._lead, *shape)


class SymlaParams:
    def __init__(self, theta: np.ndarray, arch: SymlaArch = SymlaArch()):
        v = _FlatViews(theta, arch.param_count())
        n, i = arch.hidden, arch.cell_input
        self.arch = arch
        self.theta = v.theta
        self.batched = v.batched
        self.cell = GatedCellParams(v.take(4 * n, i + n), v.take(4 * n))
        self.fwd_w = v.take(arch.msg_fwd, n)
        self.fwd_b = v.take(arch.msg_fwd)
        self.bwd_w = v.take(arch.msg_bwd, n)
        self.bwd_b = v.take(arch.msg_bwd)


class MetarnnParams:
    def __init__(self, theta: np.ndarray, arch: MetarnnArch, in_dim: int, n_actions: int):
        _check_grid(in_dim, n_actions)
        v = _FlatViews(theta, arch.param_count(in_dim, n_actions))
        h, i = arch.hidden, arch.cell_input(in_dim, n_actions)
        self.arch = arch
        self.in_dim = in_dim
        self.n_actions = n_actions
        self.theta = v.theta
        self.batched = v.batched
        self.cell = GatedCellParams(v.take(4 * h, i + h), v.take(4 * h))
        self.head_w = v.take(n_actions, h)
        self.head_b = v.take(n_actions)


@dataclass
class SymlaState:
    h: np.ndarray  # (..., A, B, N)
    c: np.ndarray  # (..., A, B, N)
    fwd_msgs: np.ndarray  # (..., B, msg_fwd)
    bwd_msgs: np.ndarray  # (..., A, msg_bwd)


@dataclass
class MetarnnState:
    h: np.ndarray  # (..., H)
    c: np.ndarray  # (..., H)


def symla_init(arch: SymlaArch, rng: Rng) -> np.ndarray:
    """Fresh flat meta-parameters; layout [cell w, cell b, fwd w, fwd b, bwd w, bwd b]."""
    cell = init_gated_cell(arch.hidden, arch.cell_input, rng, weight_std=INIT_WEIGHT_STD)
    fwd_w = rng.normal((arch.msg_fwd, arch.hidden), std=INIT_WEIGHT_STD)
    bwd_w = rng.normal((arch.msg_bwd, arch.hidden), std=INIT_WEIGHT_STD)
    return np.concatenate(
        [
            cell.weights.ravel(),
            cell.biases,
            fwd_w.ravel(),
            np.zeros(arch.msg_fwd, dtype=F32),
            bwd_w.ravel(),
            np.zeros(arch.msg_bwd, dtype=F32),
        ]
    )


def metarnn_init(arch: MetarnnArch, in_dim: int, n_actions: int, rng: Rng) -> np.ndarray:
    cell = init_gated_cell(
        arch.hidden, arch.cell_input(in_dim, n_actions), rng, weight_std=INIT_WEIGHT_STD
    )
    head_w = rng.normal((n_actions, arch.hidden), std=INIT_WEIGHT_STD)
    return np.concatenate(
        [cell.weights.ravel(), cell.biases, head_w.ravel(), np.zeros(n_actions, dtype=F32)]
    )


def symla_init_state(
    arch: SymlaArch, in_dim: int, n_actions: int, rng: Rng, batch: tuple[int, ...] = ()
) -> SymlaState:
    """Cell states i.i.d. N(0, 1); messages zero.

    The i.i.d. draw is what makes the agent's policy distribution invariant
    under grid permutations.
    """
    _check_grid(in_dim, n_actions)
    shape = batch + (in_dim, n_actions, arch.hidden)
    return SymlaState(
        h=rng.normal(shape),
        c=rng.normal(shape),
        fwd_msgs=np.zeros(batch + (n_actions, arch.msg_fwd), dtype=F32),
        bwd_msgs=np.zeros(batch + (in_dim, arch.msg_bwd), dtype=F32),
    )


def metarnn_init_state(arch: MetarnnArch, batch: tuple[int, ...] = ()) -> MetarnnState:
    shape = batch + (arch.hidden,)
    return MetarnnState(h=np.zeros(shape, dtype=F32), c=np.zeros(shape, dtype=F32))


def _apply_cell(cell: GatedCellParams, h, c, x, pbatch: bool):
    if pbatch:
        g = cell.weights.shape[0]
        lead = h.shape[:-1]
        m = int(np.prod(lead[1:]))
        h2, c2 = gated_cell_step(
            cell, h.reshape(g, m, -1), c.reshape(g, m, -1), x.reshape(g, m, -1)
        )
        return h2.reshape(h.shape), c2.reshape(c.shape)
    return gated_cell_step(cell, h, c, x)


def _apply_proj(w, b, x, pbatch: bool):
    if pbatch:
        g = w.shape[0]
        lead = x.shape[:-1]
        m = int(np.prod(lead[1:]))
        y = np.matmul(x.reshape(g, m, -1), np.swapaxes(w, -1, -2)) + b[:, None, :]
        return y.reshape(*lead, w.shape[-2])
    return linear(w, b, x)


def symla_step_core(
    params: SymlaParams,
    state: SymlaState,
    obs: np.ndarray,
    prev_onehot: np.ndarray,
    reward: np.ndarray,
) -> tuple[SymlaState, np.ndarray]:
    """One environment step of the grid agent; returns (new state, logits).

    obs: (..., A), prev_onehot: (..., B), reward: (...,). Per micro tick every
    cell (a, b) reads [obs_a in fwd channel 0; one-hot_b in bwd channel 0;
    reward; fed-back fwd message of column b; fed-back bwd message of row a],
    updates (h, c), then both message tables are recomputed by sum pooling.
    """
    arch = params.arch
    mf, mb = arch.msg_fwd, arch.msg_bwd
    a_dim, b_dim = state.h.shape[-3], state.h.shape[-2]
    lead = state.h.shape[:-3]
    obs = np.asarray(obs, dtype=F32)
    if obs.shape != lead + (a_dim,):
        raise ValueError(f"obs shape {obs.shape} != expected {lead + (a_dim,)}")

    x = np.zeros(lead + (a_dim, b_dim, arch.cell_input), dtype=F32)
    x[..., 0] = obs[..., :, None]
    x[..., mf] = np.asarray(prev_onehot, dtype=F32)[..., None, :]
    x[..., mf + mb] = np.asarray(reward, dtype=F32)[..., None, None]

    h, c = state.h, state.c
    fwd, bwd = state.fwd_msgs, state.bwd_msgs
    for _ in range(MICRO_TICKS):
        x[..., mf + mb + 1 : 2 * mf + mb + 1] = fwd[..., None, :, :]
        x[..., 2 * mf + mb + 1 :] = bwd[..., :, None, :]
        h, c = _apply_cell(params.cell, h, c, x, params.batched)
        fwd = _apply_proj(params.fwd_w, params.fwd_b, h, params.batched).sum(axis=-3)
        bwd = _apply_proj(params.bwd_w, params.bwd_b, h, params.batched).sum(axis=-2)
    logits = ensure_finite(fwd[..., :, 0], "symla logits")
    return SymlaState(h, c, fwd, bwd), logits


def metarnn_step_core(
    params: MetarnnParams,
    state: MetarnnState,
    obs: np.ndarray,
    prev_onehot: np.ndarray,
    reward: np.ndarray,
) -> tuple[MetarnnState, np.ndarray]:
    """One step of the baseline: gated cell over [obs; one-hot action; reward]."""
    obs = np.asarray(obs, dtype=F32)
    if obs.shape[-1] != params.in_dim:
        raise ValueError(f"obs size {obs.shape[-1]} != expected {params.in_dim}")
    u = np.concatenate(
        [obs, np.asarray(prev_onehot, dtype=F32), np.asarray(reward, dtype=F32)[..., None]],
        axis=-1,
    )
    h, c = _apply_cell(params.cell, state.h, state.c, u, params.batched)
    logits = ensure_finite(
        _apply_proj(params.head_w, params.head_b, h, params.batched), "metarnn logits"
    )
    return MetarnnState(h, c), logits


def onehot(action: int | None, n_actions: int) -> np.ndarray:
    v = np.zeros(n_actions, dtype=F32)
    if action is not None:
        v[action] = 1.0
    return v


@dataclass
class Agent:
    """A bound (kind, architecture, grid shape, parameters) with step closures."""

    kind: str
    in_dim: int
    n_actions: int
    arch: Any
    theta: np.ndarray
    init_state: Callable[[Rng], Any]
    step: Callable[..., tuple[Any, int]]

    def with_theta(self, theta: np.ndarray) -> "Agent":
        return make_agent(
            self.kind, self.in_dim, self.n_actions, arch=self.arch, theta=theta
        )


def agent_param_count(kind: str, in_dim: int, n_actions: int, arch=None) -> int:
    if kind == "symla":
        return (arch or SymlaArch()).param_count()
    if kind == "metarnn":
        return (arch or MetarnnArch()).param_count(in_dim, n_actions)
    raise ValueError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")


def make_agent(
    kind: str,
    in_dim: int,
    n_actions: int,
    *,
    arch=None,
    theta: np.ndarray | None = None,
    rng: Rng | None = None,
) -> Agent:
    """Build an agent. theta=None draws fresh parameters from rng.

    For metarnn the parameter count is tied to (in_dim, n_actions); passing a
    theta trained for a different shape raises. symla accepts any grid shape.
    """
    _check_grid(in_dim, n_actions)
    if kind == "symla":
        arch = arch or SymlaArch()
        if theta is None:
            if rng is None:
                raise ValueError("need rng to initialize fresh parameters")
            theta = symla_init(arch, rng)
        params = SymlaParams(theta, arch)

        def init_state(srng: Rng):
            return symla_init_state(arch, in_dim, n_actions, srng)

        def step(state, io: AgentIO, srng: Rng, force_action: int | None = None):
            state2, logits = symla_step_core(
                params, state, io.obs, onehot(io.prev_action, n_actions), np.float32(io.reward)
            )
            action = force_action if force_action is not None else softmax_sample(logits, srng)[0]
            return state2, int(action)

    elif kind == "metarnn":
        arch = arch or MetarnnArch()
        expected = arch.param_count(in_dim, n_actions)
        if theta is not None and theta.shape[-1] != expected:
            raise ValueError(
                f"metarnn parameters are shape-specific: got length {theta.shape[-1]}, "
                f"but (in_dim={in_dim}, n_actions={n_actions}, hidden={arch.hidden}) "
                f"needs {expected}"
            )
        if theta is None:
            if rng is None:
                raise ValueError("need rng to initialize fresh parameters")
            theta = metarnn_init(arch, in_dim, n_actions, rng)
        params = MetarnnParams(theta, arch, in_dim, n_actions)

        def init_state(srng: Rng):
            return metarnn_init_state(arch)

        def step(state, io: AgentIO, srng: Rng, force_action: int | None = None):
            state2, logits = metarnn_step_core(
                params, state, io.obs, onehot(io.prev_action, n_actions), np.float32(io.reward)
            )
            action = force_action if force_action is not None else softmax_sample(logits, srng)[0]
            return state2, int(action)

    else:
        raise ValueError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")

    return Agent(kind, in_dim, n_actions, arch, theta, init_state, step)


class RolloutEngine:
    """Steps (pop x evals) rollouts of one agent kind in lockstep.

    Parameters may be a single vector (shared by all rollouts) or a (pop, dim)
    matrix of per-member vectors. Initial states and the per-step sampling
    uniforms are drawn once per eval slot and shared across the population, so
    all members (and antithetic pairs in particular) see common random numbers.
    """

    def __init__(self, kind: str, in_dim: int, n_actions: int, arch=None):
        if kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {kind!r}; expected one of {AGENT_KINDS}")
        self.kind = kind
        self.in_dim = in_dim
        self.n_actions = n_actions
        if arch is None:
            arch = SymlaArch() if kind == "symla" else MetarnnArch()
        self.arch = arch

    def wrap(self, thetas: np.ndarray):
        if self.kind == "symla":
            return SymlaParams(thetas, self.arch)
        return MetarnnParams(thetas, self.arch, self.in_dim, self.n_actions)

    def init_states(self, eval_rngs: list[Rng], pop: int):
        evals = len(eval_rngs)
        if self.kind == "symla":
            per = [
                symla_init_state(self.arch, self.in_dim, self.n_actions, r) for r in eval_rngs
            ]
            return SymlaState(
                h=np.broadcast_to(np.stack([s.h for s in per]), (pop, evals) + per[0].h.shape).copy(),
                c=np.broadcast_to(np.stack([s.c for s in per]), (pop, evals) + per[0].c.shape).copy(),
                fwd_msgs=np.zeros((pop, evals, self.n_actions, self.arch.msg_fwd), dtype=F32),
                bwd_msgs=np.zeros((pop, evals, self.in_dim, self.arch.msg_bwd), dtype=F32),
            )
        h = np.zeros((pop, evals, self.arch.hidden), dtype=F32)
        return MetarnnState(h=h, c=h.copy())

    def step(
        self,
        params,
        state,
        obs: np.ndarray,
        prev_action: np.ndarray,
        reward: np.ndarray,
        u: np.ndarray,
    ):
        """obs (P,R,A), prev_action (P,R) with -1 for none, reward (P,R), u (R,) or (P,R)."""
        oh = (prev_action[..., None] == np.arange(self.n_actions)).astype(F32)
        if self.kind == "symla":
            state2, logits = symla_step_core(params, state, obs, oh, reward)
        else:
            state2, logits = metarnn_step_core(params, state, obs, oh, reward)
        probs = softmax(logits)
        actions = categorical_from_uniform(probs, np.broadcast_to(u, probs.shape[:-1]))
        return state2, actions, logits
