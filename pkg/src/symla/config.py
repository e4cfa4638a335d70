"""Experiment configuration: JSON files with schema validation and hashing.

Every validation failure names the offending field by dotted path so a CLI
user can find it in the file.  The config hash covers exactly the fields that
determine the meta-parameters (agent, env, optimizer, lifetime, seed); run
bookkeeping such as output paths and meta-test run counts is excluded.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .agents import AGENT_KINDS
from .envs import env_names, is_bandit
from .es import EsConfig


class ConfigError(ValueError):
    pass


@dataclass
class AgentConfig:
    kind: str
    hidden: int
    msg_fwd: int = 8
    msg_bwd: int = 8


@dataclass
class EnvConfig:
    name: str
    arms: int | None = None
    project_dim: int | None = None


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    agent: AgentConfig
    env: EnvConfig
    lifetime: int
    es: EsConfig
    meta_test_runs: int = 100
    checkpoint_every: int = 50
    out_dir: str | None = None

    def hashed_dict(self) -> dict:
        d = {
            "seed": self.seed,
            "agent": {
                "kind": self.agent.kind,
                "hidden": self.agent.hidden,
            },
            "env": {"name": self.env.name},
            "lifetime": self.lifetime,
            "es": {
                "population": self.es.population,
                "sigma": self.es.sigma,
                "lr": self.es.lr,
                "outer_steps": self.es.outer_steps,
                "evals_per_sample": self.es.evals_per_sample,
                "antithetic": self.es.antithetic,
                "rank_shaping": self.es.rank_shaping,
                "beta1": self.es.beta1,
                "beta2": self.es.beta2,
                "eps": self.es.eps,
            },
        }
        if self.agent.kind == "symla":
            d["agent"]["msg_fwd"] = self.agent.msg_fwd
            d["agent"]["msg_bwd"] = self.agent.msg_bwd
        if self.env.arms is not None:
            d["env"]["arms"] = self.env.arms
        if self.env.project_dim is not None:
            d["env"]["project_dim"] = self.env.project_dim
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.hashed_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "seed": self.seed,
            "agent": {"kind": self.agent.kind, "hidden": self.agent.hidden},
            "env": {"name": self.env.name},
            "lifetime": self.lifetime,
            "meta_test_runs": self.meta_test_runs,
            "checkpoint_every": self.checkpoint_every,
            "es": {
                "population": self.es.population,
                "sigma": self.es.sigma,
                "lr": self.es.lr,
                "outer_steps": self.es.outer_steps,
                "evals_per_sample": self.es.evals_per_sample,
                "antithetic": self.es.antithetic,
                "rank_shaping": self.es.rank_shaping,
            },
        }
        if self.agent.kind == "symla":
            d["agent"]["msg_fwd"] = self.agent.msg_fwd
            d["agent"]["msg_bwd"] = self.agent.msg_bwd
        if self.env.arms is not None:
            d["env"]["arms"] = self.env.arms
        if self.env.project_dim is not None:
            d["env"]["project_dim"] = self.env.project_dim
        if self.out_dir is not None:
            d["out_dir"] = self.out_dir
        return d


def _type_name(typ) -> str:
    return {int: "integer", float: "number", str: "string", bool: "boolean", dict: "object"}[typ]


def _take(obj: dict, path: str, key: str, typ, *, required=True, default=None):
    full = f"{path}.{key}" if path else key
    if key not in obj:
        if required:
            raise ConfigError(f"{full}: missing required field")
        return default
    val = obj[key]
    if typ is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if typ is int and isinstance(val, bool):
        raise ConfigError(f"{full}: expected integer, got boolean")
    if not isinstance(val, typ):
        raise ConfigError(f"{full}: expected {_type_name(typ)}, got {json.dumps(val)}")
    return val


def _reject_unknown(obj: dict, path: str, known: set) -> None:
    for key in obj:
        if key not in known:
            full = f"{path}.{key}" if path else key
            raise ConfigError(f"{full}: unknown field")


def default_hidden(kind: str, env_name: str) -> int:
    """Architecture width defaults: wider cells on bandits, and a wider
    MetaRNN elsewhere since its parameter count must carry the whole policy."""
    if kind == "symla":
        return 64 if is_bandit(env_name) else 16
    return 64 if is_bandit(env_name) else 128


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")
    _reject_unknown(
        raw,
        "",
        {"name", "seed", "agent", "env", "lifetime", "meta_test_runs", "checkpoint_every", "es", "out_dir"},
    )
    name = _take(raw, "", "name", str)
    seed = _take(raw, "", "seed", int)
    lifetime = _take(raw, "", "lifetime", int)
    if lifetime < 1:
        raise ConfigError("lifetime: must be at least 1")
    meta_test_runs = _take(raw, "", "meta_test_runs", int, required=False, default=100)
    if meta_test_runs < 1:
        raise ConfigError("meta_test_runs: must be at least 1")
    checkpoint_every = _take(raw, "", "checkpoint_every", int, required=False, default=50)
    out_dir = _take(raw, "", "out_dir", str, required=False)

    env_raw = _take(raw, "", "env", dict)
    _reject_unknown(env_raw, "env", {"name", "arms", "project_dim"})
    env_name = _take(env_raw, "env", "name", str)
    if env_name not in env_names():
        raise ConfigError(f"env.name: unknown environment {env_name!r}")
    arms = _take(env_raw, "env", "arms", int, required=False)
    if env_name == "bandit.indep_k":
        if arms is None:
            raise ConfigError("env.arms: required for bandit.indep_k")
        if arms < 2:
            raise ConfigError("env.arms: must be at least 2")
    elif arms is not None:
        raise ConfigError(f"env.arms: does not apply to {env_name}")
    project_dim = _take(env_raw, "env", "project_dim", int, required=False)
    if project_dim is not None and project_dim < 1:
        raise ConfigError("env.project_dim: must be at least 1")

    agent_raw = _take(raw, "", "agent", dict)
    _reject_unknown(agent_raw, "agent", {"kind", "hidden", "msg_fwd", "msg_bwd"})
    kind = _take(agent_raw, "agent", "kind", str)
    if kind not in AGENT_KINDS:
        raise ConfigError(f"agent.kind: expected one of {sorted(AGENT_KINDS)}, got {kind!r}")
    hidden = _take(agent_raw, "agent", "hidden", int, required=False, default=default_hidden(kind, env_name))
    if hidden < 1:
        raise ConfigError("agent.hidden: must be at least 1")
    msg_fwd = _take(agent_raw, "agent", "msg_fwd", int, required=False, default=8)
    msg_bwd = _take(agent_raw, "agent", "msg_bwd", int, required=False, default=8)
    if kind != "symla" and ("msg_fwd" in agent_raw or "msg_bwd" in agent_raw):
        raise ConfigError("agent.msg_fwd: message sizes apply only to the symla agent")

    es_raw = _take(raw, "", "es", dict)
    _reject_unknown(
        es_raw,
        "es",
        {"population", "sigma", "lr", "outer_steps", "evals_per_sample", "antithetic", "rank_shaping", "beta1", "beta2", "eps"},
    )
    es = EsConfig(
        population=_take(es_raw, "es", "population", int),
        sigma=_take(es_raw, "es", "sigma", float),
        lr=_take(es_raw, "es", "lr", float),
        outer_steps=_take(es_raw, "es", "outer_steps", int),
        evals_per_sample=_take(es_raw, "es", "evals_per_sample", int, required=False, default=4),
        antithetic=_take(es_raw, "es", "antithetic", bool, required=False, default=True),
        rank_shaping=_take(es_raw, "es", "rank_shaping", bool, required=False, default=True),
        beta1=_take(es_raw, "es", "beta1", float, required=False, default=0.9),
        beta2=_take(es_raw, "es", "beta2", float, required=False, default=0.999),
        eps=_take(es_raw, "es", "eps", float, required=False, default=1e-8),
    )
    try:
        es.validate()
    except ValueError as exc:
        raise ConfigError(f"es: {exc}") from exc
    if es.outer_steps < 1:
        raise ConfigError("es.outer_steps: must be at least 1")
    if es.evals_per_sample < 1:
        raise ConfigError("es.evals_per_sample: must be at least 1")

    return ExperimentConfig(
        name=name,
        seed=seed,
        agent=AgentConfig(kind=kind, hidden=hidden, msg_fwd=msg_fwd, msg_bwd=msg_bwd),
        env=EnvConfig(name=env_name, arms=arms, project_dim=project_dim),
        lifetime=lifetime,
        es=es,
        meta_test_runs=meta_test_runs,
        checkpoint_every=checkpoint_every,
        out_dir=out_dir,
    )


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such config file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(raw)


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.as_dict(), indent=2, sort_keys=True) + "\n")
