"""Versioned binary checkpoints.

Layout: an 8-byte magic, a little-endian uint32 header length, a UTF-8 JSON
header, then the payload: the sections named in the header, each a flat
little-endian float32 array, concatenated in order.  The header carries
everything needed to rebuild the agent and to check that a resume or a
meta-test is pointed at a compatible run.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import MetarnnArch, SymlaArch
from .mathcore import F32

MAGIC = b"SYMLACK1"
FORMAT_VERSION = 1
_SECTIONS = ("theta", "adam_m", "adam_v")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    agent_kind: str
    arch_fields: dict
    in_dim: int
    n_actions: int
    env: dict
    config_hash: str
    seed: int
    outer_step: int
    theta: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray

    def arch(self):
        if self.agent_kind == "symla":
            return SymlaArch(**self.arch_fields)
        return MetarnnArch(**self.arch_fields)

    def save(self, path) -> None:
        header = {
            "version": FORMAT_VERSION,
            "agent_kind": self.agent_kind,
            "arch": self.arch_fields,
            "in_dim": self.in_dim,
            "n_actions": self.n_actions,
            "env": self.env,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "outer_step": self.outer_step,
            "sections": [[name, int(getattr(self, name).shape[0])] for name in _SECTIONS],
        }
        blob = json.dumps(header, sort_keys=True).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)
            for name in _SECTIONS:
                arr = np.ascontiguousarray(getattr(self, name), dtype=F32)
                if arr.ndim != 1:
                    raise CheckpointError(f"section {name} must be a flat vector")
                fh.write(arr.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "Checkpoint":
        raw = Path(path).read_bytes()
        if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
        (header_len,) = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])
        start = len(MAGIC) + 4
        if len(raw) < start + header_len:
            raise CheckpointError(f"{path}: truncated header")
        try:
            header = json.loads(raw[start : start + header_len].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"{path}: corrupt header: {exc}") from exc
        if header.get("version") != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {header.get('version')}")
        sections = header["sections"]
        expected = 4 * sum(length for _, length in sections)
        payload = raw[start + header_len :]
        if len(payload) != expected:
            raise CheckpointError(
                f"{path}: payload length mismatch (have {len(payload)} bytes, header says {expected})"
            )
        arrays = {}
        offset = 0
        for name, length in sections:
            arrays[name] = np.frombuffer(payload, dtype="<f4", count=length, offset=offset).copy()
            offset += 4 * length
        missing = [name for name in _SECTIONS if name not in arrays]
        if missing:
            raise CheckpointError(f"{path}: missing sections {missing}")
        return cls(
            agent_kind=header["agent_kind"],
            arch_fields=header["arch"],
            in_dim=header["in_dim"],
            n_actions=header["n_actions"],
            env=header["env"],
            config_hash=header["config_hash"],
            seed=header["seed"],
            outer_step=header["outer_step"],
            theta=arrays["theta"],
            adam_m=arrays["adam_m"],
            adam_v=arrays["adam_v"],
        )
