"""Low-level numerics: splittable RNG, gated recurrent cell, sampling, init.

Everything stores 32-bit floats. Shape mismatches raise immediately instead of
broadcasting silently; non-finite results raise NumericError.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

F32 = np.float32


class NumericError(RuntimeError):
    """A value became NaN or infinite."""


def ensure_finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {what}")
    return arr


class Rng:
    """Deterministic splittable random stream.

    Counter-based: a stream is fully identified by (seed, path). split(*idx)
    returns a fresh stream for path + idx and is pure, so any consumer can
    rebuild the exact stream of any other consumer from the seed and the split
    indices alone (used for worker-side noise reconstruction).
    """

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def split(self, *indices: int) -> "Rng":
        return Rng(self.seed, self.path + indices)

    def clone(self) -> "Rng":
        """Same stream, rewound to the start."""
        return Rng(self.seed, self.path)

    def normal(self, shape=(), std: float = 1.0, dtype=F32) -> np.ndarray:
        out = self._gen.standard_normal(shape, dtype=np.float64) * std
        return out.astype(dtype)

    def random(self, shape=None):
        """Uniform [0, 1) float64, scalar when shape is None."""
        if shape is None:
            return float(self._gen.random())
        return self._gen.random(shape)

    def integers(self, low: int, high: int | None = None, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, path={self.path})"


def sigmoid(x: np.ndarray) -> np.ndarray:
    # two-branch form avoids exp overflow warnings for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class GatedCellParams:
    """LSTM-style cell. Gate rows are fused as [input; forget; candidate; output].

    weights: (..., 4N, I+N), biases: (..., 4N). Leading dims, if any, are a
    parameter batch (one cell per population member).
    """

    weights: np.ndarray
    biases: np.ndarray

    @property
    def hidden(self) -> int:
        return self.weights.shape[-2] // 4

    @property
    def input_size(self) -> int:
        return self.weights.shape[-1] - self.hidden

    @staticmethod
    def count(hidden: int, input_size: int) -> int:
        return 4 * hidden * (input_size + hidden) + 4 * hidden


def init_gated_cell(
    hidden: int, input_size: int, rng: Rng, weight_std: float = 0.05, forget_bias: float = 1.0
) -> GatedCellParams:
    """Fresh cell parameters: weights ~ N(0, weight_std^2), forget bias offset."""
    w = rng.normal((4 * hidden, input_size + hidden), std=weight_std)
    b = np.zeros(4 * hidden, dtype=F32)
    b[hidden : 2 * hidden] = forget_bias
    return GatedCellParams(w, b)


def gated_cell_step(
    params: GatedCellParams, h: np.ndarray, c: np.ndarray, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One cell update. h, c: (..., N); x: (..., I). Returns (h', c')."""
    n = params.hidden
    if h.shape != c.shape or h.shape[-1] != n:
        raise ValueError(f"state shape {h.shape}/{c.shape} does not match hidden size {n}")
    if x.shape[-1] != params.input_size:
        raise ValueError(f"input size {x.shape[-1]} != expected {params.input_size}")
    xh = np.concatenate([x, h], axis=-1)
    if params.weights.ndim == 2:
        z = xh @ params.weights.T + params.biases
    else:
        z = np.matmul(xh, np.swapaxes(params.weights, -1, -2)) + params.biases[..., None, :]
    gi = sigmoid(z[..., :n])
    gf = sigmoid(z[..., n : 2 * n])
    cand = np.tanh(z[..., 2 * n : 3 * n])
    go = sigmoid(z[..., 3 * n :])
    c2 = gf * c + gi * cand
    h2 = go * np.tanh(c2)
    return h2.astype(F32, copy=False), c2.astype(F32, copy=False)


def linear(w: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = x W^T + b with eager shape checking. w: (O, K), x: (..., K)."""
    if w.ndim != 2 or b.shape != (w.shape[0],):
        raise ValueError(f"bad linear params: w {w.shape}, b {b.shape}")
    if x.shape[-1] != w.shape[1]:
        raise ValueError(f"input size {x.shape[-1]} != expected {w.shape[1]}")
    return x @ w.T + b


def glorot_normal(rows: int, cols: int, rng: Rng) -> np.ndarray:
    """(rows, cols) matrix with entries ~ N(0, 2/(rows+cols))."""
    std = float(np.sqrt(2.0 / (rows + cols)))
    return rng.normal((rows, cols), std=std)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax over the last axis, computed in float64."""
    z = logits.astype(np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def categorical_from_uniform(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw. probs: (..., B), u: (...,). Returns int actions (...,)."""
    cdf = np.cumsum(probs, axis=-1)
    a = (u[..., None] >= cdf).sum(axis=-1)
    return np.minimum(a, probs.shape[-1] - 1)


def softmax_sample(logits: np.ndarray, rng: Rng) -> tuple[int, float]:
    """Sample an action index from softmax(logits); returns (action, logprob)."""
    ensure_finite(logits, "logits")
    p = softmax(logits)
    a = int(categorical_from_uniform(p, np.asarray(rng.random())))
    return a, float(np.log(p[a]))
