"""Parameterized building blocks with handwritten backward passes.

Every layer registers its parameters at construction time and accumulates
gradients (+=) into the store on backward, so one backward pass per
trajectory step can be summed into a batch gradient.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

from rewriteopt.nn.functional import relu, sigmoid
from rewriteopt.nn.params import ParamStore


@dataclasses.dataclass(frozen=True)
class EncoderConfig:
    """Architecture widths; the full-scale defaults match the training setup
    (hidden 512, predictor/selector hidden 256, one hidden layer each)."""

    hidden_size: int = 512
    predictor_layers: int = 1
    predictor_hidden: int = 256
    selector_layers: int = 1
    selector_hidden: int = 256

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 1:
                raise ValueError(f"{f.name} must be positive")

    @staticmethod
    def desk() -> "EncoderConfig":
        """CPU-friendly scale used by the bundled configs and tests."""
        return EncoderConfig(
            hidden_size=64,
            predictor_layers=1,
            predictor_hidden=64,
            selector_layers=1,
            selector_hidden=64,
        )


class Linear:
    def __init__(self, store: ParamStore, name: str, in_dim: int, out_dim: int) -> None:
        self.store = store
        self.name = name
        self.w = store.register(f"{name}.w", (out_dim, in_dim))
        self.b = store.register(f"{name}.b", (out_dim,))

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x @ self.w.T + self.b, x

    def backward(self, dy: np.ndarray, cache: np.ndarray) -> np.ndarray:
        x = cache
        dw = self.store.grad(f"{self.name}.w")
        db = self.store.grad(f"{self.name}.b")
        if x.ndim == 1:
            dw += np.outer(dy, x)
            db += dy
        else:
            dw += dy.T @ x
            db += dy.sum(axis=0)
        return dy @ self.w


class MLP:
    """Hidden layers with rectified-linear activations, linear output."""

    def __init__(self, store: ParamStore, name: str, dims: Sequence[int]) -> None:
        if len(dims) < 2:
            raise ValueError("MLP needs at least input and output dims")
        self.layers = [
            Linear(store, f"{name}.l{i}", dims[i], dims[i + 1])
            for i in range(len(dims) - 1)
        ]

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        caches = []
        out = x
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            pre, lin_cache = layer.forward(out)
            if i < last:
                out = relu(pre)
            else:
                out = pre
            caches.append((lin_cache, pre))
        return out, caches

    def backward(self, dy: np.ndarray, caches: list) -> np.ndarray:
        last = len(self.layers) - 1
        grad = dy
        for i in range(last, -1, -1):
            lin_cache, pre = caches[i]
            if i < last:
                grad = grad * (pre > 0)
            grad = self.layers[i].backward(grad, lin_cache)
        return grad


class NaryCell:
    """LSTM cell over k child states with per-child forget gates.

    Gate rows stack as [input; output; candidate; forget_0..forget_{k-1}].
    k=1 is the ordinary LSTM cell; the tree encoder uses k=3.
    """

    def __init__(
        self, store: ParamStore, name: str, input_dim: int, hidden: int, k: int = 1
    ) -> None:
        if k < 1:
            raise ValueError("k must be >= 1")
        self.store = store
        self.name = name
        self.input_dim = input_dim
        self.hidden = hidden
        self.k = k
        rows = (3 + k) * hidden
        self.w = store.register(f"{name}.w", (rows, input_dim))
        self.u = store.register(f"{name}.u", (rows, k * hidden))
        self.b = store.register(f"{name}.b", (rows,))

    def forward(
        self,
        x: np.ndarray,
        hs: Sequence[np.ndarray],
        cs: Sequence[np.ndarray],
    ) -> tuple[np.ndarray, np.ndarray, tuple]:
        d, k = self.hidden, self.k
        if len(hs) != k or len(cs) != k:
            raise ValueError(f"cell expects {k} child states, got {len(hs)}")
        hcat = np.concatenate(hs)
        z = self.w @ x + self.u @ hcat + self.b
        i = sigmoid(z[:d])
        o = sigmoid(z[d : 2 * d])
        g = np.tanh(z[2 * d : 3 * d])
        f = sigmoid(z[3 * d :])
        c = i * g
        for l in range(k):
            c = c + f[l * d : (l + 1) * d] * cs[l]
        tc = np.tanh(c)
        h = o * tc
        cache = (x, hcat, tuple(cs), i, o, g, f, tc)
        return h, c, cache

    def backward(
        self, dh: np.ndarray, dc: np.ndarray, cache: tuple
    ) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        d, k = self.hidden, self.k
        x, hcat, cs, i, o, g, f, tc = cache
        dc_total = dc + dh * o * (1.0 - tc * tc)
        do = dh * tc
        di = dc_total * g
        dg = dc_total * i
        dz = np.empty((3 + k) * d, dtype=np.float64)
        dz[:d] = di * i * (1.0 - i)
        dz[d : 2 * d] = do * o * (1.0 - o)
        dz[2 * d : 3 * d] = dg * (1.0 - g * g)
        dcs = []
        for l in range(k):
            fl = f[l * d : (l + 1) * d]
            dfl = dc_total * cs[l]
            dz[(3 + l) * d : (4 + l) * d] = dfl * fl * (1.0 - fl)
            dcs.append(dc_total * fl)
        self.store.grad(f"{self.name}.w")[...] += np.outer(dz, x)
        self.store.grad(f"{self.name}.u")[...] += np.outer(dz, hcat)
        self.store.grad(f"{self.name}.b")[...] += dz
        dx = self.w.T @ dz
        dhcat = self.u.T @ dz
        dhs = [dhcat[l * d : (l + 1) * d] for l in range(k)]
        return dx, dhs, dcs

    def zero_state(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.zeros(self.hidden, dtype=np.float64),
            np.zeros(self.hidden, dtype=np.float64),
        )


class PointerAttention:
    """score_k = v . tanh(Wq q + Wk e_k) over a variable candidate set."""

    def __init__(
        self, store: ParamStore, name: str, query_dim: int, key_dim: int, att_dim: int
    ) -> None:
        self.store = store
        self.name = name
        self.wq = store.register(f"{name}.wq", (att_dim, query_dim))
        self.wk = store.register(f"{name}.wk", (att_dim, key_dim))
        self.v = store.register(f"{name}.v", (att_dim,))

    def forward(self, q: np.ndarray, keys: np.ndarray) -> tuple[np.ndarray, tuple]:
        if keys.ndim != 2 or keys.shape[0] < 1:
            raise ValueError("pointer attention needs >= 1 candidate")
        pre = q @ self.wq.T + keys @ self.wk.T  # (n, att_dim)
        t = np.tanh(pre)
        scores = t @ self.v
        return scores, (q, keys, t)

    def backward(self, dscores: np.ndarray, cache: tuple) -> tuple[np.ndarray, np.ndarray]:
        q, keys, t = cache
        self.store.grad(f"{self.name}.v")[...] += dscores @ t
        dt = np.outer(dscores, self.v)
        dpre = dt * (1.0 - t * t)
        self.store.grad(f"{self.name}.wq")[...] += np.outer(dpre.sum(axis=0), q)
        self.store.grad(f"{self.name}.wk")[...] += dpre.T @ keys
        dq = dpre.sum(axis=0) @ self.wq
        dkeys = dpre @ self.wk
        return dq, dkeys


def lstm_cell(
    state: tuple[np.ndarray, np.ndarray], x: np.ndarray, cell: NaryCell
) -> tuple[np.ndarray, np.ndarray]:
    """Single ordinary LSTM step (cell must have k=1)."""
    if cell.k != 1:
        raise ValueError("lstm_cell requires a k=1 cell")
    h, c, _ = cell.forward(x, [state[0]], [state[1]])
    return h, c


def mlp_forward(x: np.ndarray, mlp: MLP) -> np.ndarray:
    out, _ = mlp.forward(x)
    return out
