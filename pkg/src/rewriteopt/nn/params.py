"""Named parameter storage, the Adam-style optimizer, and gradient checking.

Parameters must be registered up front (model constructors do this), so the
creation order — and therefore the RNG draw order — never depends on which
state happens to be encoded first.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

INIT_LOW, INIT_HIGH = -0.1, 0.1

BASE_LR = 1e-4
LR_DECAY = 0.9
LR_DECAY_EVERY = 1000
CLIP_NORM = 5.0
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class ParamStore:
    """Flat map of named float64 arrays with paired gradients and moments."""

    def __init__(self, rng: Optional[np.random.Generator] = None) -> None:
        self._rng = rng if rng is not None else np.random.default_rng(0)
        self._params: dict[str, np.ndarray] = {}
        self._grads: dict[str, np.ndarray] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self.global_step = 0

    def register(self, name: str, shape: tuple[int, ...]) -> np.ndarray:
        """Create (uniform in [-0.1, 0.1]) or fetch the named parameter."""
        if name in self._params:
            p = self._params[name]
            if p.shape != tuple(shape):
                raise ValueError(
                    f"parameter {name} re-registered with shape {shape}, has {p.shape}"
                )
            return p
        arr = self._rng.uniform(INIT_LOW, INIT_HIGH, size=shape).astype(np.float64)
        self._params[name] = arr
        self._grads[name] = np.zeros(shape, dtype=np.float64)
        self._m[name] = np.zeros(shape, dtype=np.float64)
        self._v[name] = np.zeros(shape, dtype=np.float64)
        return arr

    def get(self, name: str) -> np.ndarray:
        return self._params[name]

    def grad(self, name: str) -> np.ndarray:
        return self._grads[name]

    def names(self) -> list[str]:
        return sorted(self._params)

    def n_entries(self) -> int:
        return sum(p.size for p in self._params.values())

    def zero_grad(self) -> None:
        for g in self._grads.values():
            g.fill(0.0)

    def grad_norm(self) -> float:
        total = 0.0
        for g in self._grads.values():
            total += float(np.sum(g * g))
        return float(np.sqrt(total))

    def state_dict(self) -> dict:
        return {
            "params": {k: v.copy() for k, v in self._params.items()},
            "m": {k: v.copy() for k, v in self._m.items()},
            "v": {k: v.copy() for k, v in self._v.items()},
            "global_step": self.global_step,
        }

    def load_state_dict(self, state: dict) -> None:
        """Restore parameters and moments, writing into existing arrays.

        Layers bind the arrays returned by :meth:`register` at construction,
        so an already-registered name must keep its array object — values are
        copied in place. Unseen names are installed as fresh copies (for
        stores restored before any model is built on them).
        """
        for name, arr in state["params"].items():
            arr = np.asarray(arr, dtype=np.float64)
            m = np.asarray(
                state.get("m", {}).get(name, np.zeros_like(arr)), dtype=np.float64
            )
            v = np.asarray(
                state.get("v", {}).get(name, np.zeros_like(arr)), dtype=np.float64
            )
            if m.shape != arr.shape or v.shape != arr.shape:
                raise ValueError(f"shape mismatch loading moments of {name}")
            if name in self._params:
                if self._params[name].shape != arr.shape:
                    raise ValueError(f"shape mismatch loading parameter {name}")
                self._params[name][...] = arr
                self._grads[name].fill(0.0)
                self._m[name][...] = m
                self._v[name][...] = v
            else:
                self._params[name] = arr.copy()
                self._grads[name] = np.zeros_like(arr)
                self._m[name] = m.copy()
                self._v[name] = v.copy()
        self.global_step = int(state.get("global_step", 0))


def lr_for_step(
    step: int,
    base_lr: float = BASE_LR,
    decay: float = LR_DECAY,
    every: int = LR_DECAY_EVERY,
) -> float:
    """Learning rate after `step` completed optimizer steps."""
    return base_lr * decay ** (step // every)


def optimizer_step(
    store: ParamStore,
    base_lr: float = BASE_LR,
    clip_norm: float = CLIP_NORM,
    lr_decay: float = LR_DECAY,
    lr_decay_every: int = LR_DECAY_EVERY,
) -> float:
    """Clip the global gradient L2 norm, apply one Adam update, advance the
    step counter. Returns the learning rate used. Raises on non-finite
    gradients, naming the offending parameter."""
    for name in store.names():
        if not np.all(np.isfinite(store.grad(name))):
            raise FloatingPointError(f"non-finite gradient in parameter {name}")
    norm = store.grad_norm()
    scale = 1.0 if norm <= clip_norm else clip_norm / norm
    lr = lr_for_step(store.global_step, base_lr, lr_decay, lr_decay_every)
    t = store.global_step + 1
    bc1 = 1.0 - ADAM_BETA1**t
    bc2 = 1.0 - ADAM_BETA2**t
    for name in store.names():
        g = store.grad(name) * scale
        m = store._m[name]
        v = store._v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        update = (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
        store._params[name] -= lr * update
    store.global_step = t
    return lr


def grad_check(
    loss_fn: Callable[[], float],
    store: ParamStore,
    n_probes: int = 32,
    rng: Optional[np.random.Generator] = None,
    step: float = 1e-5,
    min_grad: float = 1e-6,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    loss_fn must be a deterministic closure over `store` that zeroes the
    gradients, runs forward and backward, and returns the scalar loss. Probe
    entries are sampled uniformly over entries whose analytic gradient
    magnitude is at least min_grad: below that, central differences at this
    step size measure truncation noise rather than the derivative, so a
    mismatch there says nothing about the backward pass. Entries the loss
    provably never touches are pinned by exact-zero tests elsewhere.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    analytic_loss = loss_fn()
    if not np.isfinite(analytic_loss):
        raise FloatingPointError("loss is not finite")
    analytic = {name: store.grad(name).copy() for name in store.names()}
    names = store.names()
    eligible: list[tuple[str, int]] = []
    for name in names:
        g = analytic[name].reshape(-1)
        for idx in np.flatnonzero(np.abs(g) >= min_grad):
            eligible.append((name, int(idx)))
    if not eligible:
        # Constant loss (all gradients below the floor): nothing checkable.
        store.zero_grad()
        loss_fn()
        return 0.0
    worst = 0.0
    for _ in range(n_probes):
        name, idx = eligible[int(rng.integers(0, len(eligible)))]
        p = store.get(name)
        orig = p.flat[idx]
        p.flat[idx] = orig + step
        loss_plus = loss_fn()
        p.flat[idx] = orig - step
        loss_minus = loss_fn()
        p.flat[idx] = orig
        numeric = (loss_plus - loss_minus) / (2.0 * step)
        a = analytic[name].flat[idx]
        err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
        worst = max(worst, err)
    # Restore gradients to the analytic values for the unperturbed point.
    store.zero_grad()
    loss_fn()
    return worst
