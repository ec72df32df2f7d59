"""Capacitated VRP instances on the unit square."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class VrpInstance:
    """Node 0 is the depot (demand 0); customers are 1..n."""

    xs: np.ndarray
    ys: np.ndarray
    demands: np.ndarray
    capacity: int
    _dist: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        demands = np.asarray(self.demands, dtype=np.int64)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "demands", demands)
        if not (len(xs) == len(ys) == len(demands)):
            raise ValueError("coordinate and demand arrays must have equal length")
        if demands[0] != 0:
            raise ValueError("depot demand must be 0")
        if len(demands) > 1 and demands[1:].max(initial=0) > self.capacity:
            raise ValueError("a customer demand exceeds vehicle capacity")
        dx = xs[:, None] - xs[None, :]
        dy = ys[:, None] - ys[None, :]
        object.__setattr__(self, "_dist", np.sqrt(dx * dx + dy * dy))

    @property
    def n_customers(self) -> int:
        return len(self.demands) - 1

    def dist(self, i: int, j: int) -> float:
        return float(self._dist[i, j])

    @property
    def dist_matrix(self) -> np.ndarray:
        return self._dist

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"x": float(x), "y": float(y), "demand": int(d)}
                for x, y, d in zip(self.xs, self.ys, self.demands)
            ],
            "capacity": int(self.capacity),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VrpInstance":
        nodes = obj["nodes"]
        return cls(
            xs=np.array([n["x"] for n in nodes]),
            ys=np.array([n["y"] for n in nodes]),
            demands=np.array([n["demand"] for n in nodes]),
            capacity=int(obj["capacity"]),
        )


def gen_instance(n_customers: int, cap: int, rng: np.random.Generator) -> VrpInstance:
    """Uniform positions in the unit square; integer demands 1..9; depot at index 0."""
    if n_customers < 1:
        raise ValueError("need at least one customer")
    if cap < 9:
        raise ValueError("capacity must be at least 9 so every demand fits")
    xs = rng.random(n_customers + 1)
    ys = rng.random(n_customers + 1)
    demands = rng.integers(1, 10, size=n_customers + 1)
    demands[0] = 0
    return VrpInstance(xs=xs, ys=ys, demands=demands, capacity=cap)
