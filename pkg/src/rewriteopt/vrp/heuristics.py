"""Classic constructive heuristics: Clarke-Wright savings and the sweep."""

from __future__ import annotations

import numpy as np

from .instance import VrpInstance
from .route import Route, route_cost


def _tours_to_route(tours: list[list[int]]) -> Route:
    seq: list[int] = [0]
    for t in tours:
        seq.extend(t)
        seq.append(0)
    if len(seq) == 1:
        seq.append(0)
    return tuple(seq)


def _cw_once(instance: VrpInstance, rng: np.random.Generator | None, top_m: int) -> Route:
    """One parallel-savings pass. rng=None picks the best saving each time;
    otherwise a uniform choice among the top_m positive savings."""
    n = instance.n_customers
    d = instance.dist_matrix
    demands = instance.demands
    tours = {i: [i] for i in range(1, n + 1)}
    tour_of = {i: i for i in range(1, n + 1)}
    load = {i: int(demands[i]) for i in range(1, n + 1)}

    savings: list[tuple[float, int, int]] = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            s = d[0, i] + d[0, j] - d[i, j]
            if s > 0:
                savings.append((s, i, j))
    savings.sort(key=lambda t: (-t[0], t[1], t[2]))

    pending = list(savings)
    while pending:
        # merges only apply when i and j are tour endpoints of distinct tours
        usable = []
        for idx, (s, i, j) in enumerate(pending):
            ti, tj = tour_of[i], tour_of[j]
            if ti == tj:
                continue
            if load[ti] + load[tj] > instance.capacity:
                continue
            a, b = tours[ti], tours[tj]
            if (a[0] == i or a[-1] == i) and (b[0] == j or b[-1] == j):
                usable.append(idx)
            if rng is None and usable:
                break
            if len(usable) >= top_m:
                break
        if not usable:
            break
        pick = usable[0] if rng is None else usable[int(rng.integers(0, len(usable)))]
        _, i, j = pending.pop(pick)
        ti, tj = tour_of[i], tour_of[j]
        a, b = tours[ti], tours[tj]
        if a[-1] != i:
            a.reverse()
        if b[0] != j:
            b.reverse()
        a.extend(b)
        for v in b:
            tour_of[v] = ti
        load[ti] += load[tj]
        del tours[tj], load[tj]

    ordered = [tours[k] for k in sorted(tours)]
    return _tours_to_route(ordered)


def cw_savings(
    instance: VrpInstance,
    mode: str = "greedy",
    top_m: int = 5,
    depth: int = 5,
    rng: np.random.Generator | None = None,
) -> Route:
    """Clarke-Wright parallel savings.

    greedy: always merge the largest feasible saving. randomized: each merge
    samples uniformly among the top_m feasible savings; the best of `depth`
    restarts is returned (needs rng).
    """
    if mode == "greedy":
        return _cw_once(instance, None, 1)
    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("randomized mode needs an rng")
    best: Route | None = None
    best_cost = float("inf")
    for _ in range(depth):
        r = _cw_once(instance, rng, top_m)
        c = route_cost(r, instance)
        if c < best_cost:
            best, best_cost = r, c
    assert best is not None
    return best


def sweep_heuristic(
    instance: VrpInstance,
    mode: str = "basic",
    restarts: int = 5,
    rng: np.random.Generator | None = None,
) -> Route:
    """Sort customers by polar angle around the depot and cut capacity-full
    sub-tours in angular order. The randomized variant tries `restarts`
    rotations of the starting angle and keeps the cheapest result."""
    n = instance.n_customers
    if n == 0:
        return (0, 0)
    angles = np.arctan2(
        instance.ys[1:] - instance.ys[0], instance.xs[1:] - instance.xs[0]
    )
    order = np.argsort(angles, kind="stable") + 1

    def build(start: int) -> Route:
        tours: list[list[int]] = []
        cur: list[int] = []
        load = 0
        for k in range(n):
            v = int(order[(start + k) % n])
            dv = int(instance.demands[v])
            if load + dv > instance.capacity:
                tours.append(cur)
                cur, load = [], 0
            cur.append(v)
            load += dv
        if cur:
            tours.append(cur)
        return _tours_to_route(tours)

    if mode == "basic":
        return build(0)
    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("randomized mode needs an rng")
    best: Route | None = None
    best_cost = float("inf")
    for _ in range(restarts):
        r = build(int(rng.integers(0, n)))
        c = route_cost(r, instance)
        if c < best_cost:
            best, best_cost = r, c
    assert best is not None
    return best
