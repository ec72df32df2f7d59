"""Routes: construction, feasibility, cost, relocation rewriting, embeddings.

A route is a tuple of node ids starting and ending at the depot (0), with
intermediate depot visits delimiting sub-tours. Every customer appears
exactly once and each sub-tour's total demand fits the vehicle capacity.
"""

from __future__ import annotations

import numpy as np

from .instance import VrpInstance

Route = tuple[int, ...]


def check_route(seq: Route, instance: VrpInstance) -> None:
    """Raise ValueError unless all route invariants hold."""
    if len(seq) < 2 or seq[0] != 0 or seq[-1] != 0:
        raise ValueError("route must start and end at the depot")
    seen: set[int] = set()
    load = 0
    for i, v in enumerate(seq):
        if v == 0:
            if i > 0 and seq[i - 1] == 0:
                raise ValueError(f"consecutive depot visits at position {i}")
            load = 0
            continue
        if v in seen:
            raise ValueError(f"customer {v} visited twice")
        seen.add(v)
        load += int(instance.demands[v])
        if load > instance.capacity:
            raise ValueError(f"capacity exceeded at position {i}")
    expected = set(range(1, instance.n_customers + 1))
    if seen != expected:
        missing = sorted(expected - seen)
        raise ValueError(f"customers not visited: {missing}")


def route_cost(seq: Route, instance: VrpInstance) -> float:
    d = instance.dist_matrix
    idx = np.asarray(seq)
    if len(idx) < 2:
        return 0.0
    return float(d[idx[:-1], idx[1:]].sum())


def capacity_trace(seq: Route, instance: VrpInstance) -> np.ndarray:
    """Remaining capacity on arrival at each position (before serving it)."""
    out = np.empty(len(seq), dtype=np.float64)
    rem = instance.capacity
    for i, v in enumerate(seq):
        out[i] = rem
        if v == 0:
            rem = instance.capacity
        else:
            rem -= int(instance.demands[v])
    return out


def nn_initial_route(instance: VrpInstance) -> Route:
    """Greedy construction: from the current position, go to the nearest of
    (a) an unvisited customer whose demand fits the remaining load, or
    (b) the depot, whenever the vehicle is no longer full.

    The depot competes by distance, so the vehicle may return to refill even
    when customers would still fit; this deliberately produces the weak
    initial tours that rewriting starts from.
    """
    n = instance.n_customers
    if n == 0:
        return (0, 0)
    d = instance.dist_matrix
    demands = instance.demands
    unvisited = np.ones(n + 1, dtype=bool)
    unvisited[0] = False
    seq = [0]
    pos = 0
    remaining = instance.capacity
    while unvisited.any():
        feasible = unvisited & (demands <= remaining)
        best_cust = -1
        if feasible.any():
            cands = np.flatnonzero(feasible)
            best_cust = int(cands[np.argmin(d[pos, cands])])
        go_depot = False
        if remaining < instance.capacity and pos != 0:
            if best_cust < 0 or d[pos, 0] < d[pos, best_cust]:
                go_depot = True
        if go_depot:
            seq.append(0)
            pos = 0
            remaining = instance.capacity
        else:
            seq.append(best_cust)
            unvisited[best_cust] = False
            pos = best_cust
            remaining -= int(demands[best_cust])
    seq.append(0)
    return tuple(seq)


def vrp_rewrite(seq: Route, pos_a: int, pos_b: int, instance: VrpInstance) -> Route:
    """Relocate the customer at position pos_a to immediately after pos_b,
    then repair depot returns deterministically: walking the new order,
    a return is inserted before any customer that would overflow the load,
    and returns that become consecutive or terminal-redundant are dropped.
    """
    if not (0 <= pos_a < len(seq)) or not (0 <= pos_b < len(seq)):
        raise IndexError("route position out of range")
    if seq[pos_a] == 0:
        raise ValueError("only customer positions can be relocated")
    if pos_a == pos_b:
        raise ValueError("cannot relocate a node after itself")
    node = seq[pos_a]
    rest = list(seq[:pos_a]) + list(seq[pos_a + 1 :])
    insert_at = pos_b if pos_b < pos_a else pos_b - 1
    raw = rest[: insert_at + 1] + [node] + rest[insert_at + 1 :]
    out = [0]
    load = 0
    cap = instance.capacity
    demands = instance.demands
    for v in raw[1:]:
        if v == 0:
            if out[-1] != 0:
                out.append(0)
            load = 0
        else:
            dv = int(demands[v])
            if load + dv > cap:
                out.append(0)
                load = 0
            out.append(v)
            load += dv
    if out[-1] != 0:
        out.append(0)
    return tuple(out)


def vrp_node_embedding(position: int, seq: Route, instance: VrpInstance) -> np.ndarray:
    """7 features: own coordinates, demand fraction, predecessor coordinates,
    edge length from the predecessor, and remaining-capacity fraction on
    arrival. The first position's predecessor is the depot itself."""
    if not (0 <= position < len(seq)):
        raise IndexError("route position out of range")
    v = seq[position]
    prev = seq[position - 1] if position > 0 else 0
    cap = float(instance.capacity)
    rem = capacity_trace(seq, instance)[position]
    return np.array(
        [
            instance.xs[v],
            instance.ys[v],
            float(instance.demands[v]) / cap,
            instance.xs[prev],
            instance.ys[prev],
            instance.dist(prev, v),
            rem / cap,
        ],
        dtype=np.float64,
    )
