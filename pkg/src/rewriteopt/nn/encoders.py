"""Structured encoders: N-ary tree, child-sum DAG, bidirectional sequence.

All three take per-node input vectors and an NaryCell (k=3 for trees, k=1
otherwise) and return per-node hidden states plus a cache for the explicit
reverse pass. Node indices are positions in the caller's arrays; trees and
DAGs describe structure with integer index lists.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from rewriteopt.nn.layers import NaryCell


def tree_encode(
    children: Sequence[Sequence[int]], inputs: np.ndarray, cell: NaryCell
) -> tuple[np.ndarray, np.ndarray, list]:
    """Bottom-up N-ary encoding; missing child slots hold zero states.

    children[i] lists the node's child indices (at most cell.k of them);
    children must point to higher indices or be processed after them — we
    simply require a topologically valid ordering where every child index
    differs from its parent, and recurse bottom-up by explicit ordering.
    """
    n = len(children)
    if inputs.shape[0] != n:
        raise ValueError("one input row per node required")
    for i, ch in enumerate(children):
        if len(ch) > cell.k:
            raise ValueError(f"node {i} has {len(ch)} children, cell supports {cell.k}")
    h = np.zeros((n, cell.hidden), dtype=np.float64)
    c = np.zeros((n, cell.hidden), dtype=np.float64)
    zero_h, zero_c = cell.zero_state()
    caches: list = [None] * n
    done = [False] * n
    is_child = [False] * n
    for ch_list in children:
        for ch in ch_list:
            is_child[ch] = True
    # Process in an order where children come first.
    order: list[int] = []
    stack = [(i, False) for i in range(n) if not is_child[i]]
    visited = [False] * n
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if visited[node]:
            raise ValueError("node structure is not a forest (shared child or cycle)")
        visited[node] = True
        stack.append((node, True))
        for ch in children[node]:
            stack.append((ch, False))
    if len(order) != n:
        raise ValueError("tree structure is not a single forest over all nodes")
    for node in order:
        hs, cs = [], []
        for slot in range(cell.k):
            if slot < len(children[node]):
                ch = children[node][slot]
                if not done[ch]:
                    raise ValueError("child processed after parent")
                hs.append(h[ch])
                cs.append(c[ch])
            else:
                hs.append(zero_h)
                cs.append(zero_c)
        h[node], c[node], caches[node] = cell.forward(inputs[node], hs, cs)
        done[node] = True
    return h, c, (order, children, caches)


def tree_backward(
    dh: np.ndarray, cache: tuple, cell: NaryCell, dc: np.ndarray | None = None
) -> np.ndarray:
    """Accumulate parameter grads; returns d loss / d inputs."""
    order, children, caches = cache
    n = dh.shape[0]
    dh = dh.copy()
    dc = np.zeros_like(dh) if dc is None else dc.copy()
    dx = np.zeros((n, cell.input_dim), dtype=np.float64)
    for node in reversed(order):
        dxi, dhs, dcs = cell.backward(dh[node], dc[node], caches[node])
        dx[node] = dxi
        for slot, ch in enumerate(children[node]):
            dh[ch] += dhs[slot]
            dc[ch] += dcs[slot]
    return dx


def dag_encode(
    parents: Sequence[Sequence[int]],
    topo: Sequence[int],
    inputs: np.ndarray,
    cell: NaryCell,
) -> tuple[np.ndarray, np.ndarray, list]:
    """Child-sum encoding in the given topological order.

    parents[i] lists already-processed node indices whose states sum into
    node i's prior state; an entry violating the order means the graph has a
    cycle (or the order is invalid), which raises.
    """
    if cell.k != 1:
        raise ValueError("dag_encode uses a k=1 cell")
    n = len(parents)
    if sorted(topo) != list(range(n)):
        raise ValueError("topo must be a permutation of all nodes")
    pos = {node: rank for rank, node in enumerate(topo)}
    h = np.zeros((n, cell.hidden), dtype=np.float64)
    c = np.zeros((n, cell.hidden), dtype=np.float64)
    caches: list = [None] * n
    for node in topo:
        hsum, csum = cell.zero_state()
        for p in parents[node]:
            if pos[p] >= pos[node]:
                raise ValueError(f"edge {p}->{node} violates the topological order")
            hsum = hsum + h[p]
            csum = csum + c[p]
        h[node], c[node], caches[node] = cell.forward(inputs[node], [hsum], [csum])
    return h, c, (list(topo), [list(p) for p in parents], caches)


def dag_backward(
    dh: np.ndarray, cache: tuple, cell: NaryCell, dc: np.ndarray | None = None
) -> np.ndarray:
    topo, parents, caches = cache
    n = dh.shape[0]
    dh = dh.copy()
    dc = np.zeros_like(dh) if dc is None else dc.copy()
    dx = np.zeros((n, cell.input_dim), dtype=np.float64)
    for node in reversed(topo):
        dxi, dhs, dcs = cell.backward(dh[node], dc[node], caches[node])
        dx[node] = dxi
        for p in parents[node]:
            dh[p] += dhs[0]
            dc[p] += dcs[0]
    return dx


def seq_encode_bidir(
    inputs: np.ndarray, fwd: NaryCell, bwd: NaryCell
) -> tuple[np.ndarray, tuple]:
    """Concatenated forward/backward hidden states per position."""
    if fwd.k != 1 or bwd.k != 1:
        raise ValueError("sequence encoding uses k=1 cells")
    n = inputs.shape[0]
    if n < 1:
        raise ValueError("sequence must be non-empty")
    d = fwd.hidden
    hf = np.zeros((n, d), dtype=np.float64)
    cf = np.zeros((n, d), dtype=np.float64)
    hb = np.zeros((n, d), dtype=np.float64)
    cb = np.zeros((n, d), dtype=np.float64)
    f_caches: list = [None] * n
    b_caches: list = [None] * n
    hprev, cprev = fwd.zero_state()
    for i in range(n):
        hprev, cprev, f_caches[i] = fwd.forward(inputs[i], [hprev], [cprev])
        hf[i], cf[i] = hprev, cprev
    hprev, cprev = bwd.zero_state()
    for i in range(n - 1, -1, -1):
        hprev, cprev, b_caches[i] = bwd.forward(inputs[i], [hprev], [cprev])
        hb[i], cb[i] = hprev, cprev
    return np.concatenate([hf, hb], axis=1), (n, f_caches, b_caches)


def seq_backward(
    dh: np.ndarray, cache: tuple, fwd: NaryCell, bwd: NaryCell
) -> np.ndarray:
    n, f_caches, b_caches = cache
    d = fwd.hidden
    dx = np.zeros((n, fwd.input_dim), dtype=np.float64)
    dh_carry = np.zeros(d, dtype=np.float64)
    dc_carry = np.zeros(d, dtype=np.float64)
    for i in range(n - 1, -1, -1):
        dxi, dhs, dcs = fwd.backward(dh[i, :d] + dh_carry, dc_carry, f_caches[i])
        dx[i] += dxi
        dh_carry, dc_carry = dhs[0], dcs[0]
    dh_carry = np.zeros(d, dtype=np.float64)
    dc_carry = np.zeros(d, dtype=np.float64)
    for i in range(n):
        dxi, dhs, dcs = bwd.backward(dh[i, d:] + dh_carry, dc_carry, b_caches[i])
        dx[i] += dxi
        dh_carry, dc_carry = dhs[0], dcs[0]
    return dx
