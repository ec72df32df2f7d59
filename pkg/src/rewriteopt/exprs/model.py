"""Tree-LSTM scorer and rule selector for expressions.

One shared tree encoder feeds two heads: the score predictor reads
[root; node] and outputs a scalar per internal node, and the rule selector
reads the same pair and outputs a distribution over the whole ruleset.
Gradients from the score loss reach only the predictor head and the encoder;
gradients from the selector loss reach only the selector head and the
encoder.
"""

from __future__ import annotations

import numpy as np

from rewriteopt.core.domain import Policy
from rewriteopt.exprs.ast import (
    BINARY_OPS,
    Binary,
    Const,
    Expr,
    Max,
    Min,
    Not,
    Select,
    Var,
    children,
    region_set,
)
from rewriteopt.exprs.rules import RULE_COUNT
from rewriteopt.nn.encoders import tree_backward, tree_encode
from rewriteopt.nn.functional import log_softmax, log_softmax_backward
from rewriteopt.nn.layers import EncoderConfig, MLP, NaryCell
from rewriteopt.nn.params import ParamStore

_TOKENS = list(BINARY_OPS) + ["!", "max", "min", "select", "const"] + [
    f"v{i}" for i in range(10)
] + ["var_other"]
_TOKEN_INDEX = {t: i for i, t in enumerate(_TOKENS)}
# One-hot token plus three squashed views of the constant's magnitude.
FEATURE_DIM = len(_TOKENS) + 3


def _node_feature(e: Expr) -> np.ndarray:
    x = np.zeros(FEATURE_DIM, dtype=np.float64)
    if isinstance(e, Binary):
        x[_TOKEN_INDEX[e.op]] = 1.0
    elif isinstance(e, Not):
        x[_TOKEN_INDEX["!"]] = 1.0
    elif isinstance(e, Max):
        x[_TOKEN_INDEX["max"]] = 1.0
    elif isinstance(e, Min):
        x[_TOKEN_INDEX["min"]] = 1.0
    elif isinstance(e, Select):
        x[_TOKEN_INDEX["select"]] = 1.0
    elif isinstance(e, Var):
        x[_TOKEN_INDEX.get(e.name, _TOKEN_INDEX["var_other"])] = 1.0
    elif isinstance(e, Const):
        x[_TOKEN_INDEX["const"]] = 1.0
        v = float(e.value)
        x[-3] = np.tanh(v / 8.0)
        x[-2] = np.tanh(v / 64.0)
        x[-1] = np.tanh(v / 512.0)
    else:
        raise TypeError(f"unknown node type {type(e).__name__}")
    return x


def _tree_structure(expr: Expr) -> tuple[list[list[int]], np.ndarray]:
    """Preorder children lists and feature rows (index 0 is the root)."""
    kids: list[list[int]] = []
    feats: list[np.ndarray] = []

    def rec(e: Expr) -> int:
        idx = len(kids)
        kids.append([])
        feats.append(_node_feature(e))
        for ch in children(e):
            kids[idx].append(rec(ch))
        return idx

    rec(expr)
    return kids, np.asarray(feats)


class ExprModel(Policy):
    def __init__(self, store: ParamStore, cfg: EncoderConfig) -> None:
        self.store = store
        self.cfg = cfg
        d = cfg.hidden_size
        self.cell = NaryCell(store, "expr.tree", FEATURE_DIM, d, k=3)
        self.q_mlp = MLP(
            store,
            "expr.q",
            [2 * d] + [cfg.predictor_hidden] * cfg.predictor_layers + [1],
        )
        self.rule_mlp = MLP(
            store,
            "expr.rule",
            [2 * d] + [cfg.selector_hidden] * cfg.selector_layers + [RULE_COUNT],
        )

    def _encode(self, state: Expr):
        kids, feats = _tree_structure(state)
        h, c, cache = tree_encode(kids, feats, self.cell)
        return h, cache

    def region_scores(self, state: Expr) -> np.ndarray:
        h, _ = self._encode(state)
        regions = region_set(state)
        scores = np.empty(len(regions), dtype=np.float64)
        for i, r in enumerate(regions):
            q, _ = self.q_mlp.forward(np.concatenate([h[0], h[r]]))
            scores[i] = q[0]
        return scores

    def rule_logprobs(self, state: Expr, region: int) -> np.ndarray:
        h, _ = self._encode(state)
        logits, _ = self.rule_mlp.forward(np.concatenate([h[0], h[region]]))
        return log_softmax(logits)

    def backprop_step(
        self, state: Expr, region: int, rule: int, dq: float, dlogp: float
    ) -> None:
        """Accumulate gradients of dq * Q(state, region) + dlogp * log pi(rule)."""
        d = self.cfg.hidden_size
        kids, feats = _tree_structure(state)
        h, _, cache = tree_encode(kids, feats, self.cell)
        dh = np.zeros_like(h)
        pair = np.concatenate([h[0], h[region]])
        if dq != 0.0:
            _, q_cache = self.q_mlp.forward(pair)
            dpair = self.q_mlp.backward(np.array([dq]), q_cache)
            dh[0] += dpair[:d]
            dh[region] += dpair[d:]
        if dlogp != 0.0:
            logits, r_cache = self.rule_mlp.forward(pair)
            logp = log_softmax(logits)
            dlp = np.zeros_like(logp)
            dlp[rule] = dlogp
            dlogits = log_softmax_backward(dlp, logp)
            dpair = self.rule_mlp.backward(dlogits, r_cache)
            dh[0] += dpair[:d]
            dh[region] += dpair[d:]
        tree_backward(dh, cache, self.cell)
