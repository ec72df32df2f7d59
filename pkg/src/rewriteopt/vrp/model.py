"""Bidirectional route encoder, position scorer, and pointer rule selector.

The route is a sequence of visits; each position embeds to a 7-dim feature
vector, a bidirectional LSTM yields per-position states, the score predictor
reads one position's state, and the rule selector points from the region's
state to every other position.
"""

from __future__ import annotations

import numpy as np

from rewriteopt.core.domain import Policy
from rewriteopt.nn.encoders import seq_backward, seq_encode_bidir
from rewriteopt.nn.functional import log_softmax, log_softmax_backward
from rewriteopt.nn.layers import EncoderConfig, MLP, NaryCell, PointerAttention
from rewriteopt.nn.params import ParamStore
from rewriteopt.vrp.domain import VrpState
from rewriteopt.vrp.route import vrp_node_embedding

FEATURE_DIM = 7


class VrpModel(Policy):
    def __init__(self, store: ParamStore, cfg: EncoderConfig) -> None:
        self.store = store
        self.cfg = cfg
        d = cfg.hidden_size
        self.fwd = NaryCell(store, "vrp.fwd", FEATURE_DIM, d, k=1)
        self.bwd = NaryCell(store, "vrp.bwd", FEATURE_DIM, d, k=1)
        self.q_mlp = MLP(
            store,
            "vrp.q",
            [2 * d] + [cfg.predictor_hidden] * cfg.predictor_layers + [1],
        )
        # The pointer scorer is a fixed-depth module; selector_layers does not
        # apply to it.
        self.att = PointerAttention(store, "vrp.att", 2 * d, 2 * d, d)

    def _inputs(self, state: VrpState) -> np.ndarray:
        n = len(state.seq)
        feats = np.empty((n, FEATURE_DIM), dtype=np.float64)
        for pos in range(n):
            feats[pos] = vrp_node_embedding(pos, state.seq, state.instance)
        return feats

    def _encode(self, state: VrpState):
        return seq_encode_bidir(self._inputs(state), self.fwd, self.bwd)

    def _regions(self, state: VrpState) -> list[int]:
        return [pos for pos, node in enumerate(state.seq) if node != 0]

    def region_scores(self, state: VrpState) -> np.ndarray:
        h, _ = self._encode(state)
        regions = self._regions(state)
        scores = np.empty(len(regions), dtype=np.float64)
        for i, pos in enumerate(regions):
            q, _ = self.q_mlp.forward(h[pos])
            scores[i] = q[0]
        return scores

    def _candidates(self, n: int, region: int) -> list[int]:
        return [pos for pos in range(n) if pos != region]

    def rule_logprobs(self, state: VrpState, region: int) -> np.ndarray:
        h, _ = self._encode(state)
        cands = self._candidates(len(state.seq), region)
        scores, _ = self.att.forward(h[region], h[cands])
        return log_softmax(scores)

    def backprop_step(
        self, state: VrpState, region: int, rule: int, dq: float, dlogp: float
    ) -> None:
        h, cache = self._encode(state)
        dh = np.zeros_like(h)
        if dq != 0.0:
            _, q_cache = self.q_mlp.forward(h[region])
            dh[region] += self.q_mlp.backward(np.array([dq]), q_cache)
        if dlogp != 0.0:
            cands = self._candidates(len(state.seq), region)
            scores, att_cache = self.att.forward(h[region], h[cands])
            logp = log_softmax(scores)
            dlp = np.zeros_like(logp)
            dlp[rule] = dlogp
            dscores = log_softmax_backward(dlp, logp)
            dq_vec, dkeys = self.att.backward(dscores, att_cache)
            dh[region] += dq_vec
            for i, pos in enumerate(cands):
                dh[pos] += dkeys[i]
        seq_backward(dh, cache, self.fwd, self.bwd)
