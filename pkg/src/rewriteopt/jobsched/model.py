"""DAG-LSTM scorer and two-stage rule selector for schedules.

Nodes are [machine] + jobs; the machine encodes from a zero input vector and
every job's prior state is the sum of its supporting parents' states. The
selector embeds each candidate pair [h_job; h_candidate] to a hidden vector,
zero-pads the candidate axis to the fixed rule-space width, and scores all
slots with one MLP; padded slots are masked to probability zero.
"""

from __future__ import annotations

import numpy as np

from rewriteopt.core.domain import Policy
from rewriteopt.jobsched.dag import build_dag
from rewriteopt.jobsched.embed import job_embedding
from rewriteopt.jobsched.rewrite import jobsched_rule_space
from rewriteopt.jobsched.schedule import MACHINE, Schedule
from rewriteopt.nn.encoders import dag_backward, dag_encode
from rewriteopt.nn.functional import log_softmax, log_softmax_backward, relu
from rewriteopt.nn.layers import EncoderConfig, Linear, MLP, NaryCell
from rewriteopt.nn.params import ParamStore


class JobSchedModel(Policy):
    def __init__(
        self,
        store: ParamStore,
        cfg: EncoderConfig,
        d_resources: int = 2,
        t_max: int = 15,
        w: int = 10,
    ) -> None:
        self.store = store
        self.cfg = cfg
        self.d_resources = d_resources
        self.t_max = t_max
        self.w = w
        self.input_dim = d_resources * (t_max + 1) + 1
        d = cfg.hidden_size
        self.cell = NaryCell(store, "js.dag", self.input_dim, d, k=1)
        self.q_mlp = MLP(
            store,
            "js.q",
            [d] + [cfg.predictor_hidden] * cfg.predictor_layers + [1],
        )
        self.pair = Linear(store, "js.pair", 2 * d, d)
        self.sel_mlp = MLP(
            store,
            "js.sel",
            [2 * w * d] + [cfg.selector_hidden] * cfg.selector_layers + [2 * w],
        )

    def _check(self, state: Schedule) -> None:
        if state.d != self.d_resources or state.t_max != self.t_max:
            raise ValueError(
                f"model built for D={self.d_resources}, t_max={self.t_max}; "
                f"state has D={state.d}, t_max={state.t_max}"
            )

    def _encode(self, state: Schedule):
        """Returns per-node hidden states: node 0 is the machine, job j is j+1."""
        self._check(state)
        dag = build_dag(state)
        n = state.n_jobs
        inputs = np.zeros((n + 1, self.input_dim), dtype=np.float64)
        for j in range(n):
            inputs[j + 1] = job_embedding(j, state)
        parents = [[]] + [
            [0 if p == MACHINE else p + 1 for p in dag.parents[j]] for j in range(n)
        ]
        topo = [0] + [j + 1 for j in dag.topo]
        h, c, cache = dag_encode(parents, topo, inputs, self.cell)
        return h, cache, dag

    def region_scores(self, state: Schedule) -> np.ndarray:
        h, _, _ = self._encode(state)
        scores = np.empty(state.n_jobs, dtype=np.float64)
        for j in range(state.n_jobs):
            q, _ = self.q_mlp.forward(h[j + 1])
            scores[j] = q[0]
        return scores

    def _selector_forward(self, h: np.ndarray, region: int, slots: list):
        d = self.cfg.hidden_size
        h_job = h[region + 1]
        blocks = np.zeros(2 * self.w * d, dtype=np.float64)
        pair_caches: list = [None] * len(slots)
        for k, cand in enumerate(slots):
            if cand is None:
                continue
            node = 0 if cand == MACHINE else cand + 1
            pre, cache = self.pair.forward(np.concatenate([h_job, h[node]]))
            blocks[k * d : (k + 1) * d] = relu(pre)
            pair_caches[k] = (cache, pre, node)
        logits, sel_cache = self.sel_mlp.forward(blocks)
        mask = np.array([s is not None for s in slots])
        masked = np.where(mask, logits, -np.inf)
        return masked, (pair_caches, sel_cache, mask)

    def rule_logprobs(self, state: Schedule, region: int) -> np.ndarray:
        h, _, dag = self._encode(state)
        slots = jobsched_rule_space(region, dag, w=self.w)
        masked, _ = self._selector_forward(h, region, slots)
        out = np.full(2 * self.w, -np.inf)
        real = np.isfinite(masked)
        out[real] = log_softmax(masked[real])
        return out

    def backprop_step(
        self, state: Schedule, region: int, rule: int, dq: float, dlogp: float
    ) -> None:
        d = self.cfg.hidden_size
        h, cache, dag = self._encode(state)
        dh = np.zeros_like(h)
        if dq != 0.0:
            _, q_cache = self.q_mlp.forward(h[region + 1])
            dh[region + 1] += self.q_mlp.backward(np.array([dq]), q_cache)
        if dlogp != 0.0:
            slots = jobsched_rule_space(region, dag, w=self.w)
            masked, (pair_caches, sel_cache, mask) = self._selector_forward(
                h, region, slots
            )
            real_idx = np.nonzero(np.isfinite(masked))[0]
            logp = log_softmax(masked[real_idx])
            dlp = np.zeros_like(logp)
            dlp[int(np.searchsorted(real_idx, rule))] = dlogp
            dlogits = np.zeros(2 * self.w, dtype=np.float64)
            dlogits[real_idx] = log_softmax_backward(dlp, logp)
            dblocks = self.sel_mlp.backward(dlogits, sel_cache)
            for k in range(2 * self.w):
                if pair_caches[k] is None:
                    continue
                lin_cache, pre, node = pair_caches[k]
                dpre = dblocks[k * d : (k + 1) * d] * (pre > 0)
                dpair = self.pair.backward(dpre, lin_cache)
                dh[region + 1] += dpair[:d]
                dh[node] += dpair[d:]
        dag_backward(dh, cache, self.cell)
