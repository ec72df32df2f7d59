"""Minimal double-precision neural layer with explicit reverse passes.

No autodiff tape: every building block exposes forward(...) returning a
cache and backward(...) consuming it, accumulating parameter gradients into
a shared ParamStore. The computation graphs here are small and fixed-shape
per state, which keeps the handwritten gradients testable against finite
differences.
"""

from rewriteopt.nn.params import (
    ParamStore,
    grad_check,
    lr_for_step,
    optimizer_step,
)
from rewriteopt.nn.functional import (
    log_softmax,
    relu,
    sigmoid,
    softmax,
)
from rewriteopt.nn.layers import (
    EncoderConfig,
    Linear,
    MLP,
    NaryCell,
    PointerAttention,
    lstm_cell,
    mlp_forward,
)
from rewriteopt.nn.encoders import (
    dag_backward,
    dag_encode,
    seq_backward,
    seq_encode_bidir,
    tree_backward,
    tree_encode,
)

__all__ = [
    "EncoderConfig",
    "Linear",
    "MLP",
    "NaryCell",
    "ParamStore",
    "PointerAttention",
    "dag_backward",
    "dag_encode",
    "grad_check",
    "log_softmax",
    "lr_for_step",
    "lstm_cell",
    "mlp_forward",
    "optimizer_step",
    "relu",
    "seq_backward",
    "seq_encode_bidir",
    "sigmoid",
    "softmax",
    "tree_backward",
    "tree_encode",
]
