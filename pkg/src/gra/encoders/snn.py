"""Simplicial encoder: graph convolution with the normalized Hodge Laplacian ``L_d + I``.

``edge-lifted-d1`` runs the convolution on edges with ``L_1``: node features
are lifted to edge midpoints first and the edge outputs averaged back onto
nodes. ``node-d0`` runs it directly on nodes with ``L_0``.
"""

from ..exceptions import ConfigError
from ..linalg import CSRMatrix, add_identity, as_dense, csr_transpose, sym_normalize
from ..simplicial import (boundary_matrix, clique_complex, hodge_laplacian, lift_operator,
                          projection_operator)
from ._base import (BaseEncoder, Representations, glorot_uniform, softmax, sparse_features,
                    two_layer_backward, two_layer_forward)

SNN_MODES = ("edge-lifted-d1", "node-d0")
Q_NORMS = ("abs", "signed")


def _mode_dim(mode):
    if mode not in SNN_MODES:
        raise ConfigError(f"snn mode must be one of {SNN_MODES}, got {mode!r}")
    return 1 if mode == "edge-lifted-d1" else 0


def snn_operator(k, mode="edge-lifted-d1", q_norm="abs"):
    """``Q^-1/2 (L_d + I) Q^-1/2`` with ``Q`` the (absolute, by default) row sums of ``L_d + I``."""
    if q_norm not in Q_NORMS:
        raise ConfigError(f"q_norm must be one of {Q_NORMS}, got {q_norm!r}")
    lap = hodge_laplacian(k, _mode_dim(mode)).matrix
    shifted = add_identity(lap)
    q = shifted.abs().row_sums() if q_norm == "abs" else shifted.row_sums()
    return sym_normalize(shifted, q)


def _snn_context(graph, mode, q_norm):
    d = _mode_dim(mode)
    k = clique_complex(graph, max_dim=d + 1)
    op = snn_operator(k, mode, q_norm)
    ctx = {"complex": k, "op": op, "op_t": csr_transpose(op), "x_op": None, "x_op_t": None,
           "out_op": None, "out_op_t": None}
    if d == 1:
        b1 = boundary_matrix(k, 1)
        lift, proj = lift_operator(b1), projection_operator(b1)
        ctx.update(x_op=lift, x_op_t=csr_transpose(lift), out_op=proj,
                   out_op_t=csr_transpose(proj))
    return ctx


def snn_forward(params, k, x, mode="edge-lifted-d1", activation="relu",
                output_layer="logits", q_norm="abs"):
    """Two-layer simplicial convolution; always returns one row per node."""
    op = snn_operator(k, mode, q_norm)
    x_csr = x if isinstance(x, CSRMatrix) else CSRMatrix.from_dense(as_dense(x, "x"))
    x_op = out_op = None
    if _mode_dim(mode) == 1:
        b1 = boundary_matrix(k, 1)
        x_op, out_op = lift_operator(b1), projection_operator(b1)
    logits, _ = two_layer_forward(params, op, x_csr, x_op=x_op, out_op=out_op,
                                  activation=activation)
    matrix = logits if output_layer == "logits" else softmax(logits)
    return Representations(matrix, "snn", output_layer)


class SNNEncoder(BaseEncoder):
    """Two-layer simplicial neural network on the clique complex of the graph."""

    model_name = "snn"

    def __init__(self, hidden_dim=16, snn_mode="edge-lifted-d1", q_norm="abs",
                 activation="relu", output_layer="post-activation", epochs=200,
                 learning_rate=0.01, weight_decay=5e-4, optimizer="adam", random_state=0):
        self.hidden_dim = hidden_dim
        self.snn_mode = snn_mode
        self.q_norm = q_norm
        self.activation = activation
        self.output_layer = output_layer
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.optimizer = optimizer
        self.random_state = random_state

    def _prepare(self, X, graph):
        x, x_t = sparse_features(X)
        ctx = _snn_context(graph, self.snn_mode, self.q_norm)
        ctx.update(x=x, x_t=x_t, x_dense=X)
        return ctx

    def _init_params(self, rng, n_features, n_classes):
        h = int(self.hidden_dim)
        return {"W0": glorot_uniform(rng, n_features, h),
                "W1": glorot_uniform(rng, h, n_classes)}

    def _forward(self, params, ctx):
        return two_layer_forward(params, ctx["op"], ctx["x"], x_op=ctx["x_op"],
                                 out_op=ctx["out_op"], activation=self.activation)

    def _backward(self, params, ctx, cache, dlogits):
        return two_layer_backward(params, cache, dlogits, ctx["op_t"], ctx["x_t"],
                                  x_op_t=ctx["x_op_t"], out_op_t=ctx["out_op_t"],
                                  activation=self.activation)
