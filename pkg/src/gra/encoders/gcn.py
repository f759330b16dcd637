from ..graph import gcn_normalize
from ..linalg import CSRMatrix, as_dense, csr_transpose
from ._base import (BaseEncoder, Representations, glorot_uniform, softmax, sparse_features,
                    two_layer_backward, two_layer_forward)


def gcn_forward(params, a_hat, x, activation="relu", output_layer="logits"):
    """``A_hat . act(A_hat . X . W0) . W1``, then softmax if ``output_layer`` asks for it."""
    x_csr = x if isinstance(x, CSRMatrix) else CSRMatrix.from_dense(as_dense(x, "x"))
    logits, _ = two_layer_forward(params, a_hat, x_csr, activation=activation)
    matrix = logits if output_layer == "logits" else softmax(logits)
    return Representations(matrix, "gcn", output_layer)


class GCNEncoder(BaseEncoder):
    """Two-layer graph convolutional network over the self-looped normalized adjacency."""

    model_name = "gcn"

    def __init__(self, hidden_dim=16, activation="relu", output_layer="post-activation",
                 epochs=200, learning_rate=0.01, weight_decay=5e-4, optimizer="adam",
                 random_state=0):
        self.hidden_dim = hidden_dim
        self.activation = activation
        self.output_layer = output_layer
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.optimizer = optimizer
        self.random_state = random_state

    def _prepare(self, X, graph):
        x, x_t = sparse_features(X)
        a_hat = gcn_normalize(graph.adjacency)
        return {"x": x, "x_t": x_t, "x_dense": X, "op": a_hat, "op_t": csr_transpose(a_hat)}

    def _init_params(self, rng, n_features, n_classes):
        h = int(self.hidden_dim)
        return {"W0": glorot_uniform(rng, n_features, h),
                "W1": glorot_uniform(rng, h, n_classes)}

    def _forward(self, params, ctx):
        return two_layer_forward(params, ctx["op"], ctx["x"], activation=self.activation)

    def _backward(self, params, ctx, cache, dlogits):
        return two_layer_backward(params, cache, dlogits, ctx["op_t"], ctx["x_t"],
                                  activation=self.activation)
