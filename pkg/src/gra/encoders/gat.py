"""Graph attention network: multi-head concatenated first layer, single-head output layer."""

import numpy as np

from ..exceptions import ConfigError
from ..linalg import CSRMatrix, add_identity, as_dense, csr_transpose, gemm, spmm
from ._base import (BaseEncoder, Representations, activate, activation_grad, glorot_uniform,
                    softmax, sparse_features)

NEGATIVE_SLOPE = 0.2


def attention_pattern(graph):
    """Self-loop-augmented adjacency pattern every attention matrix shares."""
    return add_identity(graph.adjacency)


def _attention(pattern, m, a_src, a_dst):
    """Row-softmax attention over ``pattern`` for projected features ``m``."""
    rows = pattern.row_indices()
    cols = pattern.indices
    s = gemm(m, a_src.reshape(-1, 1)).ravel()
    t = gemm(m, a_dst.reshape(-1, 1)).ravel()
    u = s[rows] + t[cols]
    e = np.where(u > 0, u, NEGATIVE_SLOPE * u)
    row_max = np.maximum.reduceat(e, pattern.indptr[:-1])
    ex = np.exp(e - row_max[rows])
    alpha = ex / np.bincount(rows, weights=ex, minlength=pattern.shape[0])[rows]
    return pattern.with_data(alpha), u


def gat_attention(params, graph, h, head=0, layer=0):
    """Attention coefficients of one head as a sparse matrix on the self-looped pattern."""
    h = as_dense(h, "h")
    w, a_src, a_dst, width = _layer_params(params, layer)
    m = gemm(h, w)[:, head * width:(head + 1) * width]
    alpha, _ = _attention(attention_pattern(graph), m, a_src[head], a_dst[head])
    return alpha


def _layer_params(params, layer):
    w = params[f"W{layer}"]
    a_src, a_dst = params[f"a{layer}_src"], params[f"a{layer}_dst"]
    return w, a_src, a_dst, a_src.shape[1]


def _attend_forward(pattern, m, a_src, a_dst):
    heads, width = a_src.shape
    outs, caches = [], []
    for h in range(heads):
        mh = np.ascontiguousarray(m[:, h * width:(h + 1) * width])
        alpha, u = _attention(pattern, mh, a_src[h], a_dst[h])
        outs.append(spmm(alpha, mh))
        caches.append((mh, alpha, u))
    return np.concatenate(outs, axis=1), caches


def _attend_backward(pattern, caches, dout, a_src, a_dst):
    heads, width = a_src.shape
    rows = pattern.row_indices()
    cols = pattern.indices
    n = pattern.shape[0]
    dm = np.zeros((n, heads * width))
    da_src = np.zeros_like(a_src)
    da_dst = np.zeros_like(a_dst)
    for h, (mh, alpha, u) in enumerate(caches):
        dh = np.ascontiguousarray(dout[:, h * width:(h + 1) * width])
        dmh = spmm(csr_transpose(alpha), dh)
        dalpha = np.sum(dh[rows] * mh[cols], axis=1)
        a = alpha.data
        row_dot = np.bincount(rows, weights=a * dalpha, minlength=n)
        de = a * (dalpha - row_dot[rows])
        du = de * np.where(u > 0, 1.0, NEGATIVE_SLOPE)
        ds = np.bincount(rows, weights=du, minlength=n)
        dt = np.bincount(cols, weights=du, minlength=n)
        da_src[h] = gemm(mh.T, ds.reshape(-1, 1)).ravel()
        da_dst[h] = gemm(mh.T, dt.reshape(-1, 1)).ravel()
        dmh = dmh + np.outer(ds, a_src[h]) + np.outer(dt, a_dst[h])
        dm[:, h * width:(h + 1) * width] = dmh
    return dm, da_src, da_dst


def _gat_logits(params, pattern, x, activation):
    m0 = spmm(x, params["W0"])
    pre1, cache0 = _attend_forward(pattern, m0, params["a0_src"], params["a0_dst"])
    h1 = activate(pre1, activation)
    m1 = gemm(h1, params["W1"])
    logits, cache1 = _attend_forward(pattern, m1, params["a1_src"], params["a1_dst"])
    return logits, {"pre1": pre1, "h1": h1, "att0": cache0, "att1": cache1}


def gat_forward(params, graph, x, activation="relu", output_layer="logits"):
    x_csr = x if isinstance(x, CSRMatrix) else CSRMatrix.from_dense(as_dense(x, "x"))
    logits, _ = _gat_logits(params, attention_pattern(graph), x_csr, activation)
    matrix = logits if output_layer == "logits" else softmax(logits)
    return Representations(matrix, "gat", output_layer)


class GATEncoder(BaseEncoder):
    """Two-layer graph attention network.

    Layer one concatenates ``heads`` attention heads of width ``hidden_dim``;
    layer two is one head producing class scores.
    """

    model_name = "gat"

    def __init__(self, hidden_dim=8, heads=8, activation="relu",
                 output_layer="post-activation", epochs=200, learning_rate=0.01,
                 weight_decay=5e-4, optimizer="adam", random_state=0):
        self.hidden_dim = hidden_dim
        self.heads = heads
        self.activation = activation
        self.output_layer = output_layer
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.optimizer = optimizer
        self.random_state = random_state

    def _check_common(self):
        super()._check_common()
        if int(self.heads) < 1:
            raise ConfigError("heads must be >= 1")

    def _prepare(self, X, graph):
        x, x_t = sparse_features(X)
        return {"x": x, "x_t": x_t, "x_dense": X, "pattern": attention_pattern(graph)}

    def _init_params(self, rng, n_features, n_classes):
        heads, width = int(self.heads), int(self.hidden_dim)
        return {
            "W0": glorot_uniform(rng, n_features, heads * width),
            "a0_src": glorot_uniform(rng, 2 * width, 1, shape=(heads, width)),
            "a0_dst": glorot_uniform(rng, 2 * width, 1, shape=(heads, width)),
            "W1": glorot_uniform(rng, heads * width, n_classes),
            "a1_src": glorot_uniform(rng, 2 * n_classes, 1, shape=(1, n_classes)),
            "a1_dst": glorot_uniform(rng, 2 * n_classes, 1, shape=(1, n_classes)),
        }

    def _forward(self, params, ctx):
        return _gat_logits(params, ctx["pattern"], ctx["x"], self.activation)

    def _backward(self, params, ctx, cache, dlogits):
        pattern = ctx["pattern"]
        dm1, da1_src, da1_dst = _attend_backward(pattern, cache["att1"], dlogits,
                                                 params["a1_src"], params["a1_dst"])
        d_w1 = gemm(cache["h1"].T, dm1)
        dh1 = gemm(dm1, params["W1"].T)
        dpre1 = dh1 * activation_grad(cache["pre1"], cache["h1"], self.activation)
        dm0, da0_src, da0_dst = _attend_backward(pattern, cache["att0"], dpre1,
                                                 params["a0_src"], params["a0_dst"])
        d_w0 = spmm(ctx["x_t"], dm0)
        return {"W0": d_w0, "a0_src": da0_src, "a0_dst": da0_dst,
                "W1": d_w1, "a1_src": da1_src, "a1_dst": da1_dst}
