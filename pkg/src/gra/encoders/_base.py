"""Shared pieces of the two-layer node encoders: losses, optimizers, estimator base."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .. import _random
from ..exceptions import (ConfigError, EvaluationError, NonFiniteError, ShapeError,
                          TrainingError)
from ..linalg import CSRMatrix, as_dense, csr_transpose, gemm, spmm

ACTIVATIONS = ("relu", "tanh")
OUTPUT_LAYERS = ("logits", "post-activation")
OPTIMIZERS = ("adam", "sgd")


@dataclass(frozen=True, eq=False)
class Representations:
    """Leaked node representation matrix and where it came from."""

    matrix: np.ndarray
    model: str
    layer: str

    @property
    def shape(self):
        return self.matrix.shape


def activate(z, kind):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    raise ConfigError(f"unknown activation {kind!r}")


def activation_grad(z, out, kind):
    """Derivative of the activation at pre-activation ``z`` (``out`` = act(z))."""
    if kind == "relu":
        return (z > 0).astype(np.float64)
    return 1.0 - out * out


def softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def cross_entropy_loss(logits, labels, mask=None, return_grad=False):
    """Mean negative log-likelihood over the masked nodes.

    With ``return_grad`` also returns the gradient with respect to ``logits``.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    mask = np.ones(labels.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise EvaluationError("cross-entropy needs a non-empty mask")
    z = logits[idx]
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(idx.size), labels[idx]]
    loss = float(np.mean(log_norm - picked))
    if not return_grad:
        return loss
    grad = np.zeros_like(logits)
    probs = np.exp(shifted - log_norm[:, None])
    probs[np.arange(idx.size), labels[idx]] -= 1.0
    grad[idx] = probs / idx.size
    return loss, grad


def glorot_uniform(rng, fan_in, fan_out, shape=None):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape or (fan_in, fan_out))


class Adam:
    def __init__(self, learning_rate=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, g in grads.items():
            m = self.m.get(name, 0.0) * b1 + (1 - b1) * g
            v = self.v.get(name, 0.0) * b2 + (1 - b2) * g * g
            self.m[name], self.v[name] = m, v
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            params[name] = params[name] - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


class SGD:
    def __init__(self, learning_rate=0.01):
        self.learning_rate = learning_rate

    def step(self, params, grads):
        for name, g in grads.items():
            params[name] = params[name] - self.learning_rate * g


def make_optimizer(kind, learning_rate):
    if kind == "adam":
        return Adam(learning_rate)
    if kind == "sgd":
        return SGD(learning_rate)
    raise ConfigError(f"unknown optimizer {kind!r}")


def sparse_features(x):
    """Features as CSR plus their transpose; products stay bitwise equal to dense ones."""
    if isinstance(x, CSRMatrix):
        csr = x
    else:
        csr = CSRMatrix.from_dense(as_dense(x, "features"))
    return csr, csr_transpose(csr)


class BaseEncoder(TransformerMixin, BaseEstimator):
    """Two-layer transductive node encoder trained on masked node classification.

    Subclasses provide ``_prepare``, ``_init_params``, ``_forward`` and
    ``_backward``. ``fit`` and ``transform`` take the node feature matrix plus
    the graph as a keyword argument.
    """

    model_name = "base"

    def _check_common(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"activation must be one of {ACTIVATIONS}")
        if self.output_layer not in OUTPUT_LAYERS:
            raise ConfigError(f"output_layer must be one of {OUTPUT_LAYERS}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}")
        if int(self.hidden_dim) < 1:
            raise ConfigError("hidden_dim must be >= 1")
        if int(self.epochs) < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")

    def _check_inputs(self, X, graph):
        if graph is None:
            raise ShapeError("graph is required")
        if not isinstance(X, CSRMatrix):
            X = as_dense(X, "X")
        if X.shape[0] != graph.n_nodes:
            raise ShapeError(f"X has {X.shape[0]} rows but the graph has {graph.n_nodes} nodes")
        return X

    def loss_and_gradients(self, params, X, y, *, graph, mask=None, context=None):
        """Masked cross-entropy and its exact gradient for every parameter."""
        ctx = context if context is not None else self._prepare(self._check_inputs(X, graph), graph)
        logits, cache = self._forward(params, ctx)
        loss, dlogits = cross_entropy_loss(logits, y, mask, return_grad=True)
        return loss, self._backward(params, ctx, cache, dlogits)

    def init_params(self, n_features, n_classes):
        rng = _random.stream(self.random_state, "init")
        return self._init_params(rng, n_features, n_classes)

    def fit(self, X, y, *, graph, train_mask=None):
        self._check_common()
        X = self._check_inputs(X, graph)
        y = np.asarray(y, dtype=np.int64)
        if y.shape != (graph.n_nodes,):
            raise ShapeError("y must hold one label per node")
        mask = np.ones(y.size, dtype=bool) if train_mask is None else np.asarray(train_mask, bool)
        n_classes = int(y.max()) + 1
        ctx = self._prepare(X, graph)
        params = self.init_params(X.shape[1], n_classes)
        opt = make_optimizer(self.optimizer, self.learning_rate)
        losses = []
        for epoch in range(1, int(self.epochs) + 1):
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grads = self.loss_and_gradients(params, X, y, graph=graph,
                                                          mask=mask, context=ctx)
            except NonFiniteError as exc:
                raise TrainingError(f"{self.model_name} forward pass overflowed ({exc})",
                                    epoch=epoch) from exc
            if not np.isfinite(loss):
                raise TrainingError(f"{self.model_name} loss became {loss}", epoch=epoch)
            if self.weight_decay:
                grads = {k: g + self.weight_decay * params[k] for k, g in grads.items()}
            with np.errstate(over="ignore", invalid="ignore"):
                opt.step(params, grads)
            for name, value in params.items():
                if not np.all(np.isfinite(value)):
                    raise TrainingError(f"{self.model_name} parameter {name} diverged",
                                        epoch=epoch)
            losses.append(loss)
        self.params_ = params
        self.loss_curve_ = losses
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = n_classes
        self._context = ctx
        self._graph = graph
        return self

    def decision_function(self, X, *, graph):
        """Node logits under the fitted parameters."""
        check_is_fitted(self, "params_")
        X = self._check_inputs(X, graph)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        ctx = self._context if graph is self._graph and X.shape[0] == graph.n_nodes else None
        if ctx is None or not self._same_features(ctx, X):
            ctx = self._prepare(X, graph)
        logits, _ = self._forward(self.params_, ctx)
        return logits

    def transform(self, X, *, graph):
        """The leaked representation: logits or softmax posteriors per ``output_layer``."""
        logits = self.decision_function(X, graph=graph)
        return logits if self.output_layer == "logits" else softmax(logits)

    def fit_transform(self, X, y=None, *, graph, train_mask=None):
        return self.fit(X, y, graph=graph, train_mask=train_mask).transform(X, graph=graph)

    def predict(self, X, *, graph):
        return np.argmax(self.decision_function(X, graph=graph), axis=1)

    def representations(self, X, *, graph):
        return Representations(self.transform(X, graph=graph), self.model_name,
                               self.output_layer)

    @staticmethod
    def _same_features(ctx, X):
        x_ref = ctx["x_dense"]
        if isinstance(X, CSRMatrix):
            X = X.to_dense()
        return x_ref is X or (x_ref.shape == X.shape and np.array_equal(x_ref, X))


def two_layer_forward(params, op, x, x_op=None, out_op=None, activation="relu"):
    """``out_op . op . act(op . x_op . x . W0) . W1`` with optional input/output maps.

    ``x`` is CSR; ``op`` is the propagation matrix. Returns logits and a cache
    for :func:`two_layer_backward`.
    """
    xw = spmm(x, params["W0"])
    if x_op is not None:
        xw = spmm(x_op, xw)
    pre1 = spmm(op, xw)
    h1 = activate(pre1, activation)
    hw = gemm(h1, params["W1"])
    out = spmm(op, hw)
    if out_op is not None:
        out = spmm(out_op, out)
    return out, {"pre1": pre1, "h1": h1}


def two_layer_backward(params, cache, dout, op_t, x_t, x_op_t=None, out_op_t=None,
                       activation="relu"):
    if out_op_t is not None:
        dout = spmm(out_op_t, dout)
    dhw = spmm(op_t, dout)
    d_w1 = gemm(cache["h1"].T, dhw)
    dh1 = gemm(dhw, params["W1"].T)
    dpre1 = dh1 * activation_grad(cache["pre1"], cache["h1"], activation)
    dxw = spmm(op_t, dpre1)
    if x_op_t is not None:
        dxw = spmm(x_op_t, dxw)
    d_w0 = spmm(x_t, dxw)
    return {"W0": d_w0, "W1": d_w1}
