"""Graph reconstruction attack.

The adversary holds leaked node representations ``H`` and the disclosed part
``A*`` of the adjacency. The decoder embeds nodes as ``Z = norm(A*) H W_a``
and scores every pair with ``logistic(Z Z^T)``. ``W_a`` is fit so the scores
reproduce ``A*``; confidential pairs are then read off the same matrix.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _random
from .encoders._base import Adam, Representations, glorot_uniform
from .exceptions import (ConfigError, EvaluationError, NonFiniteError, ShapeError,
                         TrainingError)
from .graph import gcn_normalize
from .linalg import CSRMatrix, as_dense, gemm, spmm
from .metrics import auc

LOSS_MASKS = ("full-matrix", "known-pairs")
DENSE_LIMIT = 10_000
_TINY = np.finfo(np.float64).tiny


@njit(cache=True)
def _logistic(s):
    if s >= 0:
        return 1.0 / (1.0 + np.exp(-s))
    e = np.exp(s)
    return e / (1.0 + e)


@njit(cache=True)
def _full_loss_grad(z, indptr, indices, data):
    # sum over all n*n ordered pairs, visiting each unordered pair once
    n, r = z.shape
    dz = np.zeros((n, r))
    loss = 0.0
    for i in range(n):
        ptr = indptr[i]
        end = indptr[i + 1]
        while ptr < end and indices[ptr] < i:
            ptr += 1
        for j in range(i, n):
            target = 0.0
            if ptr < end and indices[ptr] == j:
                target = data[ptr]
                ptr += 1
            s = 0.0
            for k in range(r):
                s += z[i, k] * z[j, k]
            p = _logistic(s)
            diff = p - target
            g = 4.0 * diff * p * (1.0 - p)
            if j == i:
                loss += diff * diff
                for k in range(r):
                    dz[i, k] += g * z[i, k]
            else:
                loss += 2.0 * diff * diff
                for k in range(r):
                    dz[i, k] += g * z[j, k]
                    dz[j, k] += g * z[i, k]
    return loss, dz


@njit(cache=True)
def _pair_loss_grad(z, pairs, targets):
    # each unordered pair stands for both orderings
    n, r = z.shape
    dz = np.zeros((n, r))
    loss = 0.0
    for q in range(pairs.shape[0]):
        i = pairs[q, 0]
        j = pairs[q, 1]
        s = 0.0
        for k in range(r):
            s += z[i, k] * z[j, k]
        p = _logistic(s)
        diff = p - targets[q]
        loss += 2.0 * diff * diff
        g = 4.0 * diff * p * (1.0 - p)
        for k in range(r):
            dz[i, k] += g * z[j, k]
            dz[j, k] += g * z[i, k]
    return loss, dz


@njit(cache=True)
def _pair_logits(z, pairs):
    out = np.empty(pairs.shape[0])
    r = z.shape[1]
    for q in range(pairs.shape[0]):
        i = pairs[q, 0]
        j = pairs[q, 1]
        s = 0.0
        for k in range(r):
            s += z[i, k] * z[j, k]
        out[q] = s
    return out


def logistic(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True)
class AttackConfig:
    epochs: int = 300
    learning_rate: float = 0.01
    loss_mask: str = "full-matrix"
    decoder_dim: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("attack epochs must be >= 1")
        if self.decoder_dim < 1:
            raise ConfigError("decoder_dim must be >= 1")
        if self.loss_mask not in LOSS_MASKS:
            raise ConfigError(f"loss_mask must be one of {LOSS_MASKS}")
        if not self.learning_rate > 0:
            raise ConfigError("attack learning_rate must be positive")


@dataclass(frozen=True, eq=False)
class DecoderParams:
    W_a: np.ndarray


@dataclass(frozen=True, eq=False)
class PairScores:
    pairs: np.ndarray
    scores: np.ndarray
    labels: np.ndarray
    logits: np.ndarray

    def auc(self):
        # ranking by logits avoids ties from logistic saturation
        return auc(self.logits, self.labels)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("u,v,score,label\n")
            for (u, v), s, y in zip(self.pairs.tolist(), self.scores.tolist(),
                                    self.labels.tolist()):
                fh.write(f"{u},{v},{s!r},{y}\n")


def _matrix(h):
    return as_dense(h.matrix if isinstance(h, Representations) else h, "representations")


def decoder_forward(params, partial_adjacency_normalized, h):
    """Dense reconstruction ``logistic(Z Z^T)`` with ``Z = norm(A*) H W_a``."""
    h = _matrix(h)
    w = params.W_a if isinstance(params, DecoderParams) else as_dense(params, "W_a")
    if partial_adjacency_normalized.shape != (h.shape[0], h.shape[0]):
        raise ShapeError("partial adjacency does not match the representation rows")
    if w.shape[0] != h.shape[1]:
        raise ShapeError(f"W_a has {w.shape[0]} rows, representations have {h.shape[1]} columns")
    z = gemm(spmm(partial_adjacency_normalized, h), w)
    return logistic(gemm(z, np.ascontiguousarray(z.T)))


def attack_loss(a_star, a_rec, mask_mode="full-matrix", known_non_edges=None):
    """Squared reconstruction error against the disclosed adjacency.

    ``full-matrix`` sums over all ``n * n`` entries with undisclosed pairs as 0.
    ``known-pairs`` sums, over both orderings, only the disclosed edges and the
    given known non-edges.
    """
    a_rec = as_dense(a_rec, "reconstruction")
    if a_star.shape != a_rec.shape:
        raise ShapeError(f"A* {a_star.shape} and reconstruction {a_rec.shape} differ in shape")
    target = a_star.to_dense()
    if mask_mode == "full-matrix":
        return float(np.sum((target - a_rec) ** 2))
    if mask_mode != "known-pairs":
        raise ConfigError(f"unknown loss mask {mask_mode!r}")
    pairs, targets = _known_pairs(a_star, known_non_edges)
    diff = targets - a_rec[pairs[:, 0], pairs[:, 1]]
    return float(2.0 * np.sum(diff * diff))


def _known_pairs(a_star, known_non_edges):
    rows = a_star.row_indices()
    upper = rows < a_star.indices
    edges = np.stack([rows[upper], a_star.indices[upper]], axis=1)
    non = np.zeros((0, 2), dtype=np.int64) if known_non_edges is None else \
        np.asarray(known_non_edges, dtype=np.int64).reshape(-1, 2)
    pairs = np.ascontiguousarray(np.concatenate([edges, non]), dtype=np.int64)
    targets = np.concatenate([a_star.data[upper], np.zeros(non.shape[0])])
    return pairs, targets


def decoder_loss_and_grad(w, u, a_star, mask_mode="full-matrix", known_pairs=None):
    """Loss and gradient with respect to ``W_a`` given ``u = norm(A*) H``."""
    z = gemm(u, w)
    if mask_mode == "full-matrix":
        loss, dz = _full_loss_grad(z, a_star.indptr, a_star.indices, a_star.data)
    else:
        pairs, targets = known_pairs
        loss, dz = _pair_loss_grad(z, pairs, targets)
    return loss, gemm(np.ascontiguousarray(u.T), dz)


class GraphReconstructionAttack(BaseEstimator):
    """Decoder-only reconstruction of a graph from leaked node representations.

    Parameters
    ----------
    decoder_dim : int
        Width of the decoder embedding ``Z``.
    epochs, learning_rate : int, float
        Adam schedule for ``W_a``.
    loss_mask : {"full-matrix", "known-pairs"}
        Which entries of the disclosed adjacency the loss compares against.
    random_state : int
        Seed for the Glorot initialization of ``W_a``.
    """

    def __init__(self, decoder_dim=16, epochs=300, learning_rate=0.01,
                 loss_mask="full-matrix", random_state=0):
        self.decoder_dim = decoder_dim
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.loss_mask = loss_mask
        self.random_state = random_state

    @classmethod
    def from_config(cls, config):
        return cls(decoder_dim=config.decoder_dim, epochs=config.epochs,
                   learning_rate=config.learning_rate, loss_mask=config.loss_mask,
                   random_state=config.seed)

    def fit(self, H, partial_adjacency, known_non_edges=None):
        """Fit ``W_a`` on representations ``H`` and the disclosed adjacency ``A*``."""
        AttackConfig(self.epochs, self.learning_rate, self.loss_mask, self.decoder_dim,
                     self.random_state)
        h = _matrix(H)
        if not isinstance(partial_adjacency, CSRMatrix):
            partial_adjacency = CSRMatrix.from_dense(partial_adjacency)
        n = h.shape[0]
        if partial_adjacency.shape != (n, n):
            raise ShapeError(f"A* has shape {partial_adjacency.shape}, expected {(n, n)}")
        if self.loss_mask == "known-pairs" and known_non_edges is None:
            raise ConfigError("known-pairs loss needs known_non_edges")
        u = spmm(gcn_normalize(partial_adjacency), h)
        known = _known_pairs(partial_adjacency, known_non_edges) \
            if self.loss_mask == "known-pairs" else None
        rng = _random.stream(self.random_state, "decoder-init")
        w = glorot_uniform(rng, h.shape[1], int(self.decoder_dim))
        params = {"W_a": w}
        opt = Adam(self.learning_rate)
        losses = []
        for epoch in range(1, int(self.epochs) + 1):
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grad = decoder_loss_and_grad(params["W_a"], u, partial_adjacency,
                                                       self.loss_mask, known)
            except NonFiniteError as exc:
                raise TrainingError(f"decoder forward pass overflowed ({exc})",
                                    epoch=epoch) from exc
            if not np.isfinite(loss):
                raise TrainingError(f"decoder loss became {loss}", epoch=epoch)
            with np.errstate(over="ignore", invalid="ignore"):
                opt.step(params, {"W_a": grad})
            if not np.all(np.isfinite(params["W_a"])):
                raise TrainingError("decoder weights diverged", epoch=epoch)
            losses.append(float(loss))
        self.coef_ = params["W_a"]
        self.loss_curve_ = losses
        self.n_features_in_ = h.shape[1]
        self.embedding_ = gemm(u, self.coef_)
        return self

    @property
    def params_(self):
        check_is_fitted(self, "coef_")
        return DecoderParams(self.coef_)

    def decision_function(self, pairs):
        """Inner products ``z_u . z_v`` for each row ``(u, v)`` of ``pairs``."""
        check_is_fitted(self, "coef_")
        pairs = np.ascontiguousarray(np.asarray(pairs, dtype=np.int64).reshape(-1, 2))
        n = self.embedding_.shape[0]
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            raise ShapeError("pair index out of range")
        return _pair_logits(self.embedding_, pairs)

    def predict_proba(self, pairs):
        return logistic(self.decision_function(pairs))

    def reconstruct(self):
        """Dense ``A_rec``; only for graphs up to ``DENSE_LIMIT`` nodes."""
        check_is_fitted(self, "coef_")
        z = self.embedding_
        if z.shape[0] > DENSE_LIMIT:
            raise EvaluationError(
                f"dense reconstruction limited to {DENSE_LIMIT} nodes; score pairs instead")
        return logistic(gemm(z, np.ascontiguousarray(z.T)))

    def score(self, pairs, labels):
        """AUC of the attack on labelled pairs."""
        return auc(self.decision_function(pairs), labels)


def train_decoder(h, a_star, config=None, known_non_edges=None):
    config = config or AttackConfig()
    attack = GraphReconstructionAttack.from_config(config)
    attack.fit(h, a_star, known_non_edges)
    return attack.params_, attack


def score_pairs(attack, split):
    """Score confidential edges (label 1) and evaluation negatives (label 0)."""
    if split.confidential.shape[0] == 0:
        raise EvaluationError("no confidential edges to evaluate (known fraction is 1.0?)")
    pairs = np.concatenate([split.confidential, split.negatives]).astype(np.int64)
    labels = np.concatenate([np.ones(split.confidential.shape[0], dtype=np.int64),
                             np.zeros(split.negatives.shape[0], dtype=np.int64)])
    logits = attack.decision_function(pairs)
    # float64 rounds the logistic to exactly 0 or 1 past |logit| ~ 37
    scores = np.clip(logistic(logits), _TINY, 1.0 - np.finfo(np.float64).epsneg)
    return PairScores(pairs, scores, labels, logits)
