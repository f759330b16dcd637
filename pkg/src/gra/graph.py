"""Undirected graphs, dataset bundles, and the known/confidential edge split."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _random
from .exceptions import ConsistencyError, EmptySplitError, SamplingError
from .linalg import CSRMatrix, add_identity, as_dense, sym_normalize


def _canonical_pairs(pairs, n_nodes):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n_nodes):
        raise ConsistencyError(f"edge endpoint out of range for {n_nodes} nodes")
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keep = lo != hi
    pairs = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
    return pairs.reshape(-1, 2), int((~keep).sum())


def pair_codes(pairs, n_nodes):
    """Encode unordered pairs ``u < v`` as single integers ``u * n + v``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return lo * n_nodes + hi


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph.

    ``edges`` is an ``(m, 2)`` array of pairs ``u < v`` in lexicographic order;
    ``adjacency`` is the matching symmetric 0/1 matrix.
    """

    n_nodes: int
    edges: np.ndarray
    adjacency: CSRMatrix = field(repr=False)
    self_loops_dropped: int = 0

    @classmethod
    def from_edges(cls, n_nodes, pairs):
        """Build from any pair list; reversed and repeated pairs coalesce, self-loops drop."""
        edges, loops = _canonical_pairs(pairs, n_nodes)
        edges.setflags(write=False)
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        adj = CSRMatrix.from_coo(rows, cols, np.ones(rows.size), (n_nodes, n_nodes))
        return cls(int(n_nodes), edges, adj, loops)

    @property
    def n_edges(self):
        return int(self.edges.shape[0])

    def degrees(self):
        return np.diff(self.adjacency.indptr)

    def neighbors(self, u):
        a = self.adjacency
        return a.indices[a.indptr[u]:a.indptr[u + 1]]

    def has_edge(self, u, v):
        return self.adjacency.get(u, v) != 0.0

    def edge_codes(self):
        return pair_codes(self.edges, self.n_nodes)

    def permute(self, perm):
        """Relabel node ``i`` as ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        return Graph.from_edges(self.n_nodes, perm[self.edges])


@dataclass(frozen=True, eq=False)
class DatasetBundle:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    name: str = "dataset"
    node_ids: tuple = None
    class_names: tuple = None

    def __post_init__(self):
        n = self.graph.n_nodes
        features = as_dense(self.features, "features")
        if features.shape[0] != n:
            raise ConsistencyError(
                f"feature rows ({features.shape[0]}) do not match node count ({n})")
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (n,) or (n and labels.min() < 0):
            raise ConsistencyError("labels must be one non-negative integer per node")
        train = np.asarray(self.train_mask, dtype=bool)
        val = np.asarray(self.val_mask, dtype=bool)
        if train.shape != (n,) or val.shape != (n,):
            raise ConsistencyError("masks must have one entry per node")
        if np.any(train & val):
            raise ConsistencyError("train and validation masks overlap")
        for arr in (features, labels, train, val):
            arr.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "train_mask", train)
        object.__setattr__(self, "val_mask", val)

    @property
    def n_classes(self):
        return int(self.labels.max()) + 1 if self.labels.size else 0


@dataclass(frozen=True, eq=False)
class EdgeSplit:
    """Attacker prior knowledge: disclosed edges, held-out edges, and eval negatives."""

    known: np.ndarray
    confidential: np.ndarray
    negatives: np.ndarray
    seed: int
    known_fraction: float


def stratified_masks(labels, train_per_class=20, val_size=500, seed=0):
    """Pick ``train_per_class`` nodes per class, then ``val_size`` of the rest."""
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.size
    rng = _random.stream(seed, "masks")
    train = np.zeros(n, dtype=bool)
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        take = min(train_per_class, members.size)
        train[rng.choice(members, size=take, replace=False)] = True
    rest = np.flatnonzero(~train)
    val = np.zeros(n, dtype=bool)
    val[rng.permutation(rest)[:min(val_size, rest.size)]] = True
    return train, val


def erdos_renyi(n, p, seed):
    """G(n, p): each unordered pair independently present with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    iu, ju = np.triu_indices(n, k=1)
    draws = _random.stream(seed, "generator").random(iu.size)
    keep = draws < p
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))


def planted_partition(n, n_classes, p_in, p_out, seed):
    """Stochastic block model with near-equal blocks; returns ``(graph, labels)``."""
    labels = np.arange(n) % n_classes
    labels = _random.stream(seed, "generator").permutation(labels)
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, p_in, p_out)
    draws = _random.stream(seed, "generator-edges").random(iu.size)
    keep = draws < prob
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1)), labels


def _sample_non_edges(g, count, rng, exclude_codes=()):
    n = g.n_nodes
    forbidden = set(g.edge_codes().tolist())
    forbidden.update(int(c) for c in exclude_codes)
    available = n * (n - 1) // 2 - len(forbidden)
    if count > available:
        raise SamplingError(
            f"need {count} non-adjacent pairs but only {available} are available")
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if count * 4 > available:
        # dense regime: enumerate and choose without replacement
        iu, ju = np.triu_indices(n, k=1)
        codes = iu * n + ju
        mask = ~np.isin(codes, np.fromiter(forbidden, dtype=np.int64, count=len(forbidden)))
        choice = rng.choice(np.flatnonzero(mask), size=count, replace=False)
        return np.stack([iu[choice], ju[choice]], axis=1)
    chosen = []
    seen = set()
    while len(chosen) < count:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        if u > v:
            u, v = v, u
        code = int(u) * n + int(v)
        if code in forbidden or code in seen:
            continue
        seen.add(code)
        chosen.append((int(u), int(v)))
    return np.asarray(chosen, dtype=np.int64)


def split_edges(g, known_fraction=0.8, seed=0):
    """Partition edges into disclosed and confidential sets and draw balanced negatives."""
    if not 0.0 < known_fraction <= 1.0:
        raise ValueError(f"known_fraction must lie in (0, 1], got {known_fraction}")
    m = g.n_edges
    if m == 0:
        raise EmptySplitError("graph has no edges to split")
    n_known = min(m, math.ceil(round(known_fraction * m, 9)))
    order = _random.stream(seed, "split").permutation(m)
    known = g.edges[np.sort(order[:n_known])]
    confidential = g.edges[np.sort(order[n_known:])]
    negatives = _sample_non_edges(g, confidential.shape[0], _random.stream(seed, "negatives"))
    return EdgeSplit(known, confidential, negatives, int(seed), float(known_fraction))


def sample_known_non_edges(g, split, count, seed=0):
    """Non-edges whose status the adversary is assumed to know; never eval negatives."""
    return _sample_non_edges(g, count, _random.stream(seed, "decoder"),
                             exclude_codes=pair_codes(split.negatives, g.n_nodes))


def build_partial_adjacency(g, split):
    """Symmetric 0/1 adjacency holding only the disclosed edges."""
    return Graph.from_edges(g.n_nodes, split.known).adjacency


def gcn_normalize(a):
    """``D^-1/2 (A + I) D^-1/2`` with ``D`` the degree matrix of ``A + I``."""
    a_tilde = add_identity(a)
    return sym_normalize(a_tilde, a_tilde.row_sums())
