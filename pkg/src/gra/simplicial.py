"""Clique complexes, signed boundary matrices, and Hodge Laplacians (dimension <= 2)."""

import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ConsistencyError, DimensionError, ShapeError
from .linalg import CSRMatrix, as_dense, csr_transpose, spgemm, spmm, sparse_add

MAX_DIM = 2


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Simplices per dimension as ``(count, d + 1)`` arrays of increasing vertex ids.

    Rows are unique and sorted lexicographically, so a simplex's row number is
    its index within its dimension.
    """

    simplices: tuple
    n_vertices: int

    @property
    def max_dim(self):
        return len(self.simplices) - 1

    def count(self, d):
        return int(self.simplices[d].shape[0]) if d <= self.max_dim else 0

    def index_of(self, d):
        """Map from simplex tuple to its position in dimension ``d``."""
        return {tuple(s): i for i, s in enumerate(self.simplices[d].tolist())}

    def stats(self):
        return {f"K{d}": self.count(d) for d in range(self.max_dim + 1)}

    def stats_json(self):
        return json.dumps(self.stats(), sort_keys=True)


@dataclass(frozen=True, eq=False)
class BoundaryMatrix:
    dimension: int
    matrix: CSRMatrix


@dataclass(frozen=True, eq=False)
class HodgeLaplacian:
    dimension: int
    matrix: CSRMatrix
    up: CSRMatrix
    down: CSRMatrix


def triangles(g):
    """List the triangles of ``g`` as sorted vertex triples in lexicographic order.

    Edges are oriented from lower to higher (degree, id) rank and each oriented
    edge intersects the out-neighbourhoods of its endpoints, so every triangle
    is found exactly once.
    """
    deg = g.degrees()
    rank = np.empty(g.n_nodes, dtype=np.int64)
    rank[np.lexsort((np.arange(g.n_nodes), deg))] = np.arange(g.n_nodes)
    out = [set() for _ in range(g.n_nodes)]
    for u, v in g.edges.tolist():
        if rank[u] < rank[v]:
            out[u].add(v)
        else:
            out[v].add(u)
    found = []
    for u in range(g.n_nodes):
        for v in out[u]:
            for w in out[u] & out[v]:
                found.append(sorted((u, v, w)))
    if not found:
        return np.zeros((0, 3), dtype=np.int64)
    tri = np.asarray(found, dtype=np.int64)
    return tri[np.lexsort(tri.T[::-1])]


def clique_complex(g, max_dim=2):
    """Clique complex of ``g`` truncated at ``max_dim`` (0, 1 or 2)."""
    if max_dim not in (0, 1, 2):
        raise DimensionError(f"max_dim must be 0, 1 or 2, got {max_dim}")
    levels = [np.arange(g.n_nodes, dtype=np.int64).reshape(-1, 1)]
    if max_dim >= 1:
        levels.append(np.asarray(g.edges, dtype=np.int64).reshape(-1, 2))
    if max_dim >= 2:
        levels.append(triangles(g))
    for arr in levels:
        arr.setflags(write=False)
    return SimplicialComplex(tuple(levels), g.n_nodes)


def boundary_matrix(k, d):
    """Signed incidence matrix from d-simplices to (d-1)-faces.

    Column of ``[v0, ..., vd]`` holds ``(-1)**i`` at the face omitting ``vi``.
    """
    if d < 1 or d > k.max_dim:
        raise DimensionError(f"boundary of dimension {d} needs a complex with max_dim >= {d}")
    faces = k.index_of(d - 1)
    simplices = k.simplices[d]
    n_cols = simplices.shape[0]
    rows = np.empty((n_cols, d + 1), dtype=np.int64)
    for col, sigma in enumerate(simplices.tolist()):
        for i in range(d + 1):
            face = tuple(sigma[:i] + sigma[i + 1:])
            try:
                rows[col, i] = faces[face]
            except KeyError:
                raise ConsistencyError(
                    f"face {face} of simplex {tuple(sigma)} is missing from the complex"
                ) from None
    signs = np.tile((-1.0) ** np.arange(d + 1), n_cols)
    cols = np.repeat(np.arange(n_cols, dtype=np.int64), d + 1)
    mat = CSRMatrix.from_coo(rows.ravel(), cols, signs, (k.count(d - 1), n_cols))
    return BoundaryMatrix(d, mat)


def hodge_laplacian(k, d):
    """``L_d = B_{d+1} B_{d+1}^T + B_d^T B_d`` with ``B_0`` the zero map."""
    if d < 0 or d + 1 > k.max_dim:
        raise DimensionError(
            f"L_{d} needs the complex built with max_dim >= {d + 1}, got {k.max_dim}")
    n = k.count(d)
    b_up = boundary_matrix(k, d + 1).matrix
    up = spgemm(b_up, csr_transpose(b_up))
    if d == 0:
        down = CSRMatrix.empty((n, n))
    else:
        b_down = boundary_matrix(k, d).matrix
        down = spgemm(csr_transpose(b_down), b_down)
    return HodgeLaplacian(d, sparse_add(up, down), up, down)


def lift_operator(b1):
    """Sparse ``|B_1|^T / 2``: maps node signals to edge midpoints."""
    _check_b1(b1)
    t = csr_transpose(b1.matrix)
    return t.with_data(0.5 * np.abs(t.data))


def projection_operator(b1):
    """Sparse ``D^-1 |B_1|``: averages incident-edge signals onto nodes."""
    _check_b1(b1)
    m = b1.matrix
    deg = np.diff(m.indptr).astype(np.float64)
    rows = m.row_indices()
    return m.with_data(np.abs(m.data) / deg[rows])


def lift_to_edges(b1, x):
    """Edge ``(u, v)`` receives ``(x[u] + x[v]) / 2``."""
    x = as_dense(x, "node features")
    if x.shape[0] != b1.matrix.shape[0]:
        raise ShapeError(f"expected {b1.matrix.shape[0]} node rows, got {x.shape[0]}")
    return spmm(lift_operator(b1), x)


def project_to_nodes(b1, y):
    """Node ``u`` receives the mean of its incident edge rows; isolated nodes get zeros."""
    y = as_dense(y, "edge features")
    if y.shape[0] != b1.matrix.shape[1]:
        raise ShapeError(f"expected {b1.matrix.shape[1]} edge rows, got {y.shape[0]}")
    return spmm(projection_operator(b1), y)


def _check_b1(b1):
    if b1.dimension != 1:
        raise DimensionError(f"expected the node-edge boundary, got dimension {b1.dimension}")
