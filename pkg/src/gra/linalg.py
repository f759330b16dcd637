"""Dense and compressed-row sparse kernels.

Dense matrices are plain C-contiguous ``float64`` numpy arrays. Sparse
matrices are :class:`CSRMatrix` instances. Every product kernel accumulates
each output entry over the inner index in ascending order, in a single thread,
so results are bitwise reproducible and ``spmm(s, d)`` is bitwise equal to
``gemm(s.to_dense(), d)``.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import DegenerateNormalizationError, NonFiniteError, ShapeError


@njit(cache=True)
def _gemm_kernel(a, b):
    n, m = a.shape
    p = b.shape[1]
    out = np.zeros((n, p))
    for i in range(n):
        for k in range(m):
            aik = a[i, k]
            for j in range(p):
                out[i, j] += aik * b[k, j]
    return out


@njit(cache=True)
def _spmm_kernel(indptr, indices, data, d):
    n = indptr.shape[0] - 1
    p = d.shape[1]
    out = np.zeros((n, p))
    for i in range(n):
        for q in range(indptr[i], indptr[i + 1]):
            k = indices[q]
            v = data[q]
            for j in range(p):
                out[i, j] += v * d[k, j]
    return out


def as_dense(x, name="matrix"):
    """Validate and return ``x`` as a finite, C-contiguous float64 2-d array."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class CSRMatrix:
    """Immutable compressed-row sparse matrix.

    Column indices are strictly increasing within each row (so duplicates are
    impossible). Use :meth:`from_coo` to assemble from unsorted triplets;
    duplicates are coalesced by summation there.
    """

    shape: tuple
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        rows, cols = (int(s) for s in self.shape)
        object.__setattr__(self, "shape", (rows, cols))
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if rows < 0 or cols < 0:
            raise ShapeError(f"negative shape {self.shape}")
        if indptr.shape != (rows + 1,):
            raise ShapeError(f"indptr must have length rows+1={rows + 1}, got {indptr.shape}")
        if indptr[0] != 0 or np.any(np.diff(indptr) < 0):
            raise ValueError("indptr must start at 0 and be non-decreasing")
        nnz = int(indptr[-1])
        if indices.shape != (nnz,) or data.shape != (nnz,):
            raise ShapeError("indices/data length must equal the last row offset")
        if nnz:
            if indices.min() < 0 or indices.max() >= cols:
                raise ValueError("column index out of range")
            step = np.diff(indices)
            row_start = np.zeros(nnz, dtype=bool)
            row_start[indptr[1:-1][indptr[1:-1] < nnz]] = True
            if np.any((step <= 0) & ~row_start[1:]):
                raise ValueError("column indices must be strictly increasing within each row")
            if not np.all(np.isfinite(data)):
                raise NonFiniteError("sparse values must be finite")
        for arr in (indptr, indices, data):
            arr.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "data", data)

    # construction

    @classmethod
    def from_coo(cls, rows, cols, values, shape, drop_zeros=False):
        """Assemble from triplets, summing duplicates in a fixed order."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == values.shape):
            raise ShapeError("rows, cols and values must have equal length")
        n_rows, n_cols = shape
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows
                          or cols.min() < 0 or cols.max() >= n_cols):
            raise ValueError("triplet index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size:
            first = np.ones(rows.size, dtype=bool)
            first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(first)
            values = np.add.reduceat(values, starts)
            rows, cols = rows[starts], cols[starts]
        if drop_zeros:
            keep = values != 0.0
            rows, cols, values = rows[keep], cols[keep], values[keep]
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
        return cls((n_rows, n_cols), indptr, cols, values)

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2:
            raise ShapeError(f"expected a 2-d array, got shape {dense.shape}")
        rows, cols = np.nonzero(dense)
        return cls.from_coo(rows, cols, dense[rows, cols], dense.shape)

    @classmethod
    def identity(cls, n, scale=1.0):
        idx = np.arange(n, dtype=np.int64)
        return cls((n, n), np.arange(n + 1), idx, np.full(n, float(scale)))

    @classmethod
    def diag(cls, values):
        values = np.asarray(values, dtype=np.float64)
        n = values.size
        return cls((n, n), np.arange(n + 1), np.arange(n), values)

    @classmethod
    def empty(cls, shape):
        return cls(shape, np.zeros(shape[0] + 1, dtype=np.int64), [], [])

    # views

    @property
    def nnz(self):
        return int(self.indptr[-1])

    @property
    def T(self):
        return csr_transpose(self)

    def row_indices(self):
        """Row index of every stored entry, in storage order."""
        return np.repeat(np.arange(self.shape[0], dtype=np.int64), np.diff(self.indptr))

    def to_coo(self):
        return self.row_indices(), self.indices.copy(), self.data.copy()

    def to_dense(self):
        out = np.zeros(self.shape)
        out[self.row_indices(), self.indices] = self.data
        return out

    def with_data(self, data):
        """Same sparsity pattern, new values."""
        return CSRMatrix(self.shape, self.indptr, self.indices, data)

    def abs(self):
        return self.with_data(np.abs(self.data))

    def row_sums(self):
        return np.bincount(self.row_indices(), weights=self.data, minlength=self.shape[0])

    def get(self, i, j):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        pos = lo + np.searchsorted(self.indices[lo:hi], j)
        if pos < hi and self.indices[pos] == j:
            return float(self.data[pos])
        return 0.0

    def __matmul__(self, other):
        if isinstance(other, CSRMatrix):
            return spgemm(self, other)
        return spmm(self, other)

    def __repr__(self):
        return f"CSRMatrix(shape={self.shape}, nnz={self.nnz})"


def densify(s):
    return s.to_dense()


def gemm(a, b):
    """Dense product with a fixed ascending inner-index accumulation order."""
    a = as_dense(a, "left operand")
    b = as_dense(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return _gemm_kernel(a, b)


def spmm(s, d):
    """Sparse-times-dense product; bitwise equal to ``gemm(s.to_dense(), d)``."""
    d = as_dense(d, "dense operand")
    if s.shape[1] != d.shape[0]:
        raise ShapeError(f"cannot multiply sparse {s.shape} by dense {d.shape}")
    return _spmm_kernel(s.indptr, s.indices, s.data, d)


def csr_transpose(s):
    rows = s.row_indices()
    # stable sort by column keeps rows ascending inside each output row
    order = np.argsort(s.indices, kind="stable")
    n_rows, n_cols = s.shape
    indptr = np.zeros(n_cols + 1, dtype=np.int64)
    np.cumsum(np.bincount(s.indices, minlength=n_cols), out=indptr[1:])
    return CSRMatrix((n_cols, n_rows), indptr, rows[order], s.data[order])


def spgemm(a, b, drop_zeros=True):
    """Sparse-times-sparse product assembled through coalesced triplets."""
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply sparse {a.shape} by sparse {b.shape}")
    b_counts = np.diff(b.indptr)
    counts = b_counts[a.indices]
    total = int(counts.sum())
    rows = np.repeat(a.row_indices(), counts)
    # position of every contributing b entry
    offsets = np.repeat(b.indptr[a.indices] - np.cumsum(counts) + counts, counts)
    pos = offsets + np.arange(total, dtype=np.int64)
    values = np.repeat(a.data, counts) * b.data[pos]
    return CSRMatrix.from_coo(rows, b.indices[pos], values, (a.shape[0], b.shape[1]),
                              drop_zeros=drop_zeros)


def sparse_add(a, b, drop_zeros=True):
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape}")
    ra, ca, va = a.to_coo()
    rb, cb, vb = b.to_coo()
    return CSRMatrix.from_coo(np.concatenate([ra, rb]), np.concatenate([ca, cb]),
                              np.concatenate([va, vb]), a.shape, drop_zeros=drop_zeros)


def add_identity(s, scale=1.0):
    if s.shape[0] != s.shape[1]:
        raise ShapeError(f"matrix must be square, got {s.shape}")
    return sparse_add(s, CSRMatrix.identity(s.shape[0], scale), drop_zeros=False)


def sym_normalize(s, diag):
    """Return the matrix with entries ``s[i, j] / sqrt(diag[i] * diag[j])``."""
    diag = np.asarray(diag, dtype=np.float64).ravel()
    if s.shape[0] != s.shape[1] or diag.size != s.shape[0]:
        raise ShapeError(f"diagonal of length {diag.size} does not fit matrix {s.shape}")
    if np.any(~(diag > 0)):
        bad = int(np.flatnonzero(~(diag > 0))[0])
        raise DegenerateNormalizationError(
            f"normalization entry {bad} is {diag[bad]!r}; all entries must be positive")
    rows = s.row_indices()
    return s.with_data(s.data / np.sqrt(diag[rows] * diag[s.indices]))


def is_symmetric(s):
    if s.shape[0] != s.shape[1]:
        return False
    t = csr_transpose(s)
    return (np.array_equal(s.indptr, t.indptr) and np.array_equal(s.indices, t.indices)
            and np.array_equal(s.data, t.data))
