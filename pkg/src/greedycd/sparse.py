"""Column-compressed sparse matrix kernels and the scalar shrinkage operator.

Everything downstream (coordinate gradients, residual maintenance, point-set
extraction) is a column access, so only column-major storage is provided.
Matrices are immutable after construction.
"""

import numpy as np

__all__ = ["SparseColMatrix", "shrink", "col_dot", "col_axpy"]


def shrink(x, lam):
    """Soft-threshold x by lam: x - sign(x)*lam if |x| >= lam, else 0."""
    if lam < 0:
        raise ValueError("shrink threshold must be nonnegative, got %r" % lam)
    if abs(x) >= lam:
        return x - np.sign(x) * lam
    return 0.0


class SparseColMatrix:
    """Immutable CSC-style matrix with cached per-column squared norms.

    Parameters
    ----------
    n_rows : int
        Number of rows (the ambient dimension of each column).
    col_starts : array of int, length n_cols + 1
        Offsets into row_indices/values; non-decreasing.
    row_indices : array of int
        Row ids per stored entry; strictly increasing within each column.
    values : array of float
        Stored entry values, aligned with row_indices.
    """

    def __init__(self, n_rows, col_starts, row_indices, values):
        col_starts = np.asarray(col_starts, dtype=np.int64)
        row_indices = np.asarray(row_indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)

        if col_starts.ndim != 1 or len(col_starts) < 1:
            raise ValueError("col_starts must be a 1-d array of length n_cols+1")
        if col_starts[0] != 0 or np.any(np.diff(col_starts) < 0):
            raise ValueError("col_starts must start at 0 and be non-decreasing")
        if col_starts[-1] != len(values) or len(values) != len(row_indices):
            raise ValueError("col_starts[-1] must equal the number of stored values")
        if len(row_indices) and (row_indices.min() < 0 or row_indices.max() >= n_rows):
            raise ValueError("row index out of range")
        for j in range(len(col_starts) - 1):
            lo, hi = col_starts[j], col_starts[j + 1]
            if hi - lo > 1 and np.any(np.diff(row_indices[lo:hi]) <= 0):
                raise ValueError("row indices in column %d not strictly increasing" % j)

        self.n_rows = int(n_rows)
        self.col_starts = col_starts
        self.row_indices = row_indices
        self.values = values
        self.col_sq_norms = np.add.reduceat(
            np.append(values**2, 0.0), col_starts[:-1]
        ) if len(col_starts) > 1 else np.zeros(0)
        # reduceat yields garbage for empty trailing columns; fix empties to 0
        empty = np.diff(col_starts) == 0
        if empty.any():
            self.col_sq_norms[empty] = 0.0

        for arr in (self.col_starts, self.row_indices, self.values,
                    self.col_sq_norms):
            arr.setflags(write=False)

    @property
    def n_cols(self):
        return len(self.col_starts) - 1

    @property
    def nnz(self):
        return len(self.values)

    def col(self, j):
        """Row ids and values of column j as (views into) the storage."""
        if not 0 <= j < self.n_cols:
            raise IndexError("column %d out of range [0, %d)" % (j, self.n_cols))
        lo, hi = self.col_starts[j], self.col_starts[j + 1]
        return self.row_indices[lo:hi], self.values[lo:hi]

    @classmethod
    def from_columns(cls, n_rows, columns):
        """Build from a list of (row_ids, values) pairs, one per column."""
        starts = [0]
        rows, vals = [], []
        for ridx, v in columns:
            ridx = np.asarray(ridx, dtype=np.int64)
            v = np.asarray(v, dtype=np.float64)
            order = np.argsort(ridx, kind="stable")
            rows.append(ridx[order])
            vals.append(v[order])
            starts.append(starts[-1] + len(ridx))
        rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        vals = np.concatenate(vals) if vals else np.zeros(0)
        return cls(n_rows, np.array(starts), rows, vals)

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        cols = []
        for j in range(arr.shape[1]):
            (ridx,) = np.nonzero(arr[:, j])
            cols.append((ridx, arr[ridx, j]))
        return cls.from_columns(arr.shape[0], cols)

    def to_dense(self):
        out = np.zeros((self.n_rows, self.n_cols))
        for j in range(self.n_cols):
            ridx, v = self.col(j)
            out[ridx, j] = v
        return out

    def scale_columns(self, scales):
        """New matrix with column j multiplied by scales[j]."""
        scales = np.asarray(scales, dtype=np.float64)
        if len(scales) != self.n_cols:
            raise ValueError("need one scale per column")
        reps = np.diff(self.col_starts)
        new_vals = self.values * np.repeat(scales, reps)
        return SparseColMatrix(self.n_rows, self.col_starts.copy(),
                               self.row_indices.copy(), new_vals)

    def transpose(self):
        """Row-compressed view of self, returned as a new column matrix."""
        cols = [[] for _ in range(self.n_rows)]
        for j in range(self.n_cols):
            ridx, v = self.col(j)
            for i, x in zip(ridx, v):
                cols[i].append((j, x))
        built = []
        for entries in cols:
            if entries:
                idx, vv = zip(*entries)
            else:
                idx, vv = (), ()
            built.append((np.array(idx, dtype=np.int64), np.array(vv)))
        return SparseColMatrix.from_columns(self.n_cols, built)

    def matvec_T(self, v):
        """A^T v, vectorized over all columns."""
        v = np.asarray(v, dtype=np.float64)
        if len(v) != self.n_rows:
            raise ValueError("length mismatch in matvec_T")
        if self.nnz == 0:
            return np.zeros(self.n_cols)
        prod = np.append(self.values * v[self.row_indices], 0.0)
        out = np.add.reduceat(prod, self.col_starts[:-1])
        empty = np.diff(self.col_starts) == 0
        if empty.any():
            out[empty] = 0.0
        return out


def col_dot(M, j, v):
    """Inner product of column j of M with dense vector v."""
    v = np.asarray(v)
    if len(v) != M.n_rows:
        raise ValueError("vector length %d != n_rows %d" % (len(v), M.n_rows))
    ridx, vals = M.col(j)
    return float(vals @ v[ridx])


def col_axpy(M, j, scale, v):
    """In-place v += scale * M[:, j], touching only the column's nonzeros."""
    if len(v) != M.n_rows:
        raise ValueError("vector length %d != n_rows %d" % (len(v), M.n_rows))
    if scale == 0.0:
        return
    ridx, vals = M.col(j)
    v[ridx] += scale * vals
