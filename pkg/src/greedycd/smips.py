"""Subset maximum inner product search: augmented point sets that turn the
steepest-coordinate scores into plain inner products, candidate masks that
track the live sign/feasibility cases of the iterate, and exact plus
hyperplane-LSH query backends.

Point layout is fixed so queries are O(dim) regardless of mapping:
L1 points are (s*beta, beta*c_j, A_j) with the two augmented slots first,
box points are (beta, A_j), and the L2 mapping prepends beta*e_j.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "AugmentedPointSet", "SubsetMask", "Exact", "HyperplaneLsh",
    "build_l1_points", "build_l1_query", "build_l1_mask",
    "build_box_points", "build_box_query", "build_box_mask",
    "build_l2_points", "build_l2_query",
    "update_mask_after_step", "smips_query", "point_to_coordinate",
    "require_uniform_linear_term",
]

# per-coordinate point tags, in storage order
L1_TAGS = ("+A+", "-A+", "+A-", "-A-")
BOX_TAGS = ("+A", "-A")


@dataclass
class AugmentedPointSet:
    points: object            # (m, dim) ndarray, or CSR matrix for "l2"
    coord_of: np.ndarray      # point id -> data column
    tag_of: tuple             # point id -> construction tag
    beta: float
    mapping_kind: str         # "l1" | "box" | "l2"

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def dots(self, ids, q):
        """Inner products of the selected points with q."""
        if sp.issparse(self.points):
            return np.asarray(self.points[ids] @ q).ravel()
        return self.points[ids] @ q


@dataclass
class SubsetMask:
    included: np.ndarray
    kind: str

    @property
    def count(self):
        return int(self.included.sum())


@dataclass(frozen=True)
class Exact:
    pass


def _dense_cols(M):
    out = np.zeros((M.n_cols, M.n_rows))
    for j in range(M.n_cols):
        ridx, vals = M.col(j)
        out[j, ridx] = vals
    return out


def build_l1_points(A, c, beta):
    """4n points {+-(s*beta, beta*c_j, A_j) : s in {+,-}}, dimension d+2."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    c = np.asarray(c, dtype=np.float64)
    if len(c) != A.n_cols:
        raise ValueError("need one linear-term entry per column")
    n, d = A.n_cols, A.n_rows
    cols = _dense_cols(A)
    pts = np.empty((4 * n, d + 2))
    base = np.empty((n, d + 2))
    base[:, 0] = beta
    base[:, 1] = beta * c
    base[:, 2:] = cols
    pts[0::4] = base                       # +A~+
    pts[1::4] = -base                      # -A~+
    base[:, 0] = -beta                     # now A~-
    pts[2::4] = base                       # +A~-
    pts[3::4] = -base                      # -A~-
    coord_of = np.repeat(np.arange(n), 4)
    tag_of = tuple(L1_TAGS[i % 4] for i in range(4 * n))
    return AugmentedPointSet(pts, coord_of, tag_of, beta, "l1")


def build_l1_query(gl, lam, beta):
    """q = (lam/beta, 1/beta, grad_l(v)); <A~_j^sign, q> = grad_j f + sign*lam."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return np.concatenate(([lam / beta, 1.0 / beta], gl))


def _l1_pattern(a):
    """Which of the coordinate's 4 points are live for value a: always 2."""
    if a > 0:
        return (True, True, False, False)    # +A~+, -A~+
    if a < 0:
        return (False, False, True, True)    # +A~-, -A~-
    return (False, True, True, False)        # -A~+, +A~-


def build_l1_mask(alpha):
    alpha = np.asarray(alpha)
    n = len(alpha)
    inc = np.empty(4 * n, dtype=bool)
    inc[0::4] = alpha > 0
    inc[1::4] = alpha >= 0
    inc[2::4] = alpha <= 0
    inc[3::4] = alpha < 0
    return SubsetMask(included=inc, kind="l1")


def build_box_points(A, c, beta):
    """2n points +-(beta, A_j), dimension d+1."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    n, d = A.n_cols, A.n_rows
    base = np.empty((n, d + 1))
    base[:, 0] = beta
    base[:, 1:] = _dense_cols(A)
    pts = np.empty((2 * n, d + 1))
    pts[0::2] = base
    pts[1::2] = -base
    coord_of = np.repeat(np.arange(n), 2)
    tag_of = tuple(BOX_TAGS[i % 2] for i in range(2 * n))
    return AugmentedPointSet(pts, coord_of, tag_of, beta, "box")


def require_uniform_linear_term(c):
    """The box query has a single slot for c; all entries must agree."""
    c = np.asarray(c)
    if len(c) and np.ptp(c) != 0:
        raise ValueError(
            "box-constrained inner-product mapping needs a uniform linear "
            "term; per-coordinate terms are not representable in the query")
    return float(c[0]) if len(c) else 0.0


def build_box_query(gl, c_value, beta):
    """q = (c/beta, grad_l(v)); then <A~_j, q> = grad_j f for uniform c."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return np.concatenate(([c_value / beta], gl))


def build_box_mask(alpha):
    alpha = np.asarray(alpha)
    inc = np.empty(2 * len(alpha), dtype=bool)
    inc[0::2] = alpha > 0
    inc[1::2] = alpha < 1
    return SubsetMask(included=inc, kind="box")


def build_l2_points(A, beta):
    """2n sparse points +-(beta*e_j, A_j) of dimension n+d."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    n, d = A.n_cols, A.n_rows
    rows, cols, vals = [], [], []
    for j in range(n):
        ridx, v = A.col(j)
        pid = 2 * j
        rows.extend([pid] * (1 + len(ridx)))
        cols.extend([j] + list(n + ridx))
        vals.extend([beta] + list(v))
        rows.extend([pid + 1] * (1 + len(ridx)))
        cols.extend([j] + list(n + ridx))
        vals.extend([-beta] + list(-v))
    pts = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, n + d))
    coord_of = np.repeat(np.arange(n), 2)
    tag_of = tuple(BOX_TAGS[i % 2] for i in range(2 * n))
    return AugmentedPointSet(pts, coord_of, tag_of, beta, "l2")


def build_l2_query(alpha, gl, lam, beta):
    """q = ((lam/beta)*alpha, grad_l); <A~_j, q> = <A_j, grad_l> + lam*alpha_j."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return np.concatenate((lam / beta * np.asarray(alpha), gl))


def update_mask_after_step(m, j, old_val, new_val):
    """Refresh the (at most 4) mask bits of coordinate j after a step."""
    if m.kind == "l1":
        m.included[4 * j:4 * j + 4] = _l1_pattern(new_val)
    elif m.kind == "box":
        m.included[2 * j] = new_val > 0
        m.included[2 * j + 1] = new_val < 1
    else:
        raise ValueError("no mask maintenance for kind %r" % m.kind)


def point_to_coordinate(ps, pid):
    if not 0 <= pid < ps.n_points:
        raise IndexError("point id %d out of range" % pid)
    return int(ps.coord_of[pid]), ps.tag_of[pid]


def _pack_bits(bits):
    return np.packbits(bits, axis=-1).tobytes()


@dataclass
class HyperplaneLsh:
    """Sign-random-projection hashing: n_tables tables of bits_per_table bits.

    Candidates are gathered from the query's buckets and filtered by the
    mask afterwards (masks change every iteration, so tables are static).
    """
    bits_per_table: int
    n_tables: int
    seed: int = 0
    fallback: str = "random"  # "random" | "exact"

    _planes: list = field(default=None, repr=False)
    _tables: list = field(default=None, repr=False)
    _fitted_for: object = field(default=None, repr=False)
    _rng: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.bits_per_table < 1 or self.n_tables < 1:
            raise ValueError("need at least one bit and one table")
        if self.fallback not in ("random", "exact"):
            raise ValueError("fallback must be 'random' or 'exact'")

    def fit(self, ps):
        rng = np.random.default_rng(self.seed)
        self._planes, self._tables = [], []
        for _ in range(self.n_tables):
            planes = rng.standard_normal((self.bits_per_table, ps.dim))
            if sp.issparse(ps.points):
                sigs = np.asarray((ps.points @ planes.T)) >= 0
            else:
                sigs = (ps.points @ planes.T) >= 0
            buckets = {}
            for pid in range(ps.n_points):
                key = _pack_bits(sigs[pid])
                buckets.setdefault(key, []).append(pid)
            self._planes.append(planes)
            self._tables.append({k: np.array(v) for k, v in buckets.items()})
        self._fitted_for = ps
        self._rng = np.random.default_rng(self.seed + 1)

    def candidates(self, q):
        found = []
        for planes, buckets in zip(self._planes, self._tables):
            key = _pack_bits(planes @ q >= 0)
            hit = buckets.get(key)
            if hit is not None:
                found.append(hit)
        if not found:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(found))


def _exact_query(ps, q, m):
    ids = np.nonzero(m.included)[0]
    vals = ps.dots(ids, q)
    k = int(np.argmax(vals))
    return int(ids[k]), float(vals[k])


def smips_query(ps, q, m, backend):
    """Best included point by inner product with q.

    Returns (point id, value, fell_back). The exact backend scans the mask;
    the LSH backend unions its buckets, filters by the mask, and falls back
    (exact scan or random included point) when no candidate survives.
    """
    if m.count < 1:
        raise ValueError("empty candidate mask")
    if len(q) != ps.dim:
        raise ValueError("query dimension %d != point dimension %d"
                         % (len(q), ps.dim))
    if isinstance(backend, Exact):
        pid, val = _exact_query(ps, q, m)
        return pid, val, False
    if isinstance(backend, HyperplaneLsh):
        if backend._fitted_for is not ps:
            backend.fit(ps)
        cand = backend.candidates(q)
        cand = cand[m.included[cand]]
        if len(cand) == 0:
            if backend.fallback == "exact":
                pid, val = _exact_query(ps, q, m)
                return pid, val, True
            pid = int(backend._rng.choice(np.nonzero(m.included)[0]))
            return pid, float(ps.dots(np.array([pid]), q)[0]), True
        vals = ps.dots(cand, q)
        k = int(np.argmax(vals))
        return int(cand[k]), float(vals[k]), False
    raise TypeError("unknown backend: %r" % (backend,))


class L2QueryHasher:
    """Incremental per-plane partial sums for the L2 mapping's query hashes.

    The first n query slots are (lam/beta)*alpha, which changes in a single
    entry per step; the cached plane dot products are updated in O(1) per
    plane and only the loss-gradient part is recomputed per query.
    """

    def __init__(self, backend, ps, n, lam):
        if backend._fitted_for is not ps:
            backend.fit(ps)
        self.n = n
        self.scale = lam / ps.beta
        self.planes = backend._planes
        self.partials = [np.zeros(p.shape[0]) for p in self.planes]

    def note_step(self, j, old_val, new_val):
        for planes, part in zip(self.planes, self.partials):
            part += planes[:, j] * (self.scale * (new_val - old_val))

    def keys(self, gl):
        out = []
        for planes, part in zip(self.planes, self.partials):
            out.append(_pack_bits(part + planes[:, self.n:] @ gl >= 0))
        return out
