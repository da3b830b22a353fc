"""Shared builders for random problems and iterate states."""

import numpy as np
import pytest

from greedycd.objectives import (IterateState, make_elastic_net, make_lasso,
                                 make_logistic, make_svm_dual)
from greedycd.sparse import SparseColMatrix


def random_matrix(rng, d, n, density=0.7, normalize=False):
    A = rng.standard_normal((d, n)) * (rng.random((d, n)) < density)
    # keep every column nonzero so smoothness and point sets are well posed
    for j in range(n):
        if not A[:, j].any():
            A[rng.integers(d), j] = rng.standard_normal()
    if normalize:
        A /= np.linalg.norm(A, axis=0, keepdims=True)
    return SparseColMatrix.from_dense(A)


def random_problem(kind, rng, n=12, d=8, lam=0.05, lam2=0.03):
    """A small random instance of the requested problem kind."""
    if kind == "lasso":
        M = random_matrix(rng, d, n)
        return make_lasso(M, rng.standard_normal(d), lam)
    if kind == "elasticnet":
        M = random_matrix(rng, d, n)
        return make_elastic_net(M, rng.standard_normal(d), lam, lam2)
    if kind == "svm":
        labels = rng.choice([-1.0, 1.0], n)
        M = random_matrix(rng, d, n).scale_columns(labels)
        return make_svm_dual(M, 0.5)
    if kind == "logistic":
        M = random_matrix(rng, d, n)
        return make_logistic(M, lam)
    raise ValueError(kind)


def random_state(p, rng, box=False, zero_frac=0.4):
    """Feasible iterate with a mix of zero, boundary, and interior values."""
    n = p.n
    if box:
        alpha = rng.uniform(0.0, 1.0, n)
        alpha[rng.random(n) < 0.25] = 0.0
        alpha[rng.random(n) < 0.15] = 1.0
    else:
        alpha = rng.standard_normal(n)
        alpha[rng.random(n) < zero_frac] = 0.0
    s = IterateState(alpha=alpha, residual=np.zeros(p.d),
                     nnz=int(np.count_nonzero(alpha)))
    s.recompute_residual(p)
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
