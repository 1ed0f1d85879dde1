"""Shared builders for the test suite.

The recurring need is a joint table whose conditional satisfies the
cell-weighted column condition  sum_i pi(j|i) d(i) = D(j)  exactly (up to
rounding).  We build those from a fine doubly stochastic matrix obtained
by Sinkhorn balancing and coarse-grain it over random cell partitions:
row sums survive the block averaging and column sums turn into the
weighted condition by construction.
"""

from __future__ import annotations

import numpy as np
import pytest

from seqmeas.model import JointModel


def sinkhorn(a: np.ndarray, iters: int = 400) -> np.ndarray:
    """Doubly stochastic matrix from a strictly positive square seed."""
    b = np.array(a, dtype=float)
    if np.any(b <= 0):
        raise ValueError("sinkhorn needs strictly positive entries")
    for _ in range(iters):
        b /= b.sum(axis=1, keepdims=True)
        b /= b.sum(axis=0, keepdims=True)
    # one last row pass so rows sum to one exactly in floating point
    b /= b.sum(axis=1, keepdims=True)
    return b


def random_partition(rng: np.random.Generator, n_cells: int, max_cell: int = 3) -> list[list[int]]:
    sizes = rng.integers(1, max_cell + 1, size=n_cells)
    cells, pos = [], 0
    for s in sizes:
        cells.append(list(range(pos, pos + int(s))))
        pos += int(s)
    return cells


def random_mod_ds_conditional(
    rng: np.random.Generator, n_i: int, n_j: int, max_cell: int = 3
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Conditional pi(j|i) with cell sizes (d, D) satisfying the weighted condition.

    Built by block-summing a fine doubly stochastic matrix:
    pi(j|i) = (1/d_i) sum_{a in cell_i, b in cell_j} B[a, b].
    """
    cells_i = random_partition(rng, n_i, max_cell)
    cells_j = random_partition(rng, n_j, max_cell)
    d = np.array([len(c) for c in cells_i])
    D = np.array([len(c) for c in cells_j])
    n_fine_i, n_fine_j = int(d.sum()), int(D.sum())
    n = max(n_fine_i, n_fine_j)
    fine = sinkhorn(rng.uniform(0.25, 1.75, size=(n, n)))
    # pad partitions with singleton cells when the fine matrix is larger
    while sum(len(c) for c in cells_i) < n:
        cells_i.append([sum(len(c) for c in cells_i)])
    while sum(len(c) for c in cells_j) < n:
        cells_j.append([sum(len(c) for c in cells_j)])
    d = np.array([len(c) for c in cells_i])
    D = np.array([len(c) for c in cells_j])
    pi = np.zeros((len(cells_i), len(cells_j)))
    for i, ci in enumerate(cells_i):
        for j, cj in enumerate(cells_j):
            pi[i, j] = fine[np.ix_(ci, cj)].sum() / len(ci)
    return pi, d, D


def random_mod_ds_model(rng: np.random.Generator, n_i: int, n_j: int,
                        max_cell: int = 3) -> JointModel:
    """Joint model with strictly positive marginal and weighted-DS conditional."""
    pi, d, D = random_mod_ds_conditional(rng, n_i, n_j, max_cell)
    p = rng.uniform(0.1, 1.0, size=pi.shape[0])
    p /= p.sum()
    table = p[:, None] * pi
    table /= table.sum()
    return JointModel(p_table=table, d=d, D=D)


def random_positive_prob(rng: np.random.Generator, n: int) -> np.ndarray:
    q = rng.uniform(0.05, 1.0, size=n)
    return q / q.sum()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)
