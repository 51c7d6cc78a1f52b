"""Allocation matrices and Euclidean projection onto their constraint set.

An allocation matrix is N x K with nonnegative entries and unit row sums:
row i is the distribution over the K slots that device i samples from when
it is active.  The constraint set is a product of probability simplexes, so
projection is applied row by row with the exact sort-based algorithm.
"""

from __future__ import annotations

import numpy as np

from .activity import as_probabilities

ROW_SUM_TOL = 1e-9


def validate_allocation(A) -> np.ndarray:
    """Validate nonnegativity and unit row sums; return a float64 copy."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"allocation matrix must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("allocation matrix contains non-finite entries")
    if np.any(A < 0.0):
        raise ValueError("allocation matrix entries must be nonnegative")
    row_sums = A.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
        raise ValueError("allocation matrix rows must sum to 1")
    return A.copy()


def _project_rows_raw(V: np.ndarray) -> np.ndarray:
    n, k = V.shape
    U = np.sort(V, axis=1)[:, ::-1]
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, k + 1)
    rho = np.count_nonzero(U * ind > css, axis=1)
    theta = css[np.arange(n), rho - 1] / rho
    return np.maximum(V - theta[:, None], 0.0)


def project_rows_simplex(V: np.ndarray) -> np.ndarray:
    """Project each row of ``V`` onto the probability simplex (vectorized).

    Sort-based exact projection: sort descending, find the largest prefix
    whose running mean leaves the pivot entry positive, shift and clamp.
    Rows already feasible (within the row-sum tolerance) pass through
    unchanged, which makes the projection exactly idempotent.
    """
    V = np.asarray(V, dtype=np.float64)
    out = V.copy()
    feasible = ((V.min(axis=1) >= 0.0)
                & (np.abs(V.sum(axis=1) - 1.0) <= ROW_SUM_TOL))
    if not np.all(feasible):
        todo = ~feasible
        out[todo] = _project_rows_raw(V[todo])
    return out


def project_row_simplex(v) -> np.ndarray:
    """Euclidean projection of one length-K vector onto the simplex."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValueError("input must be a 1-D vector of length >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError("input contains non-finite entries")
    return project_rows_simplex(v[None, :])[0]


def project_allocation(A_raw) -> np.ndarray:
    """Project each row of an arbitrary real N x K matrix onto the simplex."""
    A_raw = np.asarray(A_raw, dtype=np.float64)
    if A_raw.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A_raw.shape}")
    if not np.all(np.isfinite(A_raw)):
        raise ValueError("input contains non-finite entries")
    return project_rows_simplex(A_raw)


def aloha_allocation(n_devices: int, n_slots: int) -> np.ndarray:
    """Uniform allocation: every device selects every slot with probability 1/K."""
    if n_devices < 1 or n_slots < 1:
        raise ValueError("n_devices and n_slots must be >= 1")
    return np.full((n_devices, n_slots), 1.0 / n_slots)


def greedy_allocation(p, n_slots: int) -> np.ndarray:
    """Dedicate a slot to each of the K-1 most active devices.

    Devices are ordered by ascending activity probability with ties broken
    by ascending device index.  The K-1 devices at the top of that order
    get private slots (the most active device takes slot 1, the next slot
    2, ...); every remaining device puts all its mass on slot 0, which they
    share.  With N == K the result is a permutation matrix.
    """
    p = as_probabilities(p)
    n = p.shape[0]
    if n_slots < 2:
        raise ValueError(f"greedy allocation needs at least 2 slots, got {n_slots}")
    if n < n_slots:
        raise ValueError(f"greedy allocation needs N >= K, got N={n}, K={n_slots}")
    order = np.argsort(p, kind="stable")  # ascending p, ties by index
    A = np.zeros((n, n_slots))
    dedicated = order[n - n_slots + 1:]   # the K-1 most active, ascending
    for rank, device in enumerate(dedicated[::-1]):
        A[device, rank + 1] = 1.0
    A[order[: n - n_slots + 1], 0] = 1.0
    return A


def random_allocation(n_devices: int, n_slots: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw each row independently and uniformly from the simplex."""
    if n_devices < 1 or n_slots < 1:
        raise ValueError("n_devices and n_slots must be >= 1")
    return rng.dirichlet(np.ones(n_slots), size=n_devices)
