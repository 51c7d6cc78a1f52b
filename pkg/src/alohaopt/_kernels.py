"""Compiled inner loops for the projected stochastic gradient recursion.

The per-frame work (throughput gradient, weighted ascent step, row-wise
simplex projection) runs tens of millions of times in a full sweep, so it
is JIT-compiled.  The gradient uses a dual-number running-product scan:
tracking (value, first-order term) pairs through exclusive prefix/suffix
products yields both the leave-one-out products and the leave-two-out sums
in one O(N*K) pass without any division, so allocation entries of exactly
1 are safe.  Results match the plain-numpy reference to float64 rounding.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def project_row_inplace(row):
    """Exact sort-based Euclidean projection of one row onto the simplex.

    Feasible rows (within the 1e-9 row-sum tolerance) are left untouched,
    matching the plain-numpy projection's idempotence short-circuit.
    """
    k = row.shape[0]
    total = 0.0
    minimum = row[0]
    for l in range(k):
        total += row[l]
        if row[l] < minimum:
            minimum = row[l]
    if minimum >= 0.0 and abs(total - 1.0) <= 1e-9:
        return
    u = np.sort(row)[::-1]
    css = 0.0
    theta = 0.0
    for j in range(k):
        css += u[j]
        tj = (css - 1.0) / (j + 1.0)
        if u[j] - tj > 0.0:
            theta = tj
    for l in range(k):
        v = row[l] - theta
        row[l] = v if v > 0.0 else 0.0


@njit(cache=True)
def throughput_gradient(weights, A, out):
    """Gradient of instantaneous throughput at A for activity weights.

    ``weights`` is the activity vector as float64 (binary for a realized
    frame; a probability vector yields the gradient of the closed-form
    expectation).  Writes into ``out`` and returns nothing.
    """
    n, k = A.shape
    pref_v = np.empty(n)
    pref_d = np.empty(n)
    for l in range(k):
        pv = 1.0
        pd = 0.0
        for m in range(n):
            pref_v[m] = pv
            pref_d[m] = pd
            a = weights[m] * A[m, l]
            f = 1.0 - a
            pd = pd * f + pv * a
            pv = pv * f
        sv = 1.0
        sd = 0.0
        for m in range(n - 1, -1, -1):
            loo = pref_v[m] * sv
            pair_sum = pref_v[m] * sd + pref_d[m] * sv
            out[m, l] = weights[m] * (loo - pair_sum)
            a = weights[m] * A[m, l]
            f = 1.0 - a
            sd = sd * f + sv * a
            sv = sv * f


@njit(cache=True)
def run_psga_kernel(A0, X, W, gammas, eval_frames):
    """Iterate the projected weighted ascent recursion over a frame stream.

    A0           initial allocation (N, K), already feasible
    X            observed activity stream (frames, N) as float64 in {0, 1}
    W            per-frame weight applied to the gradient (frames,)
    gammas       per-frame step sizes (frames,)
    eval_frames  sorted frame indices at which to snapshot the iterate;
                 must start at 0 if the initial matrix is wanted

    Returns the (len(eval_frames), N, K) stack of snapshots.
    """
    n, k = A0.shape
    frames = X.shape[0]
    A = A0.copy()
    n_evals = eval_frames.shape[0]
    out = np.empty((n_evals, n, k))
    ptr = 0
    if ptr < n_evals and eval_frames[ptr] == 0:
        out[ptr] = A
        ptr += 1
    g = np.empty((n, k))
    for step in range(frames):
        w = W[step]
        if w != 0.0:
            active_any = False
            for m in range(n):
                if X[step, m] != 0.0:
                    active_any = True
                    break
            if active_any:
                throughput_gradient(X[step], A, g)
                scale = gammas[step] * w
                for q in range(n):
                    if X[step, q] != 0.0:
                        for l in range(k):
                            A[q, l] += scale * g[q, l]
                        project_row_inplace(A[q])
        t = step + 1
        if ptr < n_evals and eval_frames[ptr] == t:
            out[ptr] = A
            ptr += 1
    return out
