"""Throughput of a frame slotted ALOHA system under an allocation matrix.

A transmission succeeds when exactly one active device picked the slot.
Per-device success probabilities involve, for each slot, the product of
(1 - activity * allocation) over all other devices; those leave-one-out
products are computed with exclusive prefix/suffix running products, which
keeps every evaluation division-free (allocation entries may be exactly 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activity import as_bits, as_probabilities
from .allocation import validate_allocation

ENUMERATION_CAP = 20


@dataclass(frozen=True)
class ThroughputReport:
    """Expected collision-free transmissions per frame.

    ``normalized`` (total divided by the expected number of active devices)
    is present only when a probability vector was supplied.
    """

    per_device: np.ndarray
    total: float
    normalized: float | None = None


def leave_one_out_products(F: np.ndarray) -> np.ndarray:
    """Return L with L[i, k] = prod over m != i of F[m, k].

    Exclusive prefix times exclusive suffix along axis 0; no division.
    """
    n = F.shape[0]
    prefix = np.ones_like(F)
    suffix = np.ones_like(F)
    if n > 1:
        np.cumprod(F[:-1], axis=0, out=prefix[1:])
        suffix[:-1] = np.cumprod(F[:0:-1], axis=0)[::-1]
    return prefix * suffix


def _leave_one_out_batch(F: np.ndarray) -> np.ndarray:
    """Leave-one-out products along axis 1 of a (batch, N, K) array."""
    n = F.shape[1]
    prefix = np.ones_like(F)
    suffix = np.ones_like(F)
    if n > 1:
        np.cumprod(F[:, :-1], axis=1, out=prefix[:, 1:])
        suffix[:, :-1] = np.cumprod(F[:, :0:-1], axis=1)[:, ::-1]
    return prefix * suffix


def instantaneous_throughput(A, x) -> ThroughputReport:
    """Collision-free transmissions for one realized activity vector."""
    A = validate_allocation(A)
    x = as_bits(x)
    if x.shape[0] != A.shape[0]:
        raise ValueError("activity vector length must match allocation rows")
    xf = x.astype(np.float64)
    F = 1.0 - xf[:, None] * A
    per_device = xf * np.sum(A * leave_one_out_products(F), axis=1)
    return ThroughputReport(per_device=per_device, total=float(per_device.sum()))


def expected_throughput_independent(A, p) -> float:
    """Closed-form expected throughput under independent device activity."""
    A = validate_allocation(A)
    p = as_probabilities(p)
    if p.shape[0] != A.shape[0]:
        raise ValueError("probability vector length must match allocation rows")
    F = 1.0 - p[:, None] * A
    return float(np.sum(p[:, None] * A * leave_one_out_products(F)))


def expected_throughput_batch(A_stack: np.ndarray, p) -> np.ndarray:
    """Closed-form expected throughput for a stack of allocation matrices."""
    A_stack = np.asarray(A_stack, dtype=np.float64)
    p = as_probabilities(p)
    F = 1.0 - p[None, :, None] * A_stack
    loo = _leave_one_out_batch(F)
    return np.sum(p[None, :, None] * A_stack * loo, axis=(1, 2))


def expected_throughput_enumerate(A, p) -> float:
    """Exact expected throughput by summing over all 2^N activity vectors.

    Exponential cost; serves as the oracle for the closed form and for the
    gradient tests.  Rejects N above the hard cap to flag misuse.
    """
    A = validate_allocation(A)
    p = as_probabilities(p)
    n = p.shape[0]
    if n != A.shape[0]:
        raise ValueError("probability vector length must match allocation rows")
    if n > ENUMERATION_CAP:
        raise ValueError(f"enumeration limited to N <= {ENUMERATION_CAP}, got {n}")
    total = 0.0
    for bits in range(1 << n):
        x = np.array([(bits >> i) & 1 for i in range(n)], dtype=np.uint8)
        prob = float(np.prod(np.where(x == 1, p, 1.0 - p)))
        if prob == 0.0:
            continue
        total += prob * instantaneous_throughput(A, x).total
    return total


def normalized_throughput(A, p) -> float:
    """Expected throughput divided by the expected number of active devices."""
    p = as_probabilities(p)
    denom = float(p.sum())
    if denom <= 0.0:
        raise ValueError("normalized throughput undefined: sum of p is zero")
    return expected_throughput_independent(A, p) / denom


def monte_carlo_throughput(A, activity_source, frames: int) -> float:
    """Empirical mean instantaneous throughput over sampled frames.

    ``activity_source`` is either a callable returning one activity vector
    per call or a (frames, N) array of pre-drawn vectors.
    """
    if frames < 1:
        raise ValueError(f"frames must be >= 1, got {frames}")
    A = validate_allocation(A)
    if callable(activity_source):
        X = np.stack([as_bits(activity_source()) for _ in range(frames)])
    else:
        X = np.asarray(activity_source)
        if X.ndim != 2 or X.shape[0] < frames:
            raise ValueError("need a (frames, N) array of activity vectors")
        X = X[:frames]
    total = 0.0
    chunk = 4096
    for start in range(0, frames, chunk):
        xf = X[start:start + chunk].astype(np.float64)
        F = 1.0 - xf[:, :, None] * A[None, :, :]
        loo = _leave_one_out_batch(F)
        total += float(np.sum(xf[:, :, None] * A[None, :, :] * loo))
    return total / frames
