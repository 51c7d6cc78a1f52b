"""Enumeration-oracle check suites, runnable from the CLI.

Each suite compares a fast implementation against an independent oracle
(exhaustive enumeration, finite differences, or grid search) at fixed
tolerances and reports pass/fail.  The pytest acceptance module runs the
same checks; this entry point exists so a deployed install can be checked
without a test harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..allocation import project_row_simplex, random_allocation
from ..metrics import (expected_throughput_enumerate,
                       expected_throughput_independent)
from ..optimizer import (bias_diagnostic, exact_gradient_independent,
                         expected_gradient_enumerate, stochastic_gradient)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_gradient_unbiasedness(cases: int = 100, seed: int = 7,
                                n: int = 6, k: int = 3) -> CheckResult:
    """E_x[g(A; x)] from enumeration must equal the analytic gradient."""
    rng = np.random.default_rng(seed)
    worst_enum = 0.0
    worst_fd = 0.0
    for _ in range(cases):
        A = random_allocation(n, k, rng)
        p = rng.random(n)
        exact = exact_gradient_independent(A, p)
        worst_enum = max(worst_enum, float(np.max(np.abs(
            expected_gradient_enumerate(A, p) - exact))))
        fd = _finite_difference_gradient(A, p, h=1e-6)
        scale = np.maximum(np.abs(exact), 1.0)
        worst_fd = max(worst_fd, float(np.max(np.abs(fd - exact) / scale)))
    ok = worst_enum < 1e-10 and worst_fd < 1e-5
    return CheckResult(
        "gradient-unbiasedness", ok,
        f"max enumeration gap {worst_enum:.3e} (tol 1e-10), "
        f"max finite-difference gap {worst_fd:.3e} (rel tol 1e-5)")


def _finite_difference_gradient(A, p, h: float) -> np.ndarray:
    """Central differences of the closed-form throughput, unconstrained."""
    g = np.zeros_like(A)
    for q in range(A.shape[0]):
        for l in range(A.shape[1]):
            up = A.copy()
            down = A.copy()
            up[q, l] += h
            down[q, l] -= h
            g[q, l] = (_throughput_unconstrained(up, p)
                       - _throughput_unconstrained(down, p)) / (2.0 * h)
    return g


def _throughput_unconstrained(A, p) -> float:
    # same polynomial as the closed form, without row-sum validation
    F = 1.0 - p[:, None] * A
    n = F.shape[0]
    total = 0.0
    for i in range(n):
        others = np.prod(np.delete(F, i, axis=0), axis=0)
        total += float(np.sum(p[i] * A[i] * others))
    return total


def check_weighting_identity(cases: int = 100, seed: int = 11,
                             n: int = 6, k: int = 3) -> CheckResult:
    """Weighted proposal-expectations must recover target-expectations."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        A = random_allocation(n, k, rng)
        p = rng.uniform(0.05, 0.95, n)
        p_hat = rng.uniform(0.05, 0.95, n)
        beta = bias_diagnostic(A, p, p_hat, weighted=True)
        worst = max(worst, float(np.max(np.abs(beta))))
    return CheckResult(
        "importance-weighting-identity", worst < 1e-10,
        f"max weighted-bias entry {worst:.3e} (tol 1e-10)")


def check_oracle_equivalence(cases: int = 100, seed: int = 13,
                             max_n: int = 12) -> CheckResult:
    """Closed-form throughput must match exhaustive enumeration."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, max_n + 1))
        k = int(rng.integers(1, 6))
        A = random_allocation(n, k, rng)
        p = rng.random(n)
        gap = abs(expected_throughput_independent(A, p)
                  - expected_throughput_enumerate(A, p))
        worst = max(worst, gap)
    return CheckResult(
        "oracle-equivalence", worst < 1e-12,
        f"max closed-form vs enumeration gap {worst:.3e} (tol 1e-12)")


def grid_projection_oracle(v: np.ndarray, resolution: float = 1e-4) -> float:
    """Smallest squared distance from ``v`` to the simplex on a fine grid.

    The objective is convex, so a coarse scan followed by a fine scan around
    the coarse minimizer reaches the requested resolution exactly.
    """
    k = v.shape[0]
    if k == 2:
        t = np.arange(0.0, 1.0 + resolution / 2, resolution)
        pts = np.stack([t, 1.0 - t], axis=1)
        return float(np.min(np.sum((pts - v) ** 2, axis=1)))
    if k == 3:
        best = None
        coarse = 1e-2
        for step, lo, hi in ((coarse, (0.0, 0.0), (1.0, 1.0)), (None, None, None)):
            if step is None:
                step = resolution
                center = best[1]
                lo = (max(0.0, center[0] - 2 * coarse),
                      max(0.0, center[1] - 2 * coarse))
                hi = (min(1.0, center[0] + 2 * coarse),
                      min(1.0, center[1] + 2 * coarse))
            a = np.arange(lo[0], hi[0] + step / 2, step)
            b = np.arange(lo[1], hi[1] + step / 2, step)
            aa, bb = np.meshgrid(a, b, indexing="ij")
            cc = 1.0 - aa - bb
            valid = cc >= -1e-12
            d2 = ((aa - v[0]) ** 2 + (bb - v[1]) ** 2
                  + (np.maximum(cc, 0.0) - v[2]) ** 2)
            d2 = np.where(valid, d2, np.inf)
            flat = int(np.argmin(d2))
            cand = (float(d2.flat[flat]),
                    (float(aa.flat[flat]), float(bb.flat[flat])))
            if best is None or cand[0] < best[0]:
                best = cand
        return best[0]
    raise ValueError("grid oracle implemented for K in {2, 3}")


def check_projection(cases: int = 40, seed: int = 17) -> CheckResult:
    """Sort-based projection must reach grid-oracle optimality; idempotent."""
    rng = np.random.default_rng(seed)
    worst_opt = -np.inf
    worst_idem = 0.0
    for i in range(cases):
        k = 2 if i % 2 == 0 else 3
        v = rng.uniform(-2.0, 2.0, k)
        u = project_row_simplex(v)
        d2 = float(np.sum((u - v) ** 2))
        oracle = grid_projection_oracle(v)
        worst_opt = max(worst_opt, d2 - oracle)
        worst_idem = max(worst_idem,
                         float(np.max(np.abs(project_row_simplex(u) - u))))
    ok = worst_opt < 1e-6 and worst_idem == 0.0
    return CheckResult(
        "projection-optimality", ok,
        f"max excess squared distance {worst_opt:.3e} (tol 1e-6), "
        f"max idempotence gap {worst_idem:.3e} (exact)")


def run_selftest() -> list[CheckResult]:
    return [
        check_gradient_unbiasedness(),
        check_weighting_identity(),
        check_oracle_equivalence(),
        check_projection(),
    ]
