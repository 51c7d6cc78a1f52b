"""Projected stochastic gradient ascent on the throughput objective.

Three run modes share one recursion A <- project(A + gamma * w * g):

* unit weights, for an error-free activity stream;
* exact importance weights from a target/proposal pair, unclipped, which
  restores an unbiased ascent direction when the stream is error-prone;
* clipped weights from an approximate (perturbed) target, trading a little
  bias for bounded steps.

The stochastic gradient g is the gradient of the instantaneous throughput
at the observed activity vector; averaging it over the true activity law
recovers the gradient of the expected throughput, which is what the
enumeration-based diagnostics in this module verify.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .activity import (ImportanceWeight, as_bits, as_probabilities,
                       batch_importance_weights, importance_weight)
from .allocation import project_allocation, validate_allocation

ENUMERATION_CAP = 12


@dataclass(frozen=True)
class StepSchedule:
    """Per-iteration step size gamma(t) and weight clip bound kappa(t), t >= 1."""

    gamma: Callable[[int], float]
    kappa: Callable[[int], float]
    robbins_monro: bool = False

    @staticmethod
    def constant(gamma: float = 0.01, kappa: float = 5.0) -> "StepSchedule":
        """Constant steps and clip bound (the experiment default)."""
        if gamma <= 0.0 or kappa <= 0.0:
            raise ValueError("gamma and kappa must be positive")
        return StepSchedule(gamma=lambda t: gamma, kappa=lambda t: kappa)

    @staticmethod
    def diminishing(c: float = 0.5, kappa: float = 5.0) -> "StepSchedule":
        """c/t steps: summable squares, divergent sum (Robbins-Monro family)."""
        if c <= 0.0 or kappa <= 0.0:
            raise ValueError("c and kappa must be positive")
        return StepSchedule(gamma=lambda t: c / t, kappa=lambda t: kappa,
                            robbins_monro=True)


@dataclass
class OptimizerState:
    """Current iterate plus incumbent bookkeeping across restarts."""

    allocation: np.ndarray
    frame: int = 0
    best_allocation: np.ndarray | None = None
    best_value: float = -np.inf


@dataclass(frozen=True)
class Trajectory:
    """Snapshots (frame index, allocation) recorded during one run."""

    frames: np.ndarray
    allocations: np.ndarray

    def __len__(self) -> int:
        return self.frames.shape[0]

    def __iter__(self):
        return zip(self.frames, self.allocations)

    @property
    def final_allocation(self) -> np.ndarray:
        return self.allocations[-1]


@dataclass(frozen=True)
class MultiStartResult:
    """Best restart of a multi-start run, selected by the evaluator."""

    trajectory: Trajectory
    allocation: np.ndarray
    value: float
    restart_values: np.ndarray
    best_restart: int


def _dual_leave_one_out(v: np.ndarray, A: np.ndarray):
    """Leave-one-out products and leave-two-out sums in one pass.

    For factors f_m = 1 - v_m A_mk returns L[q, k] = prod_{m != q} f_mk and
    S[q, k] = sum_{n != q} v_n A_nk prod_{m != n, q} f_mk, computed through
    exclusive prefix/suffix products of dual numbers (f, vA); division-free.
    """
    n, k = A.shape
    pref_v = np.empty((n, k))
    pref_d = np.empty((n, k))
    pv = np.ones(k)
    pd = np.zeros(k)
    for m in range(n):
        pref_v[m] = pv
        pref_d[m] = pd
        a = v[m] * A[m]
        f = 1.0 - a
        pd = pd * f + pv * a
        pv = pv * f
    L = np.empty((n, k))
    S = np.empty((n, k))
    sv = np.ones(k)
    sd = np.zeros(k)
    for m in range(n - 1, -1, -1):
        L[m] = pref_v[m] * sv
        S[m] = pref_v[m] * sd + pref_d[m] * sv
        a = v[m] * A[m]
        f = 1.0 - a
        sd = sd * f + sv * a
        sv = sv * f
    return L, S


def stochastic_gradient(A, x) -> np.ndarray:
    """Gradient of the instantaneous throughput at the observed vector ``x``."""
    A = validate_allocation(A)
    x = as_bits(x)
    if x.shape[0] != A.shape[0]:
        raise ValueError("activity vector length must match allocation rows")
    xf = x.astype(np.float64)
    L, S = _dual_leave_one_out(xf, A)
    return xf[:, None] * (L - S)


def exact_gradient_independent(A, p) -> np.ndarray:
    """Analytic gradient of the closed-form expected throughput."""
    A = validate_allocation(A)
    p = as_probabilities(p)
    if p.shape[0] != A.shape[0]:
        raise ValueError("probability vector length must match allocation rows")
    L, S = _dual_leave_one_out(p, A)
    return p[:, None] * (L - S)


def _enumerate_vectors(n: int):
    for bits in range(1 << n):
        yield np.array([(bits >> i) & 1 for i in range(n)], dtype=np.uint8)


def expected_gradient_enumerate(A, p) -> np.ndarray:
    """Average the stochastic gradient over all 2^N activity vectors."""
    A = validate_allocation(A)
    p = as_probabilities(p)
    n = p.shape[0]
    if n > ENUMERATION_CAP:
        raise ValueError(f"enumeration limited to N <= {ENUMERATION_CAP}, got {n}")
    total = np.zeros_like(A)
    for x in _enumerate_vectors(n):
        prob = float(np.prod(np.where(x == 1, p, 1.0 - p)))
        if prob > 0.0:
            total += prob * stochastic_gradient(A, x)
    return total


def bias_diagnostic(A, p, p_hat, weighted: bool = False) -> np.ndarray:
    """Gradient bias induced by sampling from ``p_hat`` instead of ``p``.

    Returns E_{x ~ p_hat}[w(x) g(A; x)] - E_{x ~ p}[g(A; x)] by double
    enumeration, with w identically 1 unless ``weighted``; the weighted
    variant is the zero matrix whenever the proposal covers the target.
    """
    A = validate_allocation(A)
    p = as_probabilities(p)
    p_hat = as_probabilities(p_hat)
    n = p.shape[0]
    if n > 10:
        raise ValueError(f"bias diagnostic limited to N <= 10, got {n}")
    if p_hat.shape[0] != n or A.shape[0] != n:
        raise ValueError("dimension mismatch")
    beta = np.zeros_like(A)
    for x in _enumerate_vectors(n):
        prob_true = float(np.prod(np.where(x == 1, p, 1.0 - p)))
        prob_obs = float(np.prod(np.where(x == 1, p_hat, 1.0 - p_hat)))
        if prob_true == 0.0 and prob_obs == 0.0:
            continue
        g = stochastic_gradient(A, x)
        w = importance_weight(p, p_hat, x).value if weighted else 1.0
        beta += (w * prob_obs - prob_true) * g
    return beta


def psga_step(state: OptimizerState, x_obs, weight,
              schedule: StepSchedule) -> OptimizerState:
    """One projected ascent step from the observed vector; reference path.

    With weight identically 1 this is the error-free recursion.  The frame
    counter determines the step size: update t+1 uses gamma(t+1).
    """
    w = weight.value if isinstance(weight, ImportanceWeight) else float(weight)
    if w < 0.0 or not np.isfinite(w):
        raise ValueError(f"weight must be finite and nonnegative, got {w}")
    t_next = state.frame + 1
    gamma = schedule.gamma(t_next)
    if gamma <= 0.0:
        raise ValueError(f"step size must be positive, got gamma({t_next})={gamma}")
    A = state.allocation
    if w == 0.0:
        A_next = A.copy()
    else:
        A_next = project_allocation(A + gamma * w * stochastic_gradient(A, x_obs))
    return OptimizerState(allocation=A_next, frame=t_next,
                          best_allocation=state.best_allocation,
                          best_value=state.best_value)


def _eval_frames(frames: int, eval_every: int) -> np.ndarray:
    if eval_every < 1:
        raise ValueError(f"eval_every must be >= 1, got {eval_every}")
    ts = list(range(0, frames + 1, eval_every))
    if ts[-1] != frames:
        ts.append(frames)
    return np.asarray(ts, dtype=np.int64)


def _run_kernel(initial, observed, weights, schedule, frames, eval_every):
    A0 = validate_allocation(initial)
    observed = np.asarray(observed)
    if observed.ndim != 2 or observed.shape[1] != A0.shape[0]:
        raise ValueError("observed stream must have shape (frames, N)")
    if frames is None:
        frames = observed.shape[0]
    if frames < 0 or frames > observed.shape[0]:
        raise ValueError(f"frames must be in [0, {observed.shape[0]}]")
    X = observed[:frames].astype(np.float64)
    gammas = np.array([schedule.gamma(t) for t in range(1, frames + 1)])
    if np.any(gammas <= 0.0):
        raise ValueError("step sizes must be positive")
    ev = _eval_frames(frames, eval_every)
    stack = _kernels.run_psga_kernel(A0, X, weights[:frames], gammas, ev)
    return Trajectory(frames=ev, allocations=stack)


def run_psga(initial, observed, schedule: StepSchedule,
             frames: int | None = None, eval_every: int = 50) -> Trajectory:
    """Unit-weight projected SGA over an observed activity stream."""
    n_frames = observed.shape[0] if frames is None else frames
    return _run_kernel(initial, observed, np.ones(n_frames), schedule,
                       frames, eval_every)


def run_weighted_psga(initial, observed, target, proposal,
                      schedule: StepSchedule, frames: int | None = None,
                      eval_every: int = 50) -> Trajectory:
    """Projected SGA with exact importance weights, no clipping.

    With proposal equal to target the weights are identically 1 and the run
    reproduces :func:`run_psga` on the same stream exactly.
    """
    n_frames = observed.shape[0] if frames is None else frames
    w = batch_importance_weights(target, proposal, observed[:n_frames])
    return _run_kernel(initial, observed, w, schedule, frames, eval_every)


def run_clipped_psga(initial, observed, target, proposal,
                     schedule: StepSchedule, frames: int | None = None,
                     eval_every: int = 50) -> Trajectory:
    """Projected SGA with weights clipped at the schedule's kappa(t).

    ``target`` is typically a perturbed estimate of the true activity law.
    """
    n_frames = observed.shape[0] if frames is None else frames
    kappas = np.array([schedule.kappa(t) for t in range(1, n_frames + 1)])
    w = batch_importance_weights(target, proposal, observed[:n_frames],
                                 clip=kappas)
    return _run_kernel(initial, observed, w, schedule, frames, eval_every)


def multi_start(run: Callable[[int], Trajectory], restarts: int,
                evaluator: Callable[[np.ndarray], float]) -> MultiStartResult:
    """Run ``run(r)`` for each restart index and keep the best final iterate.

    ``run`` owns restart-specific state (its initial matrix and any
    per-restart draws) but must replay the same observed stream each time;
    selection applies ``evaluator`` to the final iterate of each restart,
    once, at the end of the run.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    best_trajectory: Trajectory | None = None
    best_restart = -1
    values = np.empty(restarts)
    for r in range(restarts):
        trajectory = run(r)
        values[r] = float(evaluator(trajectory.final_allocation))
        if best_restart < 0 or values[r] > values[best_restart]:
            best_trajectory = trajectory
            best_restart = r
    return MultiStartResult(trajectory=best_trajectory,
                            allocation=best_trajectory.final_allocation,
                            value=float(values[best_restart]),
                            restart_values=values, best_restart=best_restart)


def projected_gradient_residual(A, p, delta: float = 1e-4) -> float:
    """Stationarity surrogate: ||project(A + delta * grad) - A|| / delta."""
    A = validate_allocation(A)
    g = exact_gradient_independent(A, p)
    return float(np.linalg.norm(project_allocation(A + delta * g) - A) / delta)
