"""Sweep drivers: run every method on shared sample paths, emit records.

Within one repetition every method consumes the identical true-activity
sequence and identical error-channel randomness; methods differ only in
what they observe (true vs detected vectors) and how they weight gradient
steps.  Restart initializations and perturbed-target draws come from
streams keyed additionally by method and restart, so methods never steal
randomness from one another.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..activity import (induced_proposal_asymmetric, induced_proposal_symmetric,
                        perturb_target, sample_activity_stream)
from ..allocation import (aloha_allocation, greedy_allocation,
                          random_allocation)
from ..detector import estimate_proposal_empirical, gamp_detect_batch
from ..metrics import expected_throughput_batch, expected_throughput_independent
from ..optimizer import (StepSchedule, multi_start, run_clipped_psga,
                         run_psga, run_weighted_psga)
from .config import ExperimentConfig
from .records import RunRecord
from .seeding import seed_plan

METHOD_PERFECT = "psga-perfect"
METHOD_NAIVE = "psga-naive"
METHOD_WEIGHTED = "psga-weighted"
METHOD_GREEDY = "greedy"
METHOD_ALOHA = "aloha"
METHOD_INITIAL = "initial"

_GAMP_CHUNK = 2000  # frames per detection batch; fixed so streams never shift


def sigma_method_label(sigma: float) -> str:
    return f"psga-weighted-s{sigma:g}"


def method_labels(config: ExperimentConfig) -> list[str]:
    labels = [METHOD_PERFECT, METHOD_NAIVE, METHOD_WEIGHTED]
    labels += [sigma_method_label(s) for s in config.sigma_target_list]
    labels += [METHOD_GREEDY, METHOD_ALOHA, METHOD_INITIAL]
    return labels


def _eval_frames(frames: int, eval_every: int) -> np.ndarray:
    ts = list(range(0, frames + 1, eval_every))
    if ts[-1] != frames:
        ts.append(frames)
    return np.asarray(ts, dtype=np.int64)


def _gamp_detected_stream(X: np.ndarray, prior: np.ndarray,
                          noise_variance: float, settings,
                          rng: np.random.Generator) -> np.ndarray:
    """Detect every frame of ``X`` through the pilot channel; returns (F, N)."""
    frames, n = X.shape
    t_len = settings.pilot_length
    moduli = np.asarray(settings.channel_moduli, dtype=np.float64)
    prior_var = moduli ** 2
    out = np.empty((frames, n), dtype=np.uint8)
    for start in range(0, frames, _GAMP_CHUNK):
        stop = min(start + _GAMP_CHUNK, frames)
        c = stop - start
        pilots = np.sqrt(0.5) * (rng.standard_normal((c, t_len, n))
                                 + 1j * rng.standard_normal((c, t_len, n)))
        phases = rng.random((c, n)) * 2.0 * np.pi
        noise = np.sqrt(noise_variance / 2.0) * (
            rng.standard_normal((c, t_len)) + 1j * rng.standard_normal((c, t_len)))
        coeff = moduli * np.exp(1j * phases)
        effective = X[start:stop] * coeff
        Y = np.einsum("fti,fi->ft", pilots, effective) + noise
        _, hard, _, _, _ = gamp_detect_batch(
            Y, pilots, prior, prior_var, noise_variance,
            max_iters=settings.max_iters, damping=settings.damping,
            tol=settings.tol, threshold=settings.threshold)
        out[start:stop] = hard
    return out


def _observed_and_proposal(config: ExperimentConfig, p: np.ndarray,
                           sweep_value: float, rep: int,
                           X: np.ndarray):
    """Detected stream shared by all error-prone methods, plus its marginals.

    The proposal is factorized over devices: the closed form induced by the
    flip channels, the per-device mixture marginal, or the smoothed
    empirical estimate from a detection-only pre-run for the pilot channel.
    """
    kind = config.experiment
    frames = config.frames
    rng_err = seed_plan(config.master_seed, rep, stream="error")
    if kind == "example1":
        eps = sweep_value
        choice = rng_err.random(frames) < eps
        alt = (rng_err.random((frames, p.shape[0]))
               < np.asarray(config.p_alt)).astype(np.uint8)
        observed = np.where(choice[:, None], alt, X).astype(np.uint8)
        proposal = (1.0 - eps) * p + eps * np.asarray(config.p_alt)
        return observed, proposal
    if kind in ("symmetric", "trajectory"):
        flips = rng_err.random((frames, p.shape[0])) < sweep_value
        observed = (X ^ flips).astype(np.uint8)
        return observed, induced_proposal_symmetric(p, sweep_value)
    if kind == "asymmetric":
        kept = rng_err.random((frames, p.shape[0])) >= sweep_value
        observed = (X & kept).astype(np.uint8)
        return observed, induced_proposal_asymmetric(p, sweep_value)
    if kind == "gamp":
        noise_variance = 10.0 ** (-sweep_value / 10.0)  # transmit power 1
        if config.detector.detection_prior == "per-device":
            prior = p
        elif config.detector.detection_prior == "mean-activity":
            prior = np.full(p.shape[0], p.mean())
        else:
            prior = np.full(p.shape[0], 0.5)
        rng_est = seed_plan(config.master_seed, rep, stream="proposal-estimation")
        X_est = sample_activity_stream(p, config.detector.estimation_frames,
                                       rng_est)
        detected_est = _gamp_detected_stream(X_est, prior, noise_variance,
                                             config.detector, rng_est)
        proposal = estimate_proposal_empirical(detected_est)
        observed = _gamp_detected_stream(X, prior, noise_variance,
                                         config.detector, rng_err)
        return observed, proposal
    raise ValueError(f"unknown experiment kind: {kind!r}")


def _run_cell(config: ExperimentConfig, p: np.ndarray, sweep_value: float,
              rep: int) -> list[RunRecord]:
    """All methods for one (sweep value, repetition) pair."""
    n, k = config.n_devices, config.n_slots
    frames, ms = config.frames, config.master_seed
    schedule = StepSchedule.constant(config.gamma, config.kappa)
    X = sample_activity_stream(p, frames, seed_plan(ms, rep, stream="activity"))
    observed, proposal = _observed_and_proposal(config, p, sweep_value, rep, X)
    p_sum = float(p.sum())
    eval_ts = _eval_frames(frames, config.eval_every)

    def evaluator(A):
        return expected_throughput_independent(A, p)

    def naive_evaluator(A):
        # an AP that ignores detection errors can only rank candidate
        # matrices under the activity law its observations suggest
        return expected_throughput_independent(A, proposal)

    def initial_matrix(label, r):
        return random_allocation(
            n, k, seed_plan(ms, rep, method=label, restart=r, stream="init"))

    records: list[RunRecord] = []

    def emit_trajectory(label, trajectory, wall_ms):
        values = expected_throughput_batch(trajectory.allocations, p) / p_sum
        for t, value in zip(trajectory.frames, values):
            records.append(RunRecord(
                experiment=config.experiment, method=label,
                sweep_value=sweep_value, rep=rep, frame=int(t),
                normalized_throughput=float(value), seed=ms, wall_ms=wall_ms))

    def emit_constant(label, A, wall_ms):
        value = evaluator(A) / p_sum
        for t in eval_ts:
            records.append(RunRecord(
                experiment=config.experiment, method=label,
                sweep_value=sweep_value, rep=rep, frame=int(t),
                normalized_throughput=value, seed=ms, wall_ms=wall_ms))

    def runner(label):
        if label == METHOD_PERFECT:
            return lambda r: run_psga(initial_matrix(label, r), X, schedule,
                                      eval_every=config.eval_every)
        if label == METHOD_NAIVE:
            return lambda r: run_psga(initial_matrix(label, r), observed,
                                      schedule, eval_every=config.eval_every)
        if label == METHOD_WEIGHTED:
            return lambda r: run_weighted_psga(initial_matrix(label, r),
                                               observed, p, proposal, schedule,
                                               eval_every=config.eval_every)
        raise ValueError(label)

    for label in (METHOD_PERFECT, METHOD_NAIVE, METHOD_WEIGHTED):
        start = time.perf_counter()
        select = naive_evaluator if label == METHOD_NAIVE else evaluator
        result = multi_start(runner(label), config.restarts, select)
        wall = (time.perf_counter() - start) * 1e3 if config.record_timing else 0.0
        emit_trajectory(label, result.trajectory, wall)

    for sigma in config.sigma_target_list:
        label = sigma_method_label(sigma)

        def run_sigma(r, label=label, sigma=sigma):
            # fresh target estimate per optimization run
            target = perturb_target(p, sigma, seed_plan(
                ms, rep, method=label, restart=r, stream="target"))
            return run_clipped_psga(initial_matrix(label, r), observed,
                                    target, proposal, schedule,
                                    eval_every=config.eval_every)

        start = time.perf_counter()
        result = multi_start(run_sigma, config.restarts, evaluator)
        wall = (time.perf_counter() - start) * 1e3 if config.record_timing else 0.0
        emit_trajectory(label, result.trajectory, wall)

    emit_constant(METHOD_GREEDY, greedy_allocation(p, k), 0.0)
    emit_constant(METHOD_ALOHA, aloha_allocation(n, k), 0.0)
    initials = [initial_matrix(METHOD_INITIAL, r) for r in range(config.restarts)]
    best = max(initials, key=evaluator)
    emit_constant(METHOD_INITIAL, best, 0.0)
    return records


def _run_cell_star(args):
    return _run_cell(*args)


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """Run every (sweep value, repetition) cell; returns canonical-order records."""
    config.validate()
    p = config.resolve_p()
    tasks = [(config, p, sv, rep)
             for sv in config.sweep_values
             for rep in range(config.repetitions)]
    if config.workers == 1 or len(tasks) == 1:
        results = [_run_cell_star(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_cell_star, tasks, chunksize=1))
    records = [r for cell in results for r in cell]
    records.sort(key=lambda r: (r.sweep_value, r.rep, r.frame, r.method))
    return records


def write_manifest(config: ExperimentConfig, p: np.ndarray, path) -> None:
    """Record the resolved configuration and seed next to the CSV output."""
    det = config.detector
    lines = [
        f"alohaopt_version = {__version__}",
        f"experiment = {config.experiment}",
        f"n_devices = {config.n_devices}",
        f"n_slots = {config.n_slots}",
        f"frames = {config.frames}",
        f"repetitions = {config.repetitions}",
        f"restarts = {config.restarts}",
        f"gamma = {config.gamma:.17g}",
        f"kappa = {config.kappa:.17g}",
        f"sigma_target_list = {','.join(format(s, '.17g') for s in config.sigma_target_list)}",
        f"sweep_values = {','.join(format(s, '.17g') for s in config.sweep_values)}",
        f"master_seed = {config.master_seed}",
        f"eval_every = {config.eval_every}",
        f"p = {','.join(format(v, '.17g') for v in p)}",
    ]
    if config.experiment == "example1":
        lines.append(
            f"p_alt = {','.join(format(v, '.17g') for v in config.p_alt)}")
    if config.experiment == "gamp":
        lines += [
            f"pilot_length = {det.pilot_length}",
            f"channel_moduli = {','.join(format(v, '.17g') for v in det.channel_moduli)}",
            f"max_iters = {det.max_iters}",
            f"damping = {det.damping:.17g}",
            f"tol = {det.tol:.17g}",
            f"threshold = {det.threshold:.17g}",
            f"estimation_frames = {det.estimation_frames}",
            f"detection_prior = {det.detection_prior}",
        ]
    Path(path).write_text("\n".join(lines) + "\n")
