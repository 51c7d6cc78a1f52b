"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one ``ACCEPTANCE <name>: PASS`` line (visible with -s or
-rA) and asserts the criterion.  The sweep-based criteria run the full
experiment protocol (20 repetitions, 12 restarts, 10000 frames) through
module-scoped fixtures, so expect several minutes of wall time for the
symmetric/asymmetric sweeps and more for the pilot-detection sweep.
"""

import filecmp
import time

import numpy as np
import pytest

import alohaopt as ao
from alohaopt.harness import default_config, run_experiment, summarize, write_records
from alohaopt.harness.selftest import (check_gradient_unbiasedness,
                                       check_oracle_equivalence,
                                       check_projection,
                                       check_weighting_identity)
from alohaopt.optimizer import StepSchedule, multi_start, run_psga


def _report(name, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {name}: {status} — {detail}")
    assert passed, f"{name}: {detail}"


def _mean(records, method, sweep):
    for row in summarize(records):
        if row.method == method and row.sweep_value == pytest.approx(sweep):
            return row.mean
    raise KeyError((method, sweep))


@pytest.fixture(scope="module")
def example1_records():
    return run_experiment(default_config("example1"))


@pytest.fixture(scope="module")
def symmetric_records():
    start = time.time()
    records = run_experiment(default_config("symmetric"))
    return records, time.time() - start


@pytest.fixture(scope="module")
def asymmetric_records():
    start = time.time()
    records = run_experiment(default_config("asymmetric"))
    return records, time.time() - start


@pytest.fixture(scope="module")
def gamp_records():
    start = time.time()
    records = run_experiment(default_config("gamp"))
    return records, time.time() - start


def test_gradient_unbiasedness():
    start = time.time()
    result = check_gradient_unbiasedness(cases=100, n=6, k=3)
    elapsed = time.time() - start
    _report("gradient-unbiasedness", result.passed and elapsed < 10.0,
            f"{result.detail}; runtime {elapsed:.1f}s (< 10s)")


def test_importance_weighting_identity():
    start = time.time()
    result = check_weighting_identity(cases=100, n=6)
    elapsed = time.time() - start
    _report("importance-weighting-identity",
            result.passed and elapsed < 10.0,
            f"{result.detail}; runtime {elapsed:.1f}s (< 10s)")


def test_oracle_equivalence():
    result = check_oracle_equivalence(cases=100, max_n=12)
    _report("oracle-equivalence", result.passed, result.detail)


def test_projection_correctness():
    result = check_projection()
    _report("projection-correctness", result.passed, result.detail)


def test_determinism_example1(tmp_path):
    config = default_config("example1")
    a = tmp_path / "run_a.csv"
    b = tmp_path / "run_b.csv"
    write_records(a, run_experiment(config))
    write_records(b, run_experiment(config))
    identical = filecmp.cmp(a, b, shallow=False)
    _report("determinism-example1", identical,
            f"two runs with master seed {config.master_seed} produced "
            f"{'identical' if identical else 'DIFFERENT'} CSV bytes")


def test_example1_throughput_drop(example1_records):
    start = time.time()
    records = example1_records
    clean = _mean(records, "psga-naive", 0.0)
    corrupted = _mean(records, "psga-naive", 1.0)
    aloha = _mean(records, "aloha", 1.0)
    drop = 1.0 - corrupted / clean
    ok = 0.25 <= drop <= 0.45 and corrupted < aloha
    _report("example1-throughput-drop", ok,
            f"drop at eps=1: {drop * 100:.1f}% (band [25%, 45%]); "
            f"eps=1 mean {corrupted:.4f} vs uniform allocation {aloha:.4f}; "
            f"analysis {time.time() - start:.1f}s")


def test_symmetric_sweep(symmetric_records):
    records, elapsed = symmetric_records
    naive = _mean(records, "psga-naive", 0.35)
    weighted = _mean(records, "psga-weighted", 0.35)
    gain = weighted / naive - 1.0
    sigma_ok = all(_mean(records, f"psga-weighted-s{s:g}", 0.35) > naive
                   for s in (0.05, 0.1, 0.2))
    gradient_methods = ["psga-perfect", "psga-naive", "psga-weighted",
                        "psga-weighted-s0.05", "psga-weighted-s0.1",
                        "psga-weighted-s0.2"]
    spreads = {}
    for sweep in (0.0, 0.05, 0.1, 0.15):
        vals = [_mean(records, m, sweep) for m in gradient_methods]
        spreads[sweep] = (max(vals) - min(vals)) / max(vals)
    spread_ok = all(s <= 0.05 for s in spreads.values())
    ok = gain >= 0.10 and sigma_ok and spread_ok and elapsed < 1800
    _report("symmetric-sweep", ok,
            f"weighted vs naive at p_flip=0.35: +{gain * 100:.1f}% (>= 10%); "
            f"all sigma variants above naive: {sigma_ok}; max spread at "
            f"p_flip<=0.15: {max(spreads.values()) * 100:.2f}% (<= 5%); "
            f"runtime {elapsed / 60:.1f} min (< 30)")


def test_asymmetric_sweep(asymmetric_records):
    records, elapsed = asymmetric_records
    naive = _mean(records, "psga-naive", 0.4)
    weighted = _mean(records, "psga-weighted", 0.4)
    gain = weighted / naive - 1.0
    methods = {row.method for row in summarize(records)}
    greedy = _mean(records, "greedy", 0.4)
    greedy_best = all(greedy >= _mean(records, m, 0.4) for m in methods)
    ok = gain >= 0.15 and greedy_best and elapsed < 1800
    _report("asymmetric-sweep", ok,
            f"weighted vs naive at p_miss=0.4: +{gain * 100:.1f}% (>= 15%); "
            f"greedy best method at 0.4: {greedy_best}; "
            f"runtime {elapsed / 60:.1f} min (< 30)")


def test_gamp_sweep(gamp_records):
    records, elapsed = gamp_records
    naive0 = _mean(records, "psga-naive", 0.0)
    sigma_gains = {s: _mean(records, f"psga-weighted-s{s:g}", 0.0) / naive0 - 1.0
                   for s in (0.05, 0.1, 0.2)}
    low_snr_ok = all(g >= 0.05 for g in sigma_gains.values())
    gradient_methods = ["psga-naive", "psga-weighted", "psga-weighted-s0.05",
                        "psga-weighted-s0.1", "psga-weighted-s0.2"]
    high_snr_ok = True
    worst_gap = 0.0
    for sweep in (18.0, 24.0):
        perfect = _mean(records, "psga-perfect", sweep)
        for m in gradient_methods:
            gap = abs(_mean(records, m, sweep) - perfect) / perfect
            worst_gap = max(worst_gap, gap)
            high_snr_ok &= gap <= 0.05
    ok = low_snr_ok and high_snr_ok and elapsed < 7200
    _report("gamp-sweep", ok,
            f"sigma-variant gains over naive at 0 dB: "
            f"{ {s: f'{g * 100:.1f}%' for s, g in sigma_gains.items()} } (>= 5%); "
            f"max gap to perfect at >= 18 dB: {worst_gap * 100:.2f}% (<= 5%); "
            f"runtime {elapsed / 60:.1f} min (< 120)")


def test_stationarity_surrogate():
    # diminishing steps on the 3-device instance (12-restart protocol): the
    # projected-gradient residual at the final iterate is tiny in at least
    # 90% of seeded runs.  The horizon is sized so the 0.5/t step tail both
    # finishes the travel (sum of steps grows like 0.5 ln t) and leaves a
    # last-step footprint well below the 1e-2 * delta resolution the finite
    # projection probe can distinguish.
    start = time.time()
    p = np.array([0.3, 0.4, 0.9])
    schedule = StepSchedule.diminishing(c=0.5, kappa=5.0)
    frames = 2_000_000
    hits = 0
    runs = 20
    residuals = []
    for i in range(runs):
        rng = np.random.default_rng(1000 + i)
        X = ao.sample_activity_stream(p, frames, rng)
        initials = [ao.random_allocation(3, 2, rng) for _ in range(12)]
        result = multi_start(
            lambda r: run_psga(initials[r], X, schedule, eval_every=frames),
            12, lambda A: ao.expected_throughput_independent(A, p))
        res = ao.projected_gradient_residual(result.allocation, p, delta=1e-4)
        residuals.append(res)
        hits += res < 1e-2
    ok = hits >= 0.9 * runs
    _report("stationarity-surrogate", ok,
            f"{hits}/{runs} runs reached projected-gradient residual < 1e-2 "
            f"(median {np.median(residuals):.2e}); "
            f"runtime {time.time() - start:.1f}s")
