"""Gradient correctness, the ascent recursion, multi-start and diagnostics."""

import numpy as np
import pytest

import alohaopt as ao
from alohaopt.optimizer import (MultiStartResult, OptimizerState, StepSchedule,
                                multi_start, psga_step, run_clipped_psga,
                                run_psga, run_weighted_psga)


def gradient_direct(A, x):
    """Literal elementwise transcription of the gradient formula."""
    n, k = A.shape
    g = np.zeros((n, k))
    for q in range(n):
        for l in range(k):
            first = float(x[q])
            for m in range(n):
                if m != q:
                    first *= 1.0 - x[m] * A[m, l]
            second = 0.0
            for n2 in range(n):
                if n2 == q:
                    continue
                term = float(x[q]) * x[n2] * A[n2, l]
                for m in range(n):
                    if m != n2 and m != q:
                        term *= 1.0 - x[m] * A[m, l]
                second += term
            g[q, l] = first - second
    return g


def test_gradient_trivial_cases():
    assert np.allclose(ao.stochastic_gradient(np.array([[0.4, 0.6]]), [1]), 1.0)
    A = ao.aloha_allocation(3, 2)
    assert np.all(ao.stochastic_gradient(A, [0, 0, 0]) == 0.0)
    assert np.allclose(ao.stochastic_gradient(ao.aloha_allocation(2, 2), [1, 1]),
                       0.0, atol=1e-15)


def test_gradient_matches_direct_formula():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(1, 5))
        A = ao.random_allocation(n, k, rng)
        x = (rng.random(n) < 0.5).astype(np.uint8)
        assert np.allclose(ao.stochastic_gradient(A, x), gradient_direct(A, x),
                           atol=1e-12)


def test_gradient_matches_finite_differences_of_instantaneous():
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(10):
        A = ao.random_allocation(5, 3, rng)
        x = (rng.random(5) < 0.6).astype(np.uint8)
        g = ao.stochastic_gradient(A, x)

        def t_of(M):
            xf = x.astype(float)
            total = 0.0
            for i in range(5):
                if not x[i]:
                    continue
                others = np.prod([1.0 - xf[m] * M[m] for m in range(5) if m != i],
                                 axis=0)
                total += float(np.sum(M[i] * others))
            return total

        for q in range(5):
            for l in range(3):
                up, down = A.copy(), A.copy()
                up[q, l] += h
                down[q, l] -= h
                fd = (t_of(up) - t_of(down)) / (2 * h)
                assert g[q, l] == pytest.approx(fd, abs=1e-6)


def test_gradient_bounds():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(1, 10))
        A = ao.random_allocation(n, 3, rng)
        x = (rng.random(n) < 0.5).astype(np.uint8)
        g = ao.stochastic_gradient(A, x)
        assert np.all(np.isfinite(g)) and np.all(np.abs(g) <= n)


def test_exact_gradient_trivial():
    A = ao.aloha_allocation(4, 2)
    assert np.all(ao.exact_gradient_independent(A, np.zeros(4)) == 0.0)
    g1 = ao.exact_gradient_independent(np.array([[0.3, 0.7]]), [0.8])
    assert np.allclose(g1, 0.8)


def test_exact_gradient_is_mean_stochastic_gradient():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = ao.random_allocation(6, 3, rng)
        p = rng.random(6)
        gap = np.abs(ao.exact_gradient_independent(A, p)
                     - ao.expected_gradient_enumerate(A, p))
        assert np.max(gap) < 1e-10


def test_exact_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    h = 1e-6
    for _ in range(5):
        A = ao.random_allocation(5, 3, rng)
        p = rng.random(5)
        g = ao.exact_gradient_independent(A, p)

        def t_of(M):
            total = 0.0
            for i in range(5):
                others = np.prod([1.0 - p[m] * M[m] for m in range(5) if m != i],
                                 axis=0)
                total += float(np.sum(p[i] * M[i] * others))
            return total

        for q in range(5):
            for l in range(3):
                up, down = A.copy(), A.copy()
                up[q, l] += h
                down[q, l] -= h
                fd = (t_of(up) - t_of(down)) / (2 * h)
                scale = max(abs(g[q, l]), 1.0)
                assert abs(g[q, l] - fd) / scale < 1e-5


def test_weighted_unbiasedness_by_enumeration():
    # E_{x~p_hat}[w(x) g(A, x)] recovers the error-free gradient expectation
    rng = np.random.default_rng(5)
    for _ in range(5):
        A = ao.random_allocation(5, 2, rng)
        p = rng.random(5)
        p_hat = rng.uniform(0.05, 0.95, 5)
        beta = ao.bias_diagnostic(A, p, p_hat, weighted=True)
        assert np.max(np.abs(beta)) < 1e-10


def test_bias_diagnostic():
    rng = np.random.default_rng(6)
    A = ao.random_allocation(3, 2, rng)
    p = np.array([0.3, 0.4, 0.9])
    assert np.allclose(ao.bias_diagnostic(A, p, p), 0.0, atol=1e-14)
    beta = ao.bias_diagnostic(A, p, np.array([0.9, 0.4, 0.3]))
    assert np.max(np.abs(beta)) > 1e-3
    with pytest.raises(ValueError):
        ao.bias_diagnostic(ao.aloha_allocation(11, 2), np.full(11, 0.5),
                           np.full(11, 0.5))


def test_psga_step_no_ops():
    rng = np.random.default_rng(7)
    A = ao.random_allocation(4, 3, rng)
    sch = StepSchedule.constant(0.01, 5.0)
    state = OptimizerState(allocation=A)
    out = psga_step(state, [1, 0, 1, 1], 0.0, sch)
    assert np.array_equal(out.allocation, A) and out.frame == 1
    out = psga_step(state, [0, 0, 0, 0], 1.0, sch)
    assert np.allclose(out.allocation, A, atol=1e-15)


def test_psga_step_uniform_shift_projects_back():
    sch = StepSchedule.constant(0.01, 5.0)
    state = OptimizerState(allocation=np.array([[0.5, 0.5]]))
    out = psga_step(state, [1], 1.0, sch)
    assert np.allclose(out.allocation, [[0.5, 0.5]], atol=1e-15)


def test_run_psga_zero_frames():
    rng = np.random.default_rng(8)
    A0 = ao.random_allocation(3, 2, rng)
    traj = run_psga(A0, np.zeros((0, 3), dtype=np.uint8),
                    StepSchedule.constant(), frames=0)
    assert len(traj) == 1 and traj.frames[0] == 0
    assert np.array_equal(traj.final_allocation, A0)


def test_run_psga_matches_step_loop():
    rng = np.random.default_rng(9)
    p = np.array([0.3, 0.4, 0.9])
    X = ao.sample_activity_stream(p, 300, rng)
    A0 = ao.random_allocation(3, 2, rng)
    sch = StepSchedule.constant(0.02, 5.0)
    traj = run_psga(A0, X, sch, eval_every=100)
    state = OptimizerState(allocation=A0)
    snaps = {0: A0}
    for t in range(300):
        state = psga_step(state, X[t], 1.0, sch)
        snaps[state.frame] = state.allocation
    for t, A in traj:
        assert np.allclose(A, snaps[int(t)], atol=1e-12)


def test_run_psga_learns_small_network():
    # best of 12 restarts on the 3-device problem reaches the known optimum zone
    p = np.array([0.3, 0.4, 0.9])
    rng = np.random.default_rng(10)
    X = ao.sample_activity_stream(p, 500, rng)
    sch = StepSchedule.constant(0.05, 5.0)
    result = multi_start(
        lambda r: run_psga(ao.random_allocation(3, 2, rng), X, sch),
        12, lambda A: ao.expected_throughput_independent(A, p))
    assert result.value >= 1.30
    assert result.value > 0.931  # clearly above the uniform allocation


def test_weighted_run_with_matching_proposal_is_unweighted():
    rng = np.random.default_rng(11)
    p = np.array([0.2, 0.6, 0.8, 0.1])
    X = ao.sample_activity_stream(p, 400, rng)
    A0 = ao.random_allocation(4, 2, rng)
    sch = StepSchedule.constant(0.01, 5.0)
    a = run_psga(A0, X, sch, eval_every=100)
    b = run_weighted_psga(A0, X, p, p, sch, eval_every=100)
    assert np.array_equal(a.allocations, b.allocations)


def test_clipped_run_with_exact_target_and_huge_clip_matches_weighted():
    rng = np.random.default_rng(12)
    p = np.array([0.2, 0.6, 0.8])
    p_hat = ao.induced_proposal_symmetric(p, 0.2)
    X = ao.sample_activity_stream(p_hat, 400, rng)
    A0 = ao.random_allocation(3, 2, rng)
    unclipped = StepSchedule.constant(0.01, 1e12)
    a = run_weighted_psga(A0, X, p, p_hat, StepSchedule.constant(0.01, 5.0),
                          eval_every=100)
    b = run_clipped_psga(A0, X, p, p_hat, unclipped, eval_every=100)
    assert np.array_equal(a.allocations, b.allocations)


def test_clip_arithmetic():
    w = ao.batch_importance_weights([0.9], [0.1], np.array([[1]]), clip=5.0)
    assert w[0] == 5.0  # raw ratio 9 clipped


def test_all_zero_observed_frame_is_noop():
    rng = np.random.default_rng(13)
    p = np.array([0.3, 0.5])
    A0 = ao.random_allocation(2, 2, rng)
    X = np.zeros((5, 2), dtype=np.uint8)
    traj = run_weighted_psga(A0, X, p, ao.induced_proposal_symmetric(p, 0.1),
                             StepSchedule.constant(), eval_every=1)
    w = ao.batch_importance_weights(p, ao.induced_proposal_symmetric(p, 0.1), X)
    assert np.all(np.isfinite(w))
    for _, A in traj:
        assert np.array_equal(A, A0)


def test_sigma_sweep_degrades_monotonically_on_average():
    rng = np.random.default_rng(14)
    p = rng.uniform(0.05, 0.45, 10)
    p_hat = ao.induced_proposal_symmetric(p, 0.2)
    sch = StepSchedule.constant(0.01, 5.0)
    means = []
    for sigma in (0.0, 0.2, 0.5):
        finals = []
        for rep in range(12):
            rep_rng = np.random.default_rng(1000 + rep)
            X = ao.sample_activity_stream(p, 2000, rep_rng)
            flips = rep_rng.random((2000, 10)) < 0.2
            obs = (X ^ flips).astype(np.uint8)
            target = ao.perturb_target(p, sigma, rep_rng)
            A0 = ao.random_allocation(10, 3, rep_rng)
            traj = run_clipped_psga(A0, obs, target, p_hat, sch, eval_every=2000)
            finals.append(ao.expected_throughput_independent(
                traj.final_allocation, p))
        means.append(np.mean(finals))
    assert means[0] >= means[1] >= means[2]


def test_multi_start_identity_and_max_property():
    rng = np.random.default_rng(15)
    p = np.array([0.3, 0.4, 0.9])
    X = ao.sample_activity_stream(p, 200, rng)
    sch = StepSchedule.constant(0.02, 5.0)
    initials = [ao.random_allocation(3, 2, rng) for _ in range(6)]

    def run(r):
        return run_psga(initials[r], X, sch)

    def ev(A):
        return ao.expected_throughput_independent(A, p)

    single = multi_start(run, 1, ev)
    assert isinstance(single, MultiStartResult)
    assert np.array_equal(single.allocation, run(0).final_allocation)
    result = multi_start(run, 6, ev)
    assert result.value == pytest.approx(result.restart_values.max())
    assert all(result.value >= v for v in result.restart_values)


def test_multi_start_reduces_variance():
    # across repetitions, best-of-12 finals vary strictly less than 1-restart;
    # run length short enough that single restarts still differ
    p = np.array([0.3, 0.4, 0.9])
    sch = StepSchedule.constant(0.01, 5.0)

    def ev(A):
        return ao.expected_throughput_independent(A, p)

    finals_1, finals_12 = [], []
    for rep in range(20):
        rng = np.random.default_rng(500 + rep)
        X = ao.sample_activity_stream(p, 300, rng)
        initials = [ao.random_allocation(3, 2, rng) for _ in range(12)]

        def run(r):
            return run_psga(initials[r], X, sch)

        finals_1.append(multi_start(run, 1, ev).value)
        finals_12.append(multi_start(run, 12, ev).value)
    assert np.std(finals_12, ddof=1) < np.std(finals_1, ddof=1)


def test_weighted_gradient_norm_stays_bounded():
    rng = np.random.default_rng(16)
    p = rng.uniform(0.05, 0.5, 8)
    p_hat = ao.induced_proposal_symmetric(p, 0.3)
    X = ao.sample_activity_stream(p_hat, 2000, rng)
    w = ao.batch_importance_weights(p, p_hat, X)
    A = ao.random_allocation(8, 3, rng)
    sup = max(float(np.linalg.norm(w[t] * ao.stochastic_gradient(A, X[t])))
              for t in range(2000))
    assert np.isfinite(sup)


def test_schedules():
    const = StepSchedule.constant(0.01, 5.0)
    assert const.gamma(1) == const.gamma(1000) == 0.01
    assert const.kappa(3) == 5.0 and not const.robbins_monro
    dim = StepSchedule.diminishing(c=0.5)
    assert dim.robbins_monro
    ts = np.arange(1, 10_001)
    gs = np.array([dim.gamma(int(t)) for t in ts])
    assert np.all(gs > 0)
    assert np.allclose(gs, 0.5 / ts)  # c/t family: divergent sum, summable squares
    with pytest.raises(ValueError):
        StepSchedule.constant(gamma=0.0)


def test_iterates_stay_on_simplex():
    rng = np.random.default_rng(17)
    p = rng.uniform(0.0, 0.5, 6)
    X = ao.sample_activity_stream(p, 500, rng)
    traj = run_psga(ao.random_allocation(6, 3, rng), X,
                    StepSchedule.constant(0.05, 5.0), eval_every=1)
    for _, A in traj:
        assert np.all(A >= 0.0)
        assert np.allclose(A.sum(axis=1), 1.0, atol=1e-9)


def test_deterministic_replay():
    p = np.array([0.2, 0.5, 0.8])

    def one_run():
        rng = np.random.default_rng(99)
        X = ao.sample_activity_stream(p, 300, rng)
        A0 = ao.random_allocation(3, 2, rng)
        return run_psga(A0, X, StepSchedule.constant(), eval_every=50)

    a, b = one_run(), one_run()
    assert np.array_equal(a.allocations, b.allocations)
    assert np.array_equal(a.frames, b.frames)


def test_projected_gradient_residual_at_corner_optimum():
    p = np.array([0.3, 0.4, 0.9])
    A = ao.greedy_allocation(p, 2)  # the known optimum of this instance
    assert ao.projected_gradient_residual(A, p) < 1e-12
