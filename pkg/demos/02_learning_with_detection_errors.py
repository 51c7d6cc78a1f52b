"""Learning slot allocations from error-prone activity estimates.

A projected stochastic gradient ascent run learns the allocation from
per-frame activity vectors.  When the access point's activity estimates are
corrupted (here: with probability eps the estimate is drawn from a wrong
distribution that swaps the busy and quiet devices), the gradient becomes
biased and the learned allocation serves the wrong device.  Importance
weights - the ratio of the true to the observed activity law at each
observed vector - remove that bias; weight clipping keeps steps bounded
when the ratio explodes.
"""

import numpy as np

import alohaopt as ao
from alohaopt.optimizer import StepSchedule, multi_start, run_psga, run_weighted_psga

p = np.array([0.3, 0.4, 0.9])
p_wrong = np.array([0.9, 0.4, 0.3])
eps = 0.8
frames = 500
schedule = StepSchedule.constant(gamma=0.05, kappa=5.0)
rng = np.random.default_rng(11)

X = ao.sample_activity_stream(p, frames, rng)
corrupted = rng.random(frames) < eps
fake = ao.sample_activity_stream(p_wrong, frames, rng)
observed = np.where(corrupted[:, None], fake, X).astype(np.uint8)
# per-device law of the observed stream: the eps-mixture of both components
proposal = (1 - eps) * p + eps * p_wrong

initials = [ao.random_allocation(3, 2, rng) for _ in range(12)]


def evaluate(A):
    return ao.expected_throughput_independent(A, p)


def best(run):
    return multi_start(run, 12, evaluate)


perfect = best(lambda r: run_psga(initials[r], X, schedule))
naive = best(lambda r: run_psga(initials[r], observed, schedule))
weighted = best(lambda r: run_weighted_psga(initials[r], observed, p,
                                            proposal, schedule))

print(f"true p = {p}, corrupted estimates follow {p_wrong} "
      f"with probability {eps}\n")
print(f"{'method':<34} {'throughput under true p':>24}")
print(f"{'ALOHA baseline':<34} {evaluate(ao.aloha_allocation(3, 2)):>24.4f}")
print(f"{'learned, error-free estimates':<34} {perfect.value:>24.4f}")
print(f"{'learned, corrupted estimates':<34} {naive.value:>24.4f}")
print(f"{'learned, importance-weighted':<34} {weighted.value:>24.4f}")

beta = ao.bias_diagnostic(ao.aloha_allocation(3, 2), p, proposal)
beta_w = ao.bias_diagnostic(ao.aloha_allocation(3, 2), p, proposal,
                            weighted=True)
print(f"\ngradient bias at the uniform allocation: max entry "
      f"{np.max(np.abs(beta)):.4f} unweighted, "
      f"{np.max(np.abs(beta_w)):.2e} after weighting")
