"""Device-activity models, detection-error channels and importance weights.

Device activity in a frame is a binary vector drawn from independent
per-device Bernoulli distributions.  Detection errors are modelled as
memoryless channels acting on that vector (symmetric or asymmetric bit
flips, or a per-frame mixture with an alternative distribution).  The
importance weight of an observed vector is the ratio of its probability
under a target distribution to its probability under the proposal
distribution that actually generated it; weights are optionally clipped.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

# Weight clip bound used when a degenerate ratio must be bounded and the
# caller supplied no explicit clip (matches the experiment default).
DEFAULT_CLIP_BOUND = 5.0


class WeightDegeneracyWarning(UserWarning):
    """An observed vector has zero proposal probability but positive target
    probability; the weight was forced to the clip bound."""


@dataclass(frozen=True)
class ImportanceWeight:
    """Target/proposal probability ratio for one observed activity vector."""

    value: float
    clipped: bool = False


def as_probabilities(p) -> np.ndarray:
    """Validate and return a 1-D float64 vector of probabilities in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"probability vector must be 1-D, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("probability vector contains non-finite entries")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def as_bits(x) -> np.ndarray:
    """Validate and return a 1-D uint8 vector with entries in {0, 1}."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError(f"activity vector must be 1-D, got shape {x.shape}")
    b = x.astype(np.uint8)
    if np.any((x != 0) & (x != 1)):
        raise ValueError("activity vector entries must be 0 or 1")
    return b


def sample_activity(p, rng: np.random.Generator) -> np.ndarray:
    """Draw one activity vector: bit i is 1 with probability ``p[i]``."""
    p = as_probabilities(p)
    return (rng.random(p.shape[0]) < p).astype(np.uint8)


def sample_activity_stream(p, frames: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``frames`` independent activity vectors as a (frames, N) array."""
    p = as_probabilities(p)
    return (rng.random((frames, p.shape[0])) < p).astype(np.uint8)


def joint_probability(p, x) -> float:
    """Probability of observing vector ``x`` under independent Bernoulli ``p``."""
    p = as_probabilities(p)
    x = as_bits(x)
    if p.shape != x.shape:
        raise ValueError("length mismatch between probabilities and vector")
    return float(np.prod(np.where(x == 1, p, 1.0 - p)))


def flip_symmetric(x, p_flip: float, rng: np.random.Generator) -> np.ndarray:
    """Invert each bit independently with probability ``p_flip``.

    Models a detector whose false-alarm and miss probabilities are equal.
    """
    if not 0.0 <= p_flip <= 0.5:
        raise ValueError(f"p_flip must be in [0, 0.5], got {p_flip}")
    x = as_bits(x)
    flips = rng.random(x.shape[0]) < p_flip
    return (x ^ flips).astype(np.uint8)


def flip_asymmetric(x, p_miss: float, rng: np.random.Generator) -> np.ndarray:
    """Zero each 1-bit independently with probability ``p_miss``.

    Models a detector with no false alarms: inactive devices are never
    reported active.
    """
    if not 0.0 <= p_miss <= 0.5:
        raise ValueError(f"p_miss must be in [0, 0.5], got {p_miss}")
    x = as_bits(x)
    kept = rng.random(x.shape[0]) >= p_miss
    return (x & kept).astype(np.uint8)


def induced_proposal_symmetric(p, p_flip: float) -> np.ndarray:
    """Marginal activity law after the symmetric flip channel."""
    if not 0.0 <= p_flip <= 0.5:
        raise ValueError(f"p_flip must be in [0, 0.5], got {p_flip}")
    p = as_probabilities(p)
    return p + p_flip - 2.0 * p_flip * p


def induced_proposal_asymmetric(p, p_miss: float) -> np.ndarray:
    """Marginal activity law after the miss-only channel."""
    if not 0.0 <= p_miss <= 0.5:
        raise ValueError(f"p_miss must be in [0, 0.5], got {p_miss}")
    p = as_probabilities(p)
    return (1.0 - p_miss) * p


def sample_mixture(p, p_alt, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Draw a whole vector from ``p_alt`` with probability ``eps``, else from ``p``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}")
    p = as_probabilities(p)
    p_alt = as_probabilities(p_alt)
    if p.shape != p_alt.shape:
        raise ValueError("mixture components must have equal length")
    chosen = p_alt if rng.random() < eps else p
    return sample_activity(chosen, rng)


def perturb_target(p, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add zero-mean Gaussian noise (std ``sigma``) per entry and clamp to [0, 1].

    No renormalization: each entry is an independent Bernoulli parameter.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    p = as_probabilities(p)
    if sigma == 0.0:
        return p.copy()
    return np.clip(p + rng.normal(0.0, sigma, size=p.shape[0]), 0.0, 1.0)


def importance_weight(target, proposal, x, clip: float | None = None) -> ImportanceWeight:
    """Weight of ``x``: Pr_target(x) / Pr_proposal(x), optionally clipped.

    Degenerate ratios follow fixed conventions: 0/0 yields 0; a positive
    numerator over a zero denominator yields the clip bound (the module
    default when ``clip`` is None) and raises :class:`WeightDegeneracyWarning`,
    since an observation the proposal cannot produce signals model mismatch.
    """
    if clip is not None and clip <= 0.0:
        raise ValueError(f"clip bound must be positive, got {clip}")
    num = joint_probability(target, x)
    den = joint_probability(proposal, x)
    if den == 0.0:
        if num == 0.0:
            return ImportanceWeight(0.0, clipped=False)
        bound = DEFAULT_CLIP_BOUND if clip is None else clip
        warnings.warn(
            "observed vector has zero proposal probability but positive "
            f"target probability; weight forced to clip bound {bound}",
            WeightDegeneracyWarning,
            stacklevel=2,
        )
        return ImportanceWeight(float(bound), clipped=True)
    ratio = num / den
    if clip is not None and ratio > clip:
        return ImportanceWeight(float(clip), clipped=True)
    return ImportanceWeight(float(ratio), clipped=False)


def batch_importance_weights(target, proposal, observed: np.ndarray,
                             clip=None) -> np.ndarray:
    """Vectorized :func:`importance_weight` values for a (frames, N) stream.

    ``clip`` may be None, a scalar, or a per-frame array of bounds.
    Degeneracy conventions match the scalar function.
    """
    target = as_probabilities(target)
    proposal = as_probabilities(proposal)
    observed = np.asarray(observed)
    if observed.ndim != 2 or observed.shape[1] != target.shape[0]:
        raise ValueError("observed stream must have shape (frames, N)")
    on = observed.astype(bool)
    nums = np.prod(np.where(on, target, 1.0 - target), axis=1)
    dens = np.prod(np.where(on, proposal, 1.0 - proposal), axis=1)
    if clip is None:
        bounds = None
    else:
        bounds = np.broadcast_to(np.asarray(clip, dtype=np.float64),
                                 (observed.shape[0],))
        if np.any(bounds <= 0.0):
            raise ValueError("clip bounds must be positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(dens > 0.0, nums / np.where(dens > 0.0, dens, 1.0), 0.0)
    degenerate = (dens == 0.0) & (nums > 0.0)
    if np.any(degenerate):
        fallback = DEFAULT_CLIP_BOUND if bounds is None else bounds[degenerate]
        w[degenerate] = fallback
        warnings.warn(
            f"{int(degenerate.sum())} observed frame(s) have zero proposal "
            "probability but positive target probability; weights forced to "
            "the clip bound",
            WeightDegeneracyWarning,
            stacklevel=2,
        )
    if bounds is not None:
        w = np.minimum(w, bounds)
    return w
