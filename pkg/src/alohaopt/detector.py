"""Pilot-based control channel simulation and message-passing detection.

Each frame, active devices transmit complex Gaussian pilot sequences over
a block-fading channel observed through a single antenna.  With fewer
pilot symbols than devices the inverse problem is underdetermined, so
activity and channel coefficients are recovered jointly with a generalized
approximate message passing loop under a spike-and-slab prior: device i's
effective coefficient is 0 when inactive and complex Gaussian with
variance ``channel_prior_variance[i]`` when active (probability prior[i]).

The iteration settings (max_iters, damping, tolerance) and the per-device
prior variances are artifact configuration choices, exposed as arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activity import as_bits, as_probabilities

_LOGIT_CLIP = 700.0  # exp overflow guard


@dataclass(frozen=True)
class ChannelState:
    """Per-device fading coefficients and the control-channel noise level."""

    coefficients: np.ndarray
    noise_variance: float


@dataclass(frozen=True)
class DetectionResult:
    """Per-device activity posterior, hard decision and channel estimate."""

    posterior: np.ndarray
    hard_decision: np.ndarray
    channel_estimate: np.ndarray
    diverged: bool = False
    iterations: int = 0


def draw_pilots(n_symbols: int, n_devices: int,
                rng: np.random.Generator) -> np.ndarray:
    """Unit-power i.i.d. complex Gaussian pilot matrix, one column per device."""
    if n_symbols < 1 or n_devices < 1:
        raise ValueError("pilot dimensions must be >= 1")
    scale = np.sqrt(0.5)
    return scale * (rng.standard_normal((n_symbols, n_devices))
                    + 1j * rng.standard_normal((n_symbols, n_devices)))


def draw_channel(moduli, rng: np.random.Generator,
                 noise_variance: float = 0.0) -> ChannelState:
    """Fixed-modulus coefficients with fresh uniform phases."""
    moduli = np.asarray(moduli, dtype=np.float64)
    if moduli.ndim != 1 or np.any(moduli < 0.0):
        raise ValueError("moduli must be a 1-D nonnegative vector")
    if noise_variance < 0.0:
        raise ValueError("noise variance must be nonnegative")
    phases = rng.random(moduli.shape[0]) * 2.0 * np.pi
    return ChannelState(coefficients=moduli * np.exp(1j * phases),
                        noise_variance=float(noise_variance))


def simulate_control_channel(pilots: np.ndarray, channel: ChannelState, x,
                             rng: np.random.Generator) -> np.ndarray:
    """Received control-channel symbols: pilots of active devices plus noise."""
    x = as_bits(x)
    if pilots.ndim != 2 or pilots.shape[1] != x.shape[0]:
        raise ValueError("pilot matrix must be (T, N) matching the activity vector")
    if channel.coefficients.shape[0] != x.shape[0]:
        raise ValueError("channel coefficient count must match the activity vector")
    effective = x * channel.coefficients
    y = pilots @ effective
    if channel.noise_variance > 0.0:
        t = pilots.shape[0]
        scale = np.sqrt(channel.noise_variance / 2.0)
        y = y + scale * (rng.standard_normal(t) + 1j * rng.standard_normal(t))
    return y


def _logit(p: np.ndarray) -> np.ndarray:
    out = np.full(p.shape, -np.inf)
    out[p >= 1.0] = np.inf
    interior = (p > 0.0) & (p < 1.0)
    out[interior] = np.log(p[interior] / (1.0 - p[interior]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.clip(z, -_LOGIT_CLIP, _LOGIT_CLIP)
    return 1.0 / (1.0 + np.exp(-z))


def gamp_detect_batch(Y: np.ndarray, pilots: np.ndarray, prior,
                      channel_prior_variance, noise_variance: float,
                      max_iters: int = 50, damping: float = 0.7,
                      tol: float = 1e-6, threshold: float = 0.5):
    """Run the detection loop on many independent frames at once.

    Y       (F, T) received symbols per frame
    pilots  (F, T, N) per-frame pilot matrices

    Returns (posterior (F, N), hard_decision (F, N), channel_estimate (F, N),
    diverged (F,), iterations (F,)).  Frames are frozen individually as they
    converge, so each frame's output matches a single-frame run.  A frame
    whose state turns non-finite falls back to the prior and is flagged.
    """
    rho = as_probabilities(prior)
    Y = np.asarray(Y, dtype=np.complex128)
    pilots = np.asarray(pilots, dtype=np.complex128)
    if Y.ndim != 2 or pilots.ndim != 3 or pilots.shape[:2] != Y.shape:
        raise ValueError("need Y of shape (F, T) and pilots of shape (F, T, N)")
    n = rho.shape[0]
    if pilots.shape[2] != n:
        raise ValueError("pilot columns must match the prior length")
    v = np.broadcast_to(np.asarray(channel_prior_variance, dtype=np.float64),
                        (n,)).copy()
    if np.any(v <= 0.0):
        raise ValueError("channel prior variances must be positive")
    if noise_variance <= 0.0:
        raise ValueError("noise variance must be positive")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must be in (0, 1]")
    f_total = Y.shape[0]

    abs_s2 = np.abs(pilots) ** 2
    logit_rho = _logit(rho)

    x_hat = np.zeros((f_total, n), dtype=np.complex128)
    tau_x = np.tile(rho * v, (f_total, 1))
    s_hat = np.zeros_like(Y)
    pi_out = np.tile(rho, (f_total, 1))
    iters_out = np.zeros(f_total, dtype=np.int64)
    diverged = np.zeros(f_total, dtype=bool)
    active = np.ones(f_total, dtype=bool)

    for it in range(1, max_iters + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        S = pilots[idx]
        S2 = abs_s2[idx]
        y = Y[idx]
        xh = x_hat[idx]
        tx = tau_x[idx]
        sh = s_hat[idx]

        # non-finite intermediate states are caught below, so numeric
        # warnings from degenerate inputs are intentional no-ops here
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            # output step (AWGN likelihood)
            tau_p = np.einsum("fti,fi->ft", S2, tx)
            p_hat = np.einsum("fti,fi->ft", S, xh) - tau_p * sh
            denom = tau_p + noise_variance
            sh_new = (y - p_hat) / denom
            tau_s = 1.0 / denom

            # input step
            tau_r = 1.0 / np.einsum("fti,ft->fi", S2, tau_s)
            r = xh + tau_r * np.einsum("fti,ft->fi", np.conj(S), sh_new)

            # spike-and-slab denoiser
            abs_r2 = np.abs(r) ** 2
            ratio = v / (tau_r * (v + tau_r))
            lam = logit_rho + abs_r2 * ratio + np.log(tau_r / (v + tau_r))
            pi = _sigmoid(lam)
            pi = np.where(rho <= 0.0, 0.0, pi)
            pi = np.where(rho >= 1.0, 1.0, pi)
            m = (v / (v + tau_r)) * r
            s2 = v * tau_r / (v + tau_r)
            xh_new = pi * m
            tx_new = pi * s2 + pi * (1.0 - pi) * np.abs(m) ** 2

        # damped state update
        xh_d = damping * xh_new + (1.0 - damping) * xh
        tx_d = damping * tx_new + (1.0 - damping) * tx
        sh_d = damping * sh_new + (1.0 - damping) * sh

        finite = (np.isfinite(xh_d).all(axis=1)
                  & np.isfinite(tx_d).all(axis=1)
                  & np.isfinite(sh_d).all(axis=1)
                  & np.isfinite(pi).all(axis=1))
        delta = np.linalg.norm(xh_d - xh, axis=1)
        scale = np.maximum(np.linalg.norm(xh, axis=1), 1e-12)
        converged = delta / scale < tol

        x_hat[idx] = np.where(finite[:, None], xh_d, xh)
        tau_x[idx] = np.where(finite[:, None], np.maximum(tx_d, 0.0), tx)
        s_hat[idx] = np.where(finite[:, None], sh_d, sh)
        pi_out[idx[finite]] = pi[finite]
        iters_out[idx] = it

        bad = idx[~finite]
        diverged[bad] = True
        pi_out[bad] = rho
        x_hat[bad] = 0.0
        active[bad] = False
        active[idx[finite & converged]] = False

    hard = (pi_out >= threshold).astype(np.uint8)
    return pi_out, hard, x_hat, diverged, iters_out


def gamp_detect(y, pilots, prior, channel_prior_variance,
                noise_variance: float, max_iters: int = 50,
                damping: float = 0.7, tol: float = 1e-6,
                threshold: float = 0.5) -> DetectionResult:
    """Detect activity and channel coefficients for one frame."""
    y = np.asarray(y, dtype=np.complex128)
    pilots = np.asarray(pilots, dtype=np.complex128)
    if y.ndim != 1 or pilots.ndim != 2:
        raise ValueError("expected a single frame: y (T,), pilots (T, N)")
    pi, hard, xh, div, iters = gamp_detect_batch(
        y[None, :], pilots[None, :, :], prior, channel_prior_variance,
        noise_variance, max_iters=max_iters, damping=damping, tol=tol,
        threshold=threshold)
    return DetectionResult(posterior=pi[0], hard_decision=hard[0],
                           channel_estimate=xh[0], diverged=bool(div[0]),
                           iterations=int(iters[0]))


def estimate_proposal_empirical(detected) -> np.ndarray:
    """Per-device detection frequency with add-one smoothing.

    Smoothing keeps every estimate strictly inside (0, 1) so downstream
    importance weights never divide by zero.
    """
    X = np.asarray(detected)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("need at least one detected vector, shape (frames, N)")
    counts = X.astype(np.float64).sum(axis=0)
    return (counts + 1.0) / (X.shape[0] + 2.0)
