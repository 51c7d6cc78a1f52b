"""Experiment configuration: defaults, config-file parsing, validation.

The five experiment kinds share one flat configuration record.  Defaults
mirror the reference setup: 20 devices, 5 slots, 10000 frames, 20
repetitions, 12 restarts, step size 0.01, weight clip 5.  Config files are
flat ``key = value`` text with ``#`` comments; command-line flags override
file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .seeding import derive_rng

EXPERIMENT_KINDS = ("example1", "symmetric", "asymmetric", "gamp", "trajectory")

# Heterogeneous 20-device scenario used by the pilot-detection experiment.
GAMP_ACTIVITY = (0.01, 0.03, 0.09, 0.14, 0.21, 0.21, 0.23, 0.27, 0.32, 0.33,
                 0.34, 0.42, 0.43, 0.47, 0.52, 0.56, 0.58, 0.61, 0.65, 0.8)
GAMP_CHANNEL_MODULI = (1.6, 0.8, 0.5, 0.5, 1.2, 1.0, 2.4, 0.3, 1.0, 0.1,
                       0.5, 1.2, 1.7, 0.2, 2.5, 1.6, 2.1, 1.4, 0.5, 0.2)


@dataclass(frozen=True)
class DetectorSettings:
    """Control-channel and detection-loop parameters.

    ``detection_prior`` selects the activity prior handed to the detector:
    "uninformative" uses Bernoulli(1/2) for every device, so activity is
    inferred from the pilots alone; "mean-activity" supplies the network's
    aggregate load as a shared sparsity level; "per-device" hands the
    detector the exact per-device probabilities, which at low SNR makes
    posteriors collapse onto the prior instead of the observation.
    """

    pilot_length: int = 15
    channel_moduli: tuple[float, ...] = GAMP_CHANNEL_MODULI
    max_iters: int = 50
    damping: float = 0.7
    tol: float = 1e-6
    threshold: float = 0.5
    estimation_frames: int = 10000
    detection_prior: str = "uninformative"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_devices: int = 20
    n_slots: int = 5
    frames: int = 10000
    repetitions: int = 20
    restarts: int = 12
    gamma: float = 0.01
    kappa: float = 5.0
    sigma_target_list: tuple[float, ...] = (0.05, 0.1, 0.2)
    sweep_values: tuple[float, ...] = ()
    p_kind: str = "uniform"            # "explicit" | "uniform"
    p_values: tuple[float, ...] = ()   # explicit per-device probabilities
    p_low: float = 0.0                 # uniform draw bounds
    p_high: float = 0.45
    p_alt: tuple[float, ...] = ()      # mixture alternative (example1)
    detector: DetectorSettings = field(default_factory=DetectorSettings)
    master_seed: int = 1
    out_dir: str = "results"
    eval_every: int = 50
    workers: int | None = None
    record_timing: bool = False

    def validate(self) -> None:
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind: {self.experiment!r}")
        if self.n_devices < 1 or self.n_slots < 1:
            raise ValueError("n_devices and n_slots must be >= 1")
        if self.frames < 1 or self.repetitions < 1 or self.restarts < 1:
            raise ValueError("frames, repetitions and restarts must be >= 1")
        if self.gamma <= 0.0 or self.kappa <= 0.0:
            raise ValueError("gamma and kappa must be positive")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if any(s < 0.0 for s in self.sigma_target_list):
            raise ValueError("sigma values must be nonnegative")
        if not self.sweep_values:
            raise ValueError("sweep_values must be non-empty")
        lo, hi = _sweep_domain(self.experiment)
        for v in self.sweep_values:
            if not lo <= v <= hi:
                raise ValueError(
                    f"sweep value {v} outside [{lo}, {hi}] for "
                    f"{self.experiment}")
        if self.p_kind == "explicit":
            if len(self.p_values) != self.n_devices:
                raise ValueError("p_values length must equal n_devices")
            if any(not 0.0 <= v <= 1.0 for v in self.p_values):
                raise ValueError("p_values must lie in [0, 1]")
        elif self.p_kind == "uniform":
            if not 0.0 <= self.p_low <= self.p_high <= 1.0:
                raise ValueError("uniform p bounds must satisfy 0 <= low <= high <= 1")
        else:
            raise ValueError(f"unknown p_kind: {self.p_kind!r}")
        if self.experiment == "example1":
            if len(self.p_alt) != self.n_devices:
                raise ValueError("example1 needs p_alt with one entry per device")
            if any(not 0.0 <= v <= 1.0 for v in self.p_alt):
                raise ValueError("p_alt must lie in [0, 1]")
        if self.experiment == "gamp":
            if len(self.detector.channel_moduli) != self.n_devices:
                raise ValueError("channel_moduli length must equal n_devices")
            if self.detector.pilot_length < 1:
                raise ValueError("pilot_length must be >= 1")
            if self.detector.estimation_frames < 1:
                raise ValueError("estimation_frames must be >= 1")
            if self.detector.detection_prior not in (
                    "uninformative", "mean-activity", "per-device"):
                raise ValueError(
                    "detection_prior must be 'uninformative', "
                    "'mean-activity' or 'per-device'")

    def resolve_p(self) -> np.ndarray:
        """The activity probabilities, drawn once per master seed if uniform."""
        if self.p_kind == "explicit":
            return np.asarray(self.p_values, dtype=np.float64)
        rng = derive_rng(self.master_seed, f"p/uniform:{self.p_low},{self.p_high}")
        return rng.uniform(self.p_low, self.p_high, size=self.n_devices)


def _sweep_domain(kind: str) -> tuple[float, float]:
    if kind == "example1":
        return 0.0, 1.0
    if kind in ("symmetric", "trajectory", "asymmetric"):
        return 0.0, 0.5
    return -np.inf, np.inf  # gamp sweeps transmit SNR in dB


def default_config(kind: str) -> ExperimentConfig:
    """Reference configuration for each experiment kind."""
    if kind == "example1":
        # 500 frames on the 3-device problem need a larger step than the
        # 20-device sweeps to converge within the run
        return ExperimentConfig(
            experiment="example1", n_devices=3, n_slots=2, frames=500,
            gamma=0.05,
            sweep_values=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
            p_kind="explicit", p_values=(0.3, 0.4, 0.9),
            p_alt=(0.9, 0.4, 0.3))
    if kind == "symmetric":
        return ExperimentConfig(
            experiment="symmetric",
            sweep_values=(0.0, 0.05, 0.1, 0.15, 0.25, 0.35, 0.45),
            p_kind="uniform", p_low=0.0, p_high=0.45)
    if kind == "asymmetric":
        return ExperimentConfig(
            experiment="asymmetric",
            sweep_values=(0.0, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5),
            p_kind="uniform", p_low=0.0, p_high=0.9)
    if kind == "gamp":
        return ExperimentConfig(
            experiment="gamp", sweep_values=(0.0, 3.0, 6.0, 9.0, 12.0, 18.0, 24.0),
            p_kind="explicit", p_values=GAMP_ACTIVITY)
    if kind == "trajectory":
        return ExperimentConfig(
            experiment="trajectory", sweep_values=(0.35,),
            p_kind="uniform", p_low=0.0, p_high=0.45)
    raise ValueError(f"unknown experiment kind: {kind!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(part) for part in text.split(","))


def load_config_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` config file into a string dict."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def apply_overrides(config: ExperimentConfig,
                    overrides: dict[str, str]) -> ExperimentConfig:
    """Apply string key/value overrides (from a file or CLI) to a config."""
    det = config.detector
    det_updates: dict = {}
    updates: dict = {}
    for key, value in overrides.items():
        if key in ("n_devices", "n_slots", "frames", "repetitions", "restarts",
                   "master_seed", "eval_every", "workers"):
            updates[key] = int(value)
        elif key in ("gamma", "kappa", "p_low", "p_high"):
            updates[key] = float(value)
        elif key in ("sweep_values", "sigma_target_list", "p_values", "p_alt"):
            updates[key] = _parse_floats(value)
        elif key == "record_timing":
            updates[key] = value.lower() in ("1", "true", "yes", "on")
        elif key == "out_dir":
            updates[key] = value
        elif key == "p_source":
            kind, _, rest = value.partition(":")
            kind = kind.strip()
            if kind == "explicit":
                updates["p_kind"] = "explicit"
                updates["p_values"] = _parse_floats(rest)
            elif kind == "uniform":
                lo, hi = _parse_floats(rest)
                updates["p_kind"] = "uniform"
                updates["p_low"] = lo
                updates["p_high"] = hi
            else:
                raise ValueError(f"unknown p_source kind: {kind!r}")
        elif key in ("pilot_length", "max_iters", "estimation_frames"):
            det_updates[key] = int(value)
        elif key in ("damping", "tol", "threshold"):
            det_updates[key] = float(value)
        elif key == "channel_moduli":
            det_updates[key] = _parse_floats(value)
        elif key == "detection_prior":
            det_updates[key] = value
        else:
            raise ValueError(f"unknown config key: {key!r}")
    if det_updates:
        updates["detector"] = replace(det, **det_updates)
    return replace(config, **updates)
