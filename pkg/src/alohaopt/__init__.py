"""Slot-allocation optimization for frame slotted ALOHA with heterogeneous,
imperfectly detected device activity.

The library simulates per-frame device activity, error-prone activity
detection (bit-flip channels or pilot-based message-passing detection),
and learns per-device slot-selection probabilities by projected stochastic
gradient ascent on the throughput, with importance-weighted bias correction
when the observed activity stream is error-prone.
"""

__version__ = "0.1.0"

from .activity import (DEFAULT_CLIP_BOUND, ImportanceWeight,
                       WeightDegeneracyWarning, batch_importance_weights,
                       flip_asymmetric, flip_symmetric,
                       importance_weight, induced_proposal_asymmetric,
                       induced_proposal_symmetric, joint_probability,
                       perturb_target, sample_activity,
                       sample_activity_stream, sample_mixture)
from .allocation import (aloha_allocation, greedy_allocation,
                         project_allocation, project_row_simplex,
                         random_allocation, validate_allocation)
from .detector import (ChannelState, DetectionResult, draw_channel,
                       draw_pilots, estimate_proposal_empirical, gamp_detect,
                       gamp_detect_batch, simulate_control_channel)
from .metrics import (ThroughputReport, expected_throughput_batch,
                      expected_throughput_enumerate,
                      expected_throughput_independent,
                      instantaneous_throughput, monte_carlo_throughput,
                      normalized_throughput)
from .optimizer import (MultiStartResult, OptimizerState, StepSchedule,
                        Trajectory, bias_diagnostic,
                        exact_gradient_independent,
                        expected_gradient_enumerate, multi_start,
                        projected_gradient_residual, psga_step,
                        run_clipped_psga, run_psga, run_weighted_psga,
                        stochastic_gradient)

__all__ = [
    "DEFAULT_CLIP_BOUND", "ImportanceWeight", "WeightDegeneracyWarning",
    "batch_importance_weights", "flip_asymmetric", "flip_symmetric",
    "importance_weight", "induced_proposal_asymmetric",
    "induced_proposal_symmetric", "joint_probability", "perturb_target",
    "sample_activity", "sample_activity_stream", "sample_mixture",
    "aloha_allocation", "greedy_allocation", "project_allocation",
    "project_row_simplex", "random_allocation", "validate_allocation",
    "ChannelState", "DetectionResult", "draw_channel", "draw_pilots",
    "estimate_proposal_empirical", "gamp_detect", "gamp_detect_batch",
    "simulate_control_channel",
    "ThroughputReport", "expected_throughput_batch",
    "expected_throughput_enumerate", "expected_throughput_independent",
    "instantaneous_throughput", "monte_carlo_throughput",
    "normalized_throughput",
    "MultiStartResult", "OptimizerState", "StepSchedule", "Trajectory",
    "bias_diagnostic", "exact_gradient_independent",
    "expected_gradient_enumerate", "multi_start",
    "projected_gradient_residual", "psga_step", "run_clipped_psga",
    "run_psga", "run_weighted_psga", "stochastic_gradient",
    "__version__",
]
