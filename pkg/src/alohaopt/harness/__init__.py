"""Experiment harness: configuration, seeding, sweep drivers, CSV records."""

from .config import DetectorSettings, ExperimentConfig, default_config
from .records import RunRecord, SummaryRow, read_records, summarize, write_records
from .seeding import seed_plan
from .experiments import run_experiment, write_manifest

__all__ = [
    "DetectorSettings",
    "ExperimentConfig",
    "default_config",
    "RunRecord",
    "SummaryRow",
    "read_records",
    "summarize",
    "write_records",
    "seed_plan",
    "run_experiment",
    "write_manifest",
]
