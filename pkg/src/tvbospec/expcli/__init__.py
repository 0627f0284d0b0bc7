"""Experiment CLI: reproducible CSV + SVG artifact generation."""

from .experiments import EXPERIMENTS, default_config, run_experiment, validate_config

__all__ = ["EXPERIMENTS", "default_config", "run_experiment", "validate_config"]
