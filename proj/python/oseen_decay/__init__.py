"""Decay-rate experiments for the Oseen exterior problem.

Thin wrapper over the compiled core; configs travel as JSON text.
"""

import json

from ._core import (
    DomainError,
    RateInputs,
    heat_kernel,
    initial_potential,
    kernel_checks,
    oseen_kernel,
    predict_linear_rates,
    predict_nonlinear_rates,
    stokes_kernel,
    wake_weight,
    z_bound_counterexamples,
    z_bound_phi,
    z_value,
)
from . import _core

__all__ = [
    "DomainError",
    "RateInputs",
    "default_config",
    "heat_kernel",
    "initial_potential",
    "kernel_checks",
    "oseen_kernel",
    "predict_linear_rates",
    "predict_nonlinear_rates",
    "report",
    "run",
    "stokes_kernel",
    "validate_config",
    "wake_weight",
    "z_bound_counterexamples",
    "z_bound_phi",
    "z_value",
]


def default_config():
    return json.loads(_core.default_config())


def validate_config(config):
    """List of (kind, json_pointer, message); empty when the config is usable."""
    text = config if isinstance(config, str) else json.dumps(config)
    return [tuple(i) for i in _core.validate_config(text)]


def run(config):
    """Run every experiment. Returns (exit_code, log_text)."""
    issues = validate_config(config)
    if issues:
        raise ValueError("invalid config: " + "; ".join(f"{k} error at {p}: {m}" for k, p, m in issues))
    text = config if isinstance(config, str) else json.dumps(config)
    return _core.run(text)


def report(output_dir):
    """Re-aggregate a run directory. Returns (failed_rows, table)."""
    return _core.report(str(output_dir))
