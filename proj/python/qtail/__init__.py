"""Python front end to the qtail C++ core."""

import json

from ._qtail import (
    ChannelModel,
    ConfigError,
    DomainError,
    LinkParams,
    NumericError,
    PkSequence,
    StabilityError,
    StationaryDistribution,
    __version__,
    classify,
    classify_nakagami,
    effective_capacity,
    exp_integral_e1,
    log_exp_integral_e1,
    per_state_power,
    solve_decay_exponent,
    stationary,
    threshold_policy_avg_power,
    transmit_all_power,
    upper_incomplete_gamma,
    violation_probability,
)
from . import _qtail


def preset(experiment):
    """Built-in configuration for an experiment name (fig1, fig2, classify, ldt, custom)."""
    return json.loads(_qtail.preset_json(experiment))


def config_hash(config):
    return _qtail.config_hash_json(json.dumps(config))


def run_experiment(config):
    """Run a configuration dict; returns {"csv", "summary", "divergence"}."""
    csv, summary, divergence = _qtail.run_experiment_json(json.dumps(config))
    return {"csv": csv, "summary": json.loads(summary), "divergence": divergence}
