"""Python face of the ergodic-lab native core.

The heavy lifting lives in the compiled module; this wrapper adds json
decoding for the experiment harness so reports come back as plain dicts.
"""

import json as _json

from ._ergodic_lab import (
    BanditParams,
    bandit_mean_at,
    bandit_path,
    bandit_tv_rate,
    bandit_uM,
    evaluate_RT,
    fbm_covariance,
    fbm_path,
    fit_exp_rate,
    kuramoto_fixed_point,
    kuramoto_order_parameter,
    kuramoto_psi,
    kuramoto_spectrum,
    moment_condition,
    rankine_hugoniot,
    registry_json,
    run_experiment_json,
    solve_wave,
    wasserstein,
)

__all__ = [
    "BanditParams",
    "bandit_mean_at",
    "bandit_path",
    "bandit_tv_rate",
    "bandit_uM",
    "evaluate_RT",
    "fbm_covariance",
    "fbm_path",
    "fit_exp_rate",
    "kuramoto_fixed_point",
    "kuramoto_order_parameter",
    "kuramoto_psi",
    "kuramoto_spectrum",
    "list_experiments",
    "moment_condition",
    "rankine_hugoniot",
    "run_experiment",
    "solve_wave",
    "wasserstein",
]


def list_experiments():
    """Registered experiments with their parameter specs."""
    return _json.loads(registry_json())


def run_experiment(name, params=None, seed=1, replicas=1):
    """Runs a registered experiment; returns the report as a dict."""
    return _json.loads(run_experiment_json(name, params or {}, seed, replicas))
