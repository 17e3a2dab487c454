"""Risk-sensitive Markov games: exact evaluation, equilibrium solvers and the
MARS-VI learner.

Specs, policies and games are plain dicts in the same JSON layout the
command-line tool reads and writes.
"""

import json

from . import _core
from ._core import (
    DomainError,
    InsufficientData,
    MarsGamesError,
    NotProductPolicy,
    ParameterError,
    ParseError,
    SolverFailure,
    ValidationError,
    phi,
)

__all__ = [
    "DomainError",
    "InsufficientData",
    "MarsGamesError",
    "NotProductPolicy",
    "ParameterError",
    "ParseError",
    "SolverFailure",
    "ValidationError",
    "best_modification_value",
    "best_response_value",
    "certify_approx",
    "episode_gaps",
    "fit_slope",
    "learn",
    "make_instance",
    "phi",
    "policy_value",
    "run_experiment",
    "solve",
    "verify",
]


def _dump(obj):
    return json.dumps(obj)


def make_instance(params):
    """Build an instance from generator params, e.g. {"kind": "random", ...}.

    Returns a dict with kind, params, spec and (for bias) fixture_policy.
    """
    return json.loads(_core.make_instance(_dump(params)))


def policy_value(spec, policy, agent):
    return _core.value(_dump(spec), _dump(policy), agent, "eval")


def best_response_value(spec, policy, agent):
    return _core.value(_dump(spec), _dump(policy), agent, "best_response")


def best_modification_value(spec, policy, agent):
    return _core.value(_dump(spec), _dump(policy), agent, "best_modification")


def episode_gaps(spec, policy, kind="cce"):
    return _core.episode_gaps(_dump(spec), _dump(policy), kind)


def certify_approx(spec, policy, kind="cce"):
    return _core.certify_approx(_dump(spec), _dump(policy), kind)


def solve(payoffs, action_sizes, kind="cce"):
    """Equilibrium of a one-shot game. payoffs[m][a] over joint actions a
    (agent 0 most significant)."""
    game = {"action_sizes": list(action_sizes), "payoffs": payoffs}
    return json.loads(_core.solve(_dump(game), kind))


def verify(payoffs, action_sizes, probs, kind="cce"):
    game = {"action_sizes": list(action_sizes), "payoffs": payoffs}
    return _core.verify(_dump(game), list(probs), kind)


def learn(spec, episodes, kind="cce", bonus_scale=1.0, delta=0.1, seed=0):
    """Run MARS-VI for `episodes` episodes; returns per-episode records and
    the certified policy."""
    return json.loads(_core.learn(_dump(spec), kind, bonus_scale, delta, episodes, seed))


def run_experiment(config):
    """Run a harness config dict; returns the parsed summary plus an "ok" flag."""
    return json.loads(_core.run_experiment(_dump(config)))


def fit_slope(xs, ys, window=0.5):
    return _core.fit_slope(list(xs), list(ys), window)
