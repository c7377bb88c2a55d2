"""Multi-spike travelling waves of integrate-and-fire networks.

Parameters are passed as keyword arguments (beta=..., n=..., d1=...) on top
of the library defaults. Records come back as plain dictionaries.
"""

import json

from . import _core
from ._core import ConfigError, NumericalError, SpikewaveError, ValidationError

__all__ = [
    "ConfigError",
    "NumericalError",
    "SpikewaveError",
    "ValidationError",
    "continue_branch",
    "experiment_kinds",
    "run_experiment",
    "simulate",
    "solve_wave",
    "stability",
    "verify",
]


def _assignments(params):
    return [f"{k}={float(v)!r}" for k, v in params.items()]


def _wave(wave):
    return float(wave["c"]), [float(t) for t in wave["T"]]


def solve_wave(m, c=0.3, T=None, **params):
    """Solve for TW_m from the guess (c, T). T defaults to 0.8-spaced offsets."""
    if T is None:
        T = [0.8 * j for j in range(m)]
    return json.loads(_core.solve_wave(int(m), float(c), [float(t) for t in T], _assignments(params)))


def stability(wave, re_min=0.0, re_max=0.0, im_max=0.0, n_re=101, n_im=101, threads=1, **params):
    """Classify a wave; zero window bounds select the defaults."""
    c, T = _wave(wave)
    return json.loads(_core.stability(c, T, _assignments(params), re_min, re_max, im_max, n_re, n_im, threads))


def continue_branch(wave, param="beta", direction=1, step=0.05, param_min=float("-inf"),
                    param_max=float("inf"), max_points=200, track_stability=True, **params):
    """Continue the branch through `wave`; returns events, termination and the branch CSV text."""
    c, T = _wave(wave)
    return json.loads(_core.continue_branch(c, T, _assignments(params), param, direction, step, param_min,
                                            param_max, max_points, track_stability))


def simulate(init="homogeneous", horizon=50.0, seed=1, v0=0.5, wave=None, **params):
    """Event-driven network simulation; init is homogeneous, random or wave."""
    c, T = _wave(wave) if wave is not None else (0.0, [])
    return json.loads(_core.simulate(_assignments(params), init, int(seed), float(v0), float(horizon), c, T))


def run_experiment(kind, out_dir, overrides=None, m_max=0, n=0, horizon=0.0):
    """Run a figure experiment into out_dir and return its summary."""
    spec = {"kind": kind, "scale": {"m_max": m_max, "n": n, "horizon": horizon}}
    if overrides:
        spec["overrides"] = overrides
    return json.loads(_core.run_experiment(json.dumps(spec), str(out_dir)))


def verify(evaluations=200, seed=1):
    """Oracle battery; one dictionary per check."""
    return json.loads(_core.verify(evaluations, seed))


def experiment_kinds():
    return list(_core.experiment_kinds())
