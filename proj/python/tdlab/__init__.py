"""NTK ridge regression asymptotics: tau solver, error routes, limits and Monte Carlo.

Parameters are passed as keyword arguments using the same keys as the JSON
config (phi, psi, gamma, sw2, noise, activation, centered, ...).
"""

import csv
import io
import json

from . import _tdlab
from ._tdlab import ConfigError, NumericalError, builtin_names, philox_block

__all__ = [
    "ConfigError", "NumericalError", "builtin_names", "philox_block", "moments", "solve_tau",
    "solve_tau_real", "pencil_fixed_point", "tau_residual", "errors", "test_error", "train_error",
    "test_error_components", "gcv_check", "limit", "limit_expansion", "mc_test_error", "run",
    "read_table", "render_plot",
]


def _p(kw):
    return json.dumps(kw)


def moments(activation):
    """Moments of the centered built-in activation as a dict."""
    return json.loads(_tdlab.moments(activation))


def solve_tau(z, **params):
    return _tdlab.solve_tau(_p(params), complex(z))


def solve_tau_real(**params):
    """(tau1, tau2, tau1', tau2') at z = gamma."""
    return _tdlab.solve_tau_real(_p(params))


def pencil_fixed_point(z, **params):
    return _tdlab.pencil_fixed_point(_p(params), complex(z))


def tau_residual(tau1, tau2, z, **params):
    return _tdlab.tau_residual(_p(params), complex(tau1), complex(tau2), complex(z))


def errors(**params):
    return _tdlab.errors(_p(params))


def test_error(**params):
    return errors(**params)["e_test"]


def train_error(**params):
    return errors(**params)["e_train"]


def test_error_components(**params):
    return _tdlab.test_error_components(_p(params))


def gcv_check(**params):
    return _tdlab.gcv_check(_p(params))


def limit(which, **params):
    return _tdlab.limit(_p(params), which)


def limit_expansion(which, **params):
    """(order, coefficient) of the large_dataset or small_phi expansion."""
    return _tdlab.limit_expansion(_p(params), which)


def mc_test_error(trials, seed=1, threads=0, **params):
    return _tdlab.mc_test_error(_p(params), trials, seed, threads)


def run(mode, config, threads=0):
    """Run a sweep (theory, limits, simulate, validate, phase, train); returns CSV text."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return _tdlab.run(mode, config, threads)


def read_table(text):
    """CSV text -> list of dicts (header comment and trailer lines skipped)."""
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def render_plot(csv_text, style="auto"):
    return _tdlab.render_plot(csv_text, style)
