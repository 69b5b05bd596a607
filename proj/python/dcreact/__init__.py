"""Deferred-correction midpoint solver for 1D reaction-diffusion problems."""

from fractions import Fraction
from pathlib import Path

from ._dcreact import (
    AlignmentError,
    ConfigError,
    DcRunError,
    Run,
    TrajectoryFormatError,
    WindowError,
    observed_order,
    problem_info,
    read_trajectory,
    stage_extension,
    validate_problem,
)
from . import _dcreact

__all__ = [
    "AlignmentError",
    "ConfigError",
    "DcRunError",
    "Run",
    "TrajectoryFormatError",
    "WindowError",
    "dc_coefficients",
    "interior_coefficients",
    "observed_order",
    "problem_info",
    "read_trajectory",
    "run",
    "run_study",
    "stage_extension",
    "validate_problem",
]


def dc_coefficients(p):
    """c_2 .. c_{2p+1} of the correction operators as Fractions."""
    return [Fraction(int(n), int(d)) for n, d in _dcreact.dc_coefficients(p)]


def interior_coefficients(p):
    """Start-up stencil coefficients c_2 .. c_{2p+1} as Fractions."""
    return [Fraction(int(n), int(d)) for n, d in _dcreact.interior_coefficients(p)]


def run(problem, order, N, n_cells, T=None, **newton):
    return Run(problem, order, N, n_cells, T, **newton)


def run_study(config):
    """Run a study from a TOML file path or a TOML string."""
    if isinstance(config, Path) or (isinstance(config, str) and "\n" not in config and config.endswith(".toml")):
        path = Path(config)
        return _dcreact.run_study_toml(path.read_text(), path.parent)
    return _dcreact.run_study_toml(config)
