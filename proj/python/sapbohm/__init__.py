"""Python access to the sapbohm core.

Units throughout: hbar = m = omega_x = 1 (see ``units``).
"""

import json

from ._sapbohm import (
    AnalysisError,
    ConfigError,
    Error,
    Grid,
    NumericalError,
    PotentialParams,
    PreparationError,
    PropagationError,
    TrajectoryError,
    barrier_height,
    current,
    eigenstates,
    fit_powerlaw,
    ground_state,
    make_grid,
    mean_position,
    populations,
    potential,
    sample_initial,
    schedule_snapshot,
    three_mode,
    units,
)
from . import _sapbohm


def resolve_config(config=None, overrides=()):
    """Fully materialized run configuration as a dict."""
    text = json.dumps(config) if config else ""
    return json.loads(_sapbohm.resolve_config(text, list(overrides)))


def run(config=None, overrides=()):
    """Run one protocol. Returns (summary dict, dict of numpy series)."""
    text = json.dumps(config) if config else ""
    summary, series = _sapbohm.run_transport(text, list(overrides))
    return json.loads(summary), series


__all__ = [
    "AnalysisError", "ConfigError", "Error", "Grid", "NumericalError", "PotentialParams",
    "PreparationError", "PropagationError", "TrajectoryError", "barrier_height", "current",
    "eigenstates", "fit_powerlaw", "ground_state", "make_grid", "mean_position", "populations",
    "potential", "resolve_config", "run", "sample_initial", "schedule_snapshot", "three_mode",
    "units",
]
