"""Director-field wave dynamics: linear modes, 1-D angle waves, twist-wave
asymptotics and the Hunter-Saxton family they reduce to."""

from .coeffs import ElasticConstants, constrained_solve, dispersion, one_d_speeds
from .config import ScenarioConfig, parse_config
from .errors import OrientwaveError
from .grid import Grid
from .scenarios import RunReport, run_convergence, run_match_fast_twist, run_scenario, write_series

__version__ = "0.1.0"

__all__ = [
    "ElasticConstants",
    "Grid",
    "OrientwaveError",
    "RunReport",
    "ScenarioConfig",
    "constrained_solve",
    "dispersion",
    "one_d_speeds",
    "parse_config",
    "run_convergence",
    "run_match_fast_twist",
    "run_scenario",
    "write_series",
]
