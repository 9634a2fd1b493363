"""Free-surface lattice Boltzmann solver (D3Q19, two-relaxation-time)."""

from .boundary import (bounce_back_coefficients, cli_coefficients,
                       fsk_coefficients, fsl_coefficients, project_stress)
from .collision import (TrtParams, collide, equilibrium, from_tau, moments,
                        set_magic, viscosity)
from .engine import (ChannelSolver, ChannelSpec, DivergenceError,
                     FreeSurfaceSolver)
from .lattice import C, GAS, INTERFACE, LIQUID, OPPOSITE, Q, W, WALL, build_d3q19
from .scenarios import NAMED_SCENARIOS, Scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "C", "GAS", "INTERFACE", "LIQUID", "NAMED_SCENARIOS", "OPPOSITE", "Q", "W",
    "WALL", "ChannelSolver", "ChannelSpec", "DivergenceError",
    "FreeSurfaceSolver", "Scenario", "TrtParams",
    "bounce_back_coefficients", "build_d3q19", "cli_coefficients", "collide",
    "equilibrium", "from_tau", "fsk_coefficients", "fsl_coefficients",
    "moments", "project_stress", "run_scenario", "set_magic", "viscosity",
]
