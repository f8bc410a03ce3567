"""Exposure-aware mmWave uplink simulator.

Physically consistent dipole-array radiation and coupling, a skin-surface
thermal response model, and online beamforming policies that trade uplink
gain against a long-term tissue temperature budget.
"""

from .sim import ScenarioConfig, SimulationTrace, run_simulation, summarize

__all__ = ["ScenarioConfig", "SimulationTrace", "run_simulation", "summarize"]
__version__ = "0.1.0"
