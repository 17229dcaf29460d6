"""Simulation of qutrit-to-qutrit state transfer through two resonators."""
from .config import RunConfig, parse_config
from .dynamics import IntegratorConfig, evolve_master, evolve_schrodinger
from .hilbert import SpaceLayout, basis_ket
from .model import ModelParams, collapse_operators
from .protocol import InputState, TransferResult, fidelity, run_transfer, stage_durations

__version__ = "0.1.0"

__all__ = [
    "IntegratorConfig", "InputState", "ModelParams", "RunConfig", "SpaceLayout",
    "TransferResult", "basis_ket", "collapse_operators", "evolve_master",
    "evolve_schrodinger", "fidelity", "parse_config", "run_transfer", "stage_durations",
]
