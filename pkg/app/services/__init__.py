"""Numerical services, one per toolkit component."""
from .gibbs_service import Configuration, SampleSet, TemperingResult, minimize_energy, run_chain, run_tempering
from .lagrange_service import BoundConstants, LagrangeBasis, bound_constants
from .potential_service import PotentialModel, RadialDroplet
from .spacing_service import RescaledSample, run_spacing_experiment

__all__ = [
    "Configuration",
    "SampleSet",
    "TemperingResult",
    "minimize_energy",
    "run_chain",
    "run_tempering",
    "BoundConstants",
    "LagrangeBasis",
    "bound_constants",
    "PotentialModel",
    "RadialDroplet",
    "RescaledSample",
    "run_spacing_experiment",
]
