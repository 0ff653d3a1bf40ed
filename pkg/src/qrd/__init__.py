"""Rotation-diversity BPSK with displaced squeezed states over Gamma-Gamma fading."""
from .channel import GammaGammaParams, IrradiancePair
from .detector import SerEstimate, run_monte_carlo, run_monte_carlo_baseline
from .link import OPTIMAL_THETA, LinkConfig, ModulationDesign, design_from_split, optimal_split

__version__ = "0.1.0"

__all__ = [
    "GammaGammaParams",
    "IrradiancePair",
    "LinkConfig",
    "ModulationDesign",
    "OPTIMAL_THETA",
    "SerEstimate",
    "design_from_split",
    "optimal_split",
    "run_monte_carlo",
    "run_monte_carlo_baseline",
]
