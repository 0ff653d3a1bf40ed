"""Transmit side of the rotated two-slot BPSK link and the homodyne model."""
import math
from dataclasses import dataclass

import numpy as np

from .channel import GammaGammaParams
from .specfun import DomainError

__all__ = [
    "OPTIMAL_THETA",
    "ModulationDesign",
    "Codebook",
    "LinkConfig",
    "rotation_matrix",
    "rotate",
    "design_from_split",
    "optimal_split",
    "codebook",
    "homodyne_observe",
    "effective_snr_proxy",
    "HYPOTHESES",
]

OPTIMAL_THETA = 0.5 * math.atan(2.0)

# Symbol signs per hypothesis; bit 0 maps to +alpha. The row order is the
# tie-break order of the detector.
HYPOTHESES = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])


@dataclass(frozen=True)
class ModulationDesign:
    """Displacement/squeezing split of a photon budget plus rotation angle.

    Build with :func:`design_from_split`; direct construction only checks
    that the stored numbers are mutually consistent.
    """

    n_total: float
    beta: float
    alpha: float
    r: float
    theta: float

    def __post_init__(self):
        if self.n_total < 0.0:
            raise DomainError(f"photon budget must be >= 0, got {self.n_total}")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta}")
        if self.r < 0.0:
            raise DomainError(f"squeezing r must be >= 0, got {self.r}")
        if not 0.0 <= self.theta <= math.pi / 4 + 1e-12:
            raise DomainError(f"theta must lie in [0, pi/4], got {self.theta}")
        used = self.alpha**2 + math.sinh(self.r) ** 2
        if used > self.n_total * (1.0 + 1e-12) + 1e-300:
            raise DomainError(f"design uses {used} photons, budget is {self.n_total}")

    @property
    def sigma_q_sq(self):
        return 0.5 * math.exp(-2.0 * self.r)

    @property
    def photons_used(self):
        return self.alpha**2 + math.sinh(self.r) ** 2

    def with_theta(self, theta):
        return design_from_split(self.n_total, self.beta, theta)


@dataclass(frozen=True)
class LinkConfig:
    eta: float
    channel: GammaGammaParams
    design: ModulationDesign
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class Codebook:
    """The four rotated codewords, rows in :data:`HYPOTHESES` order."""

    codewords: np.ndarray
    symbols: np.ndarray


def rotation_matrix(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate(theta, x):
    """Apply R(theta) to a two-slot vector (or a stack of them, last axis)."""
    x = np.asarray(x, dtype=float)
    return x @ rotation_matrix(theta).T


def design_from_split(n_total, beta, theta=OPTIMAL_THETA):
    """Spend ``beta * n_total`` photons on squeezing and the rest on displacement."""
    if not (math.isfinite(n_total) and n_total >= 0.0):
        raise DomainError(f"photon budget must be finite and >= 0, got {n_total}")
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    squeeze_photons = beta * n_total
    # asinh(sqrt(p)) == ln(sqrt(p) + sqrt(p + 1)), the r >= 0 root of sinh^2 r = p
    r = math.asinh(math.sqrt(squeeze_photons))
    alpha = math.sqrt((1.0 - beta) * n_total)
    return ModulationDesign(n_total=float(n_total), beta=float(beta), alpha=alpha,
                            r=r, theta=float(theta))


def optimal_split(n_total):
    """Squeezing fraction maximizing e^{2r} alpha^2 for budget ``n_total``."""
    return n_total / (2.0 * n_total + 1.0)


def codebook(design):
    symbols = design.alpha * HYPOTHESES
    return Codebook(codewords=rotate(design.theta, symbols), symbols=symbols)


def homodyne_observe(cfg, codeword, fading, rng):
    """Noisy in-phase quadrature readout ``y_i = sqrt(eta I_i) x'_i + n_i``.

    ``codeword`` and ``fading`` broadcast along a leading trial axis; the
    noise variance ``exp(-2r)/2`` does not depend on the fading.
    """
    codeword = np.asarray(codeword, dtype=float)
    gain = np.sqrt(cfg.eta * np.asarray(fading, dtype=float))
    clean = gain * codeword
    sigma = math.sqrt(cfg.design.sigma_q_sq)
    return clean + sigma * rng.standard_normal(clean.shape)


def effective_snr_proxy(design):
    return math.exp(2.0 * design.r) * design.alpha**2
