"""Gamma-Gamma irradiance fading: density, Laplace transform, sampling."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as _sp
from scipy.interpolate import PchipInterpolator

from .specfun import DomainError, ln_gamma, log_bessel_k, scaled_tricomi

__all__ = [
    "GammaGammaParams",
    "IrradiancePair",
    "pdf",
    "log_pdf",
    "laplace_exact",
    "laplace_quadrature",
    "laplace_asymptotic",
    "lambda_constant",
    "sample",
    "sample_pairs",
    "moment",
    "cdf",
]

# relative gap below which the two shapes count as equal
MIN_SHAPE_GAP = 1e-6


@dataclass(frozen=True)
class GammaGammaParams:
    """Shape pair of the Gamma-Gamma law.

    ``epsilon`` models large-scale and ``zeta`` small-scale turbulence. The
    two must differ; all closed forms used downstream degenerate otherwise.
    """

    epsilon: float
    zeta: float

    def __post_init__(self):
        for name in ("epsilon", "zeta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be a positive finite number, got {value}")
        if abs(self.epsilon - self.zeta) < MIN_SHAPE_GAP * max(self.epsilon, self.zeta):
            raise DomainError(
                f"epsilon and zeta must differ (got {self.epsilon}, {self.zeta})"
            )

    @property
    def g(self):
        return min(self.epsilon, self.zeta)

    @property
    def order(self):
        """Bessel order epsilon - zeta of the density."""
        return self.epsilon - self.zeta

    def swapped(self):
        return GammaGammaParams(self.zeta, self.epsilon)


@dataclass(frozen=True)
class IrradiancePair:
    i1: float
    i2: float

    def __post_init__(self):
        for name in ("i1", "i2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {value}")

    def as_array(self):
        return np.array([self.i1, self.i2])


def _log_norm(params):
    e, z = params.epsilon, params.zeta
    return (math.log(2.0) + 0.5 * (e + z) * math.log(e * z)
            - ln_gamma(e) - ln_gamma(z))


def log_pdf(params, z):
    z = float(z)
    if not (z > 0.0 and math.isfinite(z)):
        raise DomainError(f"pdf requires finite z > 0, got {z}")
    e, zeta = params.epsilon, params.zeta
    return (_log_norm(params) + (0.5 * (e + zeta) - 1.0) * math.log(z)
            + log_bessel_k(params.order, 2.0 * math.sqrt(e * zeta * z)))


def pdf(params, z):
    """Gamma-Gamma density at irradiance ``z > 0`` (unit mean law)."""
    return math.exp(log_pdf(params, z))


def laplace_exact(params, s):
    """Closed-form Laplace transform E[exp(-s I)] via the Tricomi function.

    Evaluates ``(ez/s)^e U(e, e + 1 - z; ez/s)``. ``s`` may be a scalar or an
    array; a scalar input returns a float.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s_arr)) or np.any(s_arr <= 0.0):
        raise DomainError("laplace_exact requires finite s > 0")
    e, z = params.epsilon, params.zeta
    with np.errstate(over="ignore"):
        x = (e * z) / s_arr
    # all moments are finite, so L(s) = 1 - s + O(s^2) once x overflows
    huge = np.isinf(x)
    value = np.ones_like(x)
    if not huge.all():
        value[~huge] = scaled_tricomi(e, e + 1.0 - z, x[~huge])
    return float(value) if np.ndim(s) == 0 else value


def _integrate_halfline(f, breaks, rel_tol):
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        part, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rel_tol, limit=200)
        total += part
    return total


def laplace_quadrature(params, s, rel_tol=1e-11):
    """Laplace transform by adaptive quadrature of the density.

    Integrates in the scaled variable ``u = s z`` so the ``exp(-u)`` factor
    has unit width regardless of ``s``; the cut at ``u = 60`` drops a tail
    below ``e^-60`` times the density bound.
    """
    s = float(s)
    if not (s > 0.0 and math.isfinite(s)):
        raise DomainError(f"laplace_quadrature requires finite s > 0, got {s}")

    def integrand(u):
        if u <= 0.0:
            return 0.0
        return math.exp(-u + log_pdf(params, u / s)) / s

    return _integrate_halfline(integrand, (0.0, 1.0, 10.0, 60.0), rel_tol)


def moment(params, k, rel_tol=1e-11):
    """``E[I^k]`` by quadrature of the density (oracle for the sampler)."""
    def integrand(z):
        if z <= 0.0:
            return 0.0
        return math.exp(k * math.log(z) + log_pdf(params, z))

    return _integrate_halfline(integrand, (0.0, 1e-3, 1.0, 10.0, 100.0, np.inf), rel_tol)


def _log_pdf_array(params, w):
    """Log density at ``z = exp(w)``, vectorized over ``w``."""
    e, zeta, nu = params.epsilon, params.zeta, abs(params.order)
    x = 2.0 * np.sqrt(e * zeta) * np.exp(0.5 * w)
    with np.errstate(over="ignore", divide="ignore"):
        log_k = np.log(_sp.kve(nu, x)) - x
    bad = ~np.isfinite(log_k)
    if bad.any():
        # small-argument form K_nu(x) ~ Gamma(nu)/2 (2/x)^nu
        log_k[bad] = math.lgamma(nu) - math.log(2.0) + nu * np.log(2.0 / x[bad])
    return _log_norm(params) + (0.5 * (e + zeta) - 1.0) * w + log_k


CDF_LOG_RANGE = (-40.0, 14.0)
CDF_SEGMENTS = 2400


def _cdf_table(params):
    lo, hi = CDF_LOG_RANGE
    edges = np.linspace(lo, hi, CDF_SEGMENTS + 1)
    nodes, weights = np.polynomial.legendre.leggauss(16)
    half = 0.5 * (edges[1] - edges[0])
    w = 0.5 * (edges[:-1] + edges[1:])[:, None] + half * nodes[None, :]
    # dF = f(z) z dw; the integrand is smooth in log-irradiance
    parts = (np.exp(_log_pdf_array(params, w) + w) * weights).sum(axis=1) * half
    # mass below the grid from the leading power law f(z) ~ c z^(g-1)
    head = np.exp(_log_pdf_array(params, np.array([lo]))[0] + lo) / params.g
    return edges, head + np.concatenate(([0.0], np.cumsum(parts)))


def cdf(params, z):
    """Distribution function by quadrature of the density in ``ln z``.

    The density is integrated once on a fixed log grid and interpolated
    with a monotone cubic, so large sample arrays are cheap.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(np.isnan(z_arr)):
        raise DomainError("cdf requires non-NaN z")
    edges, table = _cdf_table(params)
    interp = PchipInterpolator(edges, table, extrapolate=False)
    out = np.zeros(z_arr.shape)
    pos = z_arr > 0.0
    w = np.log(z_arr[pos])
    vals = interp(np.clip(w, edges[0], edges[-1]))
    below = w < edges[0]
    vals[below] = table[0] * np.exp(params.g * (w[below] - edges[0]))
    out[pos] = np.minimum(vals, 1.0)
    return float(out) if np.ndim(z) == 0 else out


def lambda_constant(params):
    """Prefactor of the power-law tail ``L(s) ~ Lambda s^-g``."""
    e, z, g = params.epsilon, params.zeta, params.g
    return math.exp(ln_gamma(abs(e - z)) + ln_gamma(g) - ln_gamma(e) - ln_gamma(z)
                    + g * math.log(e * z))


def laplace_asymptotic(params, s):
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0.0):
        raise DomainError("laplace_asymptotic requires s > 0")
    value = lambda_constant(params) * s_arr ** (-params.g)
    return float(value) if np.ndim(s) == 0 else value


def sample(params, rng, n):
    """Draw ``n`` irradiances as the product of two unit-mean Gamma variates."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    e, z = params.epsilon, params.zeta
    x = rng.gamma(e, 1.0 / e, size=n)
    y = rng.gamma(z, 1.0 / z, size=n)
    return x * y


def sample_pairs(params, rng, n):
    """``(n, 2)`` array of i.i.d. irradiances for the two slots."""
    return sample(params, rng, 2 * n).reshape(n, 2)
