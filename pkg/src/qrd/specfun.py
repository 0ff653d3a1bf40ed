"""Special functions used by the channel and error-probability layers.

Scalar entry points (``ln_gamma``, ``beta``, ``bessel_k``, ``tricomi_u``,
``q_function``) validate their arguments and raise on domain violations.
``scaled_tricomi`` is the array-valued kernel behind ``tricomi_u`` and the
closed-form Gamma-Gamma Laplace transform; it returns ``x**a * U(a, b, x)``,
which stays O(1) over the whole positive axis.

Tricomi evaluation regimes (``x`` is the third argument):

* ``x <= SERIES_MAX_X``: Kummer connection of two convergent 1F1 series.
* ``SERIES_MAX_X < x <= ASYMPTOTIC_MIN_X``: generalized Gauss-Laguerre
  quadrature of ``U = x**-a / Gamma(a) * int e^-v v^(a-1) (1 + v/x)^(b-a-1) dv``.
* ``x > ASYMPTOTIC_MIN_X``: Poincare series in ``1/x`` truncated at the
  smallest term; points where the series cannot reach machine precision fall
  back to the quadrature.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

__all__ = [
    "Accuracy",
    "DomainError",
    "UnsupportedParameterError",
    "SaturationError",
    "ln_gamma",
    "beta",
    "bessel_k",
    "bessel_k_scaled",
    "log_bessel_k",
    "tricomi_u",
    "scaled_tricomi",
    "q_function",
]

SERIES_MAX_X = 1.5
ASYMPTOTIC_MIN_X = 60.0
LAGUERRE_NODES = 96
# |b - round(b)| below this is treated as an integer second parameter.
INTEGER_B_TOL = 1e-9
TINY_ORDER = 1e-150


class DomainError(ValueError):
    """Argument outside the domain of the function."""


class UnsupportedParameterError(ValueError):
    """Parameter combination the implementation deliberately rejects."""


class SaturationError(OverflowError):
    """Result not representable in double precision."""


@dataclass(frozen=True)
class Accuracy:
    """Convergence controls for the series evaluations."""

    rel_tol: float = 1e-16
    max_terms: int = 500

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3), got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 50:
            raise ValueError(f"max_terms must be an integer >= 50, got {self.max_terms}")


DEFAULT_ACCURACY = Accuracy()


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    return value


def ln_gamma(x):
    """Natural log of the Gamma function for positive real ``x``."""
    x = _finite("x", x)
    if x <= 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def beta(a, b):
    """Euler Beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    a = _finite("a", a)
    b = _finite("b", b)
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"beta requires a, b > 0, got ({a}, {b})")
    # sort so that beta(a, b) and beta(b, a) run the identical float ops
    lo, hi = (a, b) if a <= b else (b, a)
    return math.exp(ln_gamma(lo) + ln_gamma(hi) - ln_gamma(lo + hi))


def _bessel_args(nu, x):
    nu = abs(_finite("nu", nu))
    if nu < TINY_ORDER:
        # K is even and smooth in the order; subnormal orders upset the backend
        nu = 0.0
    x = _finite("x", x)
    if x <= 0.0:
        raise DomainError(f"bessel_k requires x > 0, got {x}")
    return nu, x


def bessel_k_scaled(nu, x):
    """Exponentially scaled K: ``exp(x) * K_nu(x)``."""
    nu, x = _bessel_args(nu, x)
    value = float(_sp.kve(nu, x))
    if not math.isfinite(value):
        raise SaturationError(f"e^x K_nu(x) overflows at nu={nu}, x={x}")
    return value


def log_bessel_k(nu, x):
    """``ln K_nu(x)``; finite even where K itself under- or overflows."""
    nu, x = _bessel_args(nu, x)
    scaled = float(_sp.kve(nu, x))
    if math.isfinite(scaled) and scaled > 0.0:
        return math.log(scaled) - x
    # small-argument overflow: K_nu(x) ~ Gamma(nu)/2 (2/x)^nu
    if nu > 0.0:
        return math.lgamma(nu) - math.log(2.0) + nu * math.log(2.0 / x)
    raise SaturationError(f"K_nu(x) not representable at nu={nu}, x={x}")


def bessel_k(nu, x):
    """Modified Bessel function of the second kind, real order, ``x > 0``.

    ``K_{-nu} = K_nu``, so the sign of the order is folded before evaluation.

    Raises
    ------
    DomainError
        For ``x <= 0`` or non-finite input.
    SaturationError
        When the value overflows double precision (tiny ``x``, large order).
    """
    nu, x = _bessel_args(nu, x)
    value = float(_sp.kv(nu, x))
    if math.isinf(value):
        raise SaturationError(
            f"K_nu(x) overflows at nu={nu}, x={x}; use log_bessel_k instead"
        )
    return value


@lru_cache(maxsize=128)
def _laguerre_rule(n, alpha):
    nodes, weights = _sp.roots_genlaguerre(n, alpha)
    # normalizing by the weight sum absorbs the Gamma(a) prefactor
    return nodes, weights / weights.sum()


def _hyp1f1_series(a, b, x, acc):
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(acc.max_terms):
        term = term * ((a + n) / (b + n)) * x / (n + 1)
        total = total + term
        if np.all(np.abs(term) <= acc.rel_tol * np.abs(total)):
            return total
    raise ArithmeticError(f"1F1({a}; {b}; x) series did not converge in {acc.max_terms} terms")


def _scaled_series(a, b, x, acc):
    # reciprocal Gamma: a - b + 1 may sit on a pole, where the first term vanishes
    c1 = math.gamma(1.0 - b) * float(_sp.rgamma(a - b + 1.0))
    c2 = math.gamma(b - 1.0) * float(_sp.rgamma(a))
    return (x**a * c1 * _hyp1f1_series(a, b, x, acc)
            + c2 * x ** (a + 1.0 - b) * _hyp1f1_series(a - b + 1.0, 2.0 - b, x, acc))


def _scaled_laguerre(a, b, x):
    nodes, weights = _laguerre_rule(LAGUERRE_NODES, a - 1.0)
    ratio = nodes[None, :] / x[:, None]
    return (weights * (1.0 + ratio) ** (b - a - 1.0)).sum(axis=1)


def _scaled_asymptotic(a, b, x, acc):
    """Poincare series; returns (values, converged-mask)."""
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    converged = np.zeros(x.shape, dtype=bool)
    for n in range(acc.max_terms):
        nxt = term * (-(a + n) * (a - b + 1.0 + n) / ((n + 1) * x))
        done = np.abs(nxt) <= acc.rel_tol * np.abs(total)
        growing = np.abs(nxt) >= np.abs(term)
        converged |= active & done
        active &= ~(done | growing)
        total = np.where(active, total + nxt, total)
        term = nxt
        if not active.any():
            break
    return total, converged


def _check_tricomi_params(a, b):
    a = _finite("a", a)
    b = _finite("b", b)
    if a <= 0.0:
        raise DomainError(f"tricomi_u requires a > 0, got {a}")
    if abs(b - round(b)) < INTEGER_B_TOL:
        raise UnsupportedParameterError(
            f"tricomi_u does not support integer b (got {b}); "
            "for the Gamma-Gamma transform this means an integer shape gap"
        )
    return a, b


def scaled_tricomi(a, b, x, accuracy=DEFAULT_ACCURACY):
    """Array-valued ``x**a * U(a, b, x)`` for ``a > 0``, non-integer ``b``, ``x > 0``."""
    a, b = _check_tricomi_params(a, b)
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0.0):
        raise DomainError("tricomi_u requires finite x > 0")
    flat = x.ravel()
    out = np.empty_like(flat)

    small = flat <= SERIES_MAX_X
    if small.any():
        out[small] = _scaled_series(a, b, flat[small], accuracy)

    large = flat > ASYMPTOTIC_MIN_X
    mid = ~small & ~large
    if large.any():
        values, ok = _scaled_asymptotic(a, b, flat[large], accuracy)
        idx = np.flatnonzero(large)
        out[idx[ok]] = values[ok]
        mid[idx[~ok]] = True
    if mid.any():
        out[mid] = _scaled_laguerre(a, b, flat[mid])
    return out.reshape(x.shape)


def tricomi_u(a, b, x, accuracy=DEFAULT_ACCURACY):
    """Confluent hypergeometric function of the second kind U(a, b; x).

    Principal branch for real ``x > 0``. Integer ``b`` is rejected rather
    than evaluated through the logarithmic limit form.

    Examples
    --------
    >>> round(tricomi_u(0.5, 1.5, 4.0), 12)
    0.5
    """
    x = _finite("x", x)
    if x <= 0.0:
        raise DomainError(f"tricomi_u requires x > 0, got {x}")
    scaled = float(scaled_tricomi(a, b, np.array([x]), accuracy)[0])
    return scaled * x ** (-float(a))


def q_function(x):
    """Gaussian tail probability Q(x) = P(Z > x) for standard normal Z."""
    x = _finite("x", x)
    return 0.5 * math.erfc(x / math.sqrt(2.0))
