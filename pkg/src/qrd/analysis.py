"""Error-probability analysis of the rotated scheme and the single-slot baseline.

Average pairwise error probabilities are computed with Craig's form of the
Q-function, which turns the fading average into a product of Laplace
transforms integrated over ``[0, pi/2]``. The union bound weights the two
distinct PEP classes as ``2 PEP_1 + PEP_2``: per transmitted codeword, two
neighbours differ in one symbol and one differs in both.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import laplace_asymptotic, laplace_exact, lambda_constant
from .link import OPTIMAL_THETA, HYPOTHESES, design_from_split, effective_snr_proxy, optimal_split, rotate
from .specfun import beta as beta_fn
from .specfun import q_function

__all__ = [
    "PepPair",
    "AsymptoticGains",
    "OptimalDesign",
    "QuadratureError",
    "difference_vectors",
    "all_pair_differences",
    "pep_conditional",
    "pep_average",
    "pep_pair",
    "ser_union_qrd",
    "ser_baseline",
    "ser_union_qrd_grid",
    "c0_constant",
    "c1_constant",
    "baseline_constant",
    "asymptotic_ser_qrd",
    "asymptotic_ser_baseline",
    "asymptotic_reliable",
    "asymptotic_gains",
    "split_objective",
    "golden_section_max",
    "optimal_design",
]

CRAIG_START_NODES = 32
CRAIG_MAX_NODES = 4096
CRAIG_REL_TOL = 1e-8
ASYMPTOTIC_TOL = 0.05


class QuadratureError(ArithmeticError):
    """Craig integral did not converge within the node budget."""


@dataclass(frozen=True)
class PepPair:
    pep1: float
    pep2: float

    def __post_init__(self):
        for name in ("pep1", "pep2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1/2]")

    @property
    def union(self):
        return 2.0 * self.pep1 + self.pep2


@dataclass(frozen=True)
class AsymptoticGains:
    d: float
    constant: float
    gc_max: float


@dataclass(frozen=True)
class OptimalDesign:
    theta: float
    beta: float
    r: float
    alpha: float
    ser: float
    mode: str
    objective: str = "union"
    converged: bool = True
    diagnostic: str = ""
    evaluations: int = 0

    @property
    def theta_deg(self):
        return math.degrees(self.theta)


# ---------------------------------------------------------------------------
# difference vectors
# ---------------------------------------------------------------------------

def difference_vectors(design):
    """Representative rotated differences for the one- and two-position classes."""
    a, c, s = design.alpha, math.cos(design.theta), math.sin(design.theta)
    one = np.array([2 * a * c, 2 * a * s])
    two = np.array([2 * a * (c - s), 2 * a * (s + c)])
    return one, two


def all_pair_differences(design):
    """Every ordered codeword pair ``(i, j, u)``, ``u = R(theta)(x_i - x_j)``."""
    symbols = design.alpha * HYPOTHESES
    out = []
    for i in range(4):
        for j in range(4):
            if i != j:
                out.append((i, j, rotate(design.theta, symbols[i] - symbols[j])))
    return out


# ---------------------------------------------------------------------------
# PEP
# ---------------------------------------------------------------------------

def pep_conditional(u, fading, eta, r):
    """PEP given the irradiances: ``Q(sqrt(eta e^{2r} (I1 u1^2 + I2 u2^2) / 2))``."""
    u1, u2 = float(u[0]), float(u[1])
    i1, i2 = (fading.i1, fading.i2) if hasattr(fading, "i1") else fading
    arg = eta * math.exp(2.0 * r) * (i1 * u1 * u1 + i2 * u2 * u2) / 2.0
    return q_function(math.sqrt(arg))


@lru_cache(maxsize=32)
def _craig_rule(n):
    x, w = np.polynomial.legendre.leggauss(n)
    quarter = math.pi / 4.0
    theta = quarter * (x + 1.0)
    # 1/pi factor folded into the weights
    return 1.0 / np.sin(theta) ** 2, w * quarter / math.pi


def _laplace0(params, s):
    """Laplace transform that accepts ``s == 0`` (value 1)."""
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    pos = s > 0.0
    if pos.any():
        out[pos] = laplace_exact(params, s[pos])
    return out


def _craig(integrand, nodes, rel_tol, max_nodes):
    n = int(nodes)
    csc2, w = _craig_rule(n)
    prev = float(w @ integrand(csc2))
    while n < max_nodes:
        n *= 2
        csc2, w = _craig_rule(n)
        cur = float(w @ integrand(csc2))
        if abs(cur - prev) <= rel_tol * abs(cur):
            return cur
        prev = cur
    raise QuadratureError(
        f"Craig integral not converged at {n} nodes (last two: {prev}, {cur})")


def pep_average(u, eta, r, channel, nodes=CRAIG_START_NODES, rel_tol=CRAIG_REL_TOL,
                max_nodes=CRAIG_MAX_NODES):
    """Fading-averaged PEP for rotated difference ``u``.

    Gauss-Legendre on the Craig integral, doubling the node count from
    ``nodes`` until two successive estimates agree to ``rel_tol``.
    """
    u1, u2 = float(u[0]), float(u[1])
    if u1 == 0.0 and u2 == 0.0:
        raise ValueError("pep_average needs a non-zero difference vector")
    k = eta * math.exp(2.0 * r) / 4.0

    def integrand(csc2):
        both = _laplace0(channel, np.concatenate((k * u1 * u1 * csc2, k * u2 * u2 * csc2)))
        return both[:csc2.size] * both[csc2.size:]

    return _craig(integrand, nodes, rel_tol, max_nodes)


def pep_pair(design, channel, eta, **quad):
    one, two = difference_vectors(design)
    if design.alpha == 0.0:
        return PepPair(0.5, 0.5)
    return PepPair(pep_average(one, eta, design.r, channel, **quad),
                   pep_average(two, eta, design.r, channel, **quad))


def ser_union_qrd(design, channel, eta, **quad):
    """Union-bound SER ``2 PEP_1 + PEP_2`` of the rotated scheme."""
    return pep_pair(design, channel, eta, **quad).union


def ser_baseline(design, channel, eta, nodes=CRAIG_START_NODES, rel_tol=CRAIG_REL_TOL,
                 max_nodes=CRAIG_MAX_NODES):
    """Exact SER of unrotated single-slot BPSK with the design's alpha and r."""
    k = eta * math.exp(2.0 * design.r) * design.alpha**2
    if k == 0.0:
        return 0.5
    return _craig(lambda csc2: _laplace0(channel, k * csc2), nodes, rel_tol, max_nodes)


def ser_union_qrd_grid(n_total, thetas, betas, channel, eta, nodes=64):
    """``ser_union_qrd`` on a ``len(thetas) x len(betas)`` grid, fixed node count.

    One vectorized Laplace evaluation for the whole grid; the caller is
    responsible for choosing ``nodes`` large enough (see ``pep_average``).
    """
    thetas = np.asarray(thetas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    csc2, w = _craig_rule(int(nodes))
    designs = [design_from_split(n_total, b, 0.0) for b in betas]
    k = np.array([eta * math.exp(2 * d.r) * d.alpha**2 for d in designs])  # (B,)
    c, s = np.cos(thetas)[:, None], np.sin(thetas)[:, None]
    # normalized squared differences u^2 / alpha^2, shape (T, 1)
    one = (4 * c * c, 4 * s * s)
    two = (4 * (c - s) ** 2, 4 * (c + s) ** 2)

    def klass(pair):
        base = k[None, :, None] * csc2[None, None, :] / 4.0  # (1, B, Q)
        prod = _laplace0(channel, pair[0][..., None] * base) * _laplace0(channel, pair[1][..., None] * base)
        return prod @ w

    return 2.0 * klass(one) + klass(two)


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

def _class_constant(channel, eta, normalized_product):
    """High-SNR PEP coefficient for normalized product u1'^2 u2'^2."""
    g = channel.g
    lam = lambda_constant(channel)
    return (2.0 ** (8 * g - 1) * lam**2 * normalized_product ** (-g) * eta ** (-2 * g)
            * beta_fn(2 * g + 0.5, 2 * g + 0.5) / math.pi)


def c0_constant(channel, eta, theta=OPTIMAL_THETA):
    """Per-class asymptotic PEP constant in its normalized-difference form."""
    return _class_constant(channel, eta, 4.0 * math.sin(2 * theta) ** 2)


def c1_constant(channel, eta):
    """Closed-form SER constant ``C_1`` at the balanced angle."""
    e, z, g = channel.epsilon, channel.zeta, channel.g
    ratio = math.exp(2 * (math.lgamma(abs(e - z)) + math.lgamma(g)
                          - math.lgamma(e) - math.lgamma(z)))
    return (3 * 2.0 ** (6 * g - 1) * (eta * math.sin(2 * OPTIMAL_THETA)) ** (-2 * g) / math.pi
            * ratio * (e * z) ** (2 * g) * beta_fn(2 * g + 0.5, 2 * g + 0.5))


def baseline_constant(channel, eta):
    g = channel.g
    return (2.0 ** (2 * g - 1) * eta ** (-g) / math.pi * lambda_constant(channel)
            * beta_fn(g + 0.5, g + 0.5))


def asymptotic_ser_qrd(design, channel, eta):
    """High-SNR union SER ``(2 C(p_1) + C(p_2)) (e^{2r} alpha^2)^{-2g}``.

    At the balanced angle both classes share ``C_0`` and the prefactor is
    ``C_1 = 3 C_0``. Angles where one class loses its two-slot diversity
    (``theta`` of 0 or pi/4) have no power-law form and raise ``ValueError``.
    """
    p1 = 4.0 * math.sin(2 * design.theta) ** 2
    p2 = 16.0 * math.cos(2 * design.theta) ** 2
    if p1 < 1e-300 or p2 < 1e-300:
        raise ValueError("asymptotic form requires 0 < theta < pi/4")
    if design.theta == OPTIMAL_THETA:
        prefactor = c1_constant(channel, eta)
    else:
        prefactor = 2 * _class_constant(channel, eta, p1) + _class_constant(channel, eta, p2)
    return prefactor * effective_snr_proxy(design) ** (-2 * channel.g)


def asymptotic_ser_baseline(design, channel, eta):
    return baseline_constant(channel, eta) * effective_snr_proxy(design) ** (-channel.g)


def asymptotic_reliable(design, channel, eta, scheme="qrd", tol=ASYMPTOTIC_TOL):
    """Whether the power-law Laplace tail holds (within ``tol``) at the
    smallest Laplace argument the Craig integral visits."""
    k = eta * math.exp(2 * design.r)
    if scheme == "qrd":
        one, two = difference_vectors(design)
        s_min = k * min(one.min() ** 2, np.abs(two).min() ** 2) / 4.0
    else:
        s_min = k * design.alpha**2
    if s_min <= 0.0:
        return False
    return abs(laplace_asymptotic(channel, s_min) / laplace_exact(channel, s_min) - 1.0) <= tol


def asymptotic_gains(channel, eta, scheme="qrd", squeezing=True):
    """Diversity order, SER constant and maximum coding gain."""
    g = channel.g
    if scheme == "qrd":
        d, c = (4 * g if squeezing else 2 * g), c1_constant(channel, eta)
    elif scheme == "baseline":
        d, c = (2 * g if squeezing else g), baseline_constant(channel, eta)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return AsymptoticGains(d=d, constant=c, gc_max=c ** (-1.0 / d))


# ---------------------------------------------------------------------------
# design optimization
# ---------------------------------------------------------------------------

def split_objective(beta, n_total):
    """``e^{2r} alpha^2 / N`` as a function of the squeezing fraction."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    p = beta * n_total
    return (math.sqrt(p) + math.sqrt(p + 1.0)) ** 2 * (1.0 - beta)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Maximizer of a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x), evals)``."""
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        evals += 1
    x = 0.5 * (a + b)
    return x, f(x), evals + 1


def _closed_form(n_total, channel, eta):
    beta = optimal_split(n_total)
    design = design_from_split(n_total, beta, OPTIMAL_THETA)
    return OptimalDesign(theta=OPTIMAL_THETA, beta=beta, r=design.r, alpha=design.alpha,
                         ser=ser_union_qrd(design, channel, eta), mode="closed_form")


def _objective(kind, channel, eta, n_total):
    def f(theta, beta):
        design = design_from_split(n_total, beta, theta)
        if design.alpha == 0.0:
            return 0.5 * (3.0 if kind == "union" else 1.0)
        pair = pep_pair(design, channel, eta)
        return pair.union if kind == "union" else max(pair.pep1, pair.pep2)
    return f


def optimal_design(n_total, channel, eta, mode="closed_form", objective="union",
                   grid=(91, 101), tol=1e-9, max_sweeps=30):
    """Optimal rotation angle and squeezing fraction for budget ``n_total``.

    ``mode="closed_form"`` returns the balanced-angle design
    ``theta = arctan(2)/2``, ``beta = N/(2N+1)``. ``mode="numeric"`` grid-
    searches ``[0, pi/4] x [0, 1]`` and refines by coordinate descent with
    golden-section line searches. ``objective`` selects what is minimized:
    ``"union"`` (``2 PEP_1 + PEP_2``) or ``"minmax"`` (``max(PEP_1, PEP_2)``).
    Non-convergence is reported through ``converged``/``diagnostic`` with the
    best point found.
    """
    if not n_total > 0.0:
        raise ValueError(f"n_total must be positive, got {n_total}")
    if mode == "closed_form":
        return _closed_form(n_total, channel, eta)
    if mode != "numeric":
        raise ValueError(f"unknown mode {mode!r}")
    if objective not in ("union", "minmax"):
        raise ValueError(f"unknown objective {objective!r}")

    thetas = np.linspace(0.0, math.pi / 4, grid[0])
    betas = np.linspace(0.0, 1.0, grid[1])
    f = _objective(objective, channel, eta, n_total)
    if objective == "union":
        surface = ser_union_qrd_grid(n_total, thetas, betas, channel, eta)
        ti, bi = np.unravel_index(np.argmin(surface), surface.shape)
        evals = surface.size
    else:
        # coarse grid on the scalar path; the max() kink defeats the grid kernel
        sub_t, sub_b = thetas[::5], betas[::5]
        vals = np.array([[f(t, b) for b in sub_b] for t in sub_t])
        ti, bi = np.unravel_index(np.argmin(vals), vals.shape)
        ti, bi = ti * 5, bi * 5
        evals = vals.size

    theta, beta = thetas[ti], betas[bi]
    dt, db = thetas[1] - thetas[0], betas[1] - betas[0]
    best = f(theta, beta)
    converged = False
    for sweep in range(max_sweeps):
        t_lo, t_hi = max(0.0, theta - 2 * dt), min(math.pi / 4, theta + 2 * dt)
        theta_new, _, n1 = golden_section_max(lambda t: -f(t, beta), t_lo, t_hi, tol)
        b_lo, b_hi = max(0.0, beta - 2 * db), min(1.0, beta + 2 * db)
        beta_new, neg, n2 = golden_section_max(lambda b: -f(theta_new, b), b_lo, b_hi, tol)
        evals += n1 + n2
        step = max(abs(theta_new - theta), abs(beta_new - beta))
        theta, beta, best = theta_new, beta_new, -neg
        if step <= 10 * tol:
            converged = True
            break
    design = design_from_split(n_total, beta, theta)
    diagnostic = "" if converged else f"coordinate descent stopped after {max_sweeps} sweeps"
    return OptimalDesign(theta=theta, beta=beta, r=design.r, alpha=design.alpha, ser=best,
                         mode="numeric", objective=objective, converged=converged,
                         diagnostic=diagnostic, evaluations=evals)
