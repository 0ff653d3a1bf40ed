"""Self-check suite behind ``qrd validate``."""
import math
from dataclasses import dataclass

import numpy as np

from . import channel as ch
from . import specfun as sf
from .detector import block_rng

SAMPLER_STREAM = 7
VALIDATION_PARAMS = ((0.5, 1.2), (2.1, 4.5), (4.0, 1.9))


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    tol: float
    relative: bool = True

    @property
    def error(self):
        diff = abs(self.observed - self.expected)
        return float(diff / abs(self.expected) if self.relative and self.expected != 0 else diff)

    @property
    def passed(self):
        return bool(math.isfinite(self.observed) and self.error <= self.tol)


def _specfun_checks():
    yield Check("ln_gamma(1)", sf.ln_gamma(1.0), 0.0, 1e-15, relative=False)
    yield Check("ln_gamma(1/2)", sf.ln_gamma(0.5), 0.5 * math.log(math.pi), 1e-14)
    x = 7.3
    yield Check("ln_gamma recurrence at 7.3", sf.ln_gamma(x + 1), sf.ln_gamma(x) + math.log(x), 1e-14)
    yield Check("beta(1/2, 1/2)", sf.beta(0.5, 0.5), math.pi, 1e-14)
    yield Check("K_1/2(1) closed form", sf.bessel_k(0.5, 1.0),
                math.sqrt(math.pi / 2) * math.exp(-1.0), 1e-13)
    nu, x = 0.7, 2.0
    yield Check("K recurrence nu=0.7 x=2",
                sf.bessel_k(nu + 1, x) - sf.bessel_k(nu - 1, x),
                2 * nu / x * sf.bessel_k(nu, x), 1e-12)
    for a in (0.3, 0.5, 1.2):
        for x in (0.1, 3.0, 100.0):
            yield Check(f"U({a},{a + 1};{x}) x^a", sf.tricomi_u(a, a + 1, x) * x**a, 1.0, 1e-10)
    yield Check("Q(1) + Q(-1)", sf.q_function(1.0) + sf.q_function(-1.0), 1.0, 1e-14,
                relative=False)


def _channel_checks():
    for e, z in VALIDATION_PARAMS:
        p = ch.GammaGammaParams(e, z)
        for s in np.geomspace(1e-2, 1e5, 8):
            yield Check(f"Laplace closed form vs quadrature ({e},{z}) s={s:.3g}",
                        ch.laplace_exact(p, s), ch.laplace_quadrature(p, s), 1e-6)
        yield Check(f"pdf normalization ({e},{z})", ch.moment(p, 0), 1.0, 1e-8)
        # L(s) s^g -> Lambda; at s = 1e12 the correction terms are < 1e-5
        s = 1e12
        yield Check(f"Lambda tail constant ({e},{z})",
                    ch.laplace_asymptotic(p, s), ch.laplace_exact(p, s), 1e-4)


def _sampler_checks(seed):
    p = ch.GammaGammaParams(0.5, 1.2)
    n = 1_000_000
    i = ch.sample(p, block_rng(seed, SAMPLER_STREAM, 0), n)
    se1 = i.std(ddof=1) / math.sqrt(n)
    yield Check("sampler mean (tol = 3 SE)", float(i.mean()), 1.0, 3 * se1, relative=False)
    sq = i * i
    se2 = sq.std(ddof=1) / math.sqrt(n)
    yield Check("sampler second moment (tol = 3 SE)", float(sq.mean()),
                (1 + 1 / p.epsilon) * (1 + 1 / p.zeta), 3 * se2, relative=False)


def run_validation(seed=0):
    """All checks in a fixed order."""
    checks = []
    for group in (_specfun_checks(), _channel_checks(), _sampler_checks(seed)):
        for check in group:
            checks.append(check)
    return checks


def format_table(checks):
    lines = [f"{'status':6}  {'check':58}  {'observed':>22}  {'expected':>22}  {'err':>9}  {'tol':>9}"]
    for c in checks:
        lines.append(f"{'PASS' if c.passed else 'FAIL':6}  {c.name:58.58}  {c.observed:22.15g}  "
                     f"{c.expected:22.15g}  {c.error:9.2e}  {c.tol:9.2e}")
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines)
