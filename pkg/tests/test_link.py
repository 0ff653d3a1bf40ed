import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrd import link
from qrd.channel import GammaGammaParams
from qrd.detector import block_rng
from qrd.specfun import DomainError

# N = 80 balanced design, 20-digit references
R_80 = 2.540702182492231498
ALPHA_80 = 6.3441663916521723035
THETA_DEG = 31.717474411461005324


class TestDesign:
    def test_balanced_reference(self):
        d = link.design_from_split(80, link.optimal_split(80))
        assert d.r == pytest.approx(R_80, rel=1e-14)
        assert d.alpha == pytest.approx(ALPHA_80, rel=1e-14)
        assert math.degrees(link.OPTIMAL_THETA) == pytest.approx(THETA_DEG, rel=1e-14)

    @given(st.floats(0.0, 1e6), st.floats(0.0, 1.0))
    def test_budget_spent(self, n, beta):
        d = link.design_from_split(n, beta)
        assert d.photons_used == pytest.approx(n, rel=1e-9, abs=1e-12)
        assert math.sinh(d.r) ** 2 == pytest.approx(beta * n, rel=1e-9, abs=1e-12)

    def test_unsqueezed_noise(self):
        d = link.design_from_split(10.0, 0.0)
        assert d.r == 0.0 and d.alpha == math.sqrt(10.0)
        assert d.sigma_q_sq == 0.5

    @given(st.floats(1e-3, 1e7))
    def test_optimal_split_closed_forms(self, n):
        d = link.design_from_split(n, link.optimal_split(n))
        assert d.r == pytest.approx(0.5 * math.log(2 * n + 1), rel=1e-12)
        assert d.alpha == pytest.approx(math.sqrt(n * (n + 1) / (2 * n + 1)), rel=1e-12)

    def test_noise_decreasing_in_squeezing(self):
        sig = [link.design_from_split(10.0, b).sigma_q_sq for b in np.linspace(0, 1, 21)]
        assert np.all(np.diff(sig) < 0)

    def test_with_theta(self):
        d = link.design_from_split(10.0, 0.3).with_theta(0.1)
        assert d.theta == 0.1 and d.beta == 0.3

    @pytest.mark.parametrize("kw", [dict(n_total=-1.0, beta=0.5), dict(n_total=1.0, beta=1.5),
                                    dict(n_total=float("nan"), beta=0.5)])
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            link.design_from_split(**kw)

    def test_overspent_budget(self):
        with pytest.raises(DomainError):
            link.ModulationDesign(n_total=1.0, beta=0.0, alpha=2.0, r=0.0, theta=0.0)
        with pytest.raises(DomainError):
            link.ModulationDesign(n_total=1.0, beta=0.0, alpha=0.5, r=0.0, theta=1.0)

    def test_link_config_checks(self):
        d = link.design_from_split(1.0, 0.0)
        with pytest.raises(DomainError):
            link.LinkConfig(1.2, GammaGammaParams(0.5, 1.2), d)
        with pytest.raises(DomainError):
            link.LinkConfig(0.5, GammaGammaParams(0.5, 1.2), d, seed=-1)


class TestRotation:
    @given(st.floats(0.0, math.pi / 4))
    def test_orthogonal(self, theta):
        r = link.rotation_matrix(theta)
        np.testing.assert_allclose(r @ r.T, np.eye(2), atol=1e-15)
        assert np.linalg.det(r) == pytest.approx(1.0)

    def test_codebook(self):
        d = link.design_from_split(5.0, 0.2, theta=0.4)
        cb = link.codebook(d)
        assert cb.codewords.shape == (4, 2)
        np.testing.assert_allclose(cb.symbols, d.alpha * link.HYPOTHESES)
        np.testing.assert_allclose((cb.codewords**2).sum(axis=1), 2 * d.alpha**2)
        np.testing.assert_allclose(cb.codewords[0], d.alpha * np.array(
            [math.cos(0.4) - math.sin(0.4), math.sin(0.4) + math.cos(0.4)]))

    def test_rotate_examples(self):
        a = 1.7
        np.testing.assert_array_equal(link.rotate(0.0, [a, -a]), [a, -a])
        np.testing.assert_allclose(link.rotate(math.pi / 4, [a, a]), [0.0, a * math.sqrt(2)],
                                   atol=1e-15)

    @given(st.floats(0.0, math.pi / 4), st.floats(0.01, 100.0))
    def test_difference_structure(self, theta, a):
        x = a * link.HYPOTHESES
        for i in range(4):
            for j in range(4):
                if i == j:
                    continue
                u = link.rotate(theta, x[i] - x[j])
                assert (u**2).sum() == pytest.approx(((x[i] - x[j]) ** 2).sum(), rel=1e-12)
                prod = u[0] ** 2 * u[1] ** 2
                if (i + j) == 3:
                    expected = 16 * a**4 * math.cos(2 * theta) ** 2
                else:
                    expected = 4 * a**4 * math.sin(2 * theta) ** 2
                assert prod == pytest.approx(expected, rel=1e-9, abs=1e-9 * a**4)

    def test_codebook_sign_closed(self):
        cw = link.codebook(link.design_from_split(3.0, 0.1, 0.5)).codewords
        for c in cw:
            assert np.any(np.all(np.isclose(cw, -c), axis=1))

    def test_rotate_stack(self):
        x = np.arange(12.0).reshape(6, 2)
        np.testing.assert_allclose(link.rotate(0.3, x)[2], link.rotation_matrix(0.3) @ x[2])


class TestObservation:
    def test_noise_statistics(self):
        d = link.design_from_split(20.0, 0.4, theta=0.0)
        cfg = link.LinkConfig(0.8, GammaGammaParams(0.5, 1.2), d)
        n = 500_000
        fading = np.full((n, 2), 2.0)
        cw = np.tile([1.0, -1.0], (n, 1))
        y = link.homodyne_observe(cfg, cw, fading, block_rng(0, 11, 0))
        noise = (y - math.sqrt(0.8 * 2.0) * cw).ravel()
        # 10^6 draws; the variance of a squared Gaussian is 2 sigma^4
        se = math.sqrt(2.0 / noise.size) * d.sigma_q_sq
        assert abs(noise.var() - d.sigma_q_sq) < 3 * se
        assert abs(noise.mean()) < 3 * math.sqrt(d.sigma_q_sq / noise.size)

    def test_vacuum_noise_unit_link(self):
        d = link.design_from_split(4.0, 0.0, theta=0.0)
        cfg = link.LinkConfig(1.0, GammaGammaParams(0.5, 1.2), d)
        y = link.homodyne_observe(cfg, np.tile([d.alpha, -d.alpha], (200_000, 1)),
                                  np.ones((200_000, 2)), block_rng(0, 12, 0))
        np.testing.assert_allclose(y.mean(axis=0), [d.alpha, -d.alpha], atol=0.01)
        np.testing.assert_allclose(y.var(axis=0), 0.5, rtol=0.01)

    def test_noiseless_limit(self):
        d = link.design_from_split(1e12, 0.5, theta=0.3)
        cfg = link.LinkConfig(0.8, GammaGammaParams(0.5, 1.2), d)
        cw = link.codebook(d).codewords[:1]
        y = link.homodyne_observe(cfg, cw, np.array([[0.7, 1.3]]), block_rng(0, 13, 0))
        np.testing.assert_allclose(y, np.sqrt(0.8 * np.array([0.7, 1.3])) * cw, rtol=1e-9)

    def test_effective_snr_limits(self):
        assert link.effective_snr_proxy(link.design_from_split(10.0, 0.0)) == pytest.approx(10.0)
        ratios = [link.effective_snr_proxy(link.design_from_split(n, 0.5)) / n**2
                  for n in (1e2, 1e4, 1e6)]
        assert abs(ratios[-1] - 1.0) < 1e-2 and np.all(np.diff(np.abs(np.array(ratios) - 1)) < 0)
        grid = np.linspace(0.0, 1.0, 10001)
        best = grid[np.argmax([link.effective_snr_proxy(link.design_from_split(80.0, b))
                               for b in grid])]
        assert best == pytest.approx(80 / 161, abs=1e-4)

    @pytest.mark.parametrize("n", [1.0, 80.0, 1e4])
    def test_effective_snr_at_optimal_split(self, n):
        d = link.design_from_split(n, link.optimal_split(n))
        # e^{2r} = 2N + 1 and alpha^2 = N (N + 1) / (2N + 1)
        assert math.exp(2 * d.r) == pytest.approx(2 * n + 1, rel=1e-12)
        assert link.effective_snr_proxy(d) == pytest.approx(n * (n + 1), rel=1e-12)
