import math

import numpy as np
import pytest
from scipy.integrate import quad

from volbound import (
    InvalidConfigError,
    SabrParams,
    expected_integrated_variance,
    moment_sigma,
    simulate_paths,
)


class TestSabrParams:
    def test_validation(self):
        with pytest.raises(InvalidConfigError):
            SabrParams(sigma0=0.0, alpha=0.5)
        with pytest.raises(InvalidConfigError):
            SabrParams(sigma0=0.3, alpha=0.0)
        with pytest.raises(InvalidConfigError):
            SabrParams(sigma0=0.3, alpha=0.5, rho=1.5)

    def test_defaults(self):
        p = SabrParams(sigma0=0.3, alpha=0.5)
        assert p.rho == 0.0 and p.x0 == 0.0


class TestMoments:
    def test_first_moment_is_martingale(self):
        p = SabrParams(sigma0=0.3, alpha=1.0)
        for t in (0.0, 0.5, 3.0):
            assert moment_sigma(p, t, 1) == pytest.approx(0.3, rel=1e-15)

    def test_second_moment_frozen(self):
        # 0.09 * e
        p = SabrParams(sigma0=0.3, alpha=1.0)
        assert moment_sigma(p, 1.0, 2) == pytest.approx(0.24464536456131405, rel=1e-13)

    def test_fourth_moment_frozen(self):
        # 0.0081 * e^3
        p = SabrParams(sigma0=0.3, alpha=1.0)
        assert moment_sigma(p, 0.5, 4) == pytest.approx(0.1626928490778201, rel=1e-13)

    def test_validation(self):
        p = SabrParams(sigma0=0.3, alpha=1.0)
        with pytest.raises(InvalidConfigError):
            moment_sigma(p, -1.0, 2)
        with pytest.raises(InvalidConfigError):
            moment_sigma(p, 1.0, 0)


class TestExpectedIntegratedVariance:
    def test_frozen_values(self):
        assert expected_integrated_variance(
            SabrParams(0.3, 0.5), 0.5
        ) == pytest.approx(0.04793344310405748, rel=1e-13)
        assert expected_integrated_variance(
            SabrParams(0.3, 1.0), 1.0
        ) == pytest.approx(0.15464536456131406, rel=1e-13)

    @pytest.mark.parametrize("alpha,T", [(0.25, 0.3), (0.5, 0.5), (1.0, 1.0)])
    def test_matches_quadrature_oracle(self, alpha, T):
        p = SabrParams(0.3, alpha)
        oracle = quad(
            lambda s: 0.09 * math.exp(alpha**2 * s), 0.0, T, epsabs=0.0, epsrel=1e-12
        )[0]
        assert expected_integrated_variance(p, T) == pytest.approx(oracle, rel=1e-12)

    def test_vanishing_vol_of_vol_limit(self):
        p = SabrParams(0.3, 1e-12)
        assert expected_integrated_variance(p, 0.5) == pytest.approx(0.045, rel=1e-12)


class TestSimulatePaths:
    def test_invalid_config(self):
        p = SabrParams(0.3, 0.5)
        with pytest.raises(InvalidConfigError):
            simulate_paths(p, 0.5, 0, 100, 1)
        with pytest.raises(InvalidConfigError):
            simulate_paths(p, 0.5, 16, 0, 1)

    def test_same_seed_identical(self):
        p = SabrParams(0.3, 0.5)
        a = simulate_paths(p, 0.5, 32, 5_000, 42)
        b = simulate_paths(p, 0.5, 32, 5_000, 42)
        assert np.array_equal(a.Y, b.Y)
        assert np.array_equal(a.sigma_end, b.sigma_end)

    def test_worker_count_invariance(self):
        # spans several chunks so the decomposition actually differs
        p = SabrParams(0.3, 0.5)
        n = (1 << 16) * 2 + 123
        a = simulate_paths(p, 0.5, 8, n, 7, workers=1)
        b = simulate_paths(p, 0.5, 8, n, 7, workers=4)
        assert np.array_equal(a.Y, b.Y)
        assert np.array_equal(a.sigma_end, b.sigma_end)

    def test_env_var_cap(self, monkeypatch):
        from volbound.sabr import resolve_workers

        monkeypatch.setenv("VOLBOUND_THREADS", "1")
        assert resolve_workers(8) == 1
        monkeypatch.setenv("VOLBOUND_THREADS", "junk")
        with pytest.raises(InvalidConfigError):
            resolve_workers(8)

    def test_degenerate_vol_of_vol(self, batch_flat):
        assert np.allclose(batch_flat.Y, 0.09 * 1.0, rtol=1e-8)

    def test_mean_integrated_variance(self):
        p = SabrParams(0.3, 0.5)
        batch = simulate_paths(p, 0.5, 64, 100_000, 9)
        target = expected_integrated_variance(p, 0.5)
        se = batch.Y.std(ddof=1) / math.sqrt(batch.n)
        assert abs(batch.Y.mean() - target) <= 3.0 * se

    def test_terminal_moment_match(self, batch_mid):
        p = batch_mid.params
        sq = batch_mid.sigma_end**2
        se = sq.std(ddof=1) / math.sqrt(batch_mid.n)
        assert abs(sq.mean() - moment_sigma(p, batch_mid.T, 2)) <= 3.0 * se

    def test_jensen_sample_level(self, batch_mid):
        v = np.sqrt(batch_mid.Y / batch_mid.T)
        assert v.mean() <= math.sqrt(batch_mid.Y.mean() / batch_mid.T)

    def test_integrated_variance_positive(self, batch_mid):
        assert (batch_mid.Y > 0).all()

    def test_exact_stochastic_integral_identity(self, batch_mid):
        p = batch_mid.params
        expected = (batch_mid.sigma_end - p.sigma0) / p.alpha
        assert np.array_equal(batch_mid.iw, expected)

    def test_batch_arrays_read_only(self, batch_mid):
        with pytest.raises(ValueError):
            batch_mid.Y[0] = 0.0

    def test_kept_paths_consistent(self, batch_with_paths):
        b = batch_with_paths
        assert b.sigma_paths.shape == (b.n, b.steps + 1)
        assert np.all(b.sigma_paths[:, 0] == b.params.sigma0)
        assert np.array_equal(b.sigma_paths[:, -1], b.sigma_end)
        y = np.trapezoid(b.sigma_paths**2, dx=b.dt, axis=1)
        assert np.allclose(y, b.Y, rtol=1e-12)

    def test_stochastic_integral_riemann_convergence(self):
        """Left-endpoint Riemann sums of the vol-against-driver integral
        converge to the exact identity value at the strong rate ~ dt^0.5."""
        p = SabrParams(0.3, 0.5)
        fine_steps = 4096
        batch = simulate_paths(p, 1.0, fine_steps, 256, 77, keep_paths=True)
        sig = batch.sigma_paths
        dt_fine = batch.dt
        errors = []
        levels = [64, 128, 256, 512, 1024, 2048, 4096]
        for steps in levels:
            stride = fine_steps // steps
            coarse = sig[:, ::stride]
            dt = dt_fine * stride
            # driver increments recovered exactly from the lognormal update
            dw = (np.log(coarse[:, 1:] / coarse[:, :-1]) + 0.5 * p.alpha**2 * dt) / p.alpha
            riemann = np.sum(coarse[:, :-1] * dw, axis=1)
            errors.append(np.sqrt(np.mean((riemann - batch.iw) ** 2)))
        slope = np.polyfit(np.log2(levels), np.log2(errors), 1)[0]
        assert slope <= -0.4
