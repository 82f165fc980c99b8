"""Analysis: sinusoid/exponential fits, fidelity assembly, correlation and
Bell arithmetic, statistical errors."""

import math

import numpy as np
import pytest

from ionsim import (
    BellSettings,
    FitError,
    bell_signal,
    binomial_error,
    coherence_from_sweep,
    correlation_q,
    fidelity_from_parts,
    fit_exponential,
    fit_sinusoid,
)

SQ2 = math.sqrt(2.0)


class TestFitSinusoid:
    def test_exact_recovery(self):
        phis = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        y = np.cos(2 * phis)
        fit = fit_sinusoid(phis, y, np.pi)
        assert fit.amplitude == pytest.approx(1.0, abs=1e-12)
        assert fit.offset == pytest.approx(0.0, abs=1e-12)
        assert fit.residual_rms < 1e-12

    def test_two_ion_coherence_amplitude(self):
        # fringe of amplitude 2 * 0.43 recovers the tabulated coherence
        phis = np.linspace(0, np.pi, 24, endpoint=False)
        y = 2 * 0.43 * np.cos(2 * phis)
        fit = fit_sinusoid(phis, y, np.pi)
        assert fit.amplitude == pytest.approx(0.86, abs=1e-12)

    def test_four_ion_coherence_amplitude(self):
        phis = np.linspace(0, np.pi / 2, 16, endpoint=False)
        y = 2 * 0.215 * np.cos(4 * phis)
        fit = fit_sinusoid(phis, y, np.pi / 2)
        assert fit.amplitude == pytest.approx(0.43, abs=1e-12)

    def test_amplitude_invariant_under_phase_shift(self):
        rng = np.random.default_rng(0)
        phis = np.linspace(0, 2 * np.pi, 20, endpoint=False)
        y = 0.7 * np.cos(phis - 0.4) + 0.2
        for shift in rng.uniform(-np.pi, np.pi, 10):
            fit = fit_sinusoid(phis + shift, y, 2 * np.pi)
            assert fit.amplitude == pytest.approx(0.7, abs=1e-10)

    def test_full_parameter_recovery(self):
        phis = np.linspace(0, 4 * np.pi, 40)
        y = 0.31 + 0.52 * np.cos(phis - 1.2)
        fit = fit_sinusoid(phis, y, 2 * np.pi)
        assert fit.amplitude == pytest.approx(0.52, abs=1e-10)
        assert fit.offset == pytest.approx(0.31, abs=1e-10)
        assert fit.phase_offset == pytest.approx(1.2, abs=1e-10)

    def test_under_determined(self):
        with pytest.raises(FitError):
            fit_sinusoid([0.0, 1.0, 2.0], [1.0, 0.0, 1.0], np.pi)
        with pytest.raises(FitError):
            fit_sinusoid([0.5] * 8, [1.0] * 8, np.pi)

    def test_amplitude_error_propagation(self):
        phis = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        y = np.cos(phis)
        sigma = np.full(16, 0.01)
        fit = fit_sinusoid(phis, y, 2 * np.pi, y_sigma=sigma)
        # uniform grid: var(A) = 2 sigma^2 / n
        assert fit.amplitude_error == pytest.approx(0.01 * np.sqrt(2 / 16), rel=1e-6)


class TestFidelityFromParts:
    def test_perfect(self):
        assert fidelity_from_parts(0.5, 0.5, 0.5) == pytest.approx(1.0)

    def test_four_ion_table_row(self):
        f = fidelity_from_parts(0.35, 0.35, 0.215)
        assert f == pytest.approx(0.565, abs=1e-12)
        assert abs(f - 0.57) <= 0.02  # within the published error bar

    def test_two_ion_table_row(self):
        # computed literally; the published rounding gives 0.83
        assert fidelity_from_parts(0.46, 0.385, 0.43) == pytest.approx(0.8525, abs=1e-12)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            fidelity_from_parts(1.2, 0.3, 0.1)
        with pytest.raises(ValueError):
            fidelity_from_parts(0.3, 0.3, 0.7)


class TestCorrelationQ:
    def test_perfect_correlation(self):
        assert correlation_q(10, 0, 10) == pytest.approx(1.0)

    def test_perfect_anticorrelation(self):
        assert correlation_q(0, 20, 0) == pytest.approx(-1.0)

    def test_published_scale(self):
        # (n0+n2) - n1 = 10820 out of 20000 gives 0.541
        n1 = (20000 - 10820) // 2
        n0_plus_n2 = 20000 - n1
        assert correlation_q(n0_plus_n2 - 5000, n1, 5000) == pytest.approx(0.541, abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            counts = rng.integers(0, 1000, 3)
            if counts.sum() == 0:
                continue
            assert -1.0 <= correlation_q(*counts) <= 1.0

    def test_zero_total(self):
        with pytest.raises(ValueError):
            correlation_q(0, 0, 0)


class TestBellSignal:
    def test_published_row(self):
        b = bell_signal(-0.573, 0.539, 0.569, 0.541)
        assert b == pytest.approx(2.222, abs=1e-12)

    def test_quantum_maximum(self):
        b = bell_signal(-1 / SQ2, 1 / SQ2, 1 / SQ2, 1 / SQ2)
        assert b == pytest.approx(2 * SQ2, abs=1e-12)

    def test_local_realism_boundary(self):
        assert bell_signal(0.5, -0.5, 0.5, 0.5) == pytest.approx(2.0)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            bell_signal(1.5, 0.0, 0.0, 0.0)


class TestBinomialError:
    def test_published_caption_value(self):
        assert binomial_error(0.55, 20000) == pytest.approx(0.0059, abs=2e-4)

    def test_simple_cases(self):
        assert binomial_error(0.0, 10000) == pytest.approx(0.01)
        assert binomial_error(1.0, 123) == pytest.approx(0.0)

    def test_invalid_total(self):
        with pytest.raises(ValueError):
            binomial_error(0.5, 0)


class TestCoherenceFromSweep:
    def test_ideal_fringe_gives_unit_coherence(self):
        alphas = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        p2 = 0.5 - 0.5 * np.cos(alphas)
        assert coherence_from_sweep(alphas, p2) == pytest.approx(1.0, abs=1e-12)

    def test_damped_fringe(self):
        c = np.exp(-0.18 * 5.0)
        alphas = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        p2 = 0.5 - (c / 2) * np.cos(alphas - 0.3)
        assert coherence_from_sweep(alphas, p2) == pytest.approx(c, abs=1e-12)


class TestFitExponential:
    def test_engineered_rate(self):
        t = np.linspace(0, 12, 6)
        fit = fit_exponential(t, np.exp(-0.18 * t))
        assert fit.rate == pytest.approx(0.18, abs=1e-6)
        assert fit.amplitude == pytest.approx(1.0, abs=1e-6)
        assert fit.rate_stderr < 1e-12

    def test_ambient_scale_rate(self):
        t = np.linspace(0, 400, 9)
        fit = fit_exponential(t, np.exp(-7.9e-3 * t))
        assert fit.rate == pytest.approx(7.9e-3, abs=1e-6)

    def test_constant_series_zero_rate(self):
        t = np.linspace(0, 30, 7)
        fit = fit_exponential(t, np.full(7, 0.43))
        assert abs(fit.rate) < 1e-10
        assert fit.amplitude == pytest.approx(0.43, abs=1e-10)

    def test_growth_allowed(self):
        t = np.linspace(0, 5, 5)
        fit = fit_exponential(t, np.exp(0.2 * t))
        assert fit.rate == pytest.approx(-0.2, abs=1e-8)

    def test_rejects_nonpositive(self):
        with pytest.raises(FitError):
            fit_exponential([0, 1, 2], [1.0, 0.5, 0.0])

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_exponential([0, 1], [1.0, 0.5])

    def test_noisy_recovery_within_three_sigma(self):
        rng = np.random.default_rng(2)
        t = np.linspace(0, 10, 8)
        true_rate = 0.18
        noise = rng.normal(0, 0.01, len(t))
        fit = fit_exponential(t, np.exp(-true_rate * t) * (1 + noise))
        assert abs(fit.rate - true_rate) < 3 * max(fit.rate_stderr, 1e-4)


class TestBellSettings:
    def test_default_angles(self):
        s = BellSettings()
        assert s.alpha1 == pytest.approx(-np.pi / 8)
        assert s.delta1 == pytest.approx(3 * np.pi / 8)
        pairs = s.pairs()
        assert pairs[0] == (s.alpha1, s.beta2)
        assert pairs[3] == (s.delta1, s.gamma2)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            BellSettings(alpha1=float("nan"))
