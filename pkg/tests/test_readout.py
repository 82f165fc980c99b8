"""Readout: Born sampling, flip misclassification, photon counting,
threshold discrimination and its calibration."""

import numpy as np
import pytest
from scipy.stats import poisson

from ionsim import (
    PureState,
    ReadoutConfig,
    calibrate_readout,
    classify_ideal_flip,
    classify_threshold,
    misclassification_rate,
    new_ground,
    optimal_thresholds,
    sample_outcome,
    sample_photon_counts,
)
from ionsim.readout import flip_class_probabilities, threshold_class_probabilities


def bell_state():
    return PureState(2, np.array([1, 0, 0, 1]) / np.sqrt(2))


class TestSampleOutcome:
    def test_deterministic_state(self):
        rng = np.random.default_rng(0)
        assert all(sample_outcome(new_ground(2), rng) == 0 for _ in range(100))

    def test_uniform_split(self):
        psi = PureState(1, [1, 1] / np.sqrt(2))
        rng = np.random.default_rng(1)
        draws = np.array([sample_outcome(psi, rng) for _ in range(100_000)])
        assert np.mean(draws == 0) == pytest.approx(0.5, abs=0.005)

    def test_zero_amplitude_outcomes_never_drawn(self):
        rng = np.random.default_rng(2)
        draws = {sample_outcome(bell_state(), rng) for _ in range(5000)}
        assert draws <= {0, 3}


class TestClassifyIdealFlip:
    def test_no_flips(self):
        rng = np.random.default_rng(0)
        # |du> (index 1) has one bright ion
        assert classify_ideal_flip(1, 2, 0.0, rng) == 1
        assert classify_ideal_flip(0, 2, 0.0, rng) == 2

    def test_two_ion_flip_statistics(self):
        # P(2 bright | true |dd>) = (1 - eps)^2 = 0.9604 at eps = 0.02
        rng = np.random.default_rng(3)
        eps, n = 0.02, 200_000
        hits = sum(classify_ideal_flip(0, 2, eps, rng) == 2 for _ in range(n))
        assert hits / n == pytest.approx(0.98**2, abs=0.002)

    def test_exact_flip_table(self):
        table = flip_class_probabilities(0.02, 0.02, 2)
        assert table[2, 2] == pytest.approx(0.9604, abs=1e-12)
        assert table[2, 1] == pytest.approx(2 * 0.98 * 0.02, abs=1e-12)
        assert table[2, 0] == pytest.approx(0.02**2, abs=1e-12)
        np.testing.assert_allclose(table.sum(axis=1), 1.0, atol=1e-12)

    def test_correlation_scaling_by_enumeration(self):
        # oracle: exact enumeration of flip combinations on +/-1 outcomes.
        # the measured two-ion correlation scales by (1-2 eps)^2
        eps = 0.02
        table = flip_class_probabilities(eps, eps, 2)
        signs = np.array([1.0, -1.0, 1.0])
        for true_class, true_sign in ((2, 1.0), (1, -1.0), (0, 1.0)):
            measured = table[true_class] @ signs
            assert measured == pytest.approx((1 - 2 * eps) ** 2 * true_sign, abs=1e-12)

    def test_asymmetric_flips(self):
        table = flip_class_probabilities(0.04, 0.0, 1)
        # a bright ion is lost with probability 0.04; dark ions never misread
        assert table[1, 0] == pytest.approx(0.04)
        assert table[0, 1] == pytest.approx(0.0)


class TestPhotonModel:
    CFG = ReadoutConfig(model="photon-count", lambda_bright=10.0, lambda_dark=0.1,
                        thresholds=(3, 15))

    def test_means(self):
        rng = np.random.default_rng(4)
        n = 50_000
        for outcome, mean in ((3, 0.2), (1, 10.1), (0, 20.0)):
            draws = [sample_photon_counts(outcome, self.CFG, rng, 2) for _ in range(n)]
            assert np.mean(draws) == pytest.approx(mean, rel=0.03)

    def test_classify_threshold(self):
        assert classify_threshold(1, (3, 15)) == 0
        assert classify_threshold(7, (3, 15)) == 1
        assert classify_threshold(20, (3, 15)) == 2
        assert classify_threshold(3, (3, 15)) == 1  # boundary belongs upward

    def test_monotone_in_count(self):
        thresholds = (3, 15)
        classes = [classify_threshold(c, thresholds) for c in range(40)]
        assert classes == sorted(classes)

    def test_separable_limit(self):
        cfg = ReadoutConfig(model="photon-count", lambda_bright=500.0, lambda_dark=0.0,
                            thresholds=optimal_thresholds(500.0, 0.0, 2))
        assert misclassification_rate(cfg, 2) < 1e-9

    def test_class_probabilities_sum_to_one(self):
        table = threshold_class_probabilities(self.CFG, 2)
        np.testing.assert_allclose(table.sum(axis=1), 1.0, atol=1e-12)

    def test_rate_against_direct_cdf_sum(self):
        # oracle: direct Poisson CDF summation
        cfg = self.CFG
        means = [0.2, 10.1, 20.0]
        correct = [
            poisson.cdf(2, means[0]),
            poisson.cdf(14, means[1]) - poisson.cdf(2, means[1]),
            1.0 - poisson.cdf(14, means[2]),
        ]
        expected = 1.0 - np.mean(correct)
        assert misclassification_rate(cfg, 2) == pytest.approx(expected, abs=1e-12)


class TestCalibration:
    def test_hits_target_rate(self):
        cfg = calibrate_readout(target_rate=0.02, n_ions=2)
        rate = misclassification_rate(cfg, 2)
        assert rate == pytest.approx(0.02, abs=0.002)
        assert len(cfg.thresholds) == 2

    def test_empirical_rate_matches_exact(self):
        cfg = calibrate_readout(target_rate=0.02, n_ions=2)
        exact = misclassification_rate(cfg, 2)
        rng = np.random.default_rng(5)
        shots = 100_000
        true_classes = rng.integers(0, 3, shots)
        means = true_classes * cfg.lambda_bright + (2 - true_classes) * cfg.lambda_dark
        counts = rng.poisson(means)
        classes = np.searchsorted(cfg.thresholds, counts, side="right")
        empirical = np.mean(classes != true_classes)
        assert abs(empirical - exact) < 4 / np.sqrt(shots)

    def test_optimal_thresholds_beat_neighbors(self):
        lam_b, lam_d = 30.0, 0.3
        thr = optimal_thresholds(lam_b, lam_d, 2)
        cfg = ReadoutConfig(model="photon-count", lambda_bright=lam_b, lambda_dark=lam_d,
                            thresholds=thr)
        best = misclassification_rate(cfg, 2)
        for delta in (-1, 1):
            shifted = (thr[0] + delta, thr[1])
            alt = ReadoutConfig(model="photon-count", lambda_bright=lam_b,
                                lambda_dark=lam_d, thresholds=shifted)
            assert misclassification_rate(alt, 2) >= best - 1e-15


class TestReadoutConfigValidation:
    def test_bad_eps(self):
        with pytest.raises(ValueError):
            ReadoutConfig(flip_eps=0.5)

    def test_bad_lambdas(self):
        with pytest.raises(ValueError):
            ReadoutConfig(model="photon-count", lambda_bright=1.0, lambda_dark=2.0)

    def test_bad_thresholds(self):
        with pytest.raises(ValueError):
            ReadoutConfig(model="photon-count", thresholds=(5, 5))
