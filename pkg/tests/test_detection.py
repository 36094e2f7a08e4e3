# tests/test_detection.py
import math

import numpy as np
import pytest
from scipy.stats import poisson

from sicsim.analysis.detection import (
    crossing_threshold,
    fit_poisson_mixture,
    misclassification,
    photon_histogram,
)
from sicsim.utils.errors import InsufficientDataError

DARK_MEAN = 0.709
BRIGHT_MEAN = 18.75


def _mixture_histogram(n=200_000, weight_dark=2 / 3, size=60):
    k = np.arange(size)
    expected = n * (weight_dark * poisson.pmf(k, DARK_MEAN) + (1 - weight_dark) * poisson.pmf(k, BRIGHT_MEAN))
    return np.round(expected).astype(np.int64)


def test_crossing_threshold_for_lab_means():
    assert crossing_threshold(DARK_MEAN, BRIGHT_MEAN, 2 / 3) == 5.5
    assert crossing_threshold(DARK_MEAN, BRIGHT_MEAN, 0.5) == 5.5


def test_misclassification_tails_at_lab_threshold():
    dark_as_bright, bright_as_dark = misclassification(DARK_MEAN, BRIGHT_MEAN, 5.5)
    assert dark_as_bright == pytest.approx(poisson.sf(5, DARK_MEAN))
    assert bright_as_dark == pytest.approx(poisson.cdf(5, BRIGHT_MEAN))
    assert dark_as_bright < 1e-3 and bright_as_dark < 1e-3


def test_fit_recovers_mixture_parameters():
    fit = fit_poisson_mixture(_mixture_histogram())
    assert not fit.degenerate
    assert fit.lambda_dark == pytest.approx(DARK_MEAN, rel=0.01)
    assert fit.lambda_bright == pytest.approx(BRIGHT_MEAN, rel=0.01)
    assert fit.weight_dark == pytest.approx(2 / 3, abs=0.01)
    assert fit.threshold == 5.5
    assert fit.p_dark_read_bright < 1e-3


def test_fit_uses_given_threshold():
    fit = fit_poisson_mixture(_mixture_histogram(), threshold=3.5)
    assert fit.threshold == 3.5
    assert fit.p_dark_read_bright == pytest.approx(poisson.sf(3, fit.lambda_dark))


def test_single_poisson_histogram_is_degenerate():
    k = np.arange(30)
    hist = np.round(10_000 * poisson.pmf(k, 3.0)).astype(np.int64)
    fit = fit_poisson_mixture(hist)
    assert fit.degenerate
    assert "dispersion" in fit.reason
    assert math.isnan(fit.threshold)


def test_empty_histogram_raises():
    with pytest.raises(InsufficientDataError):
        fit_poisson_mixture(np.zeros(10))


def test_histogram_must_be_one_dimensional():
    with pytest.raises(ValueError):
        fit_poisson_mixture(np.ones((2, 2)))


def test_simulated_counts_fit_the_configured_model(noisy_campaign):
    hist = photon_histogram(noisy_campaign)
    assert hist.sum() == noisy_campaign.total_records
    fit = fit_poisson_mixture(hist)
    assert not fit.degenerate
    assert fit.lambda_bright == pytest.approx(BRIGHT_MEAN, rel=0.05)
    assert fit.lambda_dark == pytest.approx(DARK_MEAN, rel=0.1)
