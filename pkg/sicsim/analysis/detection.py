"""Photon-count histograms and the two-Poisson detection model fitted to them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np
from scipy import optimize
from scipy.stats import poisson

from sicsim.simulation.engine import Campaign, Subsequence
from sicsim.utils.errors import FitConvergenceError, InsufficientDataError

# Variance/mean below this is treated as a single Poisson component.
MIN_DISPERSION_INDEX = 1.5
MIN_COMPONENT_WEIGHT = 1e-3


@dataclass(frozen=True)
class PoissonMixtureFit:
    lambda_dark: float
    lambda_bright: float
    weight_dark: float
    weight_bright: float
    threshold: float
    p_dark_read_bright: float
    p_bright_read_dark: float
    residual: float
    samples: int
    degenerate: bool = False
    reason: Optional[str] = None

    def as_dict(self) -> Dict:
        return {
            "lambda_dark": self.lambda_dark,
            "lambda_bright": self.lambda_bright,
            "weight_dark": self.weight_dark,
            "weight_bright": self.weight_bright,
            "threshold": self.threshold,
            "p_dark_read_bright": self.p_dark_read_bright,
            "p_bright_read_dark": self.p_bright_read_dark,
            "residual": self.residual,
            "samples": self.samples,
            "degenerate": self.degenerate,
            "reason": self.reason,
        }


def photon_histogram(source) -> np.ndarray:
    """Histogram of photon counts over every record, excluded lines included."""
    if isinstance(source, Campaign):
        subs: Iterable[Subsequence] = source.subsequences
    else:
        subs = source
    counts = [s.photon_counts for s in subs if len(s)]
    if not counts:
        return np.zeros(1, dtype=np.int64)
    return np.bincount(np.concatenate(counts).astype(np.int64)).astype(np.int64)


def misclassification(lambda_dark: float, lambda_bright: float, threshold: float):
    """(P(dark read as bright), P(bright read as dark)) for a count threshold."""
    cut = math.floor(threshold)
    return float(poisson.sf(cut, lambda_dark)), float(poisson.cdf(cut, lambda_bright))


def crossing_threshold(lambda_dark: float, lambda_bright: float, weight_dark: float) -> float:
    """Half-integer threshold just below the first count where the weighted
    bright distribution overtakes the weighted dark one."""
    k = np.arange(0, int(math.ceil(lambda_bright)) + 1)
    dark = weight_dark * poisson.pmf(k, lambda_dark)
    bright = (1.0 - weight_dark) * poisson.pmf(k, lambda_bright)
    above = np.flatnonzero((bright > dark) & (k > lambda_dark))
    first = int(above[0]) if len(above) else int(round(lambda_bright))
    return first - 0.5


def _mixture(k, weight_dark, lambda_dark, lambda_bright, total):
    return total * (weight_dark * poisson.pmf(k, lambda_dark) + (1.0 - weight_dark) * poisson.pmf(k, lambda_bright))


def _degenerate(mean: float, n: int, reason: str, residual: float = 0.0) -> PoissonMixtureFit:
    return PoissonMixtureFit(
        lambda_dark=mean,
        lambda_bright=mean,
        weight_dark=1.0,
        weight_bright=0.0,
        threshold=math.nan,
        p_dark_read_bright=math.nan,
        p_bright_read_dark=math.nan,
        residual=residual,
        samples=n,
        degenerate=True,
        reason=reason,
    )


def fit_poisson_mixture(histogram, threshold: Optional[float] = None) -> PoissonMixtureFit:
    """Least-squares fit of N [w Pois(ld) + (1-w) Pois(lb)] to a count histogram.

    Misclassification rates are evaluated at `threshold`, or at the fitted
    crossing point when it is omitted.
    """
    hist = np.asarray(histogram, dtype=float)
    if hist.ndim != 1 or (hist < 0).any():
        raise ValueError("histogram must be a 1-d array of nonnegative bin counts")
    n = int(hist.sum())
    if n == 0:
        raise InsufficientDataError("Empty photon-count histogram", ["counts"])
    k = np.arange(len(hist), dtype=float)
    mean = float(np.dot(k, hist) / n)
    var = float(np.dot((k - mean) ** 2, hist) / n)
    if mean == 0.0 or var / mean < MIN_DISPERSION_INDEX:
        return _degenerate(mean, n, f"dispersion index {var / mean if mean else 0.0:.3f} is below {MIN_DISPERSION_INDEX}")

    low = k <= mean
    lambda_dark0 = float(np.dot(k[low], hist[low]) / max(hist[low].sum(), 1.0))
    lambda_bright0 = float(np.dot(k[~low], hist[~low]) / max(hist[~low].sum(), 1.0))
    weight0 = float(hist[low].sum() / n)
    try:
        popt, _ = optimize.curve_fit(
            lambda x, w, ld, lb: _mixture(x, w, ld, lb, n),
            k,
            hist,
            p0=(weight0, max(lambda_dark0, 1e-3), max(lambda_bright0, 2e-3)),
            bounds=([0.0, 1e-6, 1e-6], [1.0, np.inf, np.inf]),
            maxfev=10000,
        )
    except RuntimeError as e:
        residual = float(np.sum((hist - _mixture(k, weight0, lambda_dark0, lambda_bright0, n)) ** 2))
        raise FitConvergenceError(f"Poisson mixture fit did not converge: {e}", residual) from e
    w, ld, lb = (float(x) for x in popt)
    if ld > lb:
        w, ld, lb = 1.0 - w, lb, ld
    residual = float(np.sum((hist - _mixture(k, w, ld, lb, n)) ** 2))
    if min(w, 1.0 - w) < MIN_COMPONENT_WEIGHT or math.isclose(ld, lb, rel_tol=1e-3):
        return _degenerate(mean, n, f"fit collapsed to one component (weight_dark={w:.4g})", residual)

    cut = crossing_threshold(ld, lb, w) if threshold is None else float(threshold)
    p_db, p_bd = misclassification(ld, lb, cut)
    return PoissonMixtureFit(
        lambda_dark=ld,
        lambda_bright=lb,
        weight_dark=w,
        weight_bright=1.0 - w,
        threshold=cut,
        p_dark_read_bright=p_db,
        p_bright_read_dark=p_bd,
        residual=residual,
        samples=n,
    )
