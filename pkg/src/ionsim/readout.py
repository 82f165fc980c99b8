"""State-selective detection: projective z sampling, per-ion misclassification,
and the Poisson photon-count model with threshold discrimination.

An ion is bright exactly when it is in |down>.  The flip model misreads each
ion independently; the photon model draws one total fluorescence count for
the string and classifies it by fixed integer thresholds, the way the
histograms of a multi-ion detection window are cut in practice.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import brentq
from scipy.stats import poisson

from .register import State, bright_counts, z_basis_probabilities


@dataclass(frozen=True)
class ReadoutConfig:
    """Detection model parameters.

    flip_eps is the bright->dark misread probability; flip_eps_up, when set,
    gives a different dark->bright probability (the physical error is mostly
    one-directional pumping of |down> into |up|>, so the knob exists), and
    defaults to the symmetric value.
    """

    model: str = "ideal-flip"
    flip_eps: float = 0.0
    flip_eps_up: float | None = None
    lambda_bright: float = 10.0
    lambda_dark: float = 0.1
    thresholds: tuple[int, ...] = ()

    def __post_init__(self):
        if self.model not in ("ideal-flip", "photon-count"):
            raise ValueError(f"unknown readout model {self.model!r}")
        if not 0.0 <= self.flip_eps < 0.5:
            raise ValueError("flip_eps must be in [0, 0.5)")
        if self.flip_eps_up is not None and not 0.0 <= self.flip_eps_up < 0.5:
            raise ValueError("flip_eps_up must be in [0, 0.5)")
        if not self.lambda_bright > self.lambda_dark >= 0.0:
            raise ValueError("need lambda_bright > lambda_dark >= 0")
        thr = tuple(int(t) for t in self.thresholds)
        if any(b <= a for a, b in zip(thr, thr[1:])):
            raise ValueError(f"thresholds must be strictly ascending, got {thr}")
        object.__setattr__(self, "thresholds", thr)

    @property
    def eps_down(self) -> float:
        return self.flip_eps

    @property
    def eps_up(self) -> float:
        return self.flip_eps if self.flip_eps_up is None else self.flip_eps_up


@dataclass(frozen=True)
class ShotRecord:
    """One experimental repetition, as serialized to the shot CSV."""

    shot_index: int
    setting_index: int
    stream_id: int
    settings: tuple[float, ...]
    true_outcome: int
    photon_count: int | None
    classified_bright: int


def sample_outcome(state: State, rng: np.random.Generator) -> int:
    """Draw one z-basis outcome index with Born-rule probabilities."""
    probs = np.clip(z_basis_probabilities(state), 0.0, None)
    cum = np.cumsum(probs)
    cum /= cum[-1]
    return int(np.searchsorted(cum, rng.random(), side="right"))


def classify_ideal_flip(
    outcome: int,
    n_ions: int,
    eps: float,
    rng: np.random.Generator,
    eps_up: float | None = None,
) -> int:
    """Bright count after flipping each ion's bright/dark bit independently."""
    if not 0.0 <= eps < 0.5:
        raise ValueError("eps must be in [0, 0.5)")
    e_down = eps
    e_up = eps if eps_up is None else eps_up
    bright = 0
    for ion in range(n_ions):
        is_up = (outcome >> (n_ions - 1 - ion)) & 1
        if is_up:
            seen_bright = rng.random() < e_up
        else:
            seen_bright = rng.random() >= e_down
        bright += int(seen_bright)
    return bright


def poisson_mean(outcome: int, cfg: ReadoutConfig, n_ions: int) -> float:
    """Mean photon count for a true outcome: k*lambda_bright + (N-k)*lambda_dark."""
    k = n_ions - bin(outcome).count("1")
    return k * cfg.lambda_bright + (n_ions - k) * cfg.lambda_dark


def sample_photon_counts(
    outcome: int, cfg: ReadoutConfig, rng: np.random.Generator, n_ions: int
) -> int:
    """Draw the summed fluorescence count of the string for one shot."""
    return int(rng.poisson(poisson_mean(outcome, cfg, n_ions)))


def classify_threshold(count: int, thresholds: tuple[int, ...]) -> int:
    """Bright-count class: the number of thresholds at or below the count."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return int(np.searchsorted(thresholds, count, side="right"))


def _class_means(cfg: ReadoutConfig, n_ions: int) -> np.ndarray:
    k = np.arange(n_ions + 1)
    return k * cfg.lambda_bright + (n_ions - k) * cfg.lambda_dark


def threshold_class_probabilities(cfg: ReadoutConfig, n_ions: int) -> np.ndarray:
    """Exact P(classified class c | true bright count k), shape (N+1, N+1)."""
    if len(cfg.thresholds) != n_ions:
        raise ValueError(f"need {n_ions} thresholds, got {len(cfg.thresholds)}")
    means = _class_means(cfg, n_ions)
    bounds = np.array((0,) + cfg.thresholds, dtype=float)  # class c spans [T_c, T_{c+1})
    table = np.zeros((n_ions + 1, n_ions + 1))
    for k, mu in enumerate(means):
        upper = np.append(bounds[1:] - 1.0, np.inf)
        hi = poisson.cdf(upper, mu)
        lo = poisson.cdf(bounds - 1.0, mu)
        table[k] = hi - lo
    return table


def misclassification_rate(cfg: ReadoutConfig, n_ions: int) -> float:
    """Total misclassification probability, true classes weighted uniformly."""
    table = threshold_class_probabilities(cfg, n_ions)
    correct = np.trace(table) / (n_ions + 1)
    return float(1.0 - correct)


def optimal_thresholds(lambda_bright: float, lambda_dark: float, n_ions: int) -> tuple[int, ...]:
    """Integer thresholds minimizing the uniform-weight misclassification.

    The objective separates per threshold: T_c maximizes
    CDF(T-1; mu_{c-1}) - CDF(T-1; mu_c).
    """
    cfg = ReadoutConfig(
        model="photon-count", lambda_bright=lambda_bright, lambda_dark=lambda_dark
    )
    means = _class_means(cfg, n_ions)
    thresholds = []
    floor = 1
    for c in range(1, n_ions + 1):
        hi = int(np.ceil(means[c] + 10.0 * np.sqrt(means[c] + 1.0))) + 2
        candidates = np.arange(floor, hi)
        gain = poisson.cdf(candidates - 1, means[c - 1]) - poisson.cdf(candidates - 1, means[c])
        best = int(candidates[np.argmax(gain)])
        thresholds.append(best)
        floor = best + 1
    return tuple(thresholds)


def calibrate_readout(
    target_rate: float = 0.02,
    n_ions: int = 2,
    dark_ratio: float = 0.01,
    bracket: tuple[float, float] = (2.0, 400.0),
) -> ReadoutConfig:
    """Find photon-model parameters hitting a target misclassification rate.

    Scales lambda_bright (with lambda_dark = dark_ratio * lambda_bright) until
    the optimally thresholded exact rate equals target_rate, then freezes the
    thresholds.  The rate is continuous and decreasing in lambda_bright, so a
    bracketed root always lands within the returned config's quoted rate.
    """
    if not 0.0 < target_rate < 0.5:
        raise ValueError("target_rate must be in (0, 0.5)")

    def rate_at(lam: float) -> float:
        thr = optimal_thresholds(lam, dark_ratio * lam, n_ions)
        cfg = ReadoutConfig(
            model="photon-count",
            lambda_bright=lam,
            lambda_dark=dark_ratio * lam,
            thresholds=thr,
        )
        return misclassification_rate(cfg, n_ions) - target_rate

    lo, hi = bracket
    if rate_at(lo) < 0:
        raise ValueError(f"target rate {target_rate} already met at lambda_bright={lo}")
    lam = float(brentq(rate_at, lo, hi, xtol=1e-6))
    thr = optimal_thresholds(lam, dark_ratio * lam, n_ions)
    return ReadoutConfig(
        model="photon-count",
        lambda_bright=lam,
        lambda_dark=dark_ratio * lam,
        thresholds=thr,
    )


def flip_class_probabilities(eps_down: float, eps_up: float, n_ions: int) -> np.ndarray:
    """Exact P(classified bright = c | true bright = k) under per-ion flips."""
    table = np.zeros((n_ions + 1, n_ions + 1))
    for k in range(n_ions + 1):
        # bright ions seen bright ~ Binomial(k, 1-eps_down);
        # dark ions seen bright ~ Binomial(N-k, eps_up); total is their sum
        pmf_bright = _binomial_pmf(k, 1.0 - eps_down)
        pmf_dark = _binomial_pmf(n_ions - k, eps_up)
        table[k, : k + (n_ions - k) + 1] = np.convolve(pmf_bright, pmf_dark)
    return table


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    pmf = np.zeros(n + 1)
    for j in range(n + 1):
        pmf[j] = comb(n, j) * p**j * (1.0 - p) ** (n - j)
    return pmf
