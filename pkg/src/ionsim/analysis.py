"""Statistical estimators and fits: fixed-period sinusoid fits for parity
fringes and coherence sweeps, the GHZ fidelity assembly, two-ion correlation
and Bell-signal arithmetic, exponential decay fits, and counting errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class FitError(RuntimeError):
    """Raised when a fit is under-determined or its inputs are unusable."""


@dataclass(frozen=True)
class SinusoidFit:
    """y = offset + amplitude * cos(2 pi phi / period_rad - phase_offset)."""

    amplitude: float
    phase_offset: float
    offset: float
    period_rad: float
    residual_rms: float
    amplitude_error: float | None = None


@dataclass(frozen=True)
class BellSettings:
    """The four analysis phase settings of the two-ion correlation test."""

    alpha1: float = -math.pi / 8
    delta1: float = 3 * math.pi / 8
    beta2: float = -math.pi / 8
    gamma2: float = 3 * math.pi / 8

    def __post_init__(self):
        for name in ("alpha1", "delta1", "beta2", "gamma2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def pairs(self) -> tuple[tuple[float, float], ...]:
        """Setting pairs (phi1, phi2) in the order (a,b), (a,g), (d,b), (d,g)."""
        return (
            (self.alpha1, self.beta2),
            (self.alpha1, self.gamma2),
            (self.delta1, self.beta2),
            (self.delta1, self.gamma2),
        )


@dataclass(frozen=True)
class ExponentialFit:
    """C(t) = amplitude * exp(-rate * t); rate <= 0 means no decay."""

    rate: float
    amplitude: float
    rate_stderr: float


def fit_sinusoid(
    phi_values,
    y_values,
    period_rad: float,
    y_sigma=None,
) -> SinusoidFit:
    """Least-squares fit of a fixed-period sinusoid.

    Linear regression on the cos/sin components; the amplitude is reported
    non-negative with the sign absorbed into the phase offset.  When y_sigma
    is given, the per-point errors are propagated through the (unweighted)
    projection into an amplitude error.
    """
    phi = np.asarray(phi_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    if phi.shape != y.shape or phi.ndim != 1:
        raise FitError("phi_values and y_values must be 1-d arrays of equal length")
    if phi.size < 4:
        raise FitError(f"need at least 4 points, got {phi.size}")
    if not period_rad > 0:
        raise FitError("period_rad must be positive")

    omega = 2.0 * math.pi / period_rad
    design = np.column_stack([np.ones_like(phi), np.cos(omega * phi), np.sin(omega * phi)])
    gram = design.T @ design
    if np.linalg.cond(gram) > 1e12:
        raise FitError("under-determined sinusoid fit (degenerate phase sampling)")
    coeffs = np.linalg.solve(gram, design.T @ y)
    offset, a_cos, a_sin = coeffs
    amplitude = float(np.hypot(a_cos, a_sin))
    phase_offset = float(np.arctan2(a_sin, a_cos))
    residuals = y - design @ coeffs
    residual_rms = float(np.sqrt(np.mean(residuals**2)))

    amplitude_error = None
    if y_sigma is not None:
        sigma = np.asarray(y_sigma, dtype=float)
        if sigma.shape != y.shape:
            raise FitError("y_sigma must match y_values in shape")
        pinv = np.linalg.solve(gram, design.T)
        cov = pinv @ np.diag(sigma**2) @ pinv.T
        if amplitude > 0:
            grad = np.array([0.0, a_cos / amplitude, a_sin / amplitude])
        else:
            grad = np.array([0.0, 1.0, 0.0])
        amplitude_error = float(np.sqrt(max(grad @ cov @ grad, 0.0)))

    return SinusoidFit(
        amplitude=amplitude,
        phase_offset=phase_offset,
        offset=float(offset),
        period_rad=float(period_rad),
        residual_rms=residual_rms,
        amplitude_error=amplitude_error,
    )


def fidelity_from_parts(p_all_down: float, p_all_up: float, coherence_mag: float) -> float:
    """GHZ fidelity from the two extreme populations and the fringe coherence:
    F = (P(down...down) + P(up...up))/2 + |rho_coherence|."""
    for name, value in (("p_all_down", p_all_down), ("p_all_up", p_all_up)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    if not 0.0 <= coherence_mag <= 0.5 + 1e-9:
        raise ValueError(f"coherence_mag must be in [0, 0.5], got {coherence_mag}")
    return (p_all_down + p_all_up) / 2.0 + coherence_mag


def correlation_q(n0: int, n1: int, n2: int) -> float:
    """Two-ion correlation from event counts: q = ((N0 + N2) - N1) / N_tot."""
    if min(n0, n1, n2) < 0:
        raise ValueError("counts must be non-negative")
    total = n0 + n1 + n2
    if total == 0:
        raise ValueError("total count must be positive")
    return ((n0 + n2) - n1) / total


def bell_signal(q_dg: float, q_ag: float, q_db: float, q_ab: float) -> float:
    """Bell combination B = |q(d,g) - q(a,g)| + |q(d,b) + q(a,b)|."""
    for q in (q_dg, q_ag, q_db, q_ab):
        if not -1.0 <= q <= 1.0:
            raise ValueError(f"correlation {q} outside [-1, 1]")
    return abs(q_dg - q_ag) + abs(q_db + q_ab)


def binomial_error(q: float, n_tot: int) -> float:
    """Multinomial standard error of a +/-1 average: sqrt((1 - q^2) / N)."""
    if n_tot <= 0:
        raise ValueError("n_tot must be positive")
    return math.sqrt(max(1.0 - q * q, 0.0) / n_tot)


def coherence_from_sweep(alpha_prime_values, p2_values) -> float:
    """Coherence from a phase-swept population measurement.

    Fits P2(alpha') to a period-2pi sinusoid and returns the magnitude of
    oscillation (peak to peak, twice the cosine amplitude), which equals the
    qubit coherence: the ideal fringe P2 = 1/2 - (C/2) cos(alpha - alpha')
    swings across exactly C.
    """
    fit = fit_sinusoid(alpha_prime_values, p2_values, 2.0 * math.pi)
    return 2.0 * fit.amplitude


def fit_exponential(times_us, c_values) -> ExponentialFit:
    """Unweighted log-linear fit of C(t) = amplitude * exp(-rate * t).

    The rate standard error comes from the regression residuals; it is zero
    for exact data and honest for sampled sweeps.
    """
    t = np.asarray(times_us, dtype=float)
    c = np.asarray(c_values, dtype=float)
    if t.shape != c.shape or t.ndim != 1:
        raise FitError("times_us and c_values must be 1-d arrays of equal length")
    if t.size < 3:
        raise FitError(f"need at least 3 points, got {t.size}")
    if np.any(c <= 0.0):
        raise FitError("c_values must be positive for a log-linear decay fit")
    if np.ptp(t) == 0.0:
        raise FitError("times_us must span a nonzero interval")

    log_c = np.log(c)
    t_mean = t.mean()
    s_tt = float(np.sum((t - t_mean) ** 2))
    slope = float(np.sum((t - t_mean) * (log_c - log_c.mean())) / s_tt)
    intercept = float(log_c.mean() - slope * t_mean)
    residuals = log_c - (intercept + slope * t)
    dof = max(t.size - 2, 1)
    rate_stderr = float(np.sqrt(np.sum(residuals**2) / dof / s_tt))
    return ExponentialFit(rate=-slope, amplitude=float(np.exp(intercept)), rate_stderr=rate_stderr)
