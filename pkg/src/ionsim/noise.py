"""Imperfection models: collective dephasing, per-gate depolarizing, and the
sampled random-phase processes behind the Monte Carlo shots.

Collective dephasing applies |down> -> |down>, |up> -> e^{i zeta}|up> with
the same random zeta on every ion.  Two processes generate zeta:

* engineered-white: zeta ~ Gaussian(0, 2 * gamma * t).  Averaging e^{i zeta}
  then gives exactly exp(-gamma t), the unique Gaussian phase process with a
  pure exponential coherence decay.
* ambient: zeta = sum_f A_f sin(u_f) over mains harmonics (60/120/180 Hz)
  with an independent uniform phase u_f per shot and per-harmonic amplitudes
  growing linearly with the exposure time.  Qualitative model; coherence
  follows a product of Bessel J0 envelopes rather than a pure exponential.

States supported on basis states that share one |up> count are invariant
under both processes; that subspace is the decoherence-free one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .register import DensityMatrix, up_counts

AMBIENT_HARMONICS_HZ = (60.0, 120.0, 180.0)


@dataclass(frozen=True)
class DephasingProcess:
    """One collective-dephasing exposure.

    rate_gamma is the coherence decay rate in 1/us for the engineered-white
    kind.  For the ambient kind, ambient_amplitudes_rad_per_us give the
    harmonic phase amplitudes accrued per microsecond of exposure, aligned
    with AMBIENT_HARMONICS_HZ.
    """

    kind: str
    rate_gamma: float = 0.0
    duration_us: float = 0.0
    ambient_amplitudes_rad_per_us: tuple[float, ...] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("engineered-white", "ambient"):
            raise ValueError(f"unknown dephasing kind {self.kind!r}")
        if self.rate_gamma < 0:
            raise ValueError("rate_gamma must be >= 0")
        if self.duration_us < 0:
            raise ValueError("duration_us must be >= 0")
        amps = tuple(float(a) for a in self.ambient_amplitudes_rad_per_us)
        if len(amps) != len(AMBIENT_HARMONICS_HZ) or any(a < 0 for a in amps):
            raise ValueError(
                f"need {len(AMBIENT_HARMONICS_HZ)} non-negative ambient amplitudes"
            )
        object.__setattr__(self, "ambient_amplitudes_rad_per_us", amps)

    def with_duration(self, duration_us: float) -> "DephasingProcess":
        return DephasingProcess(
            self.kind, self.rate_gamma, duration_us, self.ambient_amplitudes_rad_per_us
        )

    @property
    def gaussian_variance(self) -> float:
        """Variance of zeta for the engineered-white process: 2 gamma t."""
        if self.kind != "engineered-white":
            raise ValueError("gaussian_variance applies to the engineered-white kind")
        return 2.0 * self.rate_gamma * self.duration_us

    @property
    def ambient_amplitudes_rad(self) -> tuple[float, ...]:
        """Effective harmonic amplitudes for this exposure duration."""
        return tuple(a * self.duration_us for a in self.ambient_amplitudes_rad_per_us)


@dataclass(frozen=True)
class NoiseConfig:
    """All imperfection knobs of one experiment run."""

    dephasing: DephasingProcess | None = None
    detection_flip_eps: float = 0.0
    gate_depolarize_p: float = 0.0
    phase_jitter_sigma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.detection_flip_eps < 0.5:
            raise ValueError("detection_flip_eps must be in [0, 0.5)")
        if not 0.0 <= self.gate_depolarize_p <= 1.0:
            raise ValueError("gate_depolarize_p must be in [0, 1]")
        if self.phase_jitter_sigma < 0.0:
            raise ValueError("phase_jitter_sigma must be >= 0")


def sample_collective_phase(process: DephasingProcess, rng: np.random.Generator) -> float:
    """Draw one random collective phase zeta for the configured process."""
    if process.kind == "engineered-white":
        sigma = math.sqrt(process.gaussian_variance)
        return float(rng.normal(0.0, sigma)) if sigma > 0 else 0.0
    # Ambient: with a uniform random phase per shot the deterministic
    # 2 pi f t0 offset is distributionally irrelevant and is dropped.
    total = 0.0
    for amp in process.ambient_amplitudes_rad:
        total += amp * math.sin(rng.uniform(0.0, 2.0 * math.pi))
    return total


def collective_dephase_unitary(zeta: float, n_ions: int) -> np.ndarray:
    """Diagonal phase e^{i zeta m} on each basis state with m ions in |up>."""
    return np.diag(np.exp(1j * zeta * up_counts(n_ions)))


def dephase_factors(n_ions: int, process: DephasingProcess) -> np.ndarray:
    """Elementwise coherence attenuation E[e^{i zeta dm}] for each (i, j).

    dm is the difference in |up> counts between basis states i and j.  For
    the Gaussian process the factor is exp(-dm^2 sigma^2 / 2); for the
    ambient process it is prod_f J0(dm * A_f).
    """
    m = up_counts(n_ions)
    dm = m[:, None] - m[None, :]
    if process.kind == "engineered-white":
        return np.exp(-0.5 * process.gaussian_variance * dm.astype(float) ** 2)
    factors = np.ones_like(dm, dtype=float)
    for amp in process.ambient_amplitudes_rad:
        factors *= j0(dm * amp)
    return factors


def collective_dephase_channel(rho: DensityMatrix, sigma2: float) -> DensityMatrix:
    """Exact Gaussian average of the collective dephasing process.

    rho_ij -> rho_ij * exp(-(dm_ij)^2 sigma2 / 2).  The map is a valid
    channel for every sigma2 >= 0 and acts as the identity on the
    decoherence-free block (dm = 0 throughout).
    """
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    process = DephasingProcess("engineered-white", rate_gamma=0.5 * sigma2, duration_us=1.0)
    return DensityMatrix(rho.n_ions, rho.elements * dephase_factors(rho.n_ions, process))


def ambient_dephase_channel(rho: DensityMatrix, amplitudes_rad: tuple[float, ...]) -> DensityMatrix:
    """Exact average of the ambient harmonic process at fixed amplitudes."""
    process = DephasingProcess(
        "ambient", duration_us=1.0, ambient_amplitudes_rad_per_us=tuple(amplitudes_rad)
    )
    return DensityMatrix(rho.n_ions, rho.elements * dephase_factors(rho.n_ions, process))


def depolarize(rho: DensityMatrix, p: float, targets: tuple[int, ...] | None = None) -> DensityMatrix:
    """Depolarize the target ions: rho -> (1-p) rho + p (I/2^k on targets) (x) tr_targets(rho).

    targets defaults to the whole register.  Phenomenological stand-in for
    imperfect entangling gates; applied once per gate by the harness.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    n = rho.n_ions
    targets = tuple(range(1, n + 1)) if targets is None else tuple(sorted(targets))
    if not targets or any(not 1 <= t <= n for t in targets) or len(set(targets)) != len(targets):
        raise ValueError(f"targets must be distinct ions in 1..{n}, got {targets!r}")
    if p == 0.0:
        return rho

    dim = 2 ** n
    k = len(targets)
    rest = [ion for ion in range(1, n + 1) if ion not in targets]

    def ion_bit(index: int, ion: int) -> int:
        return (index >> (n - ion)) & 1

    def rest_index(index: int) -> int:
        packed = 0
        for ion in rest:
            packed = (packed << 1) | ion_bit(index, ion)
        return packed

    # sigma = tr_targets(rho), rest ions kept in original order
    d_rest = 2 ** len(rest)
    sigma = np.zeros((d_rest, d_rest), dtype=np.complex128)
    for i in range(dim):
        for j in range(dim):
            if all(ion_bit(i, t) == ion_bit(j, t) for t in targets):
                sigma[rest_index(i), rest_index(j)] += rho.elements[i, j]

    # replaced = (I/2^k on targets) tensor sigma, in the original ion order
    replaced = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim):
        for j in range(dim):
            if all(ion_bit(i, t) == ion_bit(j, t) for t in targets):
                replaced[i, j] = sigma[rest_index(i), rest_index(j)] / (2 ** k)

    blended = (1.0 - p) * rho.elements + p * replaced
    return DensityMatrix(n, blended)
