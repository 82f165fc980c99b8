"""Unitaries driven on the register: carrier rotations and the collective
entangling gate.

A carrier pulse of angle theta and phase phi rotates each addressed ion as

    |down> -> cos(theta/2)|down> + e^{i phi}  sin(theta/2)|up>
    |up>   -> cos(theta/2)|up>   - e^{-i phi} sin(theta/2)|down>

The entangling gate is the effective spin-only unitary of the collective
bichromatic drive, realized as exp(i (pi/8) (sum_k sigma_x^(k))^2) with the
global phase fixed so the |down...down> -> |down...down> amplitude is real
positive.  Acting on |down...down> it produces

    (|dd>   + e^{i chi_2}|uu>)  /sqrt2   with chi_2 = +pi/2   (two ions)
    (|dddd> + e^{i chi_4}|uuuu>)/sqrt2   with chi_4 = -pi/2   (four ions)

Analysis pulses elsewhere in the package quote their phases relative to the
entangling drive; ``ghz_phase``/``analysis_phase_reference`` expose chi_N and
the per-ion reference offset chi_N / N that this convention implies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .register import MAX_IONS, UNITARY_ATOL

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


@dataclass(frozen=True)
class CarrierPulse:
    """Carrier rotation: angle theta, one phase per addressed ion."""

    theta: float
    phases: tuple[float, ...]
    targets: tuple[int, ...]

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        targets = tuple(int(t) for t in self.targets)
        phases = tuple(float(p) for p in self.phases)
        if not targets:
            raise ValueError("targets must be non-empty")
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate targets in {targets}")
        if len(phases) != len(targets):
            raise ValueError("need exactly one phase per target ion")
        if not all(math.isfinite(p) for p in phases):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def uniform(cls, theta: float, phi: float, n_ions: int) -> "CarrierPulse":
        """Same phase on every ion of the register."""
        return cls(theta, (phi,) * n_ions, tuple(range(1, n_ions + 1)))


@dataclass(frozen=True)
class EntanglePulse:
    """Collective entangling gate on the full register, forward or inverse."""

    n_ions: int
    direction: str = "forward"

    def __post_init__(self):
        if self.n_ions not in (2, 4):
            raise ValueError(f"entangling gate supports 2 or 4 ions, got {self.n_ions}")
        if self.direction not in ("forward", "inverse"):
            raise ValueError(f"direction must be 'forward' or 'inverse', got {self.direction!r}")


def single_ion_rotation(theta: float, phi: float) -> np.ndarray:
    """2x2 carrier rotation matrix in the (|down>, |up>) basis."""
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array(
        [[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]],
        dtype=np.complex128,
    )


def carrier_matrix(pulse: CarrierPulse, n_ions: int) -> np.ndarray:
    """Tensor product of single-ion rotations on the targets, identity elsewhere."""
    if n_ions < 1 or n_ions > MAX_IONS:
        raise ValueError(f"n_ions must be in [1, {MAX_IONS}], got {n_ions}")
    if not set(pulse.targets) <= set(range(1, n_ions + 1)):
        raise ValueError(f"targets {pulse.targets} outside register of {n_ions} ions")
    phase_for = dict(zip(pulse.targets, pulse.phases))
    out = np.array([[1.0 + 0.0j]])
    for ion in range(1, n_ions + 1):  # ion 1 is the most significant bit
        if ion in phase_for:
            factor = single_ion_rotation(pulse.theta, phase_for[ion])
        else:
            factor = np.eye(2, dtype=np.complex128)
        out = np.kron(out, factor)
    return out


def _sigma_x_total(n_ions: int) -> np.ndarray:
    dim = 2 ** n_ions
    total = np.zeros((dim, dim), dtype=np.complex128)
    for ion in range(n_ions):
        factors = [_SIGMA_X if k == ion else np.eye(2) for k in range(n_ions)]
        term = np.array([[1.0 + 0.0j]])
        for f in factors:
            term = np.kron(term, f)
        total += term
    return total


@lru_cache(maxsize=None)
def _ms_forward(n_ions: int) -> np.ndarray:
    jx = _sigma_x_total(n_ions)
    u = expm(0.125j * np.pi * (jx @ jx))
    u = u * (abs(u[0, 0]) / u[0, 0])  # fix global phase: <dd..|U|dd..> real positive
    u.setflags(write=False)
    return u


def ms_matrix(pulse: EntanglePulse) -> np.ndarray:
    """Entangling gate matrix (or its adjoint for the inverse direction)."""
    forward = _ms_forward(pulse.n_ions)
    if pulse.direction == "inverse":
        return forward.conj().T.copy()
    return forward.copy()


def ghz_phase(n_ions: int) -> float:
    """Relative phase chi of the |up...up> component of the gate's GHZ output."""
    col = _ms_forward(n_ions)[:, 0]
    return float(np.angle(col[-1] / col[0]))


def analysis_phase_reference(n_ions: int) -> float:
    """Per-ion phase offset aligning analysis pulses with the entangling drive.

    Adding chi_N / N to every analysis phase makes the parity fringe read
    cos(N phi) and the two-ion correlation read cos(phi1 + phi2), i.e. phases
    become relative to the entangling pulse.
    """
    return ghz_phase(n_ions) / n_ions


def compose(ops: list[np.ndarray]) -> np.ndarray:
    """Net unitary of a pulse sequence given in application order.

    Returns ops[-1] @ ... @ ops[0], the right-to-left operator product in
    which the first list element acts first.
    """
    if not ops:
        raise ValueError("ops must be non-empty")
    mats = [np.asarray(op, dtype=np.complex128) for op in ops]
    dim = mats[0].shape[0]
    for m in mats:
        if m.shape != (dim, dim):
            raise ValueError("all operators must share one square dimension")
    out = mats[0]
    for m in mats[1:]:
        out = m @ out
    defect = np.max(np.abs(out.conj().T @ out - np.eye(dim)))
    if defect > UNITARY_ATOL:
        raise ValueError(f"composed matrix is not unitary (defect {defect:.3e})")
    return out
