"""Pulse sequences used by the experiments: input-state preparation, the
two-ion decoherence-free-subspace encode/decode, and analysis rotations.

All sequences are exact unitaries on the register; any noise (dephasing
during a delay, per-gate depolarizing) is inserted between them by the
experiment harness.
"""

from __future__ import annotations

import math

import numpy as np

from .gates import (
    CarrierPulse,
    EntanglePulse,
    analysis_phase_reference,
    carrier_matrix,
    compose,
    ms_matrix,
)
from .register import PureState, apply_unitary, new_ground


def prepare_pulses(beta: float, alpha: float, phase_shift: float = 0.0) -> list[np.ndarray]:
    """The two simultaneous-carrier pulses that load one physical qubit.

    Both pulses have angle beta; the second shifts ion 1's phase by pi so
    ion 1 returns exactly to |down>, while ion 2 accumulates a rotation of
    2*beta about the phase-alpha axis.  phase_shift offsets ion 2's phase
    (used to re-run the sequence as the readout rotation at alpha').
    """
    phi2 = alpha + phase_shift
    first = carrier_matrix(CarrierPulse(beta, (0.0, phi2), (1, 2)), 2)
    second = carrier_matrix(CarrierPulse(beta, (math.pi, phi2), (1, 2)), 2)
    return [first, second]


def prepare_input(beta: float, alpha: float) -> PureState:
    """Prepare |down> (x) (a|down> + b|up>) from the ground state.

    The exact composition of the two pulses gives a = cos(beta) and
    b = e^{i alpha} sin(beta); beta = pi/4 is the equal-weight working point.
    """
    u = compose(prepare_pulses(beta, alpha))
    return apply_unitary(new_ground(2), u)


def input_amplitudes(beta: float, alpha: float) -> tuple[complex, complex]:
    """The (a, b) actually produced by prepare_input, read off the state."""
    psi = prepare_input(beta, alpha)
    return complex(psi.amplitudes[0]), complex(psi.amplitudes[1])


# The encoding carrier rotates every Bloch vector by pi/2 about the
# (phi1=pi/2, phi2=0) axes; on top of the inverse entangling gate this maps
# |down>(a|down>+b|up>) onto a(|du>+i|ud>)/sqrt2 + b(|du>-i|ud>)/sqrt2.
_ENCODE_THETA = math.pi / 2
_ENCODE_PHI1 = math.pi / 2
_ENCODE_PHI2 = 0.0


def encode_unitary() -> np.ndarray:
    """Inverse entangling gate followed by the encoding carrier pulse."""
    entangle_inv = ms_matrix(EntanglePulse(2, "inverse"))
    carrier = carrier_matrix(
        CarrierPulse(_ENCODE_THETA, (_ENCODE_PHI1, _ENCODE_PHI2), (1, 2)), 2
    )
    return compose([entangle_inv, carrier])


def decode_unitary() -> np.ndarray:
    """Reversed encoding carrier (all phases shifted by pi) then the forward gate."""
    carrier_rev = carrier_matrix(
        CarrierPulse(_ENCODE_THETA, (_ENCODE_PHI1 + math.pi, _ENCODE_PHI2 + math.pi), (1, 2)), 2
    )
    entangle = ms_matrix(EntanglePulse(2, "forward"))
    return compose([carrier_rev, entangle])


def encode_dfs(psi: PureState) -> PureState:
    """Encode |down>(a|down>+b|up>) into the dephasing-immune two-ion subspace.

    The output is supported entirely on span{|down up>, |up down>}, whose
    basis states share one |up> bit and therefore see any collective phase
    as a global phase.
    """
    if psi.n_ions != 2:
        raise ValueError("encode_dfs needs a 2-ion register")
    ion1_up_population = float(np.sum(np.abs(psi.amplitudes[2:]) ** 2))
    if ion1_up_population > 1e-8:
        raise ValueError(
            f"input must hold ion 1 in |down> (population of |up> is {ion1_up_population:.2e})"
        )
    return apply_unitary(psi, encode_unitary())


def decode_dfs(psi: PureState) -> PureState:
    """Inverse of encode_dfs; returns the logical qubit to ion 2."""
    if psi.n_ions != 2:
        raise ValueError("decode_dfs needs a 2-ion register")
    return apply_unitary(psi, decode_unitary())


def analysis_rotation(n_ions: int, phases: tuple[float, ...]) -> np.ndarray:
    """The theta=pi/2 analysis pulse with phases quoted relative to the
    entangling drive (the per-ion reference offset is added here)."""
    ref = analysis_phase_reference(n_ions)
    shifted = tuple(p + ref for p in phases)
    return carrier_matrix(
        CarrierPulse(math.pi / 2, shifted, tuple(range(1, n_ions + 1))), n_ions
    )


def parity_analysis_rotation(n_ions: int, phi: float) -> np.ndarray:
    """Common-phase analysis pulse for parity fringes: all ions at phi."""
    return analysis_rotation(n_ions, (phi,) * n_ions)


def readout_pulses(beta: float, alpha_prime: float) -> list[np.ndarray]:
    """Coherence-readout rotation: the preparation sequence at phase alpha'."""
    return prepare_pulses(beta, 0.0, phase_shift=alpha_prime)


def readout_unitary(beta: float, alpha_prime: float) -> np.ndarray:
    return compose(readout_pulses(beta, alpha_prime))
