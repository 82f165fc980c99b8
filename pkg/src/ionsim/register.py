"""Exact linear-algebra substrate for a register of 1 to 4 ion qubits.

States live in the 2**N dimensional spin space.  Basis index convention,
used verbatim everywhere in this package: bit k of the index is 0 when
ion k is in the ground state |down> and 1 when it is in |up>, with ion 1
occupying the most significant bit.  Index 0 is therefore |down...down>.
An ion fluoresces ("bright") exactly when it is in |down>.

States are value-semantic: every operation returns a new object and the
underlying numpy buffers are frozen, so states can be shared freely
between concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_IONS = 4

# Structural checks (unitarity, Kraus completeness) use UNITARY_ATOL;
# arithmetic identities are held to the tighter EXACT_ATOL.
UNITARY_ATOL = 1e-10
EXACT_ATOL = 1e-12


def _check_n_ions(n_ions: int) -> int:
    if not isinstance(n_ions, (int, np.integer)) or not 1 <= n_ions <= MAX_IONS:
        raise ValueError(f"n_ions must be an integer in [1, {MAX_IONS}], got {n_ions!r}")
    return int(n_ions)


def up_counts(n_ions: int) -> np.ndarray:
    """Number of ions in |up> for each basis index (vector of length 2**N)."""
    dim = 2 ** n_ions
    return np.array([bin(i).count("1") for i in range(dim)], dtype=np.int64)


def bright_counts(n_ions: int) -> np.ndarray:
    """Number of bright (|down>) ions for each basis index."""
    return n_ions - up_counts(n_ions)


def parity_signs(n_ions: int) -> np.ndarray:
    """Parity of each basis outcome: +1 for an even number of bright ions."""
    return np.where(bright_counts(n_ions) % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector over the z basis."""

    n_ions: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = _check_n_ions(self.n_ions)
        amps = np.asarray(self.amplitudes, dtype=np.complex128).copy()
        if amps.shape != (2 ** n,):
            raise ValueError(f"amplitudes must have shape ({2**n},), got {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > UNITARY_ATOL:
            raise ValueError(f"state not normalized: sum |a|^2 = {norm}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2 ** self.n_ions


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace 2**N x 2**N matrix over the z basis.

    Hermiticity and trace are checked at construction; positivity is only
    asserted by :meth:`validate` (used in tests), to keep shot loops cheap.
    """

    n_ions: int
    elements: np.ndarray

    def __post_init__(self):
        n = _check_n_ions(self.n_ions)
        mat = np.asarray(self.elements, dtype=np.complex128).copy()
        dim = 2 ** n
        if mat.shape != (dim, dim):
            raise ValueError(f"elements must have shape ({dim}, {dim}), got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > EXACT_ATOL:
            raise ValueError("density matrix is not Hermitian")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace is {trace}, expected 1")
        mat.setflags(write=False)
        object.__setattr__(self, "elements", mat)

    @property
    def dim(self) -> int:
        return 2 ** self.n_ions

    def validate(self, eig_floor: float = -1e-10) -> None:
        """Full structural check including positivity of the spectrum."""
        eigs = np.linalg.eigvalsh(self.elements)
        if eigs.min() < eig_floor:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min()}")


State = PureState | DensityMatrix


def new_ground(n_ions: int) -> PureState:
    """All ions in |down>, the optically pumped initial state."""
    n = _check_n_ions(n_ions)
    amps = np.zeros(2 ** n, dtype=np.complex128)
    amps[0] = 1.0
    return PureState(n, amps)


def to_density(psi: PureState) -> DensityMatrix:
    """Outer product |psi><psi|."""
    a = psi.amplitudes
    return DensityMatrix(psi.n_ions, np.outer(a, a.conj()))


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (dim, dim):
        raise ValueError(f"operator shape {u.shape} does not match state dimension {dim}")
    defect = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
    if defect > UNITARY_ATOL:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {defect:.3e})")
    return u


def apply_unitary(state: State, u: np.ndarray) -> State:
    """psi -> U psi, or rho -> U rho U^dag.  U is checked for unitarity."""
    u = _check_unitary(u, state.dim)
    if isinstance(state, PureState):
        return PureState(state.n_ions, u @ state.amplitudes)
    return DensityMatrix(state.n_ions, u @ state.elements @ u.conj().T)


def apply_kraus(rho: DensityMatrix, kraus: list[np.ndarray]) -> DensityMatrix:
    """rho -> sum_i K_i rho K_i^dag for a completeness-checked Kraus set."""
    if not kraus:
        raise ValueError("kraus list must be non-empty")
    dim = rho.dim
    ops = [np.asarray(k, dtype=np.complex128) for k in kraus]
    for k in ops:
        if k.shape != (dim, dim):
            raise ValueError(f"Kraus operator shape {k.shape} does not match dimension {dim}")
    completeness = sum(k.conj().T @ k for k in ops)
    if np.max(np.abs(completeness - np.eye(dim))) > UNITARY_ATOL:
        raise ValueError("Kraus set violates completeness sum K^dag K = I")
    out = np.zeros((dim, dim), dtype=np.complex128)
    for k in ops:
        out += k @ rho.elements @ k.conj().T
    return DensityMatrix(rho.n_ions, out)


def matrix_element(rho: DensityMatrix, i: int, j: int) -> complex:
    """rho_ij in the z basis."""
    dim = rho.dim
    if not (0 <= i < dim and 0 <= j < dim):
        raise IndexError(f"indices ({i}, {j}) out of range for dimension {dim}")
    return complex(rho.elements[i, j])


def z_basis_probabilities(state: State) -> np.ndarray:
    """Probability of each z-basis outcome; sums to 1 within 1e-12."""
    if isinstance(state, PureState):
        return np.abs(state.amplitudes) ** 2
    return np.real(np.diag(state.elements)).copy()


def parity_expectation(state: State) -> float:
    """Expected parity: +1 weight for outcomes with an even number of bright ions."""
    probs = z_basis_probabilities(state)
    return float(probs @ parity_signs(state.n_ions))


def reduced_density(rho: DensityMatrix, keep_ions: tuple[int, ...]) -> np.ndarray:
    """Partial trace keeping the listed ions (1-based), as a raw matrix.

    The kept ions stay in their original order, so the result uses the same
    most-significant-bit-first convention on the reduced register.
    """
    n = rho.n_ions
    keep = tuple(keep_ions)
    if not keep or any(not 1 <= k <= n for k in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"keep_ions must be distinct ions in 1..{n}, got {keep_ions!r}")
    tensor = rho.elements.reshape((2,) * (2 * n))
    traced = sorted(set(range(1, n + 1)) - set(keep))
    # trace out highest axis first so earlier axis numbers stay valid
    for ion in reversed(traced):
        axis = ion - 1
        tensor = np.trace(tensor, axis1=axis, axis2=axis + tensor.ndim // 2)
    d = 2 ** len(keep)
    return tensor.reshape(d, d)
