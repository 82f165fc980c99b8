"""Register-core: states, unitary/channel application, expectation values."""

import numpy as np
import pytest

from ionsim import (
    DensityMatrix,
    PureState,
    apply_kraus,
    apply_unitary,
    matrix_element,
    new_ground,
    parity_expectation,
    reduced_density,
    to_density,
    z_basis_probabilities,
)
from ionsim.register import bright_counts, parity_signs, up_counts


def random_unitary(dim, rng):
    ginibre = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(ginibre)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def bell_state():
    return PureState(2, np.array([1, 0, 0, 1]) / np.sqrt(2))


class TestNewGround:
    @pytest.mark.parametrize("n,expected", [
        (1, [1, 0]),
        (2, [1, 0, 0, 0]),
        (4, [1] + [0] * 15),
    ])
    def test_ground_state(self, n, expected):
        psi = new_ground(n)
        np.testing.assert_allclose(psi.amplitudes, expected)

    @pytest.mark.parametrize("n", [0, 5, -1])
    def test_out_of_range(self, n):
        with pytest.raises(ValueError):
            new_ground(n)

    def test_non_normalized_rejected(self):
        with pytest.raises(ValueError):
            PureState(1, np.array([1.0, 1.0]))


class TestToDensity:
    def test_ground(self):
        rho = to_density(new_ground(1))
        np.testing.assert_allclose(rho.elements, [[1, 0], [0, 0]])

    def test_bell_corners(self):
        rho = to_density(bell_state())
        expected = np.zeros((4, 4))
        for i, j in [(0, 0), (0, 3), (3, 0), (3, 3)]:
            expected[i, j] = 0.5
        np.testing.assert_allclose(rho.elements, expected, atol=1e-15)

    def test_excited(self):
        rho = to_density(PureState(1, [0, 1]))
        np.testing.assert_allclose(rho.elements, [[0, 0], [0, 1]])


class TestApplyUnitary:
    def test_identity(self):
        psi = bell_state()
        out = apply_unitary(psi, np.eye(4))
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes)

    def test_bitflip_ion1(self):
        # X on ion 1 (most significant bit) of |dd> gives |ud>
        x1 = np.kron([[0, 1], [1, 0]], np.eye(2))
        out = apply_unitary(new_ground(2), x1)
        np.testing.assert_allclose(out.amplitudes, [0, 0, 1, 0], atol=1e-15)

    def test_carrier_half_pulse(self):
        from ionsim.gates import single_ion_rotation

        out = apply_unitary(new_ground(1), single_ion_rotation(np.pi / 2, 0.0))
        np.testing.assert_allclose(out.amplitudes, [1, 1] / np.sqrt(2), atol=1e-15)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            apply_unitary(new_ground(1), np.array([[1, 0], [0, 2.0]]))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_unitary(new_ground(2), np.eye(2))

    def test_density_route(self):
        rho = to_density(new_ground(1))
        x = np.array([[0, 1], [1, 0.0]])
        out = apply_unitary(rho, x)
        np.testing.assert_allclose(out.elements, [[0, 0], [0, 1]], atol=1e-15)

    def test_unitary_roundtrip_random(self):
        rng = np.random.default_rng(42)
        for n in (1, 2, 3, 4):
            psi = apply_unitary(new_ground(n), random_unitary(2**n, rng))
            u = random_unitary(2**n, rng)
            back = apply_unitary(apply_unitary(psi, u), u.conj().T)
            np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-10)

    def test_norm_preserved_under_long_sequences(self):
        rng = np.random.default_rng(7)
        state = new_ground(3)
        for _ in range(50):
            state = apply_unitary(state, random_unitary(8, rng))
        assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1) < 1e-10


class TestApplyKraus:
    def test_identity_kraus(self):
        rho = to_density(bell_state())
        out = apply_kraus(rho, [np.eye(4)])
        np.testing.assert_allclose(out.elements, rho.elements)

    def test_full_dephasing(self):
        rho = to_density(PureState(1, [1, 1] / np.sqrt(2)))
        kraus = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
        out = apply_kraus(rho, kraus)
        np.testing.assert_allclose(out.elements, np.diag([0.5, 0.5]), atol=1e-15)

    def test_full_depolarize(self):
        # p=1 single-qubit depolarizing as a Pauli Kraus set
        paulis = [
            np.eye(2),
            np.array([[0, 1], [1, 0]]),
            np.array([[0, -1j], [1j, 0]]),
            np.diag([1, -1]),
        ]
        kraus = [0.5 * p for p in paulis]
        rho = to_density(PureState(1, [1, 0]))
        out = apply_kraus(rho, kraus)
        np.testing.assert_allclose(out.elements, np.eye(2) / 2, atol=1e-15)

    def test_incomplete_set_rejected(self):
        with pytest.raises(ValueError):
            apply_kraus(to_density(new_ground(1)), [0.5 * np.eye(2)])

    def test_trace_preserved_random_channels(self):
        rng = np.random.default_rng(3)
        rho = to_density(bell_state())
        for _ in range(20):
            # random two-outcome channel K0 = U sqrt(1-p), K1 = V sqrt(p)
            p = rng.uniform(0, 1)
            k0 = np.sqrt(1 - p) * random_unitary(4, rng)
            k1 = np.sqrt(p) * random_unitary(4, rng)
            rho = apply_kraus(rho, [k0, k1])
            assert abs(np.trace(rho.elements) - 1) < 1e-10
            rho.validate()
            purity = np.real(np.trace(rho.elements @ rho.elements))
            assert 1 / 4 - 1e-10 <= purity <= 1 + 1e-10


class TestMatrixElement:
    def test_bell_coherence(self):
        assert matrix_element(to_density(bell_state()), 0, 3) == pytest.approx(0.5)

    def test_ground_elements(self):
        rho = to_density(new_ground(1))
        assert matrix_element(rho, 0, 0) == pytest.approx(1.0)
        assert matrix_element(rho, 1, 1) == pytest.approx(0.0)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            matrix_element(to_density(new_ground(1)), 0, 2)


class TestParity:
    def test_all_down_even(self):
        assert parity_expectation(new_ground(2)) == pytest.approx(1.0)

    def test_single_up_odd(self):
        assert parity_expectation(PureState(2, [0, 1, 0, 0])) == pytest.approx(-1.0)

    def test_bell_even(self):
        assert parity_expectation(bell_state()) == pytest.approx(1.0)

    def test_one_ion_down_is_odd(self):
        # one bright ion: odd count, parity -1 under the down-count definition
        assert parity_expectation(new_ground(1)) == pytest.approx(-1.0)

    def test_matches_bruteforce_over_probabilities(self):
        rng = np.random.default_rng(11)
        for n in (1, 2, 3, 4):
            psi = apply_unitary(new_ground(n), random_unitary(2**n, rng))
            probs = z_basis_probabilities(psi)
            brute = sum(
                p * (1.0 if (n - bin(i).count("1")) % 2 == 0 else -1.0)
                for i, p in enumerate(probs)
            )
            assert abs(parity_expectation(psi) - brute) < 1e-12


class TestZProbabilities:
    def test_ground(self):
        np.testing.assert_allclose(z_basis_probabilities(new_ground(2)), [1, 0, 0, 0])

    def test_bell(self):
        np.testing.assert_allclose(
            z_basis_probabilities(bell_state()), [0.5, 0, 0, 0.5], atol=1e-15
        )

    def test_sum_to_one_random(self):
        rng = np.random.default_rng(5)
        for n in (1, 4):
            psi = apply_unitary(new_ground(n), random_unitary(2**n, rng))
            assert abs(z_basis_probabilities(psi).sum() - 1) < 1e-12


class TestBasisHelpers:
    def test_counts(self):
        np.testing.assert_array_equal(up_counts(2), [0, 1, 1, 2])
        np.testing.assert_array_equal(bright_counts(2), [2, 1, 1, 0])
        np.testing.assert_array_equal(parity_signs(2), [1, -1, -1, 1])
        np.testing.assert_array_equal(parity_signs(1), [-1, 1])

    def test_reduced_density_of_product(self):
        rho = to_density(new_ground(2))
        np.testing.assert_allclose(reduced_density(rho, (2,)), [[1, 0], [0, 0]])

    def test_reduced_density_of_bell_is_mixed(self):
        rho = to_density(bell_state())
        for ion in (1, 2):
            np.testing.assert_allclose(reduced_density(rho, (ion,)), np.eye(2) / 2, atol=1e-12)
