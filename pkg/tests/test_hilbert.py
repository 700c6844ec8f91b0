import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, strategies as st

import oracle
from dechist.hilbert import (
    ProjectorFamily,
    Schedule,
    Unitary,
    ValidationError,
    family_from_basis,
    haar_random_unitary,
    haar_unitary,
    heisenberg_projector,
    make_state_mixed,
    make_state_pure,
    maximally_mixed,
    max_abs,
    random_mixed_state,
    random_pure_state,
    tensor,
    validate_projector_family,
)

from conftest import HADAMARD, qubit_family


class TestStates:
    def test_pure_basis_state(self):
        state = make_state_pure([1.0, 0.0])
        npt.assert_allclose(state.rho, np.diag([1.0, 0.0]), atol=1e-15)
        assert state.is_pure

    def test_pure_symmetric_state(self):
        state = make_state_pure(np.array([1.0, 1.0]) / np.sqrt(2.0))
        npt.assert_allclose(state.rho, np.full((2, 2), 0.5), atol=1e-15)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValidationError, match="zero vector"):
            make_state_pure([0.0, 0.0])

    def test_unnormalized_vector_rejected_with_residual(self):
        with pytest.raises(ValidationError, match="not normalized"):
            make_state_pure([1.0, 1.0])

    def test_maximally_mixed_accepted(self):
        state = make_state_mixed(np.eye(2) / 2.0)
        assert not state.is_pure

    def test_trace_two_rejected(self):
        with pytest.raises(ValidationError, match="trace"):
            make_state_mixed(np.eye(2))

    def test_non_psd_rejected(self):
        # Expected eigenvalue pinned from the characteristic-polynomial oracle.
        matrix = np.array([[0.7, 0.5], [0.5, 0.3]], dtype=complex)
        low, _high = oracle.eigenvalues_2x2_hermitian(matrix)
        assert low == pytest.approx(-0.03851648071345037, abs=1e-15)
        with pytest.raises(ValidationError, match="PSD"):
            make_state_mixed(matrix)

    def test_all_violations_reported_together(self):
        with pytest.raises(ValidationError) as err:
            make_state_mixed(np.array([[2.0, 1.0], [0.0, 1.0]]))
        names = [name for name, _ in err.value.violations]
        assert any("Hermitian" in n for n in names)
        assert any("trace" in n for n in names)

    @given(st.integers(0, 10**6))
    def test_sampled_states_satisfy_invariants(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 5))
        for state in (random_pure_state(dim, rng), random_mixed_state(dim, rng)):
            assert abs(np.trace(state.rho) - 1.0) <= 1e-10
            assert max_abs(state.rho - state.rho.conj().T) <= 1e-10
            assert np.linalg.eigvalsh(state.rho)[0] >= -1e-10


class TestProjectorFamilies:
    def test_two_member_diagonal_family(self):
        fam = validate_projector_family([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
        assert fam.size == 2 and fam.dim == 2

    def test_identity_singleton_family(self):
        fam = validate_projector_family([np.eye(3)])
        assert fam.size == 1

    def test_duplicate_member_reports_both_equations(self):
        with pytest.raises(ValidationError) as err:
            validate_projector_family([np.diag([1.0, 0.0]), np.diag([1.0, 0.0])])
        names = [name for name, _ in err.value.violations]
        assert any("completeness" in n for n in names)
        assert any("orthogonality" in n for n in names)

    def test_family_from_basis_blocks(self):
        basis = haar_random_unitary(4, 3).matrix
        fam = family_from_basis(basis, [[0, 2], [1], [3]])
        assert fam.size == 3
        total = sum(fam.members)
        npt.assert_allclose(total, np.eye(4), atol=1e-12)

    def test_family_from_basis_requires_partition(self):
        with pytest.raises(ValidationError, match="partition"):
            family_from_basis(np.eye(2), [[0], [0, 1]])


class TestHeisenberg:
    def test_identity_evolution(self):
        npt.assert_array_equal(
            heisenberg_projector(np.diag([1.0, 0.0]), Unitary.identity(2)),
            np.diag([1.0 + 0j, 0.0]),
        )

    def test_hadamard_rotates_basis_projector(self):
        rotated = heisenberg_projector(np.diag([1.0, 0.0]), Unitary(HADAMARD))
        npt.assert_allclose(rotated, np.full((2, 2), 0.5), atol=1e-15)

    def test_identity_projector_fixed(self):
        u = haar_random_unitary(3, 9)
        npt.assert_allclose(heisenberg_projector(np.eye(3), u), np.eye(3), atol=1e-14)

    @given(st.integers(0, 10**6))
    def test_preserves_projector_equations(self, seed):
        rng = np.random.default_rng(seed)
        basis = haar_unitary(3, rng).matrix
        p = basis[:, :2] @ basis[:, :2].conj().T
        rotated = heisenberg_projector(p, haar_unitary(3, rng))
        assert max_abs(rotated @ rotated - rotated) <= 1e-12
        assert max_abs(rotated - rotated.conj().T) <= 1e-12


class TestTensor:
    def test_identity_times_identity(self):
        npt.assert_array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4, dtype=complex))

    def test_index_convention_fixture(self):
        npt.assert_array_equal(
            tensor(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])),
            np.diag([0.0, 1.0, 0.0, 0.0]).astype(complex),
        )

    def test_flip_times_flip_is_antidiagonal(self):
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        expected = np.zeros((4, 4))
        expected[0, 3] = expected[1, 2] = expected[2, 1] = expected[3, 0] = 1.0
        npt.assert_array_equal(tensor(x, x), expected.astype(complex))

    def test_matches_by_hand_kronecker(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        npt.assert_allclose(tensor(a, b), oracle.kron_by_hand(a, b), atol=1e-14)

    @given(st.integers(0, 10**6))
    def test_trace_multiplicative_and_associative(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        assert abs(np.trace(tensor(a, b)) - np.trace(a) * np.trace(b)) <= 1e-10
        npt.assert_allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)


class TestHaarSampling:
    def test_dimension_one_is_phase(self):
        u = haar_random_unitary(1, 123)
        assert abs(abs(u.matrix[0, 0]) - 1.0) <= 1e-14

    def test_deterministic_in_seed(self):
        first = haar_random_unitary(4, 7).matrix
        second = haar_random_unitary(4, 7).matrix
        assert np.array_equal(first, second)

    def test_unitarity_against_explicit_multiply(self):
        u = haar_random_unitary(3, 1).matrix
        gram = np.zeros((3, 3), dtype=complex)
        for i in range(3):
            for j in range(3):
                gram[i, j] = sum(u[k, i].conjugate() * u[k, j] for k in range(3))
        assert max_abs(gram - np.eye(3)) <= 1e-12

    def test_first_entry_moment(self):
        # |u_00|^2 is uniform on [0, 1] for d = 2: mean 1/2, variance 1/12.
        rng = np.random.default_rng(2024)
        samples = 10_000
        mean = np.mean([abs(haar_unitary(2, rng).matrix[0, 0]) ** 2 for _ in range(samples)])
        three_se = 3.0 * np.sqrt(1.0 / 12.0 / samples)
        assert abs(mean - 0.5) <= three_se


class TestSchedule:
    def test_hamiltonian_exponentiation_matches_analytic(self):
        fam = qubit_family()
        sz = np.diag([1.0, -1.0])
        schedule = Schedule.from_hamiltonian(sz, (0.3, 1.1), (fam, fam))
        for t, u in zip(schedule.times, schedule.evolutions):
            expected = np.diag([np.exp(-1j * t), np.exp(1j * t)])
            npt.assert_allclose(u.matrix, expected, atol=1e-13)

    def test_non_hermitian_hamiltonian_rejected(self):
        fam = qubit_family()
        with pytest.raises(ValidationError, match="Hermitian"):
            Schedule.from_hamiltonian(np.array([[0.0, 1.0], [0.0, 0.0]]), (0.0,), (fam,))

    def test_length_mismatch_rejected(self):
        fam = qubit_family()
        with pytest.raises(ValidationError):
            Schedule(times=(0.0, 1.0), evolutions=(Unitary.identity(2),), families=(fam, fam))

    def test_unordered_times_rejected(self):
        fam = qubit_family()
        with pytest.raises(ValidationError, match="increasing"):
            Schedule(
                times=(1.0, 0.0),
                evolutions=(Unitary.identity(2), Unitary.identity(2)),
                families=(fam, fam),
            )


def test_family_equations_hold_for_sampled_families():
    rng = np.random.default_rng(77)
    for _ in range(25):
        dim = int(rng.integers(2, 5))
        basis = haar_unitary(dim, rng).matrix
        cut = int(rng.integers(1, dim))
        fam = family_from_basis(basis, [list(range(cut)), list(range(cut, dim))])
        total = sum(fam.members)
        assert max_abs(total - np.eye(dim)) <= 1e-12
        for a in range(fam.size):
            for b in range(fam.size):
                product = fam.members[a] @ fam.members[b]
                expected = fam.members[a] if a == b else 0.0
                assert max_abs(product - expected) <= 1e-12
