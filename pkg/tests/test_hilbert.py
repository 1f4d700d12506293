"""Tests for the small dense Hilbert space core."""

from __future__ import annotations

import math

import numpy as np
import pytest

from quantum_decision_lib.exceptions import (
    DimensionMismatch,
    InvalidOperator,
    NotCommuting,
    ZeroVector,
)
from quantum_decision_lib.hilbert import (
    PVM,
    HermitianOperator,
    Projector,
    StateVector,
    UnitaryOperator,
    born_probabilities,
    commutator_norm,
    common_eigenbasis,
    deinterleave,
    expectation,
    hermitian_from_params,
    interference_terms,
    interleave,
    normalize,
    operator_from_eigensystem,
    random_state,
    random_unitary,
    superpose,
)

RGB = ("red", "yellow", "black")
SQRT2 = math.sqrt(2.0)


def _basis(n: int, k: int) -> StateVector:
    """Canonical basis state e_k of C^n."""
    vec = np.zeros(n, dtype=complex)
    vec[k] = 1.0
    return StateVector(vec)


class TestNormalize:
    """Tests for normalize()."""

    def test_scales_real_vector(self) -> None:
        """(2,0,0) becomes (1,0,0)."""
        assert normalize([2, 0, 0]).allclose(_basis(3, 0))

    def test_symmetric_vector(self) -> None:
        """(1,1,1) becomes the uniform superposition."""
        state = normalize([1, 1, 1])
        assert np.allclose(state.amplitudes, np.full(3, 1 / math.sqrt(3)))

    def test_complex_amplitude(self) -> None:
        """(1+i, 0) has norm sqrt(2)."""
        state = normalize([1 + 1j, 0])
        assert np.allclose(state.amplitudes, [(1 + 1j) / SQRT2, 0])

    def test_zero_vector_rejected(self) -> None:
        """A vector below the zero-norm floor cannot be normalized."""
        with pytest.raises(ZeroVector):
            normalize([1e-15, 0, 0])

    def test_dimension_range(self) -> None:
        """Only dimensions 2 to 8 are supported."""
        with pytest.raises(DimensionMismatch):
            normalize([1.0])
        with pytest.raises(DimensionMismatch):
            normalize(np.ones(9))


class TestStateVector:
    """Tests for StateVector construction."""

    def test_rejects_non_unit_norm(self) -> None:
        """Constructor demands unit norm within 1e-12."""
        with pytest.raises(InvalidOperator):
            StateVector(np.array([1.0, 1e-5, 0.0]))

    def test_amplitudes_are_read_only(self) -> None:
        """The stored array cannot be mutated."""
        state = _basis(3, 1)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 1.0

    def test_interleave_round_trip(self) -> None:
        """interleave and deinterleave are inverse."""
        values = np.array([1 + 2j, -0.5j, 3.0])
        assert np.allclose(deinterleave(interleave(values)), values)


class TestOperators:
    """Tests for Hermitian operators, projectors and PVMs."""

    def test_non_hermitian_rejected(self) -> None:
        """A matrix off its adjoint by more than 1e-12 is refused."""
        with pytest.raises(InvalidOperator):
            HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_projector_must_be_idempotent(self) -> None:
        """2 * P is not a projector."""
        with pytest.raises(InvalidOperator):
            Projector(HermitianOperator(np.diag([2.0, 0.0])), 1)

    def test_projector_onto_span(self) -> None:
        """Projector.onto handles non-orthonormal spanning sets."""
        p = Projector.onto([[1, 1, 0], [2, 2, 0]])
        assert p.rank == 1
        assert np.allclose(p.matrix, np.outer([1, 1, 0], [1, 1, 0]) / 2)

    def test_pvm_incomplete_rejected(self) -> None:
        """Projectors that do not sum to the identity are refused."""
        with pytest.raises(InvalidOperator):
            PVM(("a", "b"), (Projector.basis_state(3, 0), Projector.basis_state(3, 1)))

    def test_pvm_overlap_rejected(self) -> None:
        """Non-orthogonal projectors are refused."""
        diag = Projector.onto([[1, 1]])
        with pytest.raises(InvalidOperator):
            PVM(("a", "b"), (diag, Projector.basis_state(2, 0)))

    def test_binary_pvm(self) -> None:
        """PVM.binary pairs a projector with its complement."""
        pvm = PVM.binary(Projector.onto([[1, 1, 0]]))
        assert pvm["out"].rank == 2


class TestBornProbabilities:
    """Tests for born_probabilities()."""

    def test_uniform_state(self) -> None:
        """Uniform superposition gives 1/3 per color."""
        probs = born_probabilities(normalize([1, 1, 1]), PVM.canonical(RGB))
        assert list(probs) == list(RGB)
        for p in probs.values():
            assert p == pytest.approx(1 / 3, abs=1e-12)

    def test_rotated_projector(self) -> None:
        """<e0| P |e0> = 1/2 for P onto (1,1,0)/sqrt(2)."""
        pvm = PVM.binary(Projector.onto([[1, 1, 0]]))
        probs = born_probabilities(_basis(3, 0), pvm)
        assert probs["in"] == pytest.approx(0.5, abs=1e-12)
        assert probs["out"] == pytest.approx(0.5, abs=1e-12)

    def test_dimension_mismatch(self) -> None:
        """A C^2 state cannot be measured with a C^3 PVM."""
        with pytest.raises(DimensionMismatch):
            born_probabilities(_basis(2, 0), PVM.canonical(RGB))

    def test_random_states_sum_to_one(self, rng) -> None:
        """Probabilities lie in [0, 1] and sum to 1 for random states and bases."""
        for trial in range(10_000):
            n = 2 + trial % 7
            state = random_state(n, rng)
            if trial % 50 == 0:
                u = random_unitary(n, rng)
                pvm = PVM.from_basis(u.matrix, [str(k) for k in range(n)])
            elif n != pvm.dimension:
                pvm = PVM.canonical([str(k) for k in range(n)])
            probs = list(born_probabilities(state, pvm).values())
            assert abs(sum(probs) - 1.0) <= 1e-10
            assert all(0.0 <= p <= 1.0 for p in probs)


class TestExpectation:
    """Tests for expectation()."""

    def test_identity(self) -> None:
        """Any state has <I> = 1."""
        state = normalize([1, 2j, -1])
        assert expectation(state, HermitianOperator.identity(3)) == pytest.approx(1.0)

    def test_eigenstate(self) -> None:
        """e0 of diag(5, 7, 9) gives 5."""
        op = HermitianOperator.diagonal([5, 7, 9])
        assert expectation(_basis(3, 0), op) == pytest.approx(5.0)

    def test_half_weight(self) -> None:
        """(1,1,0)/sqrt(2) against diag(0, 12, 0) gives 6."""
        op = HermitianOperator.diagonal([0, 12, 0])
        assert expectation(normalize([1, 1, 0]), op) == pytest.approx(6.0, abs=1e-12)

    def test_random_operators_are_real(self, rng) -> None:
        """Expectations of random Hermitian operators come back real."""
        for _ in range(500):
            op = hermitian_from_params(rng.normal(size=16), 4)
            value = expectation(random_state(4, rng), op)
            assert isinstance(value, float)


class TestCommutator:
    """Tests for commutator_norm() and common_eigenbasis()."""

    def test_identity_commutes(self) -> None:
        """Everything commutes with the identity."""
        a = hermitian_from_params(np.arange(9.0), 3)
        assert commutator_norm(a, HermitianOperator.identity(3)) <= 1e-12

    def test_diagonals_commute(self) -> None:
        """Two diagonal operators commute."""
        a = HermitianOperator.diagonal([1, 2, 3])
        b = HermitianOperator.diagonal([4, -1, 0])
        assert commutator_norm(a, b) == 0.0

    def test_pauli_pair(self) -> None:
        """||[sx, sz]||_F = 2 sqrt(2)."""
        sx = HermitianOperator(np.array([[0, 1], [1, 0]], dtype=complex))
        sz = HermitianOperator.diagonal([1, -1])
        assert commutator_norm(sx, sz) == pytest.approx(2 * SQRT2)

    def test_diagonal_pair_gives_canonical_basis(self) -> None:
        """Distinct diagonal spectra recover the canonical basis."""
        a = HermitianOperator.diagonal([1, 2, 3])
        b = HermitianOperator.diagonal([0, 5, -5])
        basis = common_eigenbasis(a, b)
        assert np.allclose(np.abs(basis.vectors), np.eye(3))
        assert np.allclose(basis.eigenvalues_a, [1, 2, 3])
        assert np.allclose(basis.eigenvalues_b, [0, 5, -5])

    def test_operator_and_its_square(self) -> None:
        """A and A^2 share every eigenvector of A."""
        a = hermitian_from_params(np.linspace(-1, 1, 9), 3)
        a2 = HermitianOperator(a.matrix @ a.matrix)
        basis = common_eigenbasis(a, a2, tol=1e-9)
        assert np.allclose(basis.eigenvalues_a ** 2, basis.eigenvalues_b, atol=1e-8)

    def test_recovers_shared_unitary(self, rng) -> None:
        """U diag U^dagger pairs give back U's columns up to phase."""
        u = random_unitary(4, rng)
        a = operator_from_eigensystem(u.matrix, [1, 2, 3, 4])
        b = operator_from_eigensystem(u.matrix, [-1, 1, -1, 1])
        basis = common_eigenbasis(a, b)
        overlaps = np.abs(u.matrix.conj().T @ basis.vectors)
        assert np.allclose(overlaps, np.eye(4), atol=1e-8)

    def test_degenerate_block_is_split_by_second_operator(self, rng) -> None:
        """A degenerate in A is resolved by B and stays orthonormal."""
        u = random_unitary(4, rng)
        a = operator_from_eigensystem(u.matrix, [1, 1, -1, -1])
        b = operator_from_eigensystem(u.matrix, [1, -1, 1, -1])
        basis = common_eigenbasis(a, b)
        gram = basis.vectors.conj().T @ basis.vectors
        assert np.allclose(gram, np.eye(4), atol=1e-8)
        for k in range(4):
            v = basis.vectors[:, k]
            assert np.linalg.norm(a.matrix @ v - basis.eigenvalues_a[k] * v) <= 1e-8
            assert np.linalg.norm(b.matrix @ v - basis.eigenvalues_b[k] * v) <= 1e-8

    def test_doubly_degenerate_block_ignores_solver_basis(self, rng) -> None:
        """Two bases of one shared eigenspace give the same columns."""
        u = random_unitary(3, rng).matrix
        mix = np.eye(3, dtype=complex)
        mix[:2, :2] = random_unitary(2, rng).matrix
        other = u @ mix
        first = common_eigenbasis(
            operator_from_eigensystem(u, [1, 1, 2]),
            operator_from_eigensystem(u, [-1, -1, 1]),
        )
        second = common_eigenbasis(
            operator_from_eigensystem(other, [1, 1, 2]),
            operator_from_eigensystem(other, [-1, -1, 1]),
        )
        assert np.allclose(first.vectors, second.vectors, atol=1e-8)
        keys = [tuple(np.round(first.vectors[:, k], 10)) for k in range(2)]
        assert [(z.real, z.imag) for z in keys[0]] <= [(z.real, z.imag) for z in keys[1]]

    def test_non_commuting_rejected(self) -> None:
        """Pauli x and z have no common eigenbasis."""
        sx = HermitianOperator(np.array([[0, 1], [1, 0]], dtype=complex))
        with pytest.raises(NotCommuting):
            common_eigenbasis(sx, HermitianOperator.diagonal([1, -1]))


class TestUnitary:
    """Tests for UnitaryOperator."""

    def test_generator_gives_unitary(self, rng) -> None:
        """exp(iH) is unitary and preserves norm."""
        u = UnitaryOperator.from_generator(hermitian_from_params(rng.normal(size=9), 3))
        state = u.apply(random_state(3, rng))
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) <= 1e-12

    def test_real_generator_gives_rotation(self) -> None:
        """Real parametrization yields a real orthogonal matrix."""
        u = UnitaryOperator.from_generator(hermitian_from_params([0.3, -0.2, 1.1], 3, real=True))
        assert np.allclose(u.matrix.imag, 0.0, atol=1e-12)

    def test_wrong_parameter_count(self) -> None:
        """n^2 parameters are needed for a complex generator."""
        with pytest.raises(DimensionMismatch):
            hermitian_from_params(np.zeros(8), 3)


class TestSuperposition:
    """Tests for superpose() and interference_terms()."""

    def test_single_component(self) -> None:
        """a=1, b=0 returns w1."""
        w1, w2 = _basis(3, 0), _basis(3, 1)
        assert superpose(1, w1, 0, w2).allclose(w1)

    def test_orthogonal_components(self) -> None:
        """Equal weights on e0, e1 give (1,1,0)/sqrt(2)."""
        s = superpose(1 / SQRT2, _basis(3, 0), 1 / SQRT2, _basis(3, 1))
        assert np.allclose(s.amplitudes, [1 / SQRT2, 1 / SQRT2, 0])

    def test_cancellation(self) -> None:
        """w - w cannot be normalized."""
        w = normalize([1, 2, 3])
        with pytest.raises(ZeroVector):
            superpose(1 / SQRT2, w, -1 / SQRT2, w)

    def test_basis_states_do_not_interfere(self) -> None:
        """Canonical projectors see no cross term between e1 and e2."""
        terms = interference_terms(0.3 + 0.4j, _basis(3, 1), 0.8, _basis(3, 2), PVM.canonical(RGB))
        assert all(abs(t) <= 1e-15 for t in terms.values())

    def test_rotated_projector_interferes(self) -> None:
        """Projector onto (0,1,1)/sqrt(2) carries I = 1/2."""
        basis = np.array([[1, 0, 0], [0, 1, 1], [0, 1, -1]], dtype=complex).T
        basis[:, 1:] /= SQRT2
        pvm = PVM.from_basis(basis, ("a", "plus", "minus"))
        terms = interference_terms(1 / SQRT2, _basis(3, 1), 1 / SQRT2, _basis(3, 2), pvm)
        assert terms["plus"] == pytest.approx(0.5, abs=1e-12)
        assert sum(terms.values()) == pytest.approx(0.0, abs=1e-12)

    def test_decomposition_identity(self, rng) -> None:
        """Superposed Born probabilities equal mixture plus interference, renormalized."""
        for _ in range(2_000):
            w1, w2 = random_state(3, rng), random_state(3, rng)
            a = complex(*rng.normal(size=2))
            b = complex(*rng.normal(size=2))
            pvm = PVM.from_basis(random_unitary(3, rng).matrix, RGB)
            raw = a * w1.amplitudes + b * w2.amplitudes
            norm_sq = float(np.vdot(raw, raw).real)
            terms = interference_terms(a, w1, b, w2, pvm)
            expected_sum = 2 * (np.conj(a) * b * w1.inner(w2)).real
            assert abs(sum(terms.values()) - expected_sum) <= 1e-10
            mixed = born_probabilities(superpose(a, w1, b, w2), pvm)
            p1, p2 = born_probabilities(w1, pvm), born_probabilities(w2, pvm)
            for c in RGB:
                rebuilt = (abs(a) ** 2 * p1[c] + abs(b) ** 2 * p2[c] + terms[c]) / norm_sq
                assert abs(rebuilt - mixed[c]) <= 1e-10
