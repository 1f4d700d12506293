"""Tests for commuting choice observables and the choice fits."""

from __future__ import annotations

import numpy as np
import pytest

from quantum_decision_lib.choice import (
    CELLS,
    LABELS,
    ChoiceData,
    ChoiceObservablePair,
    ConstraintSet,
    JointDistribution,
    build_commuting_pair,
    choice_weights,
    dominant_pattern,
    fit_marginals,
    joint_distribution,
    min_l1_joint_fit,
    paradox_share,
    real_representability_search,
    sequential_joint,
)
from quantum_decision_lib.exceptions import (
    BadBasis,
    EmptyData,
    InvalidOperator,
    InvalidPattern,
    NotCommuting,
    OutOfRange,
)
from quantum_decision_lib.hilbert import (
    HermitianOperator,
    random_state,
    random_unitary,
)

OBSERVED = ChoiceData((6, 34, 12, 7))
FIT_BUDGET = (16, 300)


def _random_pair(rng) -> ChoiceObservablePair:
    """Commuting pair on a random basis with random sign labels."""
    basis = random_unitary(3, rng).matrix
    signs = [LABELS[k] for k in rng.integers(0, len(LABELS), size=3)]
    return build_commuting_pair(basis, signs)


class TestChoiceData:
    """Tests for ChoiceData and its summaries."""

    def test_from_dict(self) -> None:
        """Cells are keyed as "f1,f3"; missing cells are zero."""
        data = ChoiceData.from_dict({"f1,f4": 3, "f2,f3": 1})
        assert data.counts == (0, 3, 1, 0)
        assert data.to_dict()["f1,f4"] == 3

    def test_unknown_cell(self) -> None:
        """Only the four joint choices are accepted."""
        with pytest.raises(OutOfRange):
            ChoiceData.from_dict({"f1,f2": 3})

    def test_negative_count(self) -> None:
        """Counts cannot be negative."""
        with pytest.raises(OutOfRange):
            ChoiceData((1, -1, 0, 0))

    def test_marginals(self) -> None:
        """p_f1 = 40/59 and p_f4 = 41/59."""
        weights = choice_weights(OBSERVED)
        assert weights["f1"] == pytest.approx(40 / 59)
        assert weights["f4"] == pytest.approx(41 / 59)
        assert weights["f2"] + weights["f1"] == pytest.approx(1.0)

    def test_paradox_share(self) -> None:
        """46 of 59 participants chose (f1, f4) or (f2, f3)."""
        assert paradox_share(OBSERVED) == pytest.approx(46 / 59)

    def test_dominant_pattern(self) -> None:
        """The majority pattern is the Ellsberg pattern."""
        assert str(dominant_pattern(OBSERVED)) == "f1>f2,f4>f3"

    def test_even_split(self) -> None:
        """An even split in a bet pair has no majority."""
        with pytest.raises(InvalidPattern):
            dominant_pattern(ChoiceData((1, 1, 1, 1)))

    def test_empty(self) -> None:
        """Summaries need at least one participant."""
        with pytest.raises(EmptyData):
            choice_weights(ChoiceData((0, 0, 0, 0)))
        with pytest.raises(EmptyData):
            JointDistribution.from_data(ChoiceData((0, 0, 0, 0)))


class TestJointBound:
    """Tests for min_l1_joint_fit()."""

    def test_observed_bound(self) -> None:
        """Dropping the 6 (f1, f3) choices costs 12/59."""
        fit = min_l1_joint_fit(JointDistribution.from_data(OBSERVED))
        assert fit.distance == pytest.approx(12 / 59, abs=1e-12)
        assert fit.dropped == ("f1", "f3")
        assert len(fit.support) == 3
        assert sum(fit.closest.probabilities) == pytest.approx(1.0)

    def test_three_cell_target_is_free(self) -> None:
        """A target already on three cells needs no change."""
        fit = min_l1_joint_fit(JointDistribution((0.0, 0.5, 0.25, 0.25)))
        assert fit.distance == 0.0
        assert fit.dropped is None

    def test_bound_is_attained(self) -> None:
        """The closest three-cell distribution sits at the reported distance."""
        target = JointDistribution.from_data(OBSERVED)
        fit = min_l1_joint_fit(target)
        assert target.l1(fit.closest) == pytest.approx(fit.distance, abs=1e-12)

    def test_tie_goes_to_first_cell(self) -> None:
        """Equal lightest cells drop the first in order."""
        fit = min_l1_joint_fit(JointDistribution((0.25, 0.25, 0.25, 0.25)))
        assert fit.dropped == CELLS[0]


class TestCommutingPair:
    """Tests for build_commuting_pair() and the joint distributions."""

    @pytest.mark.slow
    def test_at_most_three_cells(self, rng) -> None:
        """A commuting pair on C^3 never fills all four cells."""
        for _ in range(10_000):
            pair = _random_pair(rng)
            joint = joint_distribution(random_state(3, rng), pair)
            assert len(joint.support()) <= 3
            assert sum(joint.probabilities) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.slow
    def test_commutator_vanishes(self, rng) -> None:
        """Operators built on a shared basis commute."""
        for _ in range(10_000):
            assert _random_pair(rng).commutator() <= 1e-10

    def test_sequential_order_free(self, rng) -> None:
        """Both measurement orders give the joint distribution."""
        for _ in range(1_000):
            pair = _random_pair(rng)
            state = random_state(3, rng)
            joint = joint_distribution(state, pair)
            for first in ("o12", "o34"):
                seq = sequential_joint(state, pair, first)
                assert seq.probabilities == pytest.approx(joint.probabilities, abs=1e-10)

    def test_from_operators(self, rng) -> None:
        """Hand-built operators recover a shared basis and labels."""
        built = _random_pair(rng)
        pair = ChoiceObservablePair.from_operators(built.o12, built.o34)
        state = random_state(3, rng)
        assert joint_distribution(state, pair).probabilities == pytest.approx(
            joint_distribution(state, built).probabilities, abs=1e-9
        )

    def test_not_commuting(self) -> None:
        """Pauli-like pairs on C^3 are refused by the joint."""
        o12 = HermitianOperator.diagonal([1.0, -1.0, 1.0])
        flip = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)
        o34 = HermitianOperator(flip)
        pair = ChoiceObservablePair(o12, o34)
        with pytest.raises(NotCommuting):
            joint_distribution(random_state(3, np.random.default_rng(0)), pair)

    def test_sequential_order_matters_when_not_commuting(self) -> None:
        """Non-commuting observables give order effects."""
        o12 = HermitianOperator.diagonal([1.0, -1.0, 1.0])
        flip = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)
        pair = ChoiceObservablePair(o12, HermitianOperator(flip))
        state = random_state(3, np.random.default_rng(4))
        first = sequential_joint(state, pair, "o12").probabilities
        second = sequential_joint(state, pair, "o34").probabilities
        assert max(abs(a - b) for a, b in zip(first, second)) > 1e-6

    def test_bad_spectrum(self) -> None:
        """Choice observables must square to the identity."""
        with pytest.raises(InvalidOperator):
            ChoiceObservablePair(
                HermitianOperator.diagonal([2.0, 1.0, 1.0]),
                HermitianOperator.diagonal([1.0, 1.0, 1.0]),
            )

    def test_bad_basis(self) -> None:
        """A non-orthonormal basis is refused."""
        with pytest.raises(BadBasis):
            build_commuting_pair(np.ones((3, 3)), [(1, 1), (1, -1), (-1, 1)])

    def test_bad_first(self, rng) -> None:
        """Only o12 or o34 can be measured first."""
        with pytest.raises(OutOfRange):
            sequential_joint(random_state(3, rng), _random_pair(rng), "o56")


class TestConstraintSet:
    """Tests for ConstraintSet validation."""

    def test_field(self) -> None:
        """Fields are real or complex."""
        with pytest.raises(OutOfRange):
            ConstraintSet({"f1": 0.5, "f4": 0.5}, field="quaternion")

    def test_marginal_range(self) -> None:
        """Marginal targets are open-interval probabilities."""
        with pytest.raises(OutOfRange):
            ConstraintSet({"f1": 1.0, "f4": 0.5})


class TestFitMarginals:
    """Tests for fit_marginals()."""

    @pytest.mark.parametrize("targets", [(0.68, 0.69), (40 / 59, 41 / 59)])
    def test_reaches_targets(self, targets) -> None:
        """The fitted Born marginals match within 1e-6."""
        fit = fit_marginals(targets, seed=0)
        assert fit.residual <= 1e-6
        assert fit.marginals["f1"] == pytest.approx(targets[0], abs=1e-6)
        assert fit.marginals["f4"] == pytest.approx(targets[1], abs=1e-6)
        assert fit.pair.commutator() <= 1e-10
        assert fit.state.weights()[0] == pytest.approx(1 / 3, abs=1e-10)
        assert len(fit.joint.support()) <= 3

    def test_same_seed_same_fit(self) -> None:
        """Two fits with one seed agree exactly."""
        first = fit_marginals((0.68, 0.69), seed=11)
        second = fit_marginals((0.68, 0.69), seed=11)
        assert first.fit.parameters == second.fit.parameters
        assert first.residual == second.residual

    def test_target_out_of_range(self) -> None:
        """Targets of 0 or 1 are refused."""
        with pytest.raises(OutOfRange):
            fit_marginals((0.0, 0.5))


@pytest.mark.slow
class TestRepresentability:
    """Tests for real_representability_search()."""

    def test_marginals_only_in_real_field(self) -> None:
        """Marginals alone are reachable with real amplitudes."""
        constraints = ConstraintSet({"f1": 40 / 59, "f4": 41 / 59}, field="real")
        report = real_representability_search(constraints, seed=0, budget=FIT_BUDGET)
        assert report.residual <= 1e-6
        assert report.lower_bound is None

    def test_joint_residual_respects_bound(self) -> None:
        """With the observed joint the L1 violation stays above 12/59."""
        joint = JointDistribution.from_data(OBSERVED)
        constraints = ConstraintSet(
            {"f1": 40 / 59, "f4": 41 / 59}, joint=joint, field="complex"
        )
        report = real_representability_search(constraints, seed=0, budget=FIT_BUDGET)
        assert report.lower_bound == pytest.approx(12 / 59)
        assert report.violations["joint_l1"] >= 12 / 59 - 1e-9
        assert report.to_dict()["field"] == "complex"
