"""Tests for urns, acts, utilities and classical expected utility."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from quantum_decision_lib.exceptions import (
    ColorMismatch,
    InvalidUrn,
    NegativePayoff,
    OutOfRange,
    UnknownAct,
)
from quantum_decision_lib.urn import (
    LINEAR,
    Act,
    ProbabilityVector,
    UnknownGroup,
    UrnSpec,
    UtilityFunction,
    classical_expected_utility,
    ellsberg_urn,
    machina_urn,
    utility_eval,
)

UTILITIES = (
    LINEAR,
    UtilityFunction("power", 0.5),
    UtilityFunction("power", 1.0),
    UtilityFunction("exponential", 0.1),
    UtilityFunction("exponential", 0.5),
)


def _ellsberg_prior(black: float) -> ProbabilityVector:
    """Admissible Ellsberg prior with the given black probability."""
    return ProbabilityVector({"red": 1 / 3, "yellow": 2 / 3 - black, "black": black})


class TestUrnSpec:
    """Tests for UrnSpec validation."""

    def test_counts_must_add_up(self) -> None:
        """Known counts plus group totals must equal the total."""
        with pytest.raises(InvalidUrn):
            UrnSpec(("r", "y"), 90, {"r": 30}, (UnknownGroup(("y",), 50),))

    def test_every_color_placed_once(self) -> None:
        """A color in both known counts and a group is refused."""
        with pytest.raises(InvalidUrn):
            UrnSpec(("r", "y"), 60, {"r": 30}, (UnknownGroup(("r", "y"), 30),))

    def test_duplicate_colors(self) -> None:
        """Color labels must be unique."""
        with pytest.raises(InvalidUrn):
            UrnSpec(("r", "r"), 10, {"r": 10})

    def test_admits_respects_known_count(self) -> None:
        """p_red must be 30/90 in the Ellsberg urn."""
        urn = ellsberg_urn().urn
        assert urn.admits(_ellsberg_prior(0.25))
        skewed = ProbabilityVector({"red": 0.5, "yellow": 0.25, "black": 0.25})
        assert not urn.admits(skewed)

    def test_known_probability_is_exact(self) -> None:
        """The built-in Ellsberg urn implies p_red = 1/3 exactly."""
        assert ellsberg_urn().urn.known_probability("red") == Fraction(1, 3)


class TestBuiltins:
    """Tests for the built-in Ellsberg and Machina experiments."""

    def test_ellsberg_f3(self, ellsberg) -> None:
        """f3 pays 12 on red and yellow."""
        assert ellsberg.acts["f3"].payoffs == {"red": 12, "yellow": 12, "black": 0}

    def test_machina_f2(self, machina) -> None:
        """f2 pays 0/25/50/25."""
        assert machina.acts["f2"].payoffs == {"red": 0, "yellow": 25, "black": 50, "green": 25}

    def test_custom_stake(self) -> None:
        """The Ellsberg stake is configurable."""
        assert ellsberg_urn(10.0).acts["f4"].payoffs["black"] == 10.0

    def test_unknown_act(self, ellsberg) -> None:
        """Looking up a missing act raises UnknownAct."""
        with pytest.raises(UnknownAct):
            ellsberg.act("f9")


class TestAct:
    """Tests for Act."""

    def test_negative_payoff(self) -> None:
        """Payoffs must be non-negative."""
        with pytest.raises(NegativePayoff):
            Act("bad", {"red": -1.0})

    def test_outcomes_and_events(self, machina) -> None:
        """Distinct outcomes are sorted; events collect their colors."""
        f1 = machina.acts["f1"]
        assert f1.outcome_values() == [0.0, 25.0, 50.0]
        assert f1.event_for(25.0) == ("black", "green")


class TestUtility:
    """Tests for utility_eval()."""

    def test_linear(self) -> None:
        """linear(12) = 12."""
        assert utility_eval(LINEAR, 12) == 12.0

    def test_power(self) -> None:
        """sqrt(25) = 5."""
        assert utility_eval(UtilityFunction("power", 0.5), 25) == pytest.approx(5.0)

    def test_exponential_zero(self) -> None:
        """Exponential utility is normalized to u(0) = 0."""
        assert utility_eval(UtilityFunction("exponential", 0.1), 0) == 0.0

    def test_negative_money(self) -> None:
        """Utilities are undefined below zero."""
        with pytest.raises(NegativePayoff):
            utility_eval(LINEAR, -1)

    def test_bad_parameters(self) -> None:
        """Power needs alpha in (0, 1]; exponential needs lambda > 0."""
        with pytest.raises(OutOfRange):
            UtilityFunction("power", 1.5)
        with pytest.raises(OutOfRange):
            UtilityFunction("exponential", 0.0)
        with pytest.raises(OutOfRange):
            UtilityFunction("log")

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.label)
    def test_strictly_increasing(self, u) -> None:
        """u(0) = 0 and u grows on a grid."""
        grid = np.linspace(0, 50, 201)
        values = [u(x) for x in grid]
        assert values[0] == 0.0
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_dict_round_trip(self) -> None:
        """to_dict and from_dict are inverse."""
        u = UtilityFunction("power", 0.5)
        assert UtilityFunction.from_dict(u.to_dict()) == u


class TestClassicalExpectedUtility:
    """Tests for classical_expected_utility()."""

    def test_f1_uniform(self, ellsberg) -> None:
        """f1 under the uniform prior is worth 4."""
        p = ProbabilityVector.from_values(("red", "yellow", "black"), (1 / 3, 1 / 3, 1 / 3))
        assert classical_expected_utility(ellsberg.acts["f1"], p) == pytest.approx(4.0)

    def test_machina_uniform(self, machina) -> None:
        """Every Machina act is worth 25 under the uniform prior."""
        p = machina.urn.uniform_prior()
        for act in machina.acts.values():
            assert classical_expected_utility(act, p) == pytest.approx(25.0, abs=1e-12)

    def test_color_mismatch(self, ellsberg) -> None:
        """A prior over other colors is refused."""
        p = ProbabilityVector({"red": 0.5, "green": 0.5})
        with pytest.raises(ColorMismatch):
            classical_expected_utility(ellsberg.acts["f1"], p)

    @pytest.mark.parametrize("u", UTILITIES, ids=lambda u: u.label)
    def test_ambiguity_free_acts_are_constant(self, ellsberg, u) -> None:
        """f1 = u(12)/3 and f4 = 2u(12)/3 for every admissible prior."""
        for black in np.linspace(0, 2 / 3, 67):
            p = _ellsberg_prior(float(black))
            assert classical_expected_utility(ellsberg.acts["f1"], p, u) == pytest.approx(
                u(12) / 3, abs=1e-12
            )
            assert classical_expected_utility(ellsberg.acts["f4"], p, u) == pytest.approx(
                2 * u(12) / 3, abs=1e-12
            )

    def test_monotone_in_dominance(self, rng) -> None:
        """A pointwise-dominating act is worth at least as much."""
        colors = ("a", "b", "c", "d")
        for _ in range(500):
            low = rng.uniform(0, 20, size=4)
            high = low + rng.uniform(0, 5, size=4)
            weights = rng.dirichlet(np.ones(4))
            weights = weights / weights.sum()
            p = ProbabilityVector.from_values(colors, weights)
            worse = Act("w", dict(zip(colors, low)))
            better = Act("b", dict(zip(colors, high)))
            assert better.dominates(worse)
            assert classical_expected_utility(better, p) >= classical_expected_utility(worse, p)
