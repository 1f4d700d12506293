"""Tests for the seeded multi-start optimizer."""

from __future__ import annotations

import logging
import math
from unittest.mock import MagicMock

import pytest

from quantum_decision_lib.exceptions import NonFiniteObjective, OutOfRange
from quantum_decision_lib.optimizer import (
    TWO_PI,
    MultiStartMinimizer,
    Parameter,
    ParamSpace,
    angle,
    minimize,
    periodic_wrap,
    restart_rng,
)


def _bowl(params) -> float:
    """Quadratic with its minimum at x = 0.3, y = -1.2."""
    return (params["x"] - 0.3) ** 2 + (params["y"] + 1.2) ** 2


def _make_space() -> ParamSpace:
    return ParamSpace((Parameter("x", -2.0, 2.0), Parameter("y", -2.0, 2.0)))


class TestParameters:
    """Tests for Parameter and ParamSpace."""

    def test_bad_bounds(self) -> None:
        """lo above hi is refused."""
        with pytest.raises(OutOfRange):
            Parameter("x", 1.0, 0.0)

    def test_infinite_bounds(self) -> None:
        """Bounds must be finite."""
        with pytest.raises(OutOfRange):
            Parameter("x", 0.0, math.inf)

    def test_clip(self) -> None:
        """Bounded parameters are clipped."""
        assert Parameter("x", 0.0, 1.0).project(1.5) == 1.0

    def test_angle_wraps(self) -> None:
        """Angles wrap modulo 2 pi."""
        assert angle("t").project(TWO_PI + 0.5) == pytest.approx(0.5)
        assert periodic_wrap(-0.5) == pytest.approx(TWO_PI - 0.5)

    def test_duplicate_names(self) -> None:
        """Parameter names are unique."""
        with pytest.raises(OutOfRange):
            ParamSpace((angle("t"), angle("t")))

    def test_concatenation(self) -> None:
        """Spaces concatenate in order."""
        space = _make_space() + ParamSpace((angle("t"),))
        assert space.names == ["x", "y", "t"]


class TestMultiStart:
    """Tests for MultiStartMinimizer."""

    def test_finds_minimum(self) -> None:
        """A convex bowl is solved to high accuracy."""
        fit = minimize(_bowl, _make_space(), seed=0, budget=(4, 500))
        assert fit.parameters["x"] == pytest.approx(0.3, abs=1e-6)
        assert fit.parameters["y"] == pytest.approx(-1.2, abs=1e-6)
        assert fit.objective <= 1e-12

    def test_deterministic(self) -> None:
        """Equal seeds give identical results."""
        first = minimize(_bowl, _make_space(), seed=42, budget=(3, 50))
        second = minimize(_bowl, _make_space(), seed=42, budget=(3, 50))
        assert first.parameters == second.parameters
        assert first.history == second.history

    def test_restart_streams_differ(self) -> None:
        """Each restart draws from its own stream."""
        assert restart_rng(1, 0).random() != restart_rng(1, 1).random()

    def test_target_stops_early(self) -> None:
        """Reaching the target ends the restarts."""
        fit = minimize(lambda p: 0.0, _make_space(), seed=0, budget=(10, 10), target=0.0)
        assert fit.restarts_used == 1
        assert fit.converged

    def test_polish(self) -> None:
        """Powell polishing never makes a restart worse."""
        plain = minimize(_bowl, _make_space(), seed=7, budget=(2, 5))
        polished = minimize(_bowl, _make_space(), seed=7, budget=(2, 5), polish=True)
        assert polished.objective <= plain.objective

    def test_non_finite(self) -> None:
        """NaN objectives abort the search."""
        with pytest.raises(NonFiniteObjective):
            minimize(lambda p: math.nan, _make_space(), seed=0, budget=(1, 5))

    def test_bad_budget(self) -> None:
        """Budgets must be positive."""
        with pytest.raises(OutOfRange):
            MultiStartMinimizer(0, 10)

    def test_logs_restarts(self) -> None:
        """Each restart is logged at debug level."""
        log = MagicMock(spec=logging.Logger)
        MultiStartMinimizer(3, 5, logger=log).minimize(_bowl, _make_space(), seed=0)
        assert log.debug.call_count == 3

    def test_result_dict(self) -> None:
        """to_dict keeps the seed and budget used."""
        fit = minimize(_bowl, _make_space(), seed=9, budget=(2, 5))
        data = fit.to_dict()
        assert data["seed"] == 9
        assert data["restarts_used"] == 2
        assert set(data["parameters"]) == {"x", "y"}
