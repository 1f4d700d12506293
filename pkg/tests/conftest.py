"""Shared fixtures for the test suite."""

from __future__ import annotations

import logging

import numpy as np
import pytest
from dotenv import load_dotenv

from quantum_decision_lib.config import RunConfig
from quantum_decision_lib.experiment_spec import ExperimentSpec
from quantum_decision_lib.runner import ExperimentRunner
from quantum_decision_lib.urn import UrnExperiment, ellsberg_urn, machina_urn

load_dotenv()


@pytest.fixture()
def rng() -> np.random.Generator:
    """Seeded generator so property tests are repeatable."""
    return np.random.default_rng(20240601)


@pytest.fixture()
def ellsberg() -> UrnExperiment:
    """The three-color Ellsberg experiment with a $12 stake."""
    return ellsberg_urn()


@pytest.fixture()
def machina() -> UrnExperiment:
    """The four-color Machina reflection experiment."""
    return machina_urn()


@pytest.fixture()
def ellsberg_spec() -> ExperimentSpec:
    """The bundled Ellsberg spec, with observed counts and model section."""
    return ExperimentSpec.builtin("ellsberg")


@pytest.fixture()
def machina_spec() -> ExperimentSpec:
    """The bundled Machina spec."""
    return ExperimentSpec.builtin("machina")


@pytest.fixture()
def runner(monkeypatch) -> ExperimentRunner:
    """Runner with a fixed seed and the QDU_* environment cleared."""
    for key in ("QDU_SEED", "QDU_TOL", "QDU_FORMAT"):
        monkeypatch.delenv(key, raising=False)
    return ExperimentRunner(RunConfig(seed=3), logging.getLogger("qdu-test"))
