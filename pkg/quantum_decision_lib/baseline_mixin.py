"""
Mixin providing the classical ambiguity baselines command.
"""
from typing import Dict, List

from .baselines import (
    Capacity,
    Penalty,
    PriorSet,
    SecondOrderPrior,
    Transformation,
    choquet_expected_utility,
    maxmin_expected_utility,
    second_order_expected_utility,
    variational_expected_utility,
)
from .exceptions import OutOfRange, QduError
from .experiment_spec import ExperimentSpec
from .report import Report
from .urn import ProbabilityVector, classical_expected_utility

BASELINE_MODELS = ("seut", "maxmin", "choquet", "variational", "second-order")


def prior_set_for(spec: ExperimentSpec) -> PriorSet:
    """Prior box from the spec's model section, else every admissible prior."""
    bounds = spec.model.get("priors")
    urn = spec.experiment.urn
    if not bounds:
        return PriorSet.full(urn)
    return PriorSet(urn, {c: (float(lo), float(hi)) for c, (lo, hi) in bounds.items()})


def capacity_for(spec: ExperimentSpec, priors: PriorSet) -> Capacity:
    data = spec.model.get("capacity")
    if not data:
        return Capacity.lower_envelope(priors)
    return Capacity.from_dict(spec.experiment.colors, data)


def second_order_for(spec: ExperimentSpec, priors: PriorSet):
    data = spec.model.get("second_order")
    if not data:
        return SecondOrderPrior.uniform(priors.vertices()), Transformation()
    mu = SecondOrderPrior(
        tuple(ProbabilityVector(dict(p)) for p in data["priors"]),
        tuple(data["weights"]),
    )
    return mu, Transformation.from_dict(data.get("transform", {}))


def implied_pattern(values: Dict[str, float], tol: float = 1e-12) -> List[str]:
    """Ranking of consecutive act pairs, e.g. ``f1>f2`` or ``f3~f4``."""
    names = sorted(values)
    ranked = []
    for a, b in zip(names[0::2], names[1::2]):
        if abs(values[a] - values[b]) <= tol:
            ranked.append(f"{a}~{b}")
        elif values[a] > values[b]:
            ranked.append(f"{a}>{b}")
        else:
            ranked.append(f"{b}>{a}")
    return ranked


class BaselineMixin:
    """Classical ambiguity model operations for ExperimentRunner."""

    def baseline_results(self, spec: ExperimentSpec, model: str) -> dict:
        """Value of every act under one classical model.

        Args:
            spec: Parsed experiment, its ``model`` section supplying
                priors, capacity, penalty and second-order prior
            model: One of BASELINE_MODELS

        Returns:
            dict: ``values`` per act, ``pattern`` and model ``detail``
        """
        if model not in BASELINE_MODELS:
            raise OutOfRange(f"unknown baseline model '{model}'")
        exp = spec.experiment
        u = exp.utility
        priors = prior_set_for(spec)
        detail: dict = {}

        if model == "seut":
            prior = exp.urn.uniform_prior()
            values = {
                n: classical_expected_utility(a, prior, u) for n, a in exp.acts.items()
            }
            detail["prior"] = dict(prior.weights)
        elif model == "maxmin":
            values = {
                n: maxmin_expected_utility(a, priors, u) for n, a in exp.acts.items()
            }
            detail["prior_bounds"] = {c: list(b) for c, b in priors.bounds.items()}
        elif model == "choquet":
            cap = capacity_for(spec, priors)
            values = {
                n: choquet_expected_utility(a, cap, u) for n, a in exp.acts.items()
            }
            detail.update(capacity=cap.to_dict(), convex=cap.is_convex())
        elif model == "variational":
            penalty = Penalty.from_dict(spec.model.get("penalty", {}))
            values = {
                n: variational_expected_utility(a, priors, penalty, u)
                for n, a in exp.acts.items()
            }
            detail["penalty"] = penalty.form
        else:
            mu, phi = second_order_for(spec, priors)
            values = {
                n: second_order_expected_utility(a, mu, phi, u)
                for n, a in exp.acts.items()
            }
            detail.update(
                transform=phi.to_dict(),
                priors=[dict(p.weights) for p in mu.priors],
                weights=list(mu.weights),
            )
        return {
            "model": model,
            "utility": u.label,
            "values": values,
            "pattern": implied_pattern(values),
            "detail": detail,
        }

    def baselines(self, spec: ExperimentSpec, model: str) -> Report:
        """Run the ``baselines`` command.

        Args:
            spec: Parsed experiment
            model: One of BASELINE_MODELS

        Returns:
            Report: act values and the pattern they imply
        """
        try:
            results = self.baseline_results(spec, model)
        except QduError as e:
            self.logger.error(f"baselines --model {model} failed on {spec.source}: {e}")
            raise
        self.logger.info(f"{model} baseline pattern: {', '.join(results['pattern'])}")
        return self._report("baselines", spec, results)
