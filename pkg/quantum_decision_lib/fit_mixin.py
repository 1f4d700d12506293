"""
Mixin providing the quantum fitting commands: fit-state, fit-choice and
interference.
"""
from typing import Optional, Sequence, Tuple
import math

import numpy as np

from .choice import (
    ConstraintSet,
    JointDistribution,
    choice_weights,
    dominant_pattern,
    fit_marginals,
    min_l1_joint_fit,
    paradox_share,
    real_representability_search,
)
from .ellsberg import PatternSearch, build_ellsberg_state, color_context
from .exceptions import InvalidSpec, QduError
from .experiment_spec import ExperimentSpec
from .hilbert import born_probabilities, interference_terms, superpose
from .machina import MachinaPatternSearch
from .report import Report
from .seut import PreferencePattern
from .urn import ELLSBERG_COLORS, MACHINA_COLORS

DEFAULT_PATTERN = "f1>f2,f4>f3"

# all ambiguous weight on yellow, then all on black
DEFAULT_COMPONENTS = ((2.0 / 3.0, 0.0, 0.0), (0.0, 0.0, 0.0))
DEFAULT_COEFFICIENTS = (complex(1 / math.sqrt(2)), complex(1 / math.sqrt(2)))

Component = Tuple[float, float, float]


class FitMixin:
    """Quantum model fitting operations for ExperimentRunner."""

    def _pattern_for(
        self, spec: ExperimentSpec, pattern: Optional[str],
    ) -> PreferencePattern:
        if pattern:
            return PreferencePattern.parse(pattern)
        if spec.observed is not None:
            return dominant_pattern(spec.observed)
        return PreferencePattern.parse(DEFAULT_PATTERN)

    def pattern_results(
        self,
        spec: ExperimentSpec,
        mechanism: str,
        pattern: Optional[str] = None,
    ) -> dict:
        """Search a quantum model reproducing the pattern.

        Machina-colored urns use the C^4 search, others the C^3 one.
        """
        parsed = self._pattern_for(spec, pattern)
        exp = spec.experiment
        if tuple(exp.colors) == MACHINA_COLORS:
            found = MachinaPatternSearch(exp, exp.utility, logger=self.logger).search(
                parsed, self.config.seed, mechanism
            )
        else:
            found = PatternSearch(exp, exp.utility, logger=self.logger).search(
                parsed, mechanism, self.config.seed
            )
        results = found.to_dict()
        results["pattern"] = str(parsed)
        return results

    def fit_state(
        self,
        spec: ExperimentSpec,
        mechanism: str = "rotated",
        pattern: Optional[str] = None,
    ) -> Report:
        """Run the ``fit-state`` command.

        Args:
            spec: Parsed experiment
            mechanism: contextual, rotated or canonical
            pattern: Preferences to reproduce; defaults to the observed
                majority pattern, else f1>f2,f4>f3

        Returns:
            Report: model parameters, state and quantum EU table
        """
        try:
            results = self.pattern_results(spec, mechanism, pattern)
        except QduError as e:
            self.logger.error(f"fit-state --mechanism {mechanism} failed: {e}")
            raise
        residuals = {
            "margin": results["margin"],
            "objective": results["search"]["objective"],
        }
        return self._report("fit-state", spec, results, residuals)

    def choice_results(self, spec: ExperimentSpec, check_real: bool = False) -> dict:
        """Marginal fit to the observed counts and the three-cell joint bound."""
        data = spec.observed
        if data is None:
            raise InvalidSpec(f"{spec.source} has no observed choice counts")
        weights = choice_weights(data)
        fit = fit_marginals(
            (weights["f1"], weights["f4"]),
            seed=self.config.seed,
            tol=self.config.tol,
            logger=self.logger,
        )
        target = JointDistribution.from_data(data)
        results = {
            "observed": data.to_dict(),
            "marginals": weights,
            "paradox_share": paradox_share(data),
            "dominant_pattern": str(dominant_pattern(data)),
            "fit": fit.to_dict(),
            "joint_bound": min_l1_joint_fit(target).to_dict(),
        }
        if check_real:
            marginals = {"f1": weights["f1"], "f4": weights["f4"]}
            results["representability"] = [
                real_representability_search(
                    ConstraintSet(marginals, joint=joint, field=field),
                    seed=self.config.seed,
                    logger=self.logger,
                ).to_dict()
                for field in ("real", "complex")
                for joint in (None, target)
            ]
        return results

    def fit_choice(self, spec: ExperimentSpec, check_real: bool = False) -> Report:
        """Run the ``fit-choice`` command.

        Args:
            spec: Parsed experiment with observed counts
            check_real: Also run the real and complex representability
                searches, with and without the joint target

        Returns:
            Report: fitted state and pair, residual and joint bound
        """
        try:
            results = self.choice_results(spec, check_real)
        except QduError as e:
            self.logger.error(f"fit-choice failed on {spec.source}: {e}")
            raise
        residuals = {
            "marginal": results["fit"]["residual"],
            "joint_l1_bound": results["joint_bound"]["distance"],
        }
        return self._report("fit-choice", spec, results, residuals)

    def interference_results(
        self,
        spec: ExperimentSpec,
        components: Optional[Sequence[Component]] = None,
        coefficients: Optional[Tuple[complex, complex]] = None,
    ) -> dict:
        """Superpose two Ellsberg states and split the Born probabilities
        into component and interference parts.

        The superposed probability of color c is
        (|a|^2 p_c(w1) + |b|^2 p_c(w2) + I_c) / ||a w1 + b w2||^2.
        """
        if tuple(spec.experiment.colors) != ELLSBERG_COLORS:
            raise InvalidSpec("interference needs the three-color Ellsberg urn")
        section = spec.model
        if components is None:
            components = [tuple(c) for c in section.get("components", DEFAULT_COMPONENTS)]
        if coefficients is None:
            raw = section.get("coefficients")
            coefficients = (
                tuple(complex(re, im) for re, im in raw) if raw else DEFAULT_COEFFICIENTS
            )
        if len(components) != 2:
            raise InvalidSpec(f"need two component states, got {len(components)}")
        a, b = coefficients
        w1, w2 = (build_ellsberg_state(*c).vector for c in components)
        pvm = color_context()
        mixed = superpose(a, w1, b, w2)
        terms = interference_terms(a, w1, b, w2, pvm)
        p1, p2 = born_probabilities(w1, pvm), born_probabilities(w2, pvm)
        superposed = born_probabilities(mixed, pvm)
        raw_vec = a * w1.amplitudes + b * w2.amplitudes
        norm_sq = float(np.vdot(raw_vec, raw_vec).real)
        rebuilt = {
            c: (abs(a) ** 2 * p1[c] + abs(b) ** 2 * p2[c] + terms[c]) / norm_sq
            for c in pvm.labels
        }
        identity_gap = abs(sum(terms.values()) - (norm_sq - abs(a) ** 2 - abs(b) ** 2))
        return {
            "components": [list(c) for c in components],
            "coefficients": [[a.real, a.imag], [b.real, b.imag]],
            "state": [[z.real, z.imag] for z in mixed.amplitudes],
            "probabilities": superposed,
            "component_probabilities": [p1, p2],
            "interference": terms,
            "residuals": {
                "sum_identity": identity_gap,
                "reconstruction": max(abs(rebuilt[c] - superposed[c]) for c in pvm.labels),
            },
        }

    def interference(
        self,
        spec: ExperimentSpec,
        components: Optional[Sequence[Component]] = None,
        coefficients: Optional[Tuple[complex, complex]] = None,
    ) -> Report:
        """Run the ``interference`` command."""
        try:
            results = self.interference_results(spec, components, coefficients)
        except QduError as e:
            self.logger.error(f"interference failed on {spec.source}: {e}")
            raise
        residuals = results.pop("residuals")
        return self._report("interference", spec, results, residuals)
