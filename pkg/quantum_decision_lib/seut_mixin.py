"""
Mixin providing the SEUT feasibility command.
"""
from typing import Optional

from .exceptions import QduError
from .experiment_spec import ExperimentSpec
from .report import Report
from .seut import (
    DEFAULT_GRID,
    PreferencePattern,
    find_common_event,
    seut_pattern_feasibility,
    sure_thing_check,
)


class SeutMixin:
    """SEUT feasibility operations for ExperimentRunner."""

    def seut_results(
        self,
        spec: ExperimentSpec,
        pattern: PreferencePattern,
        grid: int = DEFAULT_GRID,
    ) -> dict:
        """Verdict for one pattern plus its Sure-Thing reading.

        Args:
            spec: Parsed experiment
            pattern: Strict preferences to test
            grid: Grid points per free prior coordinate

        Returns:
            dict: ``verdict`` and ``sure_thing`` (None when the pattern
            does not rank two related bet pairs)
        """
        verdict = seut_pattern_feasibility(
            spec.experiment, pattern, grid=grid, logger=self.logger,
        )
        return {
            "verdict": verdict.to_dict(),
            "sure_thing": self._sure_thing(spec, pattern),
        }

    def _sure_thing(
        self, spec: ExperimentSpec, pattern: PreferencePattern,
    ) -> Optional[dict]:
        prefs = pattern.preferences
        if len(prefs) != 2:
            return None
        pair_a = tuple(sorted((prefs[0].better, prefs[0].worse)))
        pair_b = tuple(sorted((prefs[1].better, prefs[1].worse)))
        event = find_common_event(spec.experiment, pair_a, pair_b)
        if event is None:
            self.logger.debug(f"Pairs {pair_a} and {pair_b} not Sure-Thing related")
            return None
        return sure_thing_check(
            spec.experiment, pair_a, pair_b, event, pattern
        ).to_dict()

    def check_seut(
        self,
        spec: ExperimentSpec,
        pattern: str,
        grid: int = DEFAULT_GRID,
    ) -> Report:
        """Run the ``check-seut`` command.

        Args:
            spec: Parsed experiment
            pattern: Preferences such as ``"f1>f2,f4>f3"``
            grid: Grid points per free prior coordinate

        Returns:
            Report: verdict, certificate and Sure-Thing reading
        """
        try:
            parsed = PreferencePattern.parse(pattern)
            results = self.seut_results(spec, parsed, grid)
        except QduError as e:
            self.logger.error(f"check-seut failed on {spec.source}: {e}")
            raise

        verdict = results["verdict"]
        self.logger.info(f"Pattern {parsed} is {verdict['status']} under SEUT")
        residuals = {}
        if verdict["certificate"] is not None:
            residuals["certificate_max_slack"] = verdict["certificate"]["max_slack"]
        return self._report("check-seut", spec, results, residuals)
