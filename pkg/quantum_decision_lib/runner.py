"""
Experiment runner tying the SEUT, baseline and quantum commands to one
run configuration.
"""
from typing import Any, Dict, Optional
import logging

from . import __version__
from .baseline_mixin import BaselineMixin
from .choice import JointDistribution, fit_marginals, min_l1_joint_fit
from .config import RunConfig
from .exceptions import OutOfRange, QduError
from .experiment_spec import BUILTIN_SPECS, ExperimentSpec
from .fit_mixin import FitMixin
from .report import Report
from .seut import PreferencePattern
from .seut_mixin import SeutMixin

ELLSBERG_PARADOX = "f1>f2,f4>f3"
ELLSBERG_CONSISTENT = "f1>f2,f3>f4"
MACHINA_PARADOX = "f1>f2,f4>f3"

# round choice shares used by the Ellsberg demo fit
DEMO_TARGETS = (0.68, 0.69)


class ExperimentRunner(SeutMixin, BaselineMixin, FitMixin):
    """
    Runs experiment commands and packages their results as reports.
    """

    def __init__(
        self,
        config: Optional[RunConfig] = None,
        logger: Optional[logging.Logger] = None,
    ):
        """Initialize the runner.

        Args:
            config: Seed, tolerance and report settings
            logger: Optional logger instance
        """
        self.config = config or RunConfig()
        self.logger = logger or logging.getLogger(__name__)

    def _report(
        self,
        command: str,
        spec: Optional[ExperimentSpec],
        results: Dict[str, Any],
        residuals: Optional[Dict[str, Any]] = None,
    ) -> Report:
        return Report(
            command=command,
            input_digest=spec.digest if spec is not None else None,
            results=results,
            seed=self.config.seed,
            version=__version__,
            residuals=residuals or {},
        )

    def demo(self, target: str) -> Report:
        """Run the bundled walkthrough for ``ellsberg`` or ``machina``.

        Args:
            target: Name of a built-in experiment

        Returns:
            Report: SEUT verdicts, classical values and quantum fits

        Raises:
            NotFound: if a quantum pattern search comes back empty
            FitFailed: if the choice fit stalls
        """
        if target not in BUILTIN_SPECS:
            raise OutOfRange(f"no demo '{target}', expected one of {BUILTIN_SPECS}")
        spec = ExperimentSpec.builtin(target)
        self.logger.info(f"Running {target} demo with seed {self.config.seed}")
        try:
            if target == "ellsberg":
                results, residuals = self._ellsberg_demo(spec)
            else:
                results, residuals = self._machina_demo(spec)
        except QduError as e:
            self.logger.error(f"{target} demo failed: {e}")
            raise
        return self._report(f"demo {target}", spec, results, residuals)

    def _ellsberg_demo(self, spec: ExperimentSpec):
        paradox = PreferencePattern.parse(ELLSBERG_PARADOX)
        consistent = PreferencePattern.parse(ELLSBERG_CONSISTENT)
        quantum = {
            m: self.pattern_results(spec, m, ELLSBERG_PARADOX)
            for m in ("contextual", "rotated")
        }
        fit = fit_marginals(
            DEMO_TARGETS, seed=self.config.seed, tol=self.config.tol, logger=self.logger,
        )
        results = {
            "seut": {
                "paradox": self.seut_results(spec, paradox),
                "consistent": self.seut_results(spec, consistent)["verdict"],
            },
            "baselines": {
                m: self.baseline_results(spec, m)
                for m in ("maxmin", "choquet")
            },
            "quantum": quantum,
            "choice_fit": fit.to_dict(),
            "joint_bound": min_l1_joint_fit(
                JointDistribution.from_data(spec.observed)
            ).to_dict(),
        }
        residuals = {
            "choice_fit": fit.residual,
            **{
                f"{m}_margin": q["margin"]
                for m, q in quantum.items()
            },
        }
        return results, residuals

    def _machina_demo(self, spec: ExperimentSpec):
        paradox = PreferencePattern.parse(MACHINA_PARADOX)
        quantum = self.pattern_results(spec, "rotated", MACHINA_PARADOX)
        results = {
            "seut": self.seut_results(spec, paradox),
            "baselines": {
                m: self.baseline_results(spec, m)
                for m in ("seut", "maxmin", "choquet")
            },
            "quantum": quantum,
        }
        residuals = {"rotated_margin": quantum["margin"]}
        return results, residuals
