"""
Deterministic multi-start compass search over box-bounded parameter spaces.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import scipy.optimize

from .exceptions import NonFiniteObjective, OutOfRange

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

DEFAULT_RESTARTS = 64
DEFAULT_ITERATIONS = 500
INITIAL_STEP = 0.25
STEP_TOL = 1e-10
TIE_TOL = 1e-15

Objective = Callable[[Dict[str, float]], float]


def periodic_wrap(value: float, lo: float = 0.0, hi: float = TWO_PI) -> float:
    """Wrap value into [lo, hi) modulo the period hi - lo."""
    period = hi - lo
    wrapped = lo + math.fmod(value - lo, period)
    if wrapped < lo:
        wrapped += period
    if wrapped >= hi:
        wrapped = lo
    return wrapped


def bound_clip(value: float, lo: float, hi: float) -> float:
    return min(max(value, lo), hi)


@dataclass(frozen=True)
class Parameter:
    """A named real parameter with box bounds."""
    name: str
    lo: float
    hi: float
    periodic: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise OutOfRange(f"parameter {self.name}: bounds must be finite")
        if self.lo > self.hi:
            raise OutOfRange(
                f"parameter {self.name}: lo {self.lo} exceeds hi {self.hi}"
            )

    def project(self, value: float) -> float:
        if self.periodic and self.hi > self.lo:
            return periodic_wrap(value, self.lo, self.hi)
        return bound_clip(value, self.lo, self.hi)


def angle(name: str) -> Parameter:
    return Parameter(name, 0.0, TWO_PI, periodic=True)


@dataclass(frozen=True)
class ParamSpace:
    """
    Ordered collection of parameters.
    """
    parameters: Tuple[Parameter, ...]

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise OutOfRange(f"duplicate parameter names: {names}")

    @property
    def names(self) -> List[str]:
        return [p.name for p in self.parameters]

    @property
    def size(self) -> int:
        return len(self.parameters)

    @property
    def widths(self) -> np.ndarray:
        return np.array([p.hi - p.lo for p in self.parameters])

    def project(self, x: Sequence[float]) -> np.ndarray:
        return np.array([p.project(v) for p, v in zip(self.parameters, x)])

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        lo = np.array([p.lo for p in self.parameters])
        return lo + rng.random(self.size) * self.widths

    def as_dict(self, x: Sequence[float]) -> Dict[str, float]:
        return {p.name: float(v) for p, v in zip(self.parameters, x)}

    def from_dict(self, values: Dict[str, float]) -> np.ndarray:
        return np.array([values[name] for name in self.names], dtype=float)

    def __add__(self, other: "ParamSpace") -> "ParamSpace":
        return ParamSpace(self.parameters + other.parameters)


@dataclass
class FitResult:
    """
    Outcome of a multi-start search.
    """
    parameters: Dict[str, float]
    objective: float
    restarts_used: int
    iterations_used: int
    seed: int
    converged: bool
    history: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "parameters": dict(self.parameters),
            "objective": self.objective,
            "restarts_used": self.restarts_used,
            "iterations_used": self.iterations_used,
            "seed": self.seed,
            "converged": self.converged,
        }


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    """Generator for one restart, a pure function of (seed, restart)."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, restart])


class MultiStartMinimizer:
    """
    Compass search with shrinking step, restarted from seed-derived points.

    Each sweep polls +e_i then -e_i for every coordinate in turn and keeps
    any improvement; a sweep without improvement halves the step. A restart
    ends when the relative step drops below STEP_TOL or the iteration
    budget is spent.
    """

    def __init__(
        self,
        restarts: int = DEFAULT_RESTARTS,
        iterations: int = DEFAULT_ITERATIONS,
        target: Optional[float] = None,
        polish: bool = False,
        logger: Optional[logging.Logger] = None,
    ):
        """Configure the search budget.

        Args:
            restarts: number of seed-derived starting points
            iterations: poll sweeps allowed per restart
            target: stop early once the best objective is at or below it
            polish: refine each restart with scipy's Powell method
            logger: Optional logger instance
        """
        if restarts <= 0 or iterations <= 0:
            raise OutOfRange(
                f"budget must be positive, got ({restarts}, {iterations})"
            )
        self.restarts = restarts
        self.iterations = iterations
        self.target = target
        self.polish = polish
        self.logger = logger or logging.getLogger(__name__)

    def minimize(
        self,
        objective: Objective,
        space: ParamSpace,
        seed: int,
    ) -> FitResult:
        """Run the restarts and reduce to the best point.

        Ties within TIE_TOL keep the lowest restart index.
        """
        best_x: Optional[np.ndarray] = None
        best_f = math.inf
        best_converged = False
        total_iterations = 0
        history: List[float] = []
        restarts_used = 0

        for k in range(self.restarts):
            x0 = space.project(space.sample(restart_rng(seed, k)))
            x, f, used, converged = self._compass(objective, space, x0)
            if self.polish:
                x, f = self._polish(objective, space, x, f)
            total_iterations += used
            restarts_used = k + 1
            history.append(f)
            self.logger.debug(
                f"Restart {k}: objective {f:.6e} after {used} iterations"
            )
            if f < best_f - TIE_TOL:
                best_x, best_f, best_converged = x, f, converged
            if self.target is not None and best_f <= self.target:
                self.logger.info(
                    f"Target {self.target:g} reached at restart {k}"
                )
                break

        return FitResult(
            parameters=space.as_dict(best_x),
            objective=float(best_f),
            restarts_used=restarts_used,
            iterations_used=total_iterations,
            seed=seed,
            converged=best_converged,
            history=history,
        )

    def _evaluate(
        self, objective: Objective, space: ParamSpace, x: np.ndarray,
    ) -> float:
        value = float(objective(space.as_dict(x)))
        if not math.isfinite(value):
            raise NonFiniteObjective(
                f"objective returned {value} at {space.as_dict(x)}"
            )
        return value

    def _compass(
        self, objective: Objective, space: ParamSpace, x0: np.ndarray,
    ) -> Tuple[np.ndarray, float, int, bool]:
        x = x0.copy()
        f = self._evaluate(objective, space, x)
        widths = np.where(space.widths > 0, space.widths, 0.0)
        step = INITIAL_STEP
        for iteration in range(1, self.iterations + 1):
            if self.target is not None and f <= self.target:
                return x, f, iteration - 1, True
            improved = False
            for i in range(space.size):
                if widths[i] == 0.0:
                    continue
                for sign in (1.0, -1.0):
                    trial = x.copy()
                    trial[i] += sign * step * widths[i]
                    trial = space.project(trial)
                    ft = self._evaluate(objective, space, trial)
                    if ft < f:
                        x, f, improved = trial, ft, True
                        break
            if not improved:
                step /= 2.0
                if step < STEP_TOL:
                    return x, f, iteration, True
        return x, f, self.iterations, False

    def _polish(
        self, objective: Objective, space: ParamSpace, x0: np.ndarray, f0: float,
    ) -> Tuple[np.ndarray, float]:
        if self.target is not None and f0 <= self.target:
            return x0, f0
        bounds = [(p.lo, p.hi) for p in space.parameters]
        result = scipy.optimize.minimize(
            lambda x: self._evaluate(objective, space, space.project(x)),
            x0,
            method="Powell",
            bounds=bounds,
            options={"xtol": 1e-12, "ftol": 1e-16, "maxfev": 20000},
        )
        x = space.project(result.x)
        f = self._evaluate(objective, space, x)
        if f < f0:
            return x, f
        return x0, f0


def minimize(
    objective: Objective,
    space: ParamSpace,
    seed: int,
    budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
    target: Optional[float] = None,
    polish: bool = False,
) -> FitResult:
    """Functional front end to :class:`MultiStartMinimizer`."""
    restarts, iterations = budget
    return MultiStartMinimizer(
        restarts, iterations, target=target, polish=polish,
    ).minimize(objective, space, seed)
