"""
Quantum model of the three-color Ellsberg urn in C^3.

The state lives on the basis (red, yellow, black) with red probability
fixed at 1/3. Ambiguity attitude enters through a rotation inside the
ambiguous block span{yellow, black}: either the state is moved by a
context unitary per bet pair, or the acts' ambiguous-event projectors
are rotated per act.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from .exceptions import (
    ConstraintViolated,
    DimensionMismatch,
    NotFound,
    OutOfRange,
    UnknownAct,
)
from .hilbert import (
    PVM,
    HermitianOperator,
    StateVector,
    UnitaryOperator,
    expectation,
    interleave,
)
from .optimizer import (
    DEFAULT_ITERATIONS,
    DEFAULT_RESTARTS,
    FitResult,
    MultiStartMinimizer,
    Parameter,
    ParamSpace,
    angle,
)
from .seut import PreferencePattern
from .urn import (
    ELLSBERG_COLORS,
    LINEAR,
    Act,
    UrnExperiment,
    UtilityFunction,
    ellsberg_urn,
)

logger = logging.getLogger(__name__)

RED_PROBABILITY = 1.0 / 3.0
RED_TOL = 1e-10
CONTEXT_TOL = 1e-8
AMBIGUITY_FREE_VARIANCE = 1e-18
MIN_SAMPLES = 1000

# strict preferences must hold by this share of u(stake)
PATTERN_MARGIN = 0.05
SEARCH_MARGIN_SLACK = 1.02

MECHANISMS = ("contextual", "rotated", "canonical")

# context keys for the contextual mechanism
BET_PAIRS = {"f1": "f1,f2", "f2": "f1,f2", "f3": "f3,f4", "f4": "f3,f4"}

_BLOCK = (1, 2)


@dataclass(frozen=True, eq=False)
class EllsbergState:
    """
    Unit vector of C^3 over (red, yellow, black) with |v_red|^2 = 1/3.
    """
    vector: StateVector

    def __post_init__(self):
        if self.vector.dimension != 3:
            raise DimensionMismatch(
                f"Ellsberg state needs dimension 3, got {self.vector.dimension}"
            )
        red = self.vector.weights()[0]
        if abs(red - RED_PROBABILITY) > RED_TOL:
            raise ConstraintViolated(
                f"red probability {red!r} differs from 1/3 by more than {RED_TOL}"
            )

    @property
    def amplitudes(self) -> np.ndarray:
        return self.vector.amplitudes

    @property
    def y_weight(self) -> float:
        return float(self.vector.weights()[1])

    @property
    def b_weight(self) -> float:
        return float(self.vector.weights()[2])

    def to_dict(self) -> dict:
        return {
            "basis": list(ELLSBERG_COLORS),
            "amplitudes": interleave(self.amplitudes),
            "weights": [float(w) for w in self.vector.weights()],
        }


def build_ellsberg_state(
    y_weight: float, phase_y: float = 0.0, phase_b: float = 0.0,
) -> EllsbergState:
    """Ellsberg state (sqrt(1/3), sqrt(y) e^{i phase_y}, sqrt(2/3 - y) e^{i phase_b}).

    Args:
        y_weight: yellow probability in [0, 2/3]
        phase_y: yellow phase in radians
        phase_b: black phase in radians

    Returns:
        EllsbergState with real positive red amplitude

    Raises:
        OutOfRange: if y_weight is outside [0, 2/3]
    """
    if not 0.0 <= y_weight <= 2.0 / 3.0 + 1e-15:
        raise OutOfRange(f"y_weight {y_weight!r} outside [0, 2/3]")
    b_weight = max(2.0 / 3.0 - y_weight, 0.0)
    amplitudes = np.array([
        math.sqrt(RED_PROBABILITY),
        math.sqrt(y_weight) * np.exp(1j * phase_y),
        math.sqrt(b_weight) * np.exp(1j * phase_b),
    ])
    return EllsbergState(StateVector(amplitudes / np.linalg.norm(amplitudes)))


def color_context() -> PVM:
    """The canonical color measurement {P_red, P_yellow, P_black}."""
    return PVM.canonical(ELLSBERG_COLORS)


def block_rotation(theta: float, phi: float) -> np.ndarray:
    """2x2 unitary [[cos t, -e^{-i phi} sin t], [e^{i phi} sin t, cos t]]."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([
        [c, -np.exp(-1j * phi) * s],
        [np.exp(1j * phi) * s, c],
    ])


def embed_block(
    block: np.ndarray, indices: Sequence[int], n: int,
) -> UnitaryOperator:
    """Identity on C^n except for ``block`` acting on the given coordinates."""
    mat = np.eye(n, dtype=complex)
    idx = np.asarray(indices)
    mat[np.ix_(idx, idx)] = block
    return UnitaryOperator(mat)


@dataclass(frozen=True)
class AmbiguityAttitudeModel:
    """
    Mechanism tag plus one (theta, phi) rotation per key.

    For ``contextual`` the keys are bet pairs ("f1,f2", "f3,f4") and the
    rotation moves the state before the acts of that pair are evaluated.
    For ``rotated`` the keys are act names and the rotation turns that
    act's ambiguous-event projectors. ``canonical`` carries no rotations.
    Missing keys mean the identity.
    """
    mechanism: str = "rotated"
    rotations: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise OutOfRange(
                f"unknown mechanism '{self.mechanism}', expected one of {MECHANISMS}"
            )
        if self.mechanism == "canonical" and self.rotations:
            raise OutOfRange("canonical mechanism takes no rotations")

    def rotation_for(self, key: str) -> Tuple[float, float]:
        return self.rotations.get(key, (0.0, 0.0))

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "dimension": 3,
            "rotations": {
                key: {"theta": theta, "phi": phi}
                for key, (theta, phi) in sorted(self.rotations.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AmbiguityAttitudeModel":
        rotations = {
            key: (float(r["theta"]), float(r["phi"]))
            for key, r in data.get("rotations", {}).items()
        }
        return cls(mechanism=data.get("mechanism", "rotated"), rotations=rotations)


@dataclass(frozen=True, eq=False)
class ActOperator:
    """
    Hermitian operator of an act together with how it was built.

    ``context`` is the unitary applied to the state before evaluation
    (contextual mechanism only).
    """
    act_name: str
    operator: HermitianOperator
    recipe: dict
    context: Optional[UnitaryOperator] = None

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @property
    def dimension(self) -> int:
        return self.operator.dimension


def payoff_events(act: Act, colors: Sequence[str]) -> Dict[float, List[str]]:
    events: Dict[float, List[str]] = {}
    for color in colors:
        events.setdefault(act.payoffs[color], []).append(color)
    return events


def act_operator(
    act: Act,
    u: UtilityFunction = LINEAR,
    model: Optional[AmbiguityAttitudeModel] = None,
    experiment: Optional[UrnExperiment] = None,
) -> ActOperator:
    """F = sum over payoff events of u(payoff) P_event.

    The red projector is always canonical. Under the rotated mechanism the
    projectors inside span{yellow, black} are turned by the act's block
    rotation, which leaves F unchanged whenever the act pays the same on
    yellow and black.

    Raises:
        UnknownAct: if the act is not one of the experiment's acts
    """
    model = model or AmbiguityAttitudeModel("canonical")
    experiment = experiment or ellsberg_urn()
    if act.name not in experiment.acts:
        raise UnknownAct(f"act '{act.name}' is not part of '{experiment.name}'")
    act.require_colors(ELLSBERG_COLORS)

    diagonal = np.diag([u(act.payoffs[c]) for c in ELLSBERG_COLORS]).astype(complex)
    recipe = {
        "mechanism": model.mechanism,
        "events": {
            f"{amount:g}": colors
            for amount, colors in payoff_events(act, ELLSBERG_COLORS).items()
        },
    }
    context = None
    matrix = diagonal
    if model.mechanism == "rotated":
        theta, phi = model.rotation_for(act.name)
        rotation = embed_block(block_rotation(theta, phi), _BLOCK, 3).matrix
        matrix = rotation @ diagonal @ rotation.conj().T
        recipe.update(theta=theta, phi=phi)
    elif model.mechanism == "contextual":
        key = BET_PAIRS.get(act.name, act.name)
        theta, phi = model.rotation_for(key)
        context = embed_block(block_rotation(theta, phi), _BLOCK, 3)
        recipe.update(context=key, theta=theta, phi=phi)
    return ActOperator(act.name, HermitianOperator(matrix), recipe, context)


def quantum_expected_utility(state, f: ActOperator) -> float:
    """<v|F|v>, after the act's context unitary when it has one.

    Args:
        state: a StateVector, or a model state wrapping one in ``vector``
        f: act operator

    Raises:
        DimensionMismatch: if the dimensions differ
    """
    vector = getattr(state, "vector", state)
    if vector.dimension != f.dimension:
        raise DimensionMismatch(
            f"state dimension {vector.dimension} vs operator {f.dimension}"
        )
    if f.context is not None:
        vector = f.context.apply(vector)
    return expectation(vector, f.operator)


def apply_context(state: EllsbergState, context: UnitaryOperator) -> EllsbergState:
    """Move the state by a context unitary, keeping red probability 1/3.

    Raises:
        ConstraintViolated: if the moved state's red probability deviates
            from 1/3 by more than CONTEXT_TOL
    """
    moved = context.apply(state.vector)
    weights = moved.weights()
    drift = abs(weights[0] - RED_PROBABILITY)
    if drift > CONTEXT_TOL:
        raise ConstraintViolated(
            f"context moves red probability to {weights[0]!r} "
            f"(drift {drift:.3e} > {CONTEXT_TOL})"
        )
    amplitudes = moved.amplitudes.copy()
    red = amplitudes[0]
    amplitudes = amplitudes * (abs(red) / red)
    amplitudes[0] = math.sqrt(RED_PROBABILITY)
    rest = np.linalg.norm(amplitudes[1:])
    amplitudes[1:] *= math.sqrt(1.0 - RED_PROBABILITY) / rest
    return EllsbergState(StateVector(amplitudes))


def eu_table(
    state: EllsbergState,
    model: AmbiguityAttitudeModel,
    u: UtilityFunction = LINEAR,
    experiment: Optional[UrnExperiment] = None,
) -> Dict[str, float]:
    """Quantum EU of every act of the experiment."""
    experiment = experiment or ellsberg_urn()
    return {
        name: quantum_expected_utility(
            state, act_operator(act, u, model, experiment)
        )
        for name, act in experiment.acts.items()
    }


@dataclass
class PatternModel:
    """
    A model and state reproducing a preference pattern.
    """
    model: AmbiguityAttitudeModel
    state: EllsbergState
    eu: Dict[str, float]
    margin: float
    fit: FitResult

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "state": self.state.to_dict(),
            "expected_utility": dict(self.eu),
            "margin": self.margin,
            "search": self.fit.to_dict(),
        }


def pattern_margin(pattern: PreferencePattern, eu: Dict[str, float]) -> float:
    """Smallest EU(better) - EU(worse) over the pattern."""
    return min(eu[p.better] - eu[p.worse] for p in pattern.preferences)


def _model_space(mechanism: str, keys: Sequence[str]) -> ParamSpace:
    state = ParamSpace((
        Parameter("y_weight", 0.0, 2.0 / 3.0),
        angle("phase_y"),
        angle("phase_b"),
    ))
    if mechanism == "canonical":
        return state
    rotations = []
    for key in keys:
        rotations.extend([angle(f"theta[{key}]"), angle(f"phi[{key}]")])
    return state + ParamSpace(tuple(rotations))


def _decode(
    params: Dict[str, float], mechanism: str, keys: Sequence[str],
) -> Tuple[AmbiguityAttitudeModel, EllsbergState]:
    state = build_ellsberg_state(
        params["y_weight"], params["phase_y"], params["phase_b"]
    )
    rotations = {
        key: (params[f"theta[{key}]"], params[f"phi[{key}]"]) for key in keys
    } if mechanism != "canonical" else {}
    return AmbiguityAttitudeModel(mechanism, rotations), state


class PatternSearch:
    """
    Multi-start search for a state and attitude model that reproduce a
    strict preference pattern over the Ellsberg acts.
    """

    def __init__(
        self,
        experiment: Optional[UrnExperiment] = None,
        u: UtilityFunction = LINEAR,
        budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
        logger: Optional[logging.Logger] = None,
    ):
        self.experiment = experiment or ellsberg_urn()
        self.u = u
        self.budget = budget
        self.logger = logger or logging.getLogger(__name__)
        stake = max(max(a.payoffs.values()) for a in self.experiment.acts.values())
        self.required_margin = PATTERN_MARGIN * u(stake)

    def _keys(self, mechanism: str, pattern: PreferencePattern) -> List[str]:
        acts = sorted({a for p in pattern.preferences for a in (p.better, p.worse)})
        if mechanism == "contextual":
            return sorted({BET_PAIRS.get(a, a) for a in acts})
        if mechanism == "rotated":
            return acts
        return []

    def search(
        self, pattern: PreferencePattern, mechanism: str, seed: int,
    ) -> PatternModel:
        """Find parameters with every strict preference held by the margin.

        Raises:
            NotFound: if no restart reaches the margin
        """
        pattern.validate_for(self.experiment)
        if mechanism not in MECHANISMS:
            raise OutOfRange(f"unknown mechanism '{mechanism}'")
        keys = self._keys(mechanism, pattern)
        space = _model_space(mechanism, keys)
        goal = self.required_margin * SEARCH_MARGIN_SLACK

        def objective(params: Dict[str, float]) -> float:
            model, state = _decode(params, mechanism, keys)
            eu = eu_table(state, model, self.u, self.experiment)
            return sum(
                max(0.0, goal - (eu[p.better] - eu[p.worse])) ** 2
                for p in pattern.preferences
            )

        restarts, iterations = self.budget
        minimizer = MultiStartMinimizer(
            restarts, iterations, target=0.0, logger=self.logger
        )
        fit = minimizer.minimize(objective, space, seed)
        model, state = _decode(fit.parameters, mechanism, keys)
        eu = eu_table(state, model, self.u, self.experiment)
        margin = pattern_margin(pattern, eu)
        if margin < self.required_margin:
            self.logger.info(
                f"No {mechanism} model for {pattern}: best margin {margin:.6g} "
                f"after {fit.restarts_used} restarts"
            )
            raise NotFound(
                f"no {mechanism} model reproduces {pattern} with margin "
                f"{self.required_margin:g}; best {margin:.6g} after "
                f"{fit.restarts_used} restarts x {iterations} iterations"
            )
        self.logger.info(
            f"Found {mechanism} model for {pattern} with margin {margin:.6g}"
        )
        return PatternModel(model, state, eu, margin, fit)


def find_pattern_model(
    pattern: PreferencePattern,
    mechanism: str = "rotated",
    seed: int = 0,
    u: UtilityFunction = LINEAR,
    budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
) -> PatternModel:
    """Functional front end to :class:`PatternSearch` on the Ellsberg urn."""
    return PatternSearch(u=u, budget=budget).search(pattern, mechanism, seed)


def random_ellsberg_state(rng: np.random.Generator) -> EllsbergState:
    return build_ellsberg_state(
        rng.uniform(0.0, 2.0 / 3.0),
        rng.uniform(0.0, 2 * math.pi),
        rng.uniform(0.0, 2 * math.pi),
    )


def ambiguity_free_check(
    f: ActOperator, samples: int = MIN_SAMPLES, seed: int = 0,
) -> bool:
    """Whether EU of the act is constant over sampled Ellsberg states.

    Args:
        f: act operator
        samples: number of random valid states, at least MIN_SAMPLES
        seed: sampling seed

    Returns:
        bool: True iff the sample variance of the EU is below 1e-18
    """
    if samples < MIN_SAMPLES:
        raise OutOfRange(f"need at least {MIN_SAMPLES} samples, got {samples}")
    rng = np.random.default_rng(seed)
    values = np.array([
        quantum_expected_utility(random_ellsberg_state(rng), f)
        for _ in range(samples)
    ])
    variance = float(np.var(values))
    logger.debug(f"EU variance of {f.act_name} over {samples} states: {variance:.3e}")
    return variance < AMBIGUITY_FREE_VARIANCE
