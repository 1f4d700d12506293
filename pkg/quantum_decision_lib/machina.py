"""
Quantum model of the Machina reflection urn in C^4.

Basis (red, yellow, black, green). The two ambiguous blocks are
span{red, yellow} and span{black, green}, each with known total
probability 1/2; rotations act inside a block, never across.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from .ellsberg import (
    BET_PAIRS,
    MECHANISMS,
    SEARCH_MARGIN_SLACK,
    ActOperator,
    block_rotation,
    payoff_events,
    pattern_margin,
    quantum_expected_utility,
)
from .exceptions import ConstraintViolated, DimensionMismatch, NotFound, OutOfRange
from .hilbert import HermitianOperator, StateVector, UnitaryOperator, interleave
from .optimizer import (
    DEFAULT_ITERATIONS,
    DEFAULT_RESTARTS,
    FitResult,
    MultiStartMinimizer,
    Parameter,
    ParamSpace,
    angle,
)
from .seut import (
    DEFAULT_GRID,
    DEFAULT_UTILITY_FAMILY,
    FeasibilityVerdict,
    PreferencePattern,
    seut_pattern_feasibility,
)
from .urn import MACHINA_COLORS, LINEAR, Act, UrnExperiment, UtilityFunction, machina_urn

logger = logging.getLogger(__name__)

BLOCK_MASS = 0.5
SYMMETRY_TOL = 1e-10

# share of the payoff spread u(max) - u(0) a strict preference must clear
PATTERN_MARGIN = 0.01

BLOCKS = ((0, 1), (2, 3))

Rotation = Tuple[float, float, float, float]


@dataclass(frozen=True, eq=False)
class MachinaState:
    """
    Unit vector of C^4 with |v_red|^2 + |v_yellow|^2 = 1/2.
    """
    vector: StateVector

    def __post_init__(self):
        if self.vector.dimension != 4:
            raise DimensionMismatch(
                f"Machina state needs dimension 4, got {self.vector.dimension}"
            )
        weights = self.vector.weights()
        drift = abs(weights[0] + weights[1] - BLOCK_MASS)
        if drift > SYMMETRY_TOL:
            raise ConstraintViolated(
                f"red+yellow probability {weights[0] + weights[1]!r} is not 1/2"
            )

    @property
    def amplitudes(self) -> np.ndarray:
        return self.vector.amplitudes

    def to_dict(self) -> dict:
        return {
            "basis": list(MACHINA_COLORS),
            "amplitudes": interleave(self.amplitudes),
            "weights": [float(w) for w in self.vector.weights()],
        }


def build_machina_state(
    ry_split: float,
    bg_split: float,
    phases: Sequence[float] = (0.0, 0.0, 0.0),
) -> MachinaState:
    """State with |v_red|^2 = ry_split and |v_black|^2 = bg_split.

    Args:
        ry_split: red probability in [0, 1/2]; yellow gets the rest of 1/2
        bg_split: black probability in [0, 1/2]; green gets the rest of 1/2
        phases: yellow, black and green phases in radians

    Raises:
        OutOfRange: if a split leaves [0, 1/2] or phases are not three
    """
    for name, split in (("ry_split", ry_split), ("bg_split", bg_split)):
        if not 0.0 <= split <= BLOCK_MASS + 1e-15:
            raise OutOfRange(f"{name} {split!r} outside [0, 1/2]")
    if len(phases) != 3:
        raise OutOfRange(f"need 3 phases, got {len(phases)}")
    phase_y, phase_b, phase_g = phases
    amplitudes = np.array([
        math.sqrt(ry_split),
        math.sqrt(max(BLOCK_MASS - ry_split, 0.0)) * np.exp(1j * phase_y),
        math.sqrt(bg_split) * np.exp(1j * phase_b),
        math.sqrt(max(BLOCK_MASS - bg_split, 0.0)) * np.exp(1j * phase_g),
    ])
    return MachinaState(StateVector(amplitudes / np.linalg.norm(amplitudes)))


def block_unitary(rotation: Rotation) -> UnitaryOperator:
    """Block-diagonal unitary turning span{R, Y} and span{B, G} separately."""
    theta_ry, phi_ry, theta_bg, phi_bg = rotation
    mat = np.zeros((4, 4), dtype=complex)
    for (lo, hi), (theta, phi) in zip(
        BLOCKS, ((theta_ry, phi_ry), (theta_bg, phi_bg))
    ):
        mat[lo:hi + 1, lo:hi + 1] = block_rotation(theta, phi)
    return UnitaryOperator(mat)


@dataclass(frozen=True)
class MachinaModel:
    """
    Mechanism tag plus one rotation (theta_ry, phi_ry, theta_bg, phi_bg)
    per key; keys are act names for ``rotated`` and bet pairs for
    ``contextual``.
    """
    mechanism: str = "rotated"
    rotations: Dict[str, Rotation] = field(default_factory=dict)

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise OutOfRange(f"unknown mechanism '{self.mechanism}'")
        if self.mechanism == "canonical" and self.rotations:
            raise OutOfRange("canonical mechanism takes no rotations")
        for key, rotation in self.rotations.items():
            if len(rotation) != 4:
                raise OutOfRange(f"rotation for {key} needs 4 angles")

    def rotation_for(self, key: str) -> Rotation:
        return tuple(self.rotations.get(key, (0.0, 0.0, 0.0, 0.0)))

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "dimension": 4,
            "rotations": {
                key: dict(zip(("theta_ry", "phi_ry", "theta_bg", "phi_bg"), r))
                for key, r in sorted(self.rotations.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MachinaModel":
        rotations = {
            key: tuple(float(r[k]) for k in ("theta_ry", "phi_ry", "theta_bg", "phi_bg"))
            for key, r in data.get("rotations", {}).items()
        }
        return cls(mechanism=data.get("mechanism", "rotated"), rotations=rotations)


def machina_act_operator(
    act: Act, u: UtilityFunction = LINEAR, model: Optional[MachinaModel] = None,
) -> ActOperator:
    """F = sum of u(payoff) P_event with block-rotated event projectors."""
    model = model or MachinaModel("canonical")
    act.require_colors(MACHINA_COLORS)
    diagonal = np.diag([u(act.payoffs[c]) for c in MACHINA_COLORS]).astype(complex)
    recipe = {
        "mechanism": model.mechanism,
        "events": {
            f"{amount:g}": colors
            for amount, colors in payoff_events(act, MACHINA_COLORS).items()
        },
    }
    matrix, context = diagonal, None
    if model.mechanism == "rotated":
        rotation = model.rotation_for(act.name)
        r = block_unitary(rotation).matrix
        matrix = r @ diagonal @ r.conj().T
        recipe["rotation"] = list(rotation)
    elif model.mechanism == "contextual":
        key = BET_PAIRS.get(act.name, act.name)
        context = block_unitary(model.rotation_for(key))
        recipe.update(context=key, rotation=list(model.rotation_for(key)))
    return ActOperator(act.name, HermitianOperator(matrix), recipe, context)


def machina_act_operators(
    u: UtilityFunction = LINEAR,
    model: Optional[MachinaModel] = None,
    experiment: Optional[UrnExperiment] = None,
) -> Dict[str, ActOperator]:
    """Operators of every act of the Machina experiment."""
    experiment = experiment or machina_urn()
    return {
        name: machina_act_operator(act, u, model)
        for name, act in experiment.acts.items()
    }


def machina_eu_table(
    state: MachinaState,
    model: MachinaModel,
    u: UtilityFunction = LINEAR,
    experiment: Optional[UrnExperiment] = None,
) -> Dict[str, float]:
    operators = machina_act_operators(u, model, experiment)
    return {
        name: quantum_expected_utility(state, op) for name, op in operators.items()
    }


@dataclass
class MachinaPatternModel:
    model: MachinaModel
    state: MachinaState
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


class MachinaPatternSearch:
    """
    Multi-start search over informationally symmetric states and block
    rotations for a strict pattern over the Machina acts.
    """

    def __init__(
        self,
        experiment: Optional[UrnExperiment] = None,
        u: UtilityFunction = LINEAR,
        budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
        logger: Optional[logging.Logger] = None,
    ):
        self.experiment = experiment or machina_urn()
        self.u = u
        self.budget = budget
        self.logger = logger or logging.getLogger(__name__)
        payoffs = [x for a in self.experiment.acts.values() for x in a.payoffs.values()]
        self.required_margin = PATTERN_MARGIN * (u(max(payoffs)) - u(min(payoffs)))

    def _keys(self, mechanism: str, pattern: PreferencePattern):
        acts = sorted({a for p in pattern for a in (p.better, p.worse)})
        if mechanism == "contextual":
            return sorted({BET_PAIRS.get(a, a) for a in acts})
        if mechanism == "rotated":
            return acts
        return []

    def _space(self, keys) -> ParamSpace:
        space = ParamSpace((
            Parameter("ry_split", 0.0, BLOCK_MASS),
            Parameter("bg_split", 0.0, BLOCK_MASS),
            angle("phase_y"), angle("phase_b"), angle("phase_g"),
        ))
        for key in keys:
            space = space + ParamSpace(tuple(
                angle(f"{name}[{key}]")
                for name in ("theta_ry", "phi_ry", "theta_bg", "phi_bg")
            ))
        return space

    def _decode(self, params: Dict[str, float], mechanism: str, keys):
        state = build_machina_state(
            params["ry_split"], params["bg_split"],
            (params["phase_y"], params["phase_b"], params["phase_g"]),
        )
        rotations = {
            key: tuple(
                params[f"{name}[{key}]"]
                for name in ("theta_ry", "phi_ry", "theta_bg", "phi_bg")
            )
            for key in keys
        }
        return MachinaModel(mechanism, rotations), state

    def search(
        self, pattern: PreferencePattern, seed: int, mechanism: str = "rotated",
    ) -> MachinaPatternModel:
        """Find parameters holding the pattern with the required margin.

        Raises:
            NotFound: if no restart reaches the margin
        """
        pattern.validate_for(self.experiment)
        if mechanism not in MECHANISMS:
            raise OutOfRange(f"unknown mechanism '{mechanism}'")
        keys = self._keys(mechanism, pattern)
        goal = self.required_margin * SEARCH_MARGIN_SLACK

        def objective(params: Dict[str, float]) -> float:
            model, state = self._decode(params, mechanism, keys)
            eu = machina_eu_table(state, model, self.u, self.experiment)
            return sum(
                max(0.0, goal - (eu[p.better] - eu[p.worse])) ** 2 for p in pattern
            )

        restarts, iterations = self.budget
        fit = MultiStartMinimizer(
            restarts, iterations, target=0.0, logger=self.logger
        ).minimize(objective, self._space(keys), seed)
        model, state = self._decode(fit.parameters, mechanism, keys)
        eu = machina_eu_table(state, model, self.u, self.experiment)
        margin = pattern_margin(pattern, eu)
        if margin < self.required_margin:
            raise NotFound(
                f"no {mechanism} Machina model reproduces {pattern} with margin "
                f"{self.required_margin:g}; best {margin:.6g} after "
                f"{fit.restarts_used} restarts"
            )
        self.logger.info(f"Found Machina model for {pattern}, margin {margin:.6g}")
        return MachinaPatternModel(model, state, eu, margin, fit)


def machina_pattern_search(
    pattern: PreferencePattern,
    seed: int = 0,
    mechanism: str = "rotated",
    u: UtilityFunction = LINEAR,
    budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
) -> MachinaPatternModel:
    return MachinaPatternSearch(u=u, budget=budget).search(pattern, seed, mechanism)


def machina_seut_infeasibility(
    pattern: PreferencePattern,
    u_family: Sequence[UtilityFunction] = DEFAULT_UTILITY_FAMILY,
    grid: int = DEFAULT_GRID,
    experiment: Optional[UrnExperiment] = None,
) -> FeasibilityVerdict:
    """SEUT feasibility of the pattern on the Machina urn."""
    return seut_pattern_feasibility(
        experiment or machina_urn(), pattern, u_family, grid
    )
