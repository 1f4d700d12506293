"""
Two-outcome choice observables O12 (f1 vs f2) and O34 (f3 vs f4) on C^3.

Outcome convention: +1 means f1 for O12 and f3 for O34.
"""
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import scipy.linalg
import scipy.optimize

from .exceptions import (
    BadBasis,
    EmptyData,
    FitFailed,
    InvalidOperator,
    InvalidPattern,
    NotCommuting,
    OutOfRange,
)
from .hilbert import (
    IDENTITY_TOL,
    HermitianOperator,
    StateVector,
    UnitaryOperator,
    common_eigenbasis,
    commutator_norm,
    hermitian_from_params,
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

logger = logging.getLogger(__name__)

Cell = Tuple[str, str]
Label = Tuple[int, int]

CELLS: Tuple[Cell, ...] = (("f1", "f3"), ("f1", "f4"), ("f2", "f3"), ("f2", "f4"))
LABELS: Tuple[Label, ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))

DISTRIBUTION_TOL = 1e-10
COMMUTING_TOL = 1e-10
FIT_TOL = 1e-6
CELL_FLOOR = 1e-12
FIT_TARGET = 1e-16
FIELDS = ("real", "complex")


def label_of(cell: Cell) -> Label:
    return LABELS[CELLS.index(tuple(cell))]


def cell_key(cell: Cell) -> str:
    return ",".join(cell)


@dataclass(frozen=True)
class ChoiceData:
    """
    Joint choice counts, one per cell in CELLS order.
    """
    counts: Tuple[int, int, int, int]

    def __post_init__(self):
        counts = tuple(int(n) for n in self.counts)
        if len(counts) != len(CELLS):
            raise OutOfRange(f"need {len(CELLS)} cell counts, got {len(counts)}")
        if any(n < 0 for n in counts):
            raise OutOfRange(f"negative count in {counts}")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_dict(cls, data: Dict[str, int]) -> "ChoiceData":
        """Counts keyed as ``"f1,f3"``; missing cells count zero."""
        unknown = set(data) - {cell_key(c) for c in CELLS}
        if unknown:
            raise OutOfRange(f"unknown choice cells {sorted(unknown)}")
        return cls(tuple(int(data.get(cell_key(c), 0)) for c in CELLS))

    def to_dict(self) -> Dict[str, int]:
        return {cell_key(c): n for c, n in zip(CELLS, self.counts)}

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, cell: Cell) -> int:
        return self.counts[CELLS.index(tuple(cell))]


def choice_weights(data: ChoiceData) -> Dict[str, float]:
    """Marginal choice frequencies of f1, f2, f3, f4.

    Raises:
        EmptyData: if no participant is counted
    """
    if data.total <= 0:
        raise EmptyData("choice data has no participants")
    n = data.total
    f1 = (data[("f1", "f3")] + data[("f1", "f4")]) / n
    f3 = (data[("f1", "f3")] + data[("f2", "f3")]) / n
    return {"f1": f1, "f2": 1.0 - f1, "f3": f3, "f4": 1.0 - f3}


def paradox_share(data: ChoiceData) -> float:
    """Share of participants choosing (f1, f4) or (f2, f3)."""
    if data.total <= 0:
        raise EmptyData("choice data has no participants")
    return (data[("f1", "f4")] + data[("f2", "f3")]) / data.total


def dominant_pattern(data: ChoiceData) -> PreferencePattern:
    """Majority preference in each bet pair.

    Raises:
        InvalidPattern: if a bet pair is split evenly
    """
    weights = choice_weights(data)
    pairs = []
    for a, b in (("f1", "f2"), ("f3", "f4")):
        if weights[a] == weights[b]:
            raise InvalidPattern(f"no majority between {a} and {b}")
        pairs.append((a, b) if weights[a] > weights[b] else (b, a))
    return PreferencePattern.of(*pairs)


@dataclass(frozen=True)
class JointDistribution:
    """
    Probabilities over the four joint choices, in CELLS order.
    """
    probabilities: Tuple[float, float, float, float]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        if len(probs) != len(CELLS):
            raise OutOfRange(f"need {len(CELLS)} cell probabilities")
        if any(p < -DISTRIBUTION_TOL for p in probs):
            raise OutOfRange(f"negative probability in {probs}")
        if abs(sum(probs) - 1.0) > DISTRIBUTION_TOL:
            raise OutOfRange(f"joint probabilities sum to {sum(probs)!r}")
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def from_data(cls, data: ChoiceData) -> "JointDistribution":
        if data.total <= 0:
            raise EmptyData("choice data has no participants")
        return cls(tuple(n / data.total for n in data.counts))

    def __getitem__(self, cell: Cell) -> float:
        return self.probabilities[CELLS.index(tuple(cell))]

    def marginals(self) -> Dict[str, float]:
        f1 = self[("f1", "f3")] + self[("f1", "f4")]
        f3 = self[("f1", "f3")] + self[("f2", "f3")]
        return {"f1": f1, "f2": 1.0 - f1, "f3": f3, "f4": 1.0 - f3}

    def support(self, floor: float = CELL_FLOOR) -> List[Cell]:
        return [c for c, p in zip(CELLS, self.probabilities) if p > floor]

    def l1(self, other: "JointDistribution") -> float:
        return float(sum(
            abs(a - b) for a, b in zip(self.probabilities, other.probabilities)
        ))

    def to_dict(self) -> Dict[str, float]:
        return {cell_key(c): p for c, p in zip(CELLS, self.probabilities)}


def _sign_projector(op: HermitianOperator, sign: int) -> np.ndarray:
    n = op.dimension
    return (np.eye(n) + sign * op.matrix) / 2.0


@dataclass(frozen=True, eq=False)
class ChoiceObservablePair:
    """
    O12 and O34 with spectra in {+1, -1}.

    When the pair commutes, ``basis`` holds a shared eigenbasis as columns
    and ``labels`` the (O12, O34) eigenvalue pair of each column.
    """
    o12: HermitianOperator
    o34: HermitianOperator
    basis: Optional[np.ndarray] = None
    labels: Tuple[Label, ...] = ()

    def __post_init__(self):
        for name, op in (("O12", self.o12), ("O34", self.o34)):
            n = op.dimension
            gap = float(np.max(np.abs(op.matrix @ op.matrix - np.eye(n))))
            if gap > IDENTITY_TOL:
                raise InvalidOperator(f"{name}^2 differs from identity by {gap:.3e}")
        object.__setattr__(self, "labels", tuple(tuple(lab) for lab in self.labels))

    @classmethod
    def from_operators(
        cls, o12: HermitianOperator, o34: HermitianOperator,
    ) -> "ChoiceObservablePair":
        """Pair hand-built operators, deriving the shared basis and labels.

        Raises:
            NotCommuting: if the operators do not commute
            InvalidOperator: if an eigenvalue is not +1 or -1
        """
        joint = common_eigenbasis(o12, o34, tol=COMMUTING_TOL)
        labels = []
        for a, b in zip(joint.eigenvalues_a, joint.eigenvalues_b):
            signs = []
            for value in (a, b):
                if abs(abs(value) - 1.0) > 1e-8:
                    raise InvalidOperator(f"eigenvalue {value:.6g} is not +1 or -1")
                signs.append(1 if value > 0 else -1)
            labels.append(tuple(signs))
        return cls(o12, o34, joint.vectors, tuple(labels))

    @property
    def dimension(self) -> int:
        return self.o12.dimension

    def commutator(self) -> float:
        return commutator_norm(self.o12, self.o34)

    def projector(self, observable: str, sign: int) -> np.ndarray:
        op = self.o12 if observable == "o12" else self.o34
        return _sign_projector(op, sign)

    def to_dict(self) -> dict:
        data = {
            "o12": interleave(self.o12.matrix),
            "o34": interleave(self.o34.matrix),
            "commutator_norm": self.commutator(),
        }
        if self.basis is not None:
            data["basis"] = [interleave(col) for col in self.basis.T]
            data["labels"] = [list(lab) for lab in self.labels]
        return data


def _check_orthonormal(basis: np.ndarray) -> None:
    if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
        raise BadBasis(f"basis must be a square matrix, got shape {basis.shape}")
    gap = float(np.max(np.abs(basis.conj().T @ basis - np.eye(basis.shape[0]))))
    if gap > IDENTITY_TOL:
        raise BadBasis(f"basis not orthonormal: max |Q^dagger Q - I| = {gap:.3e}")


def build_commuting_pair(
    basis: np.ndarray, signs: Sequence[Label],
) -> ChoiceObservablePair:
    """O12 = sum s_k Q_k and O34 = sum t_k Q_k over basis projectors Q_k.

    Args:
        basis: orthonormal basis as columns
        signs: one (s_k, t_k) pair in {+1, -1}^2 per column

    Raises:
        BadBasis: if the basis is not orthonormal or signs do not fit it
    """
    basis = np.asarray(basis, dtype=complex)
    _check_orthonormal(basis)
    signs = [tuple(int(x) for x in s) for s in signs]
    if len(signs) != basis.shape[1]:
        raise BadBasis(f"{len(signs)} sign labels for {basis.shape[1]} basis vectors")
    if any(s not in LABELS for s in signs):
        raise BadBasis(f"sign labels must be in {LABELS}, got {signs}")
    s = np.array([lab[0] for lab in signs], dtype=float)
    t = np.array([lab[1] for lab in signs], dtype=float)
    o12 = HermitianOperator((basis * s) @ basis.conj().T)
    o34 = HermitianOperator((basis * t) @ basis.conj().T)
    return ChoiceObservablePair(o12, o34, basis, tuple(signs))


def joint_distribution(
    state: StateVector, pair: ChoiceObservablePair,
) -> JointDistribution:
    """Order-free joint of two commuting choice observables.

    p(s, t) is the weight of the state on the shared eigenvectors labeled
    (s, t).

    Raises:
        NotCommuting: if the commutator norm exceeds COMMUTING_TOL
    """
    gap = pair.commutator()
    if gap > COMMUTING_TOL:
        raise NotCommuting(f"choice observables do not commute ({gap:.3e})")
    if pair.basis is None:
        pair = ChoiceObservablePair.from_operators(pair.o12, pair.o34)
    weights = np.abs(pair.basis.conj().T @ state.amplitudes) ** 2
    probs = [0.0] * len(CELLS)
    for w, label in zip(weights, pair.labels):
        probs[LABELS.index(label)] += float(w)
    total = sum(probs)
    return JointDistribution(tuple(p / total for p in probs))


def sequential_joint(
    state: StateVector, pair: ChoiceObservablePair, first: str = "o12",
) -> JointDistribution:
    """Measure one observable, collapse, then measure the other.

    Defined for non-commuting pairs too, where the two orders differ.

    Args:
        state: initial state
        pair: choice observables
        first: "o12" or "o34", the observable measured first
    """
    if first not in ("o12", "o34"):
        raise OutOfRange(f"first must be 'o12' or 'o34', got '{first}'")
    v = state.amplitudes
    probs = []
    for s, t in LABELS:
        p12 = pair.projector("o12", s)
        p34 = pair.projector("o34", t)
        collapsed = p34 @ (p12 @ v) if first == "o12" else p12 @ (p34 @ v)
        probs.append(float(np.vdot(collapsed, collapsed).real))
    total = sum(probs)
    return JointDistribution(tuple(p / total for p in probs))


@dataclass
class JointFit:
    """
    Best L1 approximation of a joint by a distribution on at most three cells.
    """
    distance: float
    support: Tuple[Cell, ...]
    dropped: Optional[Cell]
    closest: JointDistribution

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "support": [cell_key(c) for c in self.support],
            "dropped": cell_key(self.dropped) if self.dropped else None,
            "closest": self.closest.to_dict(),
        }


def min_l1_joint_fit(target: JointDistribution) -> JointFit:
    """Minimum L1 distance from the target to any three-cell distribution.

    Dropping one cell and moving its mass elsewhere costs twice that mass,
    so the optimum drops the lightest cell; ties go to the first in CELLS
    order.
    """
    probs = target.probabilities
    if sum(1 for p in probs if p > 0.0) <= len(CELLS) - 1:
        support = tuple(c for c, p in zip(CELLS, probs) if p > 0.0)
        return JointFit(0.0, support, None, target)
    drop = min(range(len(CELLS)), key=lambda k: (probs[k], k))
    keep = max((k for k in range(len(CELLS)) if k != drop), key=lambda k: (probs[k], -k))
    closest = list(probs)
    closest[keep] += closest[drop]
    closest[drop] = 0.0
    support = tuple(c for k, c in enumerate(CELLS) if k != drop)
    return JointFit(2.0 * probs[drop], support, CELLS[drop], JointDistribution(tuple(closest)))


def _feasible_labels(targets: Dict[str, float]) -> Optional[Tuple[Label, ...]]:
    """First label assignment, in lexicographic order over LABELS, whose
    cells can carry weights matching the marginal targets."""
    for combo in product(range(len(LABELS)), repeat=3):
        labels = [LABELS[k] for k in combo]
        a_eq = [
            [1.0, 1.0, 1.0],
            [1.0 if lab[0] == 1 else 0.0 for lab in labels],
            [1.0 if lab[1] == -1 else 0.0 for lab in labels],
        ]
        result = scipy.optimize.linprog(
            np.zeros(3), A_eq=a_eq, b_eq=[1.0, targets["f1"], targets["f4"]],
            bounds=[(0.0, 1.0)] * 3, method="highs",
        )
        if result.status == 0:
            return tuple(labels)
    return None


@dataclass(frozen=True)
class ConstraintSet:
    """
    What a fitted state and choice pair must reproduce.
    """
    marginals: Dict[str, float]
    red_probability: float = 1.0 / 3.0
    joint: Optional[JointDistribution] = None
    field: str = "complex"

    def __post_init__(self):
        if self.field not in FIELDS:
            raise OutOfRange(f"field must be one of {FIELDS}, got '{self.field}'")
        for key in ("f1", "f4"):
            value = self.marginals.get(key)
            if value is None or not 0.0 < value < 1.0:
                raise OutOfRange(f"marginal target {key}={value!r} outside (0, 1)")
        if not 0.0 < self.red_probability < 1.0:
            raise OutOfRange(f"red probability {self.red_probability!r} outside (0, 1)")


class ChoiceFitter:
    """
    Fits a state with fixed red probability and a commuting choice pair
    to a constraint set.

    The state is (sqrt(r), ...) with its ambiguous amplitudes free; the
    shared basis is B_v exp(iH), where B_v completes the state to an
    orthonormal basis and H is a free Hermitian generator (real
    antisymmetric in the real field).
    """

    def __init__(
        self,
        constraints: ConstraintSet,
        budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
        logger: Optional[logging.Logger] = None,
    ):
        self.constraints = constraints
        self.budget = budget
        self.logger = logger or logging.getLogger(__name__)
        self.real = constraints.field == "real"
        self.labels = self._choose_labels()

    def _choose_labels(self) -> Tuple[Label, ...]:
        if self.constraints.joint is not None:
            fit = min_l1_joint_fit(self.constraints.joint)
            cells = list(fit.support)
            while len(cells) < 3:
                cells.append(next(c for c in CELLS if c not in cells))
            return tuple(label_of(c) for c in cells)
        labels = _feasible_labels(self.constraints.marginals)
        if labels is None:
            raise FitFailed(f"no label assignment reaches {self.constraints.marginals}")
        return labels

    def space(self) -> ParamSpace:
        bound = math.pi
        if self.real:
            state = ParamSpace((angle("gamma"),))
            generator = [Parameter(f"h{k}", -bound, bound) for k in range(3)]
        else:
            rest = 1.0 - self.constraints.red_probability
            state = ParamSpace((
                Parameter("y_weight", 0.0, rest), angle("phase_y"), angle("phase_b"),
            ))
            generator = [Parameter(f"h{k}", -bound, bound) for k in range(9)]
        return state + ParamSpace(tuple(generator))

    def realize(self, params: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
        """State amplitudes and basis columns for a parameter point."""
        red = self.constraints.red_probability
        rest = 1.0 - red
        if self.real:
            gamma = params["gamma"]
            v = np.array([
                math.sqrt(red),
                math.sqrt(rest) * math.cos(gamma),
                math.sqrt(rest) * math.sin(gamma),
            ])
            h = [params[f"h{k}"] for k in range(3)]
        else:
            y = min(max(params["y_weight"], 0.0), rest)
            v = np.array([
                math.sqrt(red),
                math.sqrt(y) * np.exp(1j * params["phase_y"]),
                math.sqrt(max(rest - y, 0.0)) * np.exp(1j * params["phase_b"]),
            ])
            h = [params[f"h{k}"] for k in range(9)]
        v = v / np.linalg.norm(v)
        completion = scipy.linalg.null_space(v.conj()[None, :])
        frame = np.column_stack([v, completion])
        rotation = UnitaryOperator.from_generator(
            hermitian_from_params(h, 3, real=self.real)
        )
        return v, frame @ rotation.matrix

    def joint_of(self, v: np.ndarray, basis: np.ndarray) -> np.ndarray:
        weights = np.abs(basis.conj().T @ v) ** 2
        probs = np.zeros(len(CELLS))
        for w, label in zip(weights, self.labels):
            probs[LABELS.index(label)] += w
        return probs

    def violations(self, v: np.ndarray, basis: np.ndarray) -> Dict[str, float]:
        """Absolute deviation per constraint."""
        probs = self.joint_of(v, basis)
        p_f1 = probs[0] + probs[1]
        p_f4 = probs[1] + probs[3]
        out = {
            "p_f1": abs(p_f1 - self.constraints.marginals["f1"]),
            "p_f4": abs(p_f4 - self.constraints.marginals["f4"]),
            "red": abs(float(abs(v[0]) ** 2) - self.constraints.red_probability),
        }
        if self.constraints.joint is not None:
            out["joint_l1"] = float(np.sum(
                np.abs(probs - np.array(self.constraints.joint.probabilities))
            ))
        return out

    def objective(self, params: Dict[str, float]) -> float:
        v, basis = self.realize(params)
        probs = self.joint_of(v, basis)
        value = (probs[0] + probs[1] - self.constraints.marginals["f1"]) ** 2
        value += (probs[1] + probs[3] - self.constraints.marginals["f4"]) ** 2
        if self.constraints.joint is not None:
            value += float(np.sum(
                (probs - np.array(self.constraints.joint.probabilities)) ** 2
            ))
        return value

    def run(self, seed: int) -> Tuple[FitResult, np.ndarray, np.ndarray]:
        restarts, iterations = self.budget
        minimizer = MultiStartMinimizer(
            restarts, iterations, target=FIT_TARGET, polish=True, logger=self.logger,
        )
        fit = minimizer.minimize(self.objective, self.space(), seed)
        v, basis = self.realize(fit.parameters)
        return fit, v, basis


@dataclass
class ChoiceFit:
    """
    Fitted state and commuting pair with their Born statistics.
    """
    state: StateVector
    pair: ChoiceObservablePair
    targets: Dict[str, float]
    marginals: Dict[str, float]
    joint: JointDistribution
    residual: float
    fit: FitResult

    def to_dict(self) -> dict:
        return {
            "state": interleave(self.state.amplitudes),
            "pair": self.pair.to_dict(),
            "targets": dict(self.targets),
            "marginals": dict(self.marginals),
            "joint": self.joint.to_dict(),
            "residual": self.residual,
            "search": self.fit.to_dict(),
        }


def fit_marginals(
    targets: Tuple[float, float],
    red_constraint: float = 1.0 / 3.0,
    seed: int = 0,
    tol: float = FIT_TOL,
    budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
    logger: Optional[logging.Logger] = None,
) -> ChoiceFit:
    """Fit a state and commuting pair whose Born marginals hit (p_f1, p_f4).

    Args:
        targets: choice probabilities of f1 and of f4, each in (0, 1)
        red_constraint: Born probability of red the state must keep
        seed: master seed of the restarts
        tol: largest accepted marginal deviation

    Returns:
        ChoiceFit with residual = max marginal deviation

    Raises:
        OutOfRange: if a target is outside the open unit interval
        FitFailed: if the residual stays above tol
    """
    log = logger or logging.getLogger(__name__)
    p_f1, p_f4 = targets
    constraints = ConstraintSet({"f1": p_f1, "f4": p_f4}, red_constraint)
    fitter = ChoiceFitter(constraints, budget, log)
    fit, v, basis = fitter.run(seed)
    violations = fitter.violations(v, basis)
    residual = max(violations["p_f1"], violations["p_f4"])
    if residual > tol:
        log.info(f"Marginal fit to ({p_f1:.6g}, {p_f4:.6g}) stalled at {residual:.3e}")
        raise FitFailed(
            f"marginal residual {residual:.3e} above {tol:g} after "
            f"{fit.restarts_used} restarts"
        )
    state = StateVector(v)
    pair = build_commuting_pair(basis, fitter.labels)
    joint = joint_distribution(state, pair)
    marginals = joint.marginals()
    log.info(f"Marginal fit to ({p_f1:.6g}, {p_f4:.6g}) residual {residual:.3e}")
    return ChoiceFit(
        state, pair, {"f1": p_f1, "f4": p_f4}, marginals, joint, residual, fit,
    )


@dataclass
class RepresentabilityReport:
    """
    Search evidence for one field; a large residual is a result.
    """
    field: str
    residual: float
    violations: Dict[str, float]
    labels: Tuple[Label, ...]
    restarts_used: int
    seed: int
    joint: JointDistribution
    lower_bound: Optional[float] = None
    fit: Optional[FitResult] = None

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "residual": self.residual,
            "violations": dict(self.violations),
            "labels": [list(lab) for lab in self.labels],
            "restarts_used": self.restarts_used,
            "seed": self.seed,
            "joint": self.joint.to_dict(),
            "joint_lower_bound": self.lower_bound,
        }


def real_representability_search(
    constraints: ConstraintSet,
    seed: int = 0,
    budget: Tuple[int, int] = (DEFAULT_RESTARTS, DEFAULT_ITERATIONS),
    logger: Optional[logging.Logger] = None,
) -> RepresentabilityReport:
    """Run the choice fit in the constraint set's field and report residuals.

    The residual is the sum of per-constraint violations. When a joint
    target is present its three-cell L1 bound is reported alongside.
    """
    log = logger or logging.getLogger(__name__)
    fitter = ChoiceFitter(constraints, budget, log)
    fit, v, basis = fitter.run(seed)
    violations = fitter.violations(v, basis)
    residual = float(sum(violations.values()))
    bound = None
    if constraints.joint is not None:
        bound = min_l1_joint_fit(constraints.joint).distance
    probs = fitter.joint_of(v, basis)
    log.info(
        f"{constraints.field} representability search: residual {residual:.6g} "
        f"after {fit.restarts_used} restarts"
    )
    return RepresentabilityReport(
        field=constraints.field,
        residual=residual,
        violations=violations,
        labels=fitter.labels,
        restarts_used=fit.restarts_used,
        seed=seed,
        joint=JointDistribution(tuple(probs / probs.sum())),
        lower_bound=bound,
        fit=fit,
    )
