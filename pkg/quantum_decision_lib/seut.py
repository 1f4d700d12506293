"""
Subjective expected utility feasibility of preference patterns, with
linear-inequality certificates, and the Sure-Thing principle check.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import scipy.optimize

from .exceptions import InvalidPattern, OutOfRange, PairsNotSureThingRelated
from .urn import (
    Act,
    ProbabilityVector,
    UrnExperiment,
    UrnSpec,
    UtilityFunction,
    classical_expected_utility,
)

logger = logging.getLogger(__name__)

MIN_GRID = 100
DEFAULT_GRID = 100
STRICT_MARGIN = 1e-9
CERTIFICATE_TOL = 1e-12

DEFAULT_UTILITY_FAMILY: Tuple[UtilityFunction, ...] = (
    UtilityFunction("linear"),
    UtilityFunction("power", 0.25),
    UtilityFunction("power", 0.5),
    UtilityFunction("power", 0.75),
    UtilityFunction("power", 1.0),
    UtilityFunction("exponential", 0.05),
    UtilityFunction("exponential", 0.1),
    UtilityFunction("exponential", 0.5),
)


@dataclass(frozen=True)
class Preference:
    """Strict preference ``better`` over ``worse``."""
    better: str
    worse: str

    def __str__(self) -> str:
        return f"{self.better}>{self.worse}"


@dataclass(frozen=True)
class PreferencePattern:
    """
    Ordered list of strict preferences between named acts.
    """
    preferences: Tuple[Preference, ...]

    def __post_init__(self):
        prefs = tuple(self.preferences)
        object.__setattr__(self, "preferences", prefs)
        if not prefs:
            raise InvalidPattern("empty preference pattern")
        seen = set()
        for pref in prefs:
            if pref.better == pref.worse:
                raise InvalidPattern(f"self-preference {pref}")
            key = (pref.better, pref.worse)
            if key in seen:
                raise InvalidPattern(f"preference {pref} repeated")
            if (pref.worse, pref.better) in seen:
                raise InvalidPattern(f"preference {pref} contradicts an earlier one")
            seen.add(key)

    @classmethod
    def parse(cls, text: str) -> "PreferencePattern":
        """Parse ``"f1>f2,f4>f3"``; ``<`` is accepted as the reverse."""
        prefs = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if ">" in chunk:
                left, right = chunk.split(">", 1)
                prefs.append(Preference(left.strip(), right.strip()))
            elif "<" in chunk:
                left, right = chunk.split("<", 1)
                prefs.append(Preference(right.strip(), left.strip()))
            else:
                raise InvalidPattern(f"cannot parse preference '{chunk}'")
        return cls(tuple(prefs))

    @classmethod
    def of(cls, *pairs: Tuple[str, str]) -> "PreferencePattern":
        return cls(tuple(Preference(b, w) for b, w in pairs))

    def validate_for(self, experiment: UrnExperiment) -> None:
        for pref in self.preferences:
            for name in (pref.better, pref.worse):
                if name not in experiment.acts:
                    raise InvalidPattern(
                        f"act '{name}' not in experiment '{experiment.name}'"
                    )

    def prefers(self, a: str, b: str) -> Optional[bool]:
        """True if a>b is stated, False if b>a, None if the pair is absent."""
        for pref in self.preferences:
            if (pref.better, pref.worse) == (a, b):
                return True
            if (pref.better, pref.worse) == (b, a):
                return False
        return None

    def __iter__(self) -> Iterator[Preference]:
        return iter(self.preferences)

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.preferences)


@dataclass
class LinearCertificate:
    """
    Utility-free reduction of a pattern to strict linear inequalities
    ``sum_c coeff_c p_c > 0`` over admissible priors.

    ``max_slack`` is the largest t such that every left-hand side is at
    least t on the admissible polytope; a value at or below zero proves the
    strict system empty for every strictly increasing utility.
    """
    inequalities: List[Dict[str, float]]
    max_slack: float
    multipliers: List[float] = field(default_factory=list)
    optimum: Optional[Dict[str, float]] = None

    @property
    def contradictory(self) -> bool:
        return self.max_slack <= CERTIFICATE_TOL

    def describe(self) -> List[str]:
        lines = []
        for row in self.inequalities:
            terms = [
                f"{'+' if c > 0 else '-'}{abs(c):g}*p_{color}"
                for color, c in row.items() if c != 0
            ]
            lines.append(" ".join(terms) + " > 0")
        return lines

    def to_dict(self) -> dict:
        return {
            "inequalities": self.describe(),
            "max_slack": self.max_slack,
            "multipliers": list(self.multipliers),
            "contradictory": self.contradictory,
        }


@dataclass
class FeasibilityVerdict:
    """
    Outcome of the SEUT feasibility search.
    """
    status: str
    pattern: str
    witness: Optional[ProbabilityVector] = None
    witness_utility: Optional[UtilityFunction] = None
    certificate: Optional[LinearCertificate] = None
    grid: int = DEFAULT_GRID
    utilities: List[str] = field(default_factory=list)
    points_checked: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "pattern": self.pattern,
            "witness": dict(self.witness.weights) if self.witness else None,
            "witness_utility": (
                self.witness_utility.to_dict() if self.witness_utility else None
            ),
            "certificate": (
                self.certificate.to_dict() if self.certificate else None
            ),
            "grid": self.grid,
            "utilities": list(self.utilities),
            "points_checked": self.points_checked,
        }


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    # lexicographic in the free (last parts-1) coordinates
    if parts == 1:
        yield (total,)
        return
    for tail in product(range(total + 1), repeat=parts - 1):
        rest = total - sum(tail)
        if rest >= 0:
            yield (rest,) + tail


def admissible_grid(urn: UrnSpec, grid: int) -> np.ndarray:
    """All admissible priors on the grid, one row per point, urn color order.

    Each unknown group of m colors contributes its last m-1 colors as free
    coordinates stepped in group_probability/grid; rows are ordered
    lexicographically by the free-coordinate indices.
    """
    groups = urn.unknown_groups
    splits = [list(_compositions(grid, len(g.colors))) for g in groups]
    index = {c: i for i, c in enumerate(urn.colors)}
    rows = []
    for combo in product(*splits):
        row = np.zeros(len(urn.colors))
        for color, count in urn.known_counts.items():
            row[index[color]] = count / urn.total
        for group, split in zip(groups, combo):
            mass = group.total / urn.total
            for color, k in zip(group.colors, split):
                row[index[color]] = mass * k / grid
        rows.append(row)
    return np.array(rows)


def _utility_vector(act: Act, colors: Sequence[str], u: UtilityFunction) -> np.ndarray:
    return np.array([u(act.payoffs[c]) for c in colors])


def _reduce_comparison(a: Act, b: Act) -> Optional[Dict[str, float]]:
    # a, b differing only by exchanging two payoff levels
    differing = [c for c in a.payoffs if a.payoffs[c] != b.payoffs[c]]
    levels = {a.payoffs[c] for c in differing} | {b.payoffs[c] for c in differing}
    if len(levels) != 2:
        return None
    high = max(levels)
    return {
        c: (1.0 if c in differing and a.payoffs[c] == high else 0.0)
        - (1.0 if c in differing and b.payoffs[c] == high else 0.0)
        for c in a.payoffs
    }


def linear_certificate(
    experiment: UrnExperiment, pattern: PreferencePattern,
) -> Optional[LinearCertificate]:
    """Symbolic reduction of the pattern, or None if some comparison
    does not exchange exactly two payoff levels.

    For such a comparison EU(a) - EU(b) = (u(high) - u(low)) * sum_c s_c p_c,
    and u(high) - u(low) > 0 for every strictly increasing u, so the sign
    depends on p alone. The reduced strict system is tested by the linear
    program max t s.t. s_k . p >= t, p admissible, t <= 1.
    """
    rows = []
    for pref in pattern:
        row = _reduce_comparison(
            experiment.act(pref.better), experiment.act(pref.worse)
        )
        if row is None:
            return None
        rows.append(row)

    urn = experiment.urn
    colors = list(urn.colors)
    n = len(colors)
    # variables: p_1..p_n, t ; maximize t
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    a_ub = np.array([[-row[c] for c in colors] + [1.0] for row in rows])
    b_ub = np.zeros(len(rows))
    eq_rows, b_eq = [[1.0] * n + [0.0]], [1.0]
    for color, count in urn.known_counts.items():
        eq_rows.append([1.0 if c == color else 0.0 for c in colors] + [0.0])
        b_eq.append(count / urn.total)
    for group in urn.unknown_groups:
        eq_rows.append([1.0 if c in group.colors else 0.0 for c in colors] + [0.0])
        b_eq.append(group.total / urn.total)
    bounds = [(0.0, 1.0)] * n + [(None, 1.0)]
    result = scipy.optimize.linprog(
        cost, A_ub=a_ub, b_ub=b_ub, A_eq=np.array(eq_rows), b_eq=b_eq,
        bounds=bounds, method="highs",
    )
    if result.status != 0:
        raise OutOfRange(f"certificate linear program failed: {result.message}")
    multipliers = []
    if getattr(result, "ineqlin", None) is not None:
        multipliers = [float(-m) for m in result.ineqlin.marginals]
    return LinearCertificate(
        inequalities=rows,
        max_slack=float(result.x[-1]),
        multipliers=multipliers,
        optimum=dict(zip(colors, (float(v) for v in result.x[:n]))),
    )


def seut_pattern_feasibility(
    experiment: UrnExperiment,
    pattern: PreferencePattern,
    u_family: Sequence[UtilityFunction] = DEFAULT_UTILITY_FAMILY,
    grid: int = DEFAULT_GRID,
    logger: Optional[logging.Logger] = None,
) -> FeasibilityVerdict:
    """Search admissible subjective priors and sampled utilities for one
    that realizes every strict preference with margin above 1e-9.

    Args:
        experiment: urn and acts
        pattern: strict preferences to realize
        u_family: utilities tried in order
        grid: points per free dimension, at least 100
        logger: Optional logger instance

    Returns:
        FeasibilityVerdict: feasible with the lexicographically smallest
        verifying grid point (first utility in family order), else
        infeasible, with the linear certificate attached when the
        pattern reduces to one
    """
    log = logger or logging.getLogger(__name__)
    pattern.validate_for(experiment)
    if grid < MIN_GRID:
        raise OutOfRange(f"grid resolution {grid} below minimum {MIN_GRID}")

    colors = list(experiment.colors)
    points = admissible_grid(experiment.urn, grid)
    certificate = linear_certificate(experiment, pattern)
    verdict = FeasibilityVerdict(
        status="infeasible",
        pattern=str(pattern),
        certificate=certificate,
        grid=grid,
        utilities=[u.label for u in u_family],
    )

    for u in u_family:
        ok = np.ones(len(points), dtype=bool)
        for pref in pattern:
            diff = points @ (
                _utility_vector(experiment.act(pref.better), colors, u)
                - _utility_vector(experiment.act(pref.worse), colors, u)
            )
            ok &= diff > STRICT_MARGIN
        verdict.points_checked += len(points)
        hits = np.flatnonzero(ok)
        if hits.size:
            witness = ProbabilityVector.from_values(colors, points[hits[0]])
            if _verifies(experiment, pattern, witness, u):
                verdict.status = "feasible"
                verdict.witness, verdict.witness_utility = witness, u
                log.info(f"Pattern {pattern} feasible under {u.label}")
                return verdict

    if certificate is not None and not certificate.contradictory:
        clipped = {c: max(certificate.optimum[c], 0.0) for c in colors}
        mass = sum(clipped.values())
        witness = ProbabilityVector({c: v / mass for c, v in clipped.items()})
        for u in u_family:
            if _verifies(experiment, pattern, witness, u):
                verdict.status = "feasible"
                verdict.witness, verdict.witness_utility = witness, u
                log.info(f"Pattern {pattern} feasible off-grid under {u.label}")
                return verdict

    log.info(
        f"Pattern {pattern} infeasible over {verdict.points_checked} points"
        + (" with linear certificate" if certificate else "")
    )
    return verdict


def _verifies(
    experiment: UrnExperiment,
    pattern: PreferencePattern,
    p: ProbabilityVector,
    u: UtilityFunction,
) -> bool:
    return all(
        classical_expected_utility(experiment.act(pref.better), p, u)
        - classical_expected_utility(experiment.act(pref.worse), p, u)
        > STRICT_MARGIN
        for pref in pattern
    )


@dataclass
class SureThingReport:
    """
    Structural relation between two bet pairs and, if a pattern is given,
    whether it conforms to the Sure-Thing principle.
    """
    pair_a: Tuple[str, str]
    pair_b: Tuple[str, str]
    common_event: Tuple[str, ...]
    related: bool = True
    pattern: Optional[str] = None
    conforms: Optional[bool] = None

    @property
    def violation(self) -> bool:
        return self.conforms is False

    def to_dict(self) -> dict:
        return {
            "pair_a": list(self.pair_a),
            "pair_b": list(self.pair_b),
            "common_event": list(self.common_event),
            "related": self.related,
            "pattern": self.pattern,
            "conforms": self.conforms,
        }


ActRef = Union[str, Act]


def _resolve(experiment: UrnExperiment, act: ActRef) -> Act:
    return experiment.act(act) if isinstance(act, str) else act


def sure_thing_check(
    experiment: UrnExperiment,
    pair_a: Tuple[ActRef, ActRef],
    pair_b: Tuple[ActRef, ActRef],
    common_event: Sequence[str],
    pattern: Optional[PreferencePattern] = None,
) -> SureThingReport:
    """Check that pair_b is pair_a with the common outcome on
    ``common_event`` changed identically for both acts, then test the
    pattern: a > a' must hold iff b > b'.
    """
    a, a2 = (_resolve(experiment, x) for x in pair_a)
    b, b2 = (_resolve(experiment, x) for x in pair_b)
    event = tuple(common_event)
    colors = experiment.colors
    unknown = set(event) - set(colors)
    if unknown:
        raise PairsNotSureThingRelated(f"event colors {sorted(unknown)} not in urn")

    for color in colors:
        if color in event:
            if a.payoffs[color] != a2.payoffs[color]:
                raise PairsNotSureThingRelated(
                    f"{a.name} and {a2.name} differ on common event color {color}"
                )
            if b.payoffs[color] != b2.payoffs[color]:
                raise PairsNotSureThingRelated(
                    f"{b.name} and {b2.name} differ on common event color {color}"
                )
        elif (a.payoffs[color], a2.payoffs[color]) != (
            b.payoffs[color], b2.payoffs[color]
        ):
            raise PairsNotSureThingRelated(
                f"pairs differ outside the common event, on {color}"
            )

    report = SureThingReport((a.name, a2.name), (b.name, b2.name), event)
    if pattern is not None:
        first = pattern.prefers(a.name, a2.name)
        second = pattern.prefers(b.name, b2.name)
        if first is None or second is None:
            raise InvalidPattern(
                f"pattern {pattern} must rank both {a.name}/{a2.name} "
                f"and {b.name}/{b2.name}"
            )
        report.pattern = str(pattern)
        report.conforms = first == second
    return report


def find_common_event(
    experiment: UrnExperiment,
    pair_a: Tuple[ActRef, ActRef],
    pair_b: Tuple[ActRef, ActRef],
) -> Optional[Tuple[str, ...]]:
    """Colors on which each pair is constant but the two pairs differ, or
    None when the pairs are not related that way."""
    a, a2 = (_resolve(experiment, x) for x in pair_a)
    b, b2 = (_resolve(experiment, x) for x in pair_b)
    event = []
    for color in experiment.colors:
        inside = (a.payoffs[color], a2.payoffs[color])
        outside = (b.payoffs[color], b2.payoffs[color])
        if inside == outside:
            continue
        if inside[0] == inside[1] and outside[0] == outside[1]:
            event.append(color)
        else:
            return None
    return tuple(event) or None
