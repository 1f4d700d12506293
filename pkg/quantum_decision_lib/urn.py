"""
Urn, act and utility models for Ellsberg and Machina style experiments.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple
import math

from .exceptions import (
    ColorMismatch,
    InvalidUrn,
    NegativePayoff,
    OutOfRange,
    UnknownAct,
)

ELLSBERG_COLORS = ("red", "yellow", "black")
MACHINA_COLORS = ("red", "yellow", "black", "green")

PROBABILITY_TOL = 1e-12

UTILITY_FORMS = ("linear", "power", "exponential")


@dataclass(frozen=True)
class UnknownGroup:
    """Colors whose split is unknown but whose joint count is known."""
    colors: Tuple[str, ...]
    total: int


@dataclass(frozen=True)
class UrnSpec:
    """
    Ball counts of an urn: known per-color counts plus groups of colors
    with known total and unknown split.
    """
    colors: Tuple[str, ...]
    total: int
    known_counts: Dict[str, int] = field(default_factory=dict)
    unknown_groups: Tuple[UnknownGroup, ...] = ()

    def __post_init__(self):
        if self.total <= 0:
            raise InvalidUrn(f"urn total must be positive, got {self.total}")
        if len(set(self.colors)) != len(self.colors):
            raise InvalidUrn(f"duplicate colors in {self.colors}")
        seen: List[str] = list(self.known_counts)
        for group in self.unknown_groups:
            seen.extend(group.colors)
        if sorted(seen) != sorted(self.colors):
            raise InvalidUrn(
                f"every color must appear exactly once among known counts "
                f"and unknown groups; got {seen} for {list(self.colors)}"
            )
        counted = sum(self.known_counts.values()) + sum(
            g.total for g in self.unknown_groups
        )
        if counted != self.total:
            raise InvalidUrn(
                f"known counts plus group totals give {counted}, "
                f"urn total is {self.total}"
            )
        if any(c < 0 for c in self.known_counts.values()) or any(
            g.total < 0 for g in self.unknown_groups
        ):
            raise InvalidUrn("negative ball count")

    def known_probability(self, color: str) -> Fraction:
        return Fraction(self.known_counts[color], self.total)

    def group_probability(self, group: UnknownGroup) -> Fraction:
        return Fraction(group.total, self.total)

    def group_of(self, color: str) -> Optional[UnknownGroup]:
        for group in self.unknown_groups:
            if color in group.colors:
                return group
        return None

    def admits(self, p: "ProbabilityVector", tol: float = PROBABILITY_TOL) -> bool:
        """Whether p respects every known count and group total."""
        if set(p.weights) != set(self.colors):
            return False
        for color, count in self.known_counts.items():
            if abs(p.weights[color] - count / self.total) > tol:
                return False
        for group in self.unknown_groups:
            mass = sum(p.weights[c] for c in group.colors)
            if abs(mass - group.total / self.total) > tol:
                return False
        return True

    def uniform_prior(self) -> "ProbabilityVector":
        """Known colors at their frequency, each group split evenly."""
        weights = {c: n / self.total for c, n in self.known_counts.items()}
        for group in self.unknown_groups:
            share = group.total / self.total / len(group.colors)
            weights.update({c: share for c in group.colors})
        return ProbabilityVector({c: weights[c] for c in self.colors})


@dataclass(frozen=True)
class Act:
    """
    A bet: money paid for each color drawn.
    """
    name: str
    payoffs: Dict[str, float]

    def __post_init__(self):
        for color, amount in self.payoffs.items():
            if not math.isfinite(amount):
                raise OutOfRange(f"act {self.name}: payoff on {color} not finite")
            if amount < 0:
                raise NegativePayoff(
                    f"act {self.name}: payoff {amount} on {color} is negative"
                )

    def require_colors(self, colors: Sequence[str]) -> None:
        if set(self.payoffs) != set(colors):
            raise ColorMismatch(
                f"act {self.name} pays on {sorted(self.payoffs)}, "
                f"expected {sorted(colors)}"
            )

    def outcome_values(self) -> List[float]:
        """Distinct payoff amounts, ascending."""
        return sorted(set(self.payoffs.values()))

    def event_for(self, amount: float) -> Tuple[str, ...]:
        return tuple(c for c, x in self.payoffs.items() if x == amount)

    def dominates(self, other: "Act") -> bool:
        return all(self.payoffs[c] >= other.payoffs[c] for c in self.payoffs)


@dataclass(frozen=True)
class UtilityFunction:
    """
    Bernoulli utility with u(0) = 0, strictly increasing.

    Forms: ``linear`` u(x) = x, ``power`` u(x) = x**alpha with alpha in
    (0, 1], ``exponential`` u(x) = (1 - exp(-lam x)) / lam with lam > 0.
    """
    form: str = "linear"
    parameter: Optional[float] = None

    def __post_init__(self):
        if self.form not in UTILITY_FORMS:
            raise OutOfRange(f"unknown utility form '{self.form}'")
        if self.form == "power":
            if self.parameter is None or not 0 < self.parameter <= 1:
                raise OutOfRange(
                    f"power utility needs alpha in (0, 1], got {self.parameter}"
                )
        elif self.form == "exponential":
            if self.parameter is None or not self.parameter > 0:
                raise OutOfRange(
                    f"exponential utility needs lambda > 0, got {self.parameter}"
                )

    def __call__(self, x: float) -> float:
        return utility_eval(self, x)

    @property
    def label(self) -> str:
        if self.form == "linear":
            return "linear"
        return f"{self.form}({self.parameter:g})"

    def to_dict(self) -> dict:
        data = {"form": self.form}
        if self.parameter is not None:
            data["parameter"] = self.parameter
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "UtilityFunction":
        return cls(
            form=data.get("form", "linear"),
            parameter=data.get("parameter"),
        )


LINEAR = UtilityFunction()


@dataclass(frozen=True)
class ProbabilityVector:
    """
    Additive probability over urn colors.
    """
    weights: Dict[str, float]

    def __post_init__(self):
        if any(w < -PROBABILITY_TOL for w in self.weights.values()):
            raise OutOfRange(f"negative probability in {self.weights}")
        total = sum(self.weights.values())
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise OutOfRange(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_values(
        cls, colors: Sequence[str], values: Sequence[float],
    ) -> "ProbabilityVector":
        return cls({c: float(v) for c, v in zip(colors, values)})

    def __getitem__(self, color: str) -> float:
        return self.weights[color]


@dataclass
class UrnExperiment:
    """
    A complete decision experiment: urn, acts, utility, and optionally the
    observed joint choice counts and a quantum model section.
    """
    name: str
    urn: UrnSpec
    acts: Dict[str, Act]
    utility: UtilityFunction = LINEAR
    observed: Optional[Dict[str, int]] = None
    model: Optional[dict] = None

    def __post_init__(self):
        for act in self.acts.values():
            act.require_colors(self.urn.colors)

    @property
    def colors(self) -> Tuple[str, ...]:
        return self.urn.colors

    def act(self, name: str) -> Act:
        try:
            return self.acts[name]
        except KeyError:
            raise UnknownAct(
                f"experiment '{self.name}' has no act '{name}'"
            ) from None


def utility_eval(u: UtilityFunction, x: float) -> float:
    """Evaluate u at a non-negative money amount.

    Args:
        u: utility function
        x: payoff, currency ignored

    Returns:
        float: u(x)

    Raises:
        NegativePayoff: if x < 0
    """
    if x < 0:
        raise NegativePayoff(f"utility undefined for negative payoff {x}")
    if u.form == "linear":
        return float(x)
    if u.form == "power":
        return float(x) ** u.parameter
    return -math.expm1(-u.parameter * x) / u.parameter


def classical_expected_utility(
    act: Act, p: ProbabilityVector, u: UtilityFunction = LINEAR,
) -> float:
    """Subjective expected utility sum_c p_c u(payoff_c)."""
    if set(p.weights) != set(act.payoffs):
        raise ColorMismatch(
            f"probability over {sorted(p.weights)} does not match "
            f"act {act.name} over {sorted(act.payoffs)}"
        )
    return sum(p.weights[c] * u(x) for c, x in act.payoffs.items())


def ellsberg_urn(stake: float = 12.0) -> UrnExperiment:
    """Three-color Ellsberg urn: 30 red, 60 yellow or black."""
    urn = UrnSpec(
        colors=ELLSBERG_COLORS,
        total=90,
        known_counts={"red": 30},
        unknown_groups=(UnknownGroup(("yellow", "black"), 60),),
    )
    rows = {
        "f1": (stake, 0.0, 0.0),
        "f2": (0.0, 0.0, stake),
        "f3": (stake, stake, 0.0),
        "f4": (0.0, stake, stake),
    }
    acts = {
        name: Act(name, dict(zip(ELLSBERG_COLORS, row)))
        for name, row in rows.items()
    }
    return UrnExperiment("ellsberg", urn, acts)


def machina_urn(low: float = 25.0, high: float = 50.0) -> UrnExperiment:
    """Machina reflection urn: 10 red or yellow, 10 black or green."""
    urn = UrnSpec(
        colors=MACHINA_COLORS,
        total=20,
        unknown_groups=(
            UnknownGroup(("red", "yellow"), 10),
            UnknownGroup(("black", "green"), 10),
        ),
    )
    rows = {
        "f1": (0.0, high, low, low),
        "f2": (0.0, low, high, low),
        "f3": (low, high, low, 0.0),
        "f4": (low, low, high, 0.0),
    }
    acts = {
        name: Act(name, dict(zip(MACHINA_COLORS, row)))
        for name, row in rows.items()
    }
    return UrnExperiment("machina", urn, acts)
