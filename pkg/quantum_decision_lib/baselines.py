"""
Classical ambiguity models: Max-Min (multiple priors), Choquet (capacity),
variational preferences and second-order probabilities.
"""
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from .exceptions import (
    ColorMismatch,
    EmptyPriorSet,
    InvalidDistribution,
    MissingEvent,
    OutOfRange,
)
from .urn import (
    LINEAR,
    Act,
    ProbabilityVector,
    UrnSpec,
    UtilityFunction,
    classical_expected_utility,
)

logger = logging.getLogger(__name__)

CAPACITY_TOL = 1e-12
DEFAULT_PRIOR_GRID = 100

Event = FrozenSet[str]


@dataclass(frozen=True)
class PriorSet:
    """
    Box of admissible priors: each free coordinate (the last m-1 colors of
    every unknown group of m colors) ranges over [lo, hi]; the group's first
    color takes the remaining group mass.
    """
    urn: UrnSpec
    bounds: Dict[str, Tuple[float, float]]

    def __post_init__(self):
        free = self.free_colors()
        if set(self.bounds) != set(free):
            raise OutOfRange(
                f"prior set bounds {sorted(self.bounds)} must cover exactly "
                f"the free colors {sorted(free)}"
            )
        for color, (lo, hi) in self.bounds.items():
            if lo > hi:
                raise EmptyPriorSet(f"bounds for {color} are empty: [{lo}, {hi}]")
        if not self.vertices():
            raise EmptyPriorSet("no admissible prior inside the bounds")

    def free_colors(self) -> List[str]:
        return [c for g in self.urn.unknown_groups for c in g.colors[1:]]

    @classmethod
    def full(cls, urn: UrnSpec) -> "PriorSet":
        """Every admissible prior of a urn whose groups have two colors."""
        bounds = {}
        for group in urn.unknown_groups:
            mass = group.total / urn.total
            for color in group.colors[1:]:
                bounds[color] = (0.0, mass)
        return cls(urn, bounds)

    def _point(self, free_values: Dict[str, float]) -> Optional[ProbabilityVector]:
        weights = {c: n / self.urn.total for c, n in self.urn.known_counts.items()}
        for group in self.urn.unknown_groups:
            mass = group.total / self.urn.total
            rest = mass - sum(free_values[c] for c in group.colors[1:])
            if rest < -CAPACITY_TOL:
                return None
            weights[group.colors[0]] = max(rest, 0.0)
            for c in group.colors[1:]:
                weights[c] = free_values[c]
        return ProbabilityVector({c: weights[c] for c in self.urn.colors})

    def _box(self, axes: Sequence[Sequence[float]]) -> List[ProbabilityVector]:
        free = self.free_colors()
        points = []
        for values in product(*axes):
            p = self._point(dict(zip(free, values)))
            if p is not None:
                points.append(p)
        return points

    def vertices(self) -> List[ProbabilityVector]:
        free = self.free_colors()
        return self._box([sorted({self.bounds[c][0], self.bounds[c][1]}) for c in free])

    def grid(self, resolution: int = DEFAULT_PRIOR_GRID) -> List[ProbabilityVector]:
        free = self.free_colors()
        axes = [
            np.linspace(self.bounds[c][0], self.bounds[c][1], resolution + 1)
            for c in free
        ]
        return self._box(axes)

    def contains(self, p: ProbabilityVector, tol: float = CAPACITY_TOL) -> bool:
        if not self.urn.admits(p, tol):
            return False
        return all(
            lo - tol <= p[c] <= hi + tol for c, (lo, hi) in self.bounds.items()
        )


def maxmin_expected_utility(
    act: Act,
    priors: PriorSet,
    u: UtilityFunction = LINEAR,
    grid: Optional[int] = None,
) -> float:
    """min over the prior set of E_p u(f).

    Expected utility is linear in p, so the minimum over a box is attained
    at a vertex; ``grid`` adds interior grid points to the scan.
    """
    candidates = priors.vertices()
    if grid:
        candidates = candidates + priors.grid(grid)
    if not candidates:
        raise EmptyPriorSet("prior set has no members")
    return min(classical_expected_utility(act, p, u) for p in candidates)


def _event(colors: Iterable[str]) -> Event:
    return frozenset(colors)


def _all_events(colors: Sequence[str]) -> List[Event]:
    return [
        _event(subset)
        for r in range(len(colors) + 1)
        for subset in combinations(colors, r)
    ]


@dataclass(frozen=True)
class Capacity:
    """
    Monotone set function on every event of the color set, with
    nu(empty) = 0 and nu(all colors) = 1.
    """
    colors: Tuple[str, ...]
    values: Dict[Event, float]

    def __post_init__(self):
        object.__setattr__(self, "colors", tuple(self.colors))
        values = {_event(k): float(v) for k, v in self.values.items()}
        object.__setattr__(self, "values", values)
        events = _all_events(self.colors)
        missing = [e for e in events if e not in values]
        if missing:
            raise MissingEvent(
                f"capacity missing {len(missing)} events, e.g. {sorted(missing[0])}"
            )
        if abs(values[frozenset()]) > CAPACITY_TOL:
            raise OutOfRange("capacity of the empty event must be 0")
        if abs(values[_event(self.colors)] - 1.0) > CAPACITY_TOL:
            raise OutOfRange("capacity of the sure event must be 1")
        for small in events:
            for big in events:
                if small < big and values[small] > values[big] + CAPACITY_TOL:
                    raise OutOfRange(
                        f"capacity not monotone: nu({sorted(small)}) > "
                        f"nu({sorted(big)})"
                    )

    @classmethod
    def from_probability(cls, p: ProbabilityVector) -> "Capacity":
        colors = tuple(p.weights)
        values = {e: sum(p[c] for c in e) for e in _all_events(colors)}
        values[_event(colors)] = 1.0
        return cls(colors, values)

    @classmethod
    def lower_envelope(cls, priors: PriorSet) -> "Capacity":
        """nu(A) = min over the prior set of p(A), taken at the vertices."""
        colors = tuple(priors.urn.colors)
        vertices = priors.vertices()
        values = {
            e: min(sum(p[c] for c in e) for p in vertices)
            for e in _all_events(colors)
        }
        values[frozenset()] = 0.0
        values[_event(colors)] = 1.0
        return cls(colors, values)

    @classmethod
    def from_dict(cls, colors: Sequence[str], data: Dict[str, float]) -> "Capacity":
        """Events keyed as comma-separated color lists; "" is the empty event."""
        values = {
            _event(c.strip() for c in key.split(",") if c.strip()): value
            for key, value in data.items()
        }
        return cls(tuple(colors), values)

    def to_dict(self) -> Dict[str, float]:
        return {
            ",".join(c for c in self.colors if c in e): v
            for e, v in sorted(
                self.values.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))
            )
        }

    def __call__(self, event: Iterable[str]) -> float:
        try:
            return self.values[_event(event)]
        except KeyError:
            raise MissingEvent(f"no capacity for event {sorted(event)}") from None

    def is_convex(self) -> bool:
        """Supermodularity over all event pairs."""
        events = list(self.values)
        return all(
            self.values[a | b] + self.values[a & b]
            >= self.values[a] + self.values[b] - CAPACITY_TOL
            for a, b in combinations(events, 2)
        )

    def is_additive(self) -> bool:
        return all(
            abs(self.values[e] - sum(self.values[_event([c])] for c in e))
            <= CAPACITY_TOL
            for e in self.values
        )


def choquet_expected_utility(
    act: Act, cap: Capacity, u: UtilityFunction = LINEAR,
) -> float:
    """Choquet integral of u(f) with respect to the capacity.

    Colors are sorted by descending utility; the integral is
    u_n + sum_k (u_k - u_{k+1}) nu(top-k colors).
    """
    if set(cap.colors) != set(act.payoffs):
        raise ColorMismatch(
            f"capacity over {sorted(cap.colors)} does not match act {act.name}"
        )
    ranked = sorted(
        act.payoffs, key=lambda c: (-u(act.payoffs[c]), cap.colors.index(c))
    )
    utils = [u(act.payoffs[c]) for c in ranked]
    total = utils[-1]
    for k in range(len(ranked) - 1):
        total += (utils[k] - utils[k + 1]) * cap(ranked[: k + 1])
    return total


PENALTY_FORMS = ("zero", "linear", "relative_entropy", "table")


@dataclass(frozen=True)
class Penalty:
    """
    Convex penalty c(p) on priors.

    ``linear``: sum_c weights[c] * p_c. ``relative_entropy``:
    scale * KL(p || reference). ``table``: values sampled at explicit
    priors; the infimum is then taken over the table only.
    """
    form: str = "zero"
    weights: Dict[str, float] = field(default_factory=dict)
    scale: float = 1.0
    reference: Optional[ProbabilityVector] = None
    table: Tuple[Tuple[ProbabilityVector, float], ...] = ()

    def __post_init__(self):
        if self.form not in PENALTY_FORMS:
            raise OutOfRange(f"unknown penalty form '{self.form}'")
        if self.form == "relative_entropy" and self.reference is None:
            raise OutOfRange("relative entropy penalty needs a reference prior")
        if self.form == "table" and not self.table:
            raise OutOfRange("table penalty needs at least one entry")

    @classmethod
    def from_dict(cls, data: dict) -> "Penalty":
        """Build from a spec entry; tables are lists of {"prior", "value"}."""
        reference = data.get("reference")
        table = tuple(
            (ProbabilityVector(dict(entry["prior"])), float(entry["value"]))
            for entry in data.get("table", [])
        )
        return cls(
            form=data.get("form", "zero"),
            weights=dict(data.get("weights", {})),
            scale=float(data.get("scale", 1.0)),
            reference=ProbabilityVector(dict(reference)) if reference else None,
            table=table,
        )

    def __call__(self, p: ProbabilityVector) -> float:
        if self.form == "zero":
            return 0.0
        if self.form == "linear":
            return sum(self.weights.get(c, 0.0) * p[c] for c in p.weights)
        if self.form == "relative_entropy":
            total = 0.0
            for c, q in p.weights.items():
                if q <= 0:
                    continue
                ref = self.reference[c]
                if ref <= 0:
                    return math.inf
                total += q * math.log(q / ref)
            return self.scale * total
        for prior, value in self.table:
            if all(abs(prior[c] - p[c]) <= CAPACITY_TOL for c in p.weights):
                return value
        return math.inf


def variational_expected_utility(
    act: Act,
    priors: PriorSet,
    penalty: Penalty,
    u: UtilityFunction = LINEAR,
    grid: int = DEFAULT_PRIOR_GRID,
) -> float:
    """inf over priors of E_p u(f) + c(p), on vertices plus a grid.

    A table penalty restricts the infimum to its own sampled priors.
    """
    if penalty.form == "table":
        candidates = [p for p, _ in penalty.table if priors.contains(p)]
    else:
        candidates = priors.vertices() + priors.grid(grid)
    if not candidates:
        raise EmptyPriorSet("no prior of the set is sampled by the penalty")
    costs = [penalty(p) for p in candidates]
    finite = [c for c in costs if math.isfinite(c)]
    if not finite or min(finite) < -CAPACITY_TOL:
        raise OutOfRange("penalty must be non-negative on the prior set")
    if min(finite) > CAPACITY_TOL:
        raise OutOfRange(
            f"penalty must vanish somewhere on the prior set, min is {min(finite)}"
        )
    return min(
        classical_expected_utility(act, p, u) + c
        for p, c in zip(candidates, costs)
    )


TRANSFORM_FORMS = ("identity", "power", "exponential", "table")


@dataclass(frozen=True)
class Transformation:
    """
    Increasing transformation phi applied to first-order expected utility.

    ``power``: x**theta, theta in (0, 1]. ``exponential``:
    (1 - exp(-theta x)) / theta. ``table``: piecewise linear through
    increasing (x, phi(x)) knots.
    """
    form: str = "identity"
    theta: Optional[float] = None
    knots: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.form not in TRANSFORM_FORMS:
            raise OutOfRange(f"unknown transformation form '{self.form}'")
        if self.form == "power" and not (self.theta and 0 < self.theta <= 1):
            raise OutOfRange("power transformation needs theta in (0, 1]")
        if self.form == "exponential" and not (self.theta and self.theta > 0):
            raise OutOfRange("exponential transformation needs theta > 0")
        if self.form == "table":
            xs = [x for x, _ in self.knots]
            ys = [y for _, y in self.knots]
            if len(xs) < 2 or np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
                raise OutOfRange("table transformation must be strictly increasing")

    @classmethod
    def from_dict(cls, data: dict) -> "Transformation":
        return cls(
            form=data.get("form", "identity"),
            theta=data.get("theta"),
            knots=tuple(tuple(k) for k in data.get("knots", ())),
        )

    def to_dict(self) -> dict:
        data = {"form": self.form}
        if self.theta is not None:
            data["theta"] = self.theta
        if self.knots:
            data["knots"] = [list(k) for k in self.knots]
        return data

    def __call__(self, x: float) -> float:
        if self.form == "identity":
            return x
        if self.form == "power":
            return max(x, 0.0) ** self.theta
        if self.form == "exponential":
            return -math.expm1(-self.theta * x) / self.theta
        xs, ys = zip(*self.knots)
        return float(np.interp(x, xs, ys))


@dataclass(frozen=True)
class SecondOrderPrior:
    """
    Discrete distribution mu over first-order priors.
    """
    priors: Tuple[ProbabilityVector, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "priors", tuple(self.priors))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.priors) != len(self.weights) or not self.priors:
            raise InvalidDistribution("need one weight per prior")
        if any(w < 0 for w in self.weights):
            raise InvalidDistribution(f"negative weight in {self.weights}")
        if abs(sum(self.weights) - 1.0) > CAPACITY_TOL:
            raise InvalidDistribution(
                f"second-order weights sum to {sum(self.weights)!r}, not 1"
            )

    @classmethod
    def point_mass(cls, p: ProbabilityVector) -> "SecondOrderPrior":
        return cls((p,), (1.0,))

    @classmethod
    def uniform(cls, priors: Sequence[ProbabilityVector]) -> "SecondOrderPrior":
        return cls(tuple(priors), tuple(1.0 / len(priors) for _ in priors))


def second_order_expected_utility(
    act: Act,
    mu: SecondOrderPrior,
    phi: Transformation = Transformation(),
    u: UtilityFunction = LINEAR,
) -> float:
    """E_mu phi(E_p u(f))."""
    return sum(
        w * phi(classical_expected_utility(act, p, u))
        for p, w in zip(mu.priors, mu.weights)
    )
