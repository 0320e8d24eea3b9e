"""Exact data model: variables, events, neighborhoods, local-lemma conditions.

All probabilities and condition bounds are `fractions.Fraction` values and
every comparison is exact; no float enters any correctness-bearing path.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator, Sequence

from .errors import BudgetRefused, ModelError

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions; reject floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise ModelError(f"expected an exact rational, got {value!r}")


@dataclass(frozen=True)
class VariableSpec:
    """A finite-range variable with an exact rational distribution."""

    index: int
    distribution: tuple[Fraction, ...]

    def __post_init__(self):
        dist = tuple(as_fraction(p) for p in self.distribution)
        object.__setattr__(self, "distribution", dist)
        if self.index < 0:
            raise ModelError(f"variable index must be >= 0, got {self.index}")
        if not dist:
            raise ModelError(f"variable {self.index}: empty distribution")
        if any(p < 0 for p in dist):
            raise ModelError(f"variable {self.index}: negative probability")
        if sum(dist) != ONE:
            raise ModelError(
                f"variable {self.index}: distribution sums to {sum(dist)}, not 1")

    @property
    def range_size(self) -> int:
        return len(self.distribution)


def uniform_bit(index: int) -> VariableSpec:
    return VariableSpec(index, (Fraction(1, 2), Fraction(1, 2)))


@dataclass(frozen=True)
class Event:
    """An undesirable event: a set of forbidden value tuples over some variables.

    `vbl` is strictly increasing; each forbidden tuple is aligned with it.
    """

    index: int
    vbl: tuple[int, ...]
    forbidden: frozenset[tuple[int, ...]]

    def __post_init__(self):
        vbl = tuple(self.vbl)
        object.__setattr__(self, "vbl", vbl)
        object.__setattr__(self, "forbidden",
                           frozenset(tuple(t) for t in self.forbidden))
        if self.index < 0:
            raise ModelError(f"event index must be >= 0, got {self.index}")
        if not vbl:
            raise ModelError(f"event {self.index}: empty variable list")
        if any(a >= b for a, b in zip(vbl, vbl[1:])):
            raise ModelError(f"event {self.index}: vbl not strictly increasing")
        for t in self.forbidden:
            if len(t) != len(vbl):
                raise ModelError(
                    f"event {self.index}: tuple {t} has wrong arity")


def clause_event(index: int, vbl: Sequence[int], falsifying: Sequence[int]) -> Event:
    """A CNF-clause-style event forbidding exactly one assignment of `vbl`."""
    return Event(index, tuple(vbl), frozenset({tuple(falsifying)}))


@dataclass(frozen=True)
class ConstraintSystem:
    """Immutable bundle of variables, events, and the variable/event incidence."""

    variables: tuple[VariableSpec, ...]
    events: tuple[Event, ...]
    var_to_events: dict[int, tuple[int, ...]]
    neighbor_sets: tuple[frozenset[int], ...]

    @classmethod
    def build(cls, variables: Sequence[VariableSpec],
              events: Sequence[Event]) -> "ConstraintSystem":
        variables = tuple(variables)
        events = tuple(events)
        for pos, var in enumerate(variables):
            if var.index != pos:
                raise ModelError(
                    f"variable at position {pos} has index {var.index}")
        incidence: dict[int, list[int]] = {}
        for pos, ev in enumerate(events):
            if ev.index != pos:
                raise ModelError(f"event at position {pos} has index {ev.index}")
            for v in ev.vbl:
                if v >= len(variables):
                    raise ModelError(
                        f"event {ev.index} uses unknown variable {v}")
                incidence.setdefault(v, []).append(ev.index)
            n_range = tuple(variables[v].range_size for v in ev.vbl)
            for t in ev.forbidden:
                if any(not 0 <= x < r for x, r in zip(t, n_range)):
                    raise ModelError(
                        f"event {ev.index}: tuple {t} out of variable range")
        var_to_events = {v: tuple(ixs) for v, ixs in incidence.items()}
        neighbor_sets = []
        for ev in events:
            seen: set[int] = set()
            for v in ev.vbl:
                seen.update(var_to_events[v])
            neighbor_sets.append(frozenset(seen))
        return cls(variables, events, var_to_events, tuple(neighbor_sets))

    def is_true(self, event_index: int, assignment: Sequence[int]) -> bool:
        ev = self.events[event_index]
        return tuple(assignment[v] for v in ev.vbl) in ev.forbidden

    def true_events(self, assignment: Sequence[int]) -> list[int]:
        return [i for i in range(len(self.events)) if self.is_true(i, assignment)]

    def assignments(self) -> Iterator[tuple[int, ...]]:
        """Every full assignment, lexicographic in variable-index order."""
        ranges = [range(v.range_size) for v in self.variables]
        return product(*ranges)

    def assignment_probability(self, assignment: Sequence[int]) -> Fraction:
        p = ONE
        for var, value in zip(self.variables, assignment):
            p *= var.distribution[value]
        return p


def neighbors(system: ConstraintSystem, i: int) -> tuple[int, ...]:
    """Indices of events sharing a variable with event i, including i itself."""
    if not 0 <= i < len(system.events):
        raise ModelError(f"no event with index {i}")
    return tuple(sorted(system.neighbor_sets[i]))


def event_probability(event: Event, system: ConstraintSystem) -> Fraction:
    """Probability of the event under the product measure, summed exactly."""
    total = ZERO
    for t in event.forbidden:
        p = ONE
        for v, value in zip(event.vbl, t):
            var = system.variables[v]
            if not 0 <= value < var.range_size:
                raise ModelError(
                    f"event {event.index}: value {value} out of range for x{v}")
            p *= var.distribution[value]
        total += p
    return total


@dataclass(frozen=True)
class LLLParams:
    """Per-event weights z_i in (0,1) plus a slack factor alpha in (0,1].

    alpha == 1 selects the plain finite condition; alpha < 1 the strengthened
    one required for event streams.
    """

    z: tuple[Fraction, ...]
    alpha: Fraction = ONE

    def __post_init__(self):
        z = tuple(as_fraction(x) for x in self.z)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if any(not ZERO < x < ONE for x in z):
            raise ModelError("every z must lie strictly between 0 and 1")
        if not ZERO < self.alpha <= ONE:
            raise ModelError("alpha must lie in (0, 1]")

    @classmethod
    def constant(cls, z: Fraction, count: int, alpha: Fraction = ONE) -> "LLLParams":
        return cls((as_fraction(z),) * count, alpha)


@dataclass(frozen=True)
class StreamParams:
    """Event-indexed weights for an infinite family: z(i) computable per index."""

    z_of: Callable[[int], Fraction]
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if not ZERO < self.alpha <= ONE:
            raise ModelError("alpha must lie in (0, 1]")

    @classmethod
    def constant(cls, z: Fraction, alpha: Fraction) -> "StreamParams":
        z = as_fraction(z)
        if not ZERO < z < ONE:
            raise ModelError("z must lie strictly between 0 and 1")
        return cls(lambda _i: z, alpha)

    def prefix(self, k: int) -> LLLParams:
        return LLLParams(tuple(as_fraction(self.z_of(i)) for i in range(k)),
                         self.alpha)


@dataclass(frozen=True)
class ConditionEntry:
    index: int
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


@dataclass(frozen=True)
class ConditionReport:
    entries: tuple[ConditionEntry, ...]
    alpha: Fraction
    avoid_bound: Fraction

    @property
    def holds(self) -> bool:
        return all(e.holds for e in self.entries)


def _condition_entries(system: ConstraintSystem, params: LLLParams,
                       alpha: Fraction) -> ConditionReport:
    if len(params.z) != len(system.events):
        raise ModelError(
            f"got {len(params.z)} weights for {len(system.events)} events")
    # group repeated weights so products exponentiate instead of multiplying
    # once per neighbor; small-int ids avoid hashing Fractions in the hot loop
    ids: dict[tuple[int, int], int] = {}
    id_of: list[int] = []
    complements: list[Fraction] = []
    for z in params.z:
        key = (z.numerator, z.denominator)
        if key not in ids:
            ids[key] = len(complements)
            complements.append(ONE - z)
        id_of.append(ids[key])
    power_cache: dict[tuple[int, int], Fraction] = {}

    def factor(zid: int, count: int) -> Fraction:
        try:
            return power_cache[(zid, count)]
        except KeyError:
            value = complements[zid] ** count
            power_cache[(zid, count)] = value
            return value

    entries = []
    for i, ev in enumerate(system.events):
        lhs = event_probability(ev, system)
        rhs = alpha * params.z[i]
        counts: dict[int, int] = {}
        for j in system.neighbor_sets[i]:
            if j != i:
                zid = id_of[j]
                counts[zid] = counts.get(zid, 0) + 1
        for zid, count in counts.items():
            rhs *= factor(zid, count)
        entries.append(ConditionEntry(i, lhs, rhs))
    bound_counts: dict[int, int] = {}
    for zid in id_of:
        bound_counts[zid] = bound_counts.get(zid, 0) + 1
    bound = ONE
    for zid, count in bound_counts.items():
        bound *= factor(zid, count)
    return ConditionReport(tuple(entries), alpha, bound)


def check_finite_lll(system: ConstraintSystem, params: LLLParams) -> ConditionReport:
    """Per-event exact check Pr[A_i] <= z_i * prod_{j in N(i), j != i} (1 - z_j).

    The report also carries prod_i (1 - z_i), the guaranteed lower bound on
    the mass of assignments avoiding every event when the condition holds.
    """
    return _condition_entries(system, params, ONE)


def check_computable_lll(system: ConstraintSystem,
                         params: LLLParams) -> ConditionReport:
    """The strengthened per-event check with the extra factor alpha < 1."""
    if params.alpha >= ONE:
        raise ModelError("the strengthened condition requires alpha < 1")
    return _condition_entries(system, params, params.alpha)


_ENUM_GUARD = 1 << 22


def avoiding_probability(system: ConstraintSystem,
                         guard: int = _ENUM_GUARD) -> Fraction:
    """Exact mass of assignments under which no event is true.

    Brute-force enumeration over the full assignment space; desk scale only.
    """
    space = 1
    for var in system.variables:
        space *= var.range_size
    if space > guard:
        raise BudgetRefused(
            f"assignment space of size {space} exceeds guard {guard}")
    total = ZERO
    for assignment in system.assignments():
        if not any(system.is_true(i, assignment)
                   for i in range(len(system.events))):
            total += system.assignment_probability(assignment)
    return total


def avoiding_assignments(system: ConstraintSystem,
                         guard: int = _ENUM_GUARD) -> list[tuple[int, ...]]:
    """All assignments avoiding every event, by brute force (desk scale)."""
    space = 1
    for var in system.variables:
        space *= var.range_size
    if space > guard:
        raise BudgetRefused(
            f"assignment space of size {space} exceeds guard {guard}")
    return [a for a in system.assignments()
            if not any(system.is_true(i, a) for i in range(len(system.events)))]
