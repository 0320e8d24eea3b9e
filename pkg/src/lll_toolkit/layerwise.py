"""Layerwise machinery: effective stability horizons for output cells, exact
output-distribution intervals, and extraction of computable branches from
lower-approximable distributions.

The horizon certificate for a cell combines two exactly-checked tail bounds:
a step count t after which the first k events are all false except with small
probability (Markov on the expected-steps bound), and a tree-size bound
showing that a later resampling of any event touching the cell requires a
witness tree of at least m vertices, which the strengthened condition makes
(z/(1-z)) * alpha^m unlikely.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Iterator, Optional, Protocol, Sequence

from .errors import (BudgetRefused, ContractViolation, ExtractionTimeout,
                     FamilyError, ModelError, VerificationError)
from .model import (ConstraintSystem, ONE, StreamParams, ZERO,
                    as_fraction)
from .tape import Tape
from .engine import SATISFIED, run_finite, suggested_max_steps
from .exhaustive import DEFAULT_BRANCH_GUARD, census_runs
from .families import InfiniteFamily
from .galton_watson import expected_steps_bound

DEFAULT_BIT_GUARD = 40


@dataclass(frozen=True)
class HorizonTerm:
    """Derivation record for one event touching the cell."""

    event: int
    m: int        # minimal tree size with (z/(1-z)) * alpha^m <= budget share
    k: int        # prefix covering the radius-m neighbor ball of the event
    t: int        # Markov step bound for that prefix


@dataclass(frozen=True)
class StabilityCertificate:
    """After step N the cell changes with probability at most delta."""

    cell: int
    delta: Fraction
    N: int
    terms: tuple[HorizonTerm, ...]
    budget_share: Fraction  # delta / (2 * number of events touching the cell)

    def to_line(self) -> str:
        """Text record with the derivation of the binding term."""
        from .formats import format_rational
        if self.terms:
            worst = max(self.terms, key=lambda t: t.t)
            m, k = worst.m, worst.k
        else:
            m = k = 0
        return (f"cell={self.cell} delta={format_rational(self.delta)} "
                f"N={self.N} m={m} k={k}")

    def total_bound(self, params: StreamParams) -> Fraction:
        """Exact sum of both tail terms over all events; must be <= delta."""
        total = ZERO
        for term in self.terms:
            z = as_fraction(params.z_of(term.event))
            total += z / (ONE - z) * params.alpha ** term.m
            if term.t > 0:
                bound = expected_steps_bound(
                    [params.z_of(i) for i in range(term.k)])
                total += bound / term.t
        return total


def _neighbor_ball(family: InfiniteFamily, event: int, radius: int,
                   guard: int = 100_000) -> set[int]:
    ball = {event}
    frontier = [event]
    for _ in range(radius):
        new = []
        for e in frontier:
            for j in family.neighbors_of_event(e):
                if j not in ball:
                    ball.add(j)
                    new.append(j)
                    if len(ball) > guard:
                        raise FamilyError(
                            f"neighbor ball around event {event} exceeds "
                            f"{guard} events")
        frontier = new
    return ball


def stability_horizon(family: InfiniteFamily, params: StreamParams, cell: int,
                      delta, ball_guard: int = 100_000) -> StabilityCertificate:
    """Certified step count N with Pr[cell changes after step N] <= delta.

    The delta budget is split evenly: each event touching the cell gets
    delta/(2*count) for its tree-size term and the same for its Markov term.
    All the defining inequalities are checked in exact rational arithmetic.
    """
    delta = as_fraction(delta)
    if delta <= ZERO:
        raise ModelError("delta must be positive")
    if delta >= ONE:
        return StabilityCertificate(cell, delta, 0, (), delta)
    if params.alpha >= ONE:
        raise ModelError("stability horizons require alpha < 1")
    touching = family.events_of_variable(cell)
    if not touching:
        return StabilityCertificate(cell, delta, 0, (), delta)
    share = delta / (2 * len(touching))
    terms = []
    horizon = 0
    for j in touching:
        zj = as_fraction(params.z_of(j))
        ratio = zj / (ONE - zj)
        m = 0
        power = ONE
        while ratio * power > share:
            m += 1
            power *= params.alpha
        ball = _neighbor_ball(family, j, m, ball_guard)
        k = max(ball) + 1
        bound = expected_steps_bound([params.z_of(i) for i in range(k)])
        t = ceil(bound / share) if bound > ZERO else 0
        terms.append(HorizonTerm(j, m, k, t))
        horizon = max(horizon, t)
    cert = StabilityCertificate(cell, delta, horizon, tuple(terms), share)
    if cert.total_bound(params) > delta:
        raise ModelError("internal: certificate bound exceeds delta")  # pragma: no cover
    return cert


def approx_output_distribution(system: ConstraintSystem, prefix: Sequence[int],
                               delta, *, bit_guard: int = DEFAULT_BIT_GUARD,
                               branch_guard: int = DEFAULT_BRANCH_GUARD,
                               start_bits: int | None = None
                               ) -> tuple[Fraction, Fraction]:
    """An interval [lo, hi] containing the probability that the final
    assignment starts with `prefix`, with hi - lo <= delta.

    Runs the full computation tree over explicit coins, deepening the coin
    budget until the unresolved mass (which is all that separates hi from
    lo) is small enough; refuses rather than approximate past the guards.
    """
    delta = as_fraction(delta)
    if delta <= ZERO:
        raise ModelError("delta must be positive")
    prefix = tuple(prefix)
    if len(prefix) > len(system.variables):
        raise ModelError("prefix longer than the variable list")
    for pos, value in enumerate(prefix):
        if not 0 <= value < system.variables[pos].range_size:
            raise ModelError(f"prefix value {value} out of range at cell {pos}")
    budget = start_bits if start_bits is not None else max(
        8, 2 * len(system.variables))
    while True:
        census = census_runs(system, budget, branch_guard=branch_guard,
                             want_trees=False)
        lo = ZERO
        for assignment, weight in census.output_mass.items():
            if assignment[:len(prefix)] == prefix:
                lo += weight
        hi = lo + census.unresolved_mass
        if hi - lo <= delta:
            return lo, hi
        if budget >= bit_guard:
            raise BudgetRefused(
                f"cannot reach width {delta} within {bit_guard} coins "
                f"(unresolved mass {census.unresolved_mass})")
        budget = min(bit_guard, budget * 2)


class QOracle(Protocol):
    """Lower approximations q_n(u) of a tree measure q(u), non-decreasing in n."""

    def lower_bound(self, prefix: tuple[int, ...], n: int) -> Fraction: ...

    def arity(self, position: int) -> int: ...


class TableQOracle:
    """A finite-support measure with the schedule q_n = q * n/(n+1).

    `atoms` maps infinite branches, given as (pattern, period_start), to
    masses; q(u) sums the atoms whose branch extends u. Plain dict-of-prefix
    construction is also accepted via `from_prefix_masses` for irregular
    tables.
    """

    def __init__(self, atoms: dict[str, Fraction], arities: int = 2):
        self.atoms = {p: as_fraction(m) for p, m in atoms.items()}
        self._arity = arities

    def arity(self, position: int) -> int:
        return self._arity

    def _branch_value(self, pattern: str, position: int) -> int:
        return int(pattern[position % len(pattern)])

    def measure(self, prefix: tuple[int, ...]) -> Fraction:
        total = ZERO
        for pattern, mass in self.atoms.items():
            if all(self._branch_value(pattern, i) == v
                   for i, v in enumerate(prefix)):
                total += mass
        return total

    def lower_bound(self, prefix: tuple[int, ...], n: int) -> Fraction:
        return self.measure(prefix) * Fraction(n, n + 1)


class SystemQOracle:
    """The solver's output distribution as a lower-approximable measure.

    q(u) is the probability that the final assignment starts with u;
    q_n(u) is the resolved mass at coin budget `base + step * n`, which can
    only grow with the budget.
    """

    def __init__(self, system: ConstraintSystem, base_bits: int | None = None,
                 step_bits: int = 4, bit_guard: int = DEFAULT_BIT_GUARD,
                 branch_guard: int = DEFAULT_BRANCH_GUARD):
        self.system = system
        self.base_bits = (base_bits if base_bits is not None
                          else max(8, 2 * len(system.variables)))
        self.step_bits = step_bits
        self.bit_guard = bit_guard
        self.branch_guard = branch_guard
        self._census_cache: dict[int, object] = {}
        self._best: dict[tuple[int, ...], Fraction] = {}

    def arity(self, position: int) -> int:
        return self.system.variables[position].range_size

    def _census(self, budget: int):
        if budget not in self._census_cache:
            self._census_cache[budget] = census_runs(
                self.system, budget, branch_guard=self.branch_guard,
                want_trees=False)
        return self._census_cache[budget]

    def lower_bound(self, prefix: tuple[int, ...], n: int) -> Fraction:
        budget = min(self.bit_guard, self.base_bits + self.step_bits * n)
        census = self._census(budget)
        lo = ZERO
        for assignment, weight in census.output_mass.items():
            if assignment[:len(prefix)] == tuple(prefix):
                lo += weight
        best = max(self._best.get(tuple(prefix), ZERO), lo)
        self._best[tuple(prefix)] = best
        return best

    def unresolved(self, n: int) -> Fraction:
        budget = min(self.bit_guard, self.base_bits + self.step_bits * n)
        return self._census(budget).unresolved_mass


def extract_from_positive_probability(q: QOracle, r, w: Sequence[int] = (),
                                      max_rounds: int = 256,
                                      max_cells: int | None = None
                                      ) -> Iterator[int]:
    """Stream the branch through w whose measure exceeds the threshold r.

    Valid when the target branch has measure > r and q(w) < 2r: at each
    prefix exactly one child's measure can exceed r (two would push the
    parent past 2r), so dovetailing the children's lower bounds with rising
    precision pins down the next cell. The 2r precondition is watched
    opportunistically and a contract violation aborts the stream.
    """
    r = as_fraction(r)
    if r <= ZERO:
        raise ModelError("threshold r must be positive")
    prefix = tuple(w)
    emitted = 0
    while max_cells is None or emitted < max_cells:
        chosen = None
        for n in range(1, max_rounds + 1):
            if q.lower_bound(prefix, n) > 2 * r:
                raise ContractViolation(
                    f"q({''.join(map(str, prefix))or 'empty'}) exceeds 2r = {2 * r}")
            winners = [a for a in range(q.arity(len(prefix)))
                       if q.lower_bound(prefix + (a,), n) > r]
            if len(winners) > 1:
                raise ContractViolation(
                    f"two children exceed r = {r} at prefix {prefix}")
            if winners:
                chosen = winners[0]
                break
        if chosen is None:
            raise ExtractionTimeout(
                f"no child exceeded r = {r} within {max_rounds} rounds "
                f"at prefix {prefix}")
        prefix += (chosen,)
        emitted += 1
        yield chosen


def _extract_positive_step(q: QOracle, prefix: tuple[int, ...],
                           max_rounds: int) -> tuple[int, Fraction]:
    for n in range(1, max_rounds + 1):
        for a in range(q.arity(len(prefix))):
            bound = q.lower_bound(prefix + (a,), n)
            if bound > ZERO:
                return a, bound
    raise ExtractionTimeout(
        f"no child with positive lower bound within {max_rounds} rounds "
        f"at prefix {prefix}")


def extract_positive_branch(q: QOracle, max_rounds: int = 256,
                            max_cells: int | None = None,
                            bounds_out: list | None = None) -> Iterator[int]:
    """Stream a branch along which the measure stays provably positive.

    Dovetail schedule: precision rounds ascending, children in value order
    within a round; the first child with a strictly positive lower bound is
    emitted. Recorded bounds (one per emitted cell) land in `bounds_out`.
    """
    prefix: tuple[int, ...] = ()
    emitted = 0
    while max_cells is None or emitted < max_cells:
        value, bound = _extract_positive_step(q, prefix, max_rounds)
        if bounds_out is not None:
            bounds_out.append(bound)
        prefix += (value,)
        emitted += 1
        yield value


@dataclass(frozen=True)
class PrefixResult:
    """Cells 0..L-1 of an assignment, with either a certificate or a report.

    Exact mode: `cell_bounds[i]` is a proven positive lower bound on the
    output mass extending values[:i+1], and `interval` encloses the mass of
    the full returned prefix within the requested width. Any event fully
    decided by the prefix is false under it.

    Empirical mode: `frequencies[i]` is the fraction of trials whose final
    value at cell i equals values[i]; a confidence report, not a proof.
    """

    values: tuple[int, ...]
    mode: str
    cell_bounds: tuple[Fraction, ...] = ()
    interval: Optional[tuple[Fraction, Fraction]] = None
    frequencies: tuple[Fraction, ...] = ()
    trials: int = 0
    horizon: Optional[int] = None


def _decided_events(system: ConstraintSystem, values: tuple[int, ...]) -> list[int]:
    out = []
    for i, ev in enumerate(system.events):
        if ev.vbl[-1] < len(values):
            out.append(i)
    return out


def compute_assignment_prefix(target, params: Optional[StreamParams], L: int,
                              mode: str = "exact", *, delta=Fraction(1, 64),
                              trials: int = 2000, seed: int = 0,
                              active_k: int | None = None,
                              max_steps: int | None = None,
                              bit_guard: int = DEFAULT_BIT_GUARD,
                              branch_guard: int = DEFAULT_BRANCH_GUARD) -> PrefixResult:
    """Values of cells 0..L-1 of an avoiding assignment.

    `target` is a finite ConstraintSystem, or an InfiniteFamily together
    with `active_k` (how many events to materialize). Exact mode walks the
    output measure with `extract_positive_branch`, so the returned prefix
    carries positive-mass certificates; empirical mode reruns the solver
    over seeded tapes and reports majority values with their stability
    frequencies.
    """
    if isinstance(target, InfiniteFamily):
        if active_k is None:
            raise ModelError("materialization size active_k is required "
                             "for a family target")
        system = target.materialize(active_k)
    else:
        system = target
    if L < 0:
        raise ModelError("prefix length must be >= 0")
    if L > len(system.variables):
        raise ModelError("prefix longer than the variable list")
    if L == 0:
        return PrefixResult((), mode)

    if mode == "exact":
        oracle = SystemQOracle(system, bit_guard=bit_guard,
                               branch_guard=branch_guard)
        bounds: list[Fraction] = []
        values = tuple(extract_positive_branch(oracle, max_cells=L,
                                               bounds_out=bounds))
        interval = approx_output_distribution(system, values, delta,
                                              bit_guard=bit_guard,
                                              branch_guard=branch_guard)
        for i in _decided_events(system, values):
            if system.is_true(i, values):
                raise VerificationError(
                    f"internal: decided event {i} true under the prefix")
        return PrefixResult(values, mode, tuple(bounds), interval)

    if mode == "empirical":
        if trials <= 0:
            raise ModelError("empirical mode needs a positive trial count")
        if max_steps is None:
            if params is not None:
                max_steps = suggested_max_steps(params.prefix(len(system.events)))
            else:
                raise ModelError("empirical mode needs params or max_steps")
        counts = [dict() for _ in range(L)]
        for trial in range(trials):
            result = run_finite(system, Tape(seed=seed + trial), max_steps)
            if result.status != SATISFIED:
                continue
            for cell in range(L):
                v = result.assignment[cell]
                counts[cell][v] = counts[cell].get(v, 0) + 1
        values = []
        freqs = []
        for cell in range(L):
            if not counts[cell]:
                raise VerificationError(
                    "no trial reached a satisfying assignment; "
                    "raise max_steps or trials")
            v, n = max(counts[cell].items(), key=lambda kv: (kv[1], -kv[0]))
            values.append(v)
            freqs.append(Fraction(n, trials))
        return PrefixResult(tuple(values), mode, frequencies=tuple(freqs),
                            trials=trials)

    raise ModelError(f"unknown mode {mode!r}")
