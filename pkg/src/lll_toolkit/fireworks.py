"""The fireworks game and the function-beating protocol built on it.

A buyer tests fireworks one by one and must either catch a bad one during a
test or take a good one home. Choosing a uniformly random test count k in
0..n-1 wins against every seller strategy with probability exactly 1 - 1/n,
because the seller learns nothing from watching tests happen.

The same schedule drives a total-function construction: treat evaluations
f(0), f(1), ... of a budgeted oracle as fireworks (good = the computation
halts), test them while writing zeros into a growing table, and on the
take step write f(u)+1, beating f at u whenever f is total.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Optional, Protocol, Sequence

from .errors import ModelError
from .model import ONE, ZERO, as_fraction
from .tape import Tape


@dataclass(frozen=True)
class GameConfig:
    """n-way uniform test count; seller_k is the number of good fireworks
    sold before the bad one (None means every firework is good)."""

    n: int
    seller_k: Optional[int]

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be >= 1")
        if self.seller_k is not None and self.seller_k < 0:
            raise ModelError("seller_k must be >= 0 (or None)")


@dataclass(frozen=True)
class PlayOutcome:
    outcome: str              # "win" | "lose"
    k: int
    tests_made: int
    trace: tuple[str, ...]    # what the seller observes, in order


def _uniform(n: int) -> tuple[Fraction, ...]:
    return (Fraction(1, n),) * n


def play_with_k(config: GameConfig, k: int) -> PlayOutcome:
    """Deterministic outcome for a fixed test count k."""
    bad = config.seller_k
    if bad is None or bad > k:
        # k clean tests, then take the next (good) firework home
        trace = ("test",) * k + ("take",)
        return PlayOutcome("win", k, k, trace)
    if bad == k:
        trace = ("test",) * k + ("take",)
        return PlayOutcome("lose", k, k, trace)
    # the bad firework explodes during test number bad + 1
    trace = ("test",) * (bad + 1) + ("sue",)
    return PlayOutcome("win", k, bad + 1, trace)


def play_game(config: GameConfig, tape: Tape) -> PlayOutcome:
    """Draw k uniformly from the tape and play."""
    k = tape.draw(0, _uniform(config.n))
    return play_with_k(config, k)


def loss_probability(n: int, seller_k: Optional[int]) -> Fraction:
    """Exact loss probability against a fixed seller, summed over k."""
    total = ZERO
    for k in range(n):
        if play_with_k(GameConfig(n, seller_k), k).outcome == "lose":
            total += Fraction(1, n)
    return total


def win_probability_exact(n: int) -> Fraction:
    """1 - 1/n: the worst case over all seller strategies, exactly."""
    if n < 1:
        raise ModelError("n must be >= 1")
    worst = max((loss_probability(n, K) for K in range(2 * n)),
                default=ZERO)
    worst = max(worst, loss_probability(n, None))
    return ONE - worst


def sequential_take_distribution(n: int) -> tuple[Fraction, ...]:
    """Take-time law of the stepwise strategy: take the first firework with
    probability 1/n, else test, then take the next with 1/(n-1), and so on.

    Equals the uniform law on 0..n-1; the equality is asserted exactly.
    """
    if n < 1:
        raise ModelError("n must be >= 1")
    probs = []
    carried = ONE
    for j in range(n):
        take = Fraction(1, n - j)
        probs.append(carried * take)
        carried *= ONE - take
    return tuple(probs)


class FnOracle(Protocol):
    """Budgeted evaluator: value of f(i), or None if it has not halted yet.

    Must be deterministic per (i, budget) and stable: once a value is
    returned at some budget it is returned at every larger budget.
    """

    def evaluate(self, i: int, budget: int) -> Optional[int]: ...


@dataclass(frozen=True)
class ConstantOracle:
    value: int
    cost: int = 1

    def evaluate(self, i: int, budget: int) -> Optional[int]:
        return self.value if budget >= self.cost else None


@dataclass(frozen=True)
class IdentityOracle:
    cost: int = 1

    def evaluate(self, i: int, budget: int) -> Optional[int]:
        return i if budget >= self.cost else None


@dataclass(frozen=True)
class DivergeAtOracle:
    """Behaves like `base` except on the listed inputs, where it never halts."""

    diverge: frozenset
    base: FnOracle = IdentityOracle()

    def evaluate(self, i: int, budget: int) -> Optional[int]:
        if i in self.diverge:
            return None
        return self.base.evaluate(i, budget)


TOOK = "took_good"            # some g(u) = f(u) + 1 is set
STALLED_TAKE = "stalled_take"  # took a firework that has not halted yet
STALLED_TEST = "stalled_test"  # testing a computation that has not halted yet


@dataclass(frozen=True)
class BeatResult:
    status: str
    table: dict
    k: int
    tests_completed: int
    frontier: int

    def value(self, u: int) -> int:
        return self.table.get(u, 0)

    def beats(self, oracle: FnOracle, probe_budget: int = 1 << 16) -> bool:
        """Does some table entry strictly exceed f there? (test helper)"""
        for u, g in self.table.items():
            fv = oracle.evaluate(u, probe_budget)
            if fv is not None and g > fv:
                return True
        return False


def beat_with_k(oracle: FnOracle, k: int,
                max_budget: int = 1 << 16) -> BeatResult:
    """Deterministic take/test protocol for a fixed test count k.

    Testing the firework at position v probes f(v) with doubling budgets,
    writing one more zero g(v), g(v+1), ... per failed probe; when the probe
    halts, the next firework sits just past the zeros. Taking runs the probe
    the same way and writes g(v) = f(v) + 1 on success.
    """
    table: dict[int, int] = {}
    frontier = 0
    tests = 0
    while True:
        if tests == k:
            budget = 1
            while budget <= max_budget:
                value = oracle.evaluate(frontier, budget)
                if value is not None:
                    table[frontier] = value + 1
                    return BeatResult(TOOK, table, k, tests, frontier)
                budget *= 2
            return BeatResult(STALLED_TAKE, table, k, tests, frontier)
        # test the firework at the frontier
        position = frontier
        table[position] = 0
        budget = 1
        while True:
            value = oracle.evaluate(frontier, budget)
            if value is not None:
                break
            if budget > max_budget:
                return BeatResult(STALLED_TEST, table, k, tests, frontier)
            position += 1
            table[position] = 0
            budget *= 2
        frontier = position + 1
        tests += 1


def beat_function(oracle: FnOracle, epsilon, tape: Tape,
                  max_budget: int = 1 << 16) -> BeatResult:
    """Beat a (total) oracle with probability at least 1 - epsilon.

    epsilon is reduced to 1/n with n = ceil(1/epsilon); k is drawn uniformly
    from the tape and handed to the deterministic protocol.
    """
    n = epsilon_to_n(epsilon)
    k = tape.draw(0, _uniform(n))
    return beat_with_k(oracle, k, max_budget)


def epsilon_to_n(epsilon) -> int:
    epsilon = as_fraction(epsilon)
    if not ZERO < epsilon <= ONE:
        raise ModelError("epsilon must lie in (0, 1]")
    return max(1, ceil(ONE / epsilon))


def cantor_pair(row: int, column: int) -> int:
    s = row + column
    return s * (s + 1) // 2 + column


def cantor_unpair(z: int) -> tuple[int, int]:
    s = 0
    while (s + 1) * (s + 2) // 2 <= z:
        s += 1
    column = z - s * (s + 1) // 2
    return s - column, column


@dataclass(frozen=True)
class BeatManyResult:
    rows: tuple[BeatResult, ...]
    row_ns: tuple[int, ...]

    def g(self, index: int) -> int:
        """The combined table through the pairing bijection."""
        row, column = cantor_unpair(index)
        if row < len(self.rows):
            return self.rows[row].value(column)
        return 0


def beat_many(oracles: Sequence[FnOracle], epsilon, tape: Tape,
              max_budget: int = 1 << 16) -> BeatManyResult:
    """One row per oracle: row i gets error share epsilon * 2^-(i+1), so the
    shares sum to at most epsilon over all rows.

    Rows are driven round-robin with doubling budgets; the oracles are
    deterministic and stable, so the finished rows coincide with running
    each protocol independently at the final budget.
    """
    epsilon = as_fraction(epsilon)
    ns = []
    ks = []
    for i, _ in enumerate(oracles):
        n_i = epsilon_to_n(epsilon * Fraction(1, 2 ** (i + 1)))
        ns.append(n_i)
        ks.append(tape.draw(i, _uniform(n_i)))
    rows: list[Optional[BeatResult]] = [None] * len(oracles)
    budget = 1
    while budget <= max_budget:
        for i, oracle in enumerate(oracles):
            if rows[i] is not None and rows[i].status == TOOK:
                continue
            rows[i] = beat_with_k(oracle, ks[i], budget)
        if all(r is not None and r.status == TOOK for r in rows):
            break
        budget *= 2
    return BeatManyResult(tuple(r for r in rows if r is not None), tuple(ns))


def ones_positions(table_values: Sequence[int]) -> list[int]:
    """Positions of the 1s in the bit sequence '1, g(0) zeros, 1, g(1)
    zeros, ...' derived from a table prefix."""
    positions = []
    cursor = 0
    for g in table_values:
        positions.append(cursor)
        cursor += 1 + g
    return positions
