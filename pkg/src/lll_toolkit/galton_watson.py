"""The branching-process side of the analysis.

A spawning process rooted at one event grows a tree: every vertex labeled j
independently attaches a son labeled l, for each neighbor l of j, with
probability z_l. The law of that process dominates witness-tree appearance:
for a tree T with root i,

    Pr[T appears during a run] <= z_i/(1-z_i) * alpha^size(T) * Pr[process yields T]

whenever the (alpha-strengthened) per-event condition holds. This module
computes both sides exactly on systems small enough for exhaustive run
enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ModelError, UnresolvedBranches
from .model import (ConditionReport, ConstraintSystem, LLLParams, ONE, ZERO,
                    as_fraction, check_computable_lll, check_finite_lll)
from .tape import Tape
from .witness import WitnessTree, validate_tree
from .exhaustive import DEFAULT_BRANCH_GUARD, census_runs


@dataclass(frozen=True)
class GWParams:
    """Spawn weights and root for the branching process."""

    root: int
    z: tuple[Fraction, ...]
    alpha: Fraction = ONE

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(as_fraction(x) for x in self.z))
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if any(not ZERO < x < ONE for x in self.z):
            raise ModelError("every z must lie strictly between 0 and 1")
        if not ZERO < self.alpha <= ONE:
            raise ModelError("alpha must lie in (0, 1]")

    @classmethod
    def from_lll(cls, params: LLLParams, root: int) -> "GWParams":
        return cls(root, params.z, params.alpha)


def expected_steps_bound(z: Sequence[Fraction], k: int | None = None) -> Fraction:
    """Sum of z_i/(1-z_i) over the first k events (all of them by default)."""
    values = list(z)[:k if k is not None else len(list(z))]
    total = ZERO
    for zi in values:
        zi = as_fraction(zi)
        total += zi / (ONE - zi)
    return total


def gw_tree_probability(tree: WitnessTree, params: GWParams,
                        system: ConstraintSystem) -> Fraction:
    """Exact probability that the spawning process yields exactly this tree.

    Per vertex: a factor z_l for each neighbor label l attached as a son,
    and (1 - z_l) for each neighbor label not attached.
    """
    if tree.root_label != params.root:
        raise ModelError(
            f"tree root {tree.root_label} does not match params.root {params.root}")
    check = validate_tree(tree, system)
    if not check.valid:
        raise ModelError("; ".join(check.violations))
    if len(params.z) != len(system.events):
        raise ModelError("params.z must cover every event")
    prob = ONE
    for v in range(tree.size):
        son_labels = {tree.labels[w] for w in tree.children(v)}
        for l in sorted(system.neighbor_sets[tree.labels[v]]):
            prob *= params.z[l] if l in son_labels else ONE - params.z[l]
    return prob


def gw_sample(params: GWParams, system: ConstraintSystem, tape: Tape,
              depth_budget: int) -> Optional[WitnessTree]:
    """Sample one tree, breadth-first, spawning neighbors in label order.

    Returns None when a vertex at the depth budget spawns a son (the branch
    is treated as non-terminating at desk scale).
    """
    labels = [params.root]
    parents = [-1]
    depths = [0]
    frontier = [0]
    draw_count = 0
    while frontier:
        next_frontier = []
        for v in frontier:
            for l in sorted(system.neighbor_sets[labels[v]]):
                zl = params.z[l]
                spawned = tape.draw(draw_count, (ONE - zl, zl)) == 1
                draw_count += 1
                if spawned:
                    if depths[v] >= depth_budget:
                        return None
                    labels.append(l)
                    parents.append(v)
                    depths.append(depths[v] + 1)
                    next_frontier.append(len(labels) - 1)
        frontier = next_frontier
    return WitnessTree(tuple(labels), tuple(parents))


@dataclass(frozen=True)
class GWComparisonEntry:
    tree: WitnessTree
    p_mt: Fraction          # exact within-horizon appearance probability
    pending: Fraction       # unresolved mass that could still realize the tree
    gw_probability: Fraction
    bound: Fraction

    @property
    def holds_within_horizon(self) -> bool:
        return self.p_mt <= self.bound

    @property
    def certified(self) -> bool:
        return self.p_mt + self.pending <= self.bound


@dataclass(frozen=True)
class GWComparisonReport:
    entries: tuple[GWComparisonEntry, ...]
    condition: ConditionReport
    gw_totals: dict  # root label -> sum of gw probabilities over seen trees
    unresolved_mass: Fraction
    branch_count: int

    @property
    def holds_within_horizon(self) -> bool:
        return all(e.holds_within_horizon for e in self.entries)

    @property
    def certified(self) -> bool:
        return all(e.certified for e in self.entries)

    @property
    def gw_totals_ok(self) -> bool:
        return all(total <= ONE for total in self.gw_totals.values())


def check_mt_vs_gw(system: ConstraintSystem, params: LLLParams,
                   bit_budget: int,
                   branch_guard: int = DEFAULT_BRANCH_GUARD,
                   require_certified: bool = False) -> GWComparisonReport:
    """Compare exact appearance probabilities against the process bound.

    Every tree appearing in any enumerated branch is checked against
    z_root/(1-z_root) * alpha^size * Pr[process yields the tree]; alpha = 1
    gives the plain bound. The per-event condition at the same alpha is
    checked first and reported alongside.
    """
    if params.alpha < ONE:
        condition = check_computable_lll(system, params)
    else:
        condition = check_finite_lll(system, params)
    census = census_runs(system, bit_budget, branch_guard=branch_guard)
    entries = []
    gw_totals: dict[int, Fraction] = {}
    for appearance in census.appearance_list():
        tree = appearance.tree
        root = tree.root_label
        gw_p = gw_tree_probability(tree, GWParams.from_lll(params, root), system)
        zi = params.z[root]
        bound = zi / (ONE - zi) * params.alpha ** tree.size * gw_p
        gw_totals[root] = gw_totals.get(root, ZERO) + gw_p
        entries.append(GWComparisonEntry(tree, appearance.p_low,
                                         appearance.pending, gw_p, bound))
    report = GWComparisonReport(tuple(entries), condition, gw_totals,
                                census.unresolved_mass, census.branch_count)
    if require_certified and not report.certified:
        worst = [e.tree.canonical_line() for e in entries if not e.certified]
        raise UnresolvedBranches(
            f"cannot certify {len(worst)} tree(s) at this bit budget: "
            + ", ".join(worst[:5]))
    return report
