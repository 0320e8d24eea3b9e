"""Witness trees: the accounting device of the resampling analysis.

The tree for step k is built by scanning the resample log backwards from k.
Each earlier resampling that shares a variable with a label already in the
tree is attached as a son of a deepest such vertex; everything else is
skipped. The resulting trees determine exactly which table entries each
variable consumed, and the probability that a given tree shows up in a run
is bounded by the product of its labels' event probabilities.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from .errors import EngineError, ModelError
from .model import ConstraintSystem, ONE, event_probability
from .engine import ResampleLog


@dataclass(frozen=True)
class WitnessTree:
    """Rooted event-labeled tree; vertex 0 is the root.

    `steps` optionally remembers which log step created each vertex; it is
    diagnostic only and excluded from equality. Trees compare and hash by
    their canonical (unordered) form.
    """

    labels: tuple[int, ...]
    parents: tuple[int, ...]
    steps: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.labels:
            raise ModelError("a witness tree needs at least a root")
        if len(self.parents) != len(self.labels):
            raise ModelError("labels/parents length mismatch")
        if self.parents[0] != -1:
            raise ModelError("vertex 0 must be the root (parent -1)")
        for v, p in enumerate(self.parents):
            if v > 0 and not 0 <= p < v:
                raise ModelError(f"vertex {v} has bad parent {p}")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def root_label(self) -> int:
        return self.labels[0]

    def depth(self, v: int) -> int:
        d = 0
        while self.parents[v] != -1:
            v = self.parents[v]
            d += 1
        return d

    def depths(self) -> tuple[int, ...]:
        out = [0] * self.size
        for v in range(1, self.size):
            out[v] = out[self.parents[v]] + 1
        return tuple(out)

    def children(self, v: int) -> list[int]:
        return [w for w in range(self.size) if self.parents[w] == v]

    def label_counts(self) -> Counter:
        return Counter(self.labels)

    def canon(self):
        """Canonical nested-tuple form: (label, sorted children canons)."""
        kids: list[list] = [[] for _ in range(self.size)]
        for v in range(self.size - 1, 0, -1):
            kids[self.parents[v]].append(v)
        memo: dict[int, tuple] = {}
        for v in range(self.size - 1, -1, -1):
            memo[v] = (self.labels[v],
                       tuple(sorted(memo[w] for w in kids[v])))
        return memo[0]

    def canonical_line(self) -> str:
        def fmt(node) -> str:
            label, children = node
            if not children:
                return str(label)
            return f"{label}({','.join(fmt(c) for c in children)})"
        return fmt(self.canon())

    def to_indented(self) -> str:
        lines: list[str] = []
        depths = self.depths()

        def walk(v: int):
            lines.append("  " * depths[v] + str(self.labels[v]))
            for w in range(v + 1, self.size):
                if self.parents[w] == v:
                    walk(w)
        walk(0)
        return "\n".join(lines)

    def __eq__(self, other):
        if not isinstance(other, WitnessTree):
            return NotImplemented
        return self.canon() == other.canon()

    def __hash__(self):
        return hash(self.canon())


def build_witness_tree(log: ResampleLog, k: int,
                       system: ConstraintSystem) -> WitnessTree:
    """Tree for step k: reverse-scan steps k-1..1, attaching neighbors.

    Attachment point: a deepest vertex whose label neighbors the scanned
    event; ties break to the lowest label (same-depth vertices never share
    a label, so depth plus label is a total order).
    """
    if not 1 <= k <= len(log.steps):
        raise ModelError(f"step must be in 1..{len(log.steps)}, got {k}")
    nb = system.neighbor_sets
    labels = [log.steps[k - 1].event]
    parents = [-1]
    steps = [k]
    depths = [0]
    for t in range(k - 2, -1, -1):
        s = log.steps[t].event
        best = -1
        for v, label in enumerate(labels):
            if s in nb[label]:
                if best == -1 or (depths[v], -labels[v]) > (depths[best], -labels[best]):
                    best = v
        if best == -1:
            continue
        labels.append(s)
        parents.append(best)
        steps.append(t + 1)
        depths.append(depths[best] + 1)
    return WitnessTree(tuple(labels), tuple(parents), tuple(steps))


def trees_for_run(log: ResampleLog,
                  system: ConstraintSystem) -> list[WitnessTree]:
    """One tree per resampling; asserts the in-run distinctness guarantees."""
    trees = [build_witness_tree(log, k, system)
             for k in range(1, len(log.steps) + 1)]
    seen: dict = {}
    root_counts: dict[int, int] = {}
    for k, tree in enumerate(trees, start=1):
        c = tree.canon()
        if c in seen:
            raise EngineError(
                f"steps {seen[c]} and {k} produced identical witness trees")
        seen[c] = k
        root = tree.root_label
        n_root = tree.label_counts()[root]
        if n_root <= root_counts.get(root, 0):
            raise EngineError(
                f"step {k}: root-label multiplicity did not increase")
        root_counts[root] = n_root
    return trees


@dataclass(frozen=True)
class TreeValidation:
    valid: bool
    violations: tuple[str, ...]


def validate_tree(tree: WitnessTree, system: ConstraintSystem) -> TreeValidation:
    """Membership check for the legal tree class.

    Sons must be distinct, pairwise non-neighboring neighbors of their
    father's label, and more generally no two same-depth vertices may be
    neighbors.
    """
    nb = system.neighbor_sets
    violations: list[str] = []
    for label in tree.labels:
        if not 0 <= label < len(system.events):
            return TreeValidation(False, (f"unknown event label {label}",))
    for v in range(1, tree.size):
        father = tree.labels[tree.parents[v]]
        if tree.labels[v] not in nb[father]:
            violations.append(
                f"vertex {v}: label {tree.labels[v]} is not a neighbor "
                f"of its father's label {father}")
    depths = tree.depths()
    by_depth: dict[int, list[int]] = {}
    for v, d in enumerate(depths):
        by_depth.setdefault(d, []).append(v)
    for d, vertices in by_depth.items():
        for a_pos, v in enumerate(vertices):
            for w in vertices[a_pos + 1:]:
                if tree.labels[w] in nb[tree.labels[v]]:
                    violations.append(
                        f"vertices {v} and {w} at depth {d} carry "
                        f"neighboring labels {tree.labels[v]}, {tree.labels[w]}")
    return TreeValidation(not violations, tuple(violations))


def tree_probability_bound(tree: WitnessTree,
                           system: ConstraintSystem) -> Fraction:
    """Product of event probabilities over all labels, multiplicity included."""
    out = ONE
    for label in tree.labels:
        out *= event_probability(system.events[label], system)
    return out


def reconstruct_tape_positions(tree: WitnessTree,
                               system: ConstraintSystem) -> dict[int, list[int]]:
    """Table positions each variable consumed, derived from the tree alone.

    A variable occurs at most once per depth level and deeper levels happen
    earlier, so the vertices touching a variable, deepest first, consumed
    its values x^1, x^2, ... in order.
    """
    check = validate_tree(tree, system)
    if not check.valid:
        raise ModelError("; ".join(check.violations))
    depths = tree.depths()
    per_var: dict[int, list[int]] = {}
    order = sorted(range(tree.size), key=lambda v: -depths[v])
    for v in order:
        for var in system.events[tree.labels[v]].vbl:
            per_var.setdefault(var, []).append(v)
    out: dict[int, list[int]] = {}
    for var, vertices in per_var.items():
        level_seen = set()
        for v in vertices:
            if depths[v] in level_seen:
                raise ModelError(
                    f"variable {var} occurs twice at depth {depths[v]}")
            level_seen.add(depths[v])
        out[var] = list(range(1, len(vertices) + 1))
    return out


def tape_positions_by_vertex(tree: WitnessTree,
                             system: ConstraintSystem) -> dict[int, dict[int, int]]:
    """Per vertex: {variable: consumed position}, deepest-first numbering."""
    check = validate_tree(tree, system)
    if not check.valid:
        raise ModelError("; ".join(check.violations))
    depths = tree.depths()
    counters: dict[int, int] = {}
    out: dict[int, dict[int, int]] = {}
    for v in sorted(range(tree.size), key=lambda v: -depths[v]):
        row = {}
        for var in system.events[tree.labels[v]].vbl:
            counters[var] = counters.get(var, 0) + 1
            row[var] = counters[var]
        out[v] = row
    return out


def crosscheck_tape_positions(tree: WitnessTree, log: ResampleLog,
                              system: ConstraintSystem) -> bool:
    """True iff tree-derived positions equal the log's recorded consumption.

    Requires a tree built from this log (vertex step numbers present).
    """
    if len(tree.steps) != tree.size:
        raise ModelError("tree does not carry originating step numbers")
    derived = tape_positions_by_vertex(tree, system)
    for v, step_number in enumerate(tree.steps):
        step = log.steps[step_number - 1]
        logged = {var: position for var, position, _ in step.draws}
        if derived[v] != logged:
            return False
    return True
