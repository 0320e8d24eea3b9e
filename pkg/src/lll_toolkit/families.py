"""Effectively presented infinite event families.

A family enumerates events by index and answers which events touch a given
variable; any finite prefix can be materialized as an ordinary
ConstraintSystem (cached, so repeated materializations are identical).
"""
from __future__ import annotations

from fractions import Fraction
from math import ceil
from typing import Optional, Sequence

from .errors import FamilyError, ModelError
from .model import (ConstraintSystem, Event, VariableSpec, clause_event,
                    uniform_bit)
from .tape import _word


class InfiniteFamily:
    """Base class: a total, repeatable enumeration of events."""

    kind = "abstract"

    def __init__(self):
        self._event_cache: dict[int, Event] = {}
        self._system_cache: dict[int, ConstraintSystem] = {}

    # subclasses implement these two
    def _build_event(self, index: int) -> Event:
        raise NotImplementedError

    def events_of_variable(self, var: int,
                           size: int | None = None) -> tuple[int, ...]:
        raise NotImplementedError

    def size(self) -> Optional[int]:
        """Number of events, or None when the family is infinite."""
        return None

    def variable_spec(self, var: int) -> VariableSpec:
        return uniform_bit(var)

    def degree_bound(self, size: int, precision: int = 64) -> Fraction:
        """Certified lower bound of the declared per-(variable, size) count
        formula: a count not exceeding this value provably respects the
        declared bound. Default formula: 2^(gamma*size)."""
        from .intervals import pow2_interval
        gamma = getattr(self, "gamma", None)
        if gamma is None:
            raise FamilyError("family declares no incidence exponent gamma")
        lo, _hi = pow2_interval(Fraction(gamma) * size, precision)
        return lo

    def event(self, index: int) -> Event:
        if index < 0:
            raise FamilyError(f"event index must be >= 0, got {index}")
        n = self.size()
        if n is not None and index >= n:
            raise FamilyError(f"family has {n} events, no index {index}")
        if index not in self._event_cache:
            ev = self._build_event(index)
            if ev.index != index:
                raise FamilyError(
                    f"enumerator returned event {ev.index} for index {index}")
            self._event_cache[index] = ev
        return self._event_cache[index]

    def neighbors_of_event(self, index: int) -> tuple[int, ...]:
        """Neighbor indices within the whole family, via variable incidence."""
        out: set[int] = set()
        for v in self.event(index).vbl:
            out.update(self.events_of_variable(v))
        return tuple(sorted(out))

    def materialize(self, k: int) -> ConstraintSystem:
        """The first k events as a finite system over variables 0..max."""
        if k < 0:
            raise FamilyError("prefix length must be >= 0")
        n = self.size()
        if n is not None and k > n:
            raise FamilyError(f"family has only {n} events")
        if k not in self._system_cache:
            events = [self.event(i) for i in range(k)]
            max_var = -1
            for ev in events:
                max_var = max(max_var, ev.vbl[-1])
            variables = [self.variable_spec(v) for v in range(max_var + 1)]
            self._system_cache[k] = ConstraintSystem.build(variables, events)
        return self._system_cache[k]


class FiniteFamily(InfiniteFamily):
    """Any finite system viewed through the family interface."""

    kind = "finite"

    def __init__(self, system: ConstraintSystem):
        super().__init__()
        self.system = system

    def size(self) -> int:
        return len(self.system.events)

    def _build_event(self, index: int) -> Event:
        return self.system.events[index]

    def variable_spec(self, var: int) -> VariableSpec:
        return self.system.variables[var]

    def events_of_variable(self, var: int,
                           size: int | None = None) -> tuple[int, ...]:
        out = self.system.var_to_events.get(var, ())
        if size is not None:
            out = tuple(i for i in out if len(self.system.events[i].vbl) == size)
        return out


class ChainCnfFamily(InfiniteFamily):
    """An infinite CNF of m-variable clauses on a line.

    Clause t covers variables t*(m-overlap) .. t*(m-overlap)+m-1, so each
    clause shares variables with at most two others; the falsifying tuple of
    each clause is derived from `polarity_seed`, giving a reproducible
    "random" CNF meeting the fixed-clause-size neighbor bound.
    """

    kind = "fixed_cnf"

    def __init__(self, m: int, overlap: int = 1, polarity_seed: int = 0):
        super().__init__()
        if m < 2:
            raise ModelError("clause size must be >= 2")
        if not 0 <= overlap < m:
            raise ModelError("overlap must be in 0..m-1")
        self.m = m
        self.overlap = overlap
        self.polarity_seed = polarity_seed

    def _stride(self) -> int:
        return self.m - self.overlap

    def _build_event(self, index: int) -> Event:
        start = index * self._stride()
        vbl = tuple(range(start, start + self.m))
        word = _word(self.polarity_seed, 1, index, 0)
        falsifying = tuple((word >> j) & 1 for j in range(self.m))
        return clause_event(index, vbl, falsifying)

    def events_of_variable(self, var: int,
                           size: int | None = None) -> tuple[int, ...]:
        if size is not None and size != self.m:
            return ()
        stride = self._stride()
        lo = max(0, -((-(var - self.m + 1)) // stride))
        hi = var // stride
        return tuple(t for t in range(lo, hi + 1)
                     if t * stride <= var < t * stride + self.m)


class ForbiddenSubstringFamily(InfiniteFamily):
    """Clauses forbidding each pattern occurrence in a one-sided bit sequence.

    Every pattern f (length >= min_len) at every position p gives one event
    over variables p..p+|f|-1 forbidding exactly the tuple f. Events are
    numbered diagonally by (p + |f|, p, f) so each has a finite index.
    """

    kind = "forbidden_substrings"

    def __init__(self, patterns: Sequence[str], gamma: Fraction, min_len: int):
        super().__init__()
        self.gamma = Fraction(gamma)
        self.min_len = min_len
        kept = []
        rejected = []
        seen = set()
        for f in patterns:
            if any(c not in "01" for c in f):
                raise ModelError(f"pattern {f!r} is not a bit string")
            if f in seen:
                continue
            seen.add(f)
            (kept if len(f) >= min_len else rejected).append(f)
        self.patterns = tuple(sorted(kept, key=lambda f: (len(f), f)))
        self.rejected_patterns = tuple(sorted(rejected, key=lambda f: (len(f), f)))
        self._by_length: dict[int, tuple[str, ...]] = {}
        for f in self.patterns:
            self._by_length.setdefault(len(f), ())
            self._by_length[len(f)] += (f,)
        self._diag_cache: dict[int, int] = {}
        self._cumdiag_cache: dict[int, int] = {}

    def size(self) -> Optional[int]:
        return 0 if not self.patterns else None

    def _diag_count(self, d: int) -> int:
        # patterns of length l <= d contribute one event each (p = d - l)
        if d not in self._diag_cache:
            self._diag_cache[d] = sum(
                len(fs) for l, fs in self._by_length.items() if l <= d)
        return self._diag_cache[d]

    def _enumeration(self, index: int) -> tuple[int, str]:
        """(position, pattern) of the event with this enumeration index."""
        if not self.patterns:
            raise FamilyError("family has no patterns of admissible length")
        d = min(self._by_length)  # smallest possible p + |f|
        total = 0
        while True:
            count = self._diag_count(d)
            if total + count > index:
                break
            total += count
            d += 1
        # within diagonal d: order by p ascending, then pattern lexicographic
        offset = index - total
        for p in range(0, d - min(self._by_length) + 1):
            fs = self._by_length.get(d - p, ())
            if offset < len(fs):
                return p, fs[offset]
            offset -= len(fs)
        raise FamilyError("diagonal bookkeeping out of range")

    def _diagonals_before(self, d: int) -> int:
        if d not in self._cumdiag_cache:
            start = min(self._by_length)
            total = 0
            for dd in range(start, d):
                if dd + 1 in self._cumdiag_cache:
                    total = self._cumdiag_cache[dd + 1]
                    continue
                total += self._diag_count(dd)
                self._cumdiag_cache[dd + 1] = total
            self._cumdiag_cache[d] = total
        return self._cumdiag_cache[d]

    def index_of(self, position: int, pattern: str) -> int:
        """Inverse of the enumeration; validates the event exists."""
        if pattern not in self._by_length.get(len(pattern), ()):
            raise FamilyError(f"pattern {pattern!r} not in the family")
        if position < 0:
            raise FamilyError("position must be >= 0")
        d = position + len(pattern)
        total = self._diagonals_before(d)
        for p in range(0, position):
            total += len(self._by_length.get(d - p, ()))
        fs = self._by_length.get(len(pattern), ())
        return total + fs.index(pattern)

    def _build_event(self, index: int) -> Event:
        p, f = self._enumeration(index)
        vbl = tuple(range(p, p + len(f)))
        return clause_event(index, vbl, tuple(int(c) for c in f))

    def events_of_variable(self, var: int,
                           size: int | None = None) -> tuple[int, ...]:
        out = []
        for l, fs in sorted(self._by_length.items()):
            if size is not None and l != size:
                continue
            for f in fs:
                for p in range(max(0, var - l + 1), var + 1):
                    out.append(self.index_of(p, f))
        return tuple(sorted(out))

    def degree_bound(self, size: int, precision: int = 64) -> Fraction:
        # one occurrence window per offset, times the per-length pattern
        # count bound: size * 2^(gamma*size)
        from .intervals import pow2_interval
        lo, _hi = pow2_interval(self.gamma * size, precision)
        return size * lo

    def events_in_window(self, length: int) -> list[int]:
        """Indices of all events fully inside variables 0..length-1."""
        out = []
        for l, fs in sorted(self._by_length.items()):
            for f in fs:
                for p in range(0, max(0, length - l + 1)):
                    out.append(self.index_of(p, f))
        return sorted(out)


class TrimmedFamily(InfiniteFamily):
    """A clause family with each clause's lowest-index variables removed.

    A clause of size s loses its ceil(rho*s) lowest-index variables, which
    only strengthens it: any assignment satisfying the trimmed clause
    satisfies the original.
    """

    kind = "variable_cnf"

    def __init__(self, base: InfiniteFamily, rho: Fraction):
        super().__init__()
        rho = Fraction(rho)
        if not 0 < rho < 1:
            raise ModelError("rho must lie strictly between 0 and 1")
        self.base = base
        self.rho = rho

    def size(self) -> Optional[int]:
        return self.base.size()

    def variable_spec(self, var: int) -> VariableSpec:
        return self.base.variable_spec(var)

    def _trim_count(self, s: int) -> int:
        return ceil(self.rho * s)

    def _build_event(self, index: int) -> Event:
        ev = self.base.event(index)
        if len(ev.forbidden) != 1:
            raise FamilyError("trimming is defined for clause events only")
        drop = self._trim_count(len(ev.vbl))
        if drop >= len(ev.vbl):
            raise FamilyError(
                f"event {index}: trimming would remove every variable")
        (tup,) = ev.forbidden
        return clause_event(index, ev.vbl[drop:], tup[drop:])

    def events_of_variable(self, var: int,
                           size: int | None = None) -> tuple[int, ...]:
        out = []
        # a variable survives in clauses where it is not among the dropped
        # prefix; scan the base incidence over all original sizes
        for idx in self.base.events_of_variable(var):
            ev = self.event(idx)
            if var in ev.vbl and (size is None or len(ev.vbl) == size):
                out.append(idx)
        return tuple(sorted(out))

    def degree_bound(self, size: int, precision: int = 64) -> Fraction:
        # every original size s with s - ceil(rho*s) == size can contribute,
        # each within the base family's own bound; the map is non-decreasing
        # in s, so stop once it overshoots
        total = Fraction(0)
        s = size
        while s <= 8 * size + 16:
            m = s - self._trim_count(s)
            if m > size:
                break
            if m == size:
                total += self.base.degree_bound(s, precision)
            s += 1
        return total
