"""The resampling solver: draw an initial assignment, then repeatedly redraw
the variables of the first (minimal-index) currently-true event until none
remains. The selection rule is fixed so that finite systems and prefixes of
infinite families behave identically.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Optional, Sequence

from .errors import EngineError, ModelError, TapeExhausted
from .model import ConstraintSystem, LLLParams, ONE
from .tape import Tape

SATISFIED = "satisfied"
BUDGET_EXCEEDED = "budget_exceeded"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Step:
    """One resampling: which event fired and what each of its variables drew.

    `draws` holds (variable, tape position, value) in increasing variable
    order; position j means the variable consumed its table entry x^j.
    """

    number: int
    event: int
    draws: tuple[tuple[int, int, int], ...]


@dataclass(frozen=True)
class ResampleLog:
    """Initial draws (each variable's x^0) plus the ordered resample steps."""

    initial: tuple[int, ...]
    steps: tuple[Step, ...]

    def events(self) -> tuple[int, ...]:
        return tuple(s.event for s in self.steps)


@dataclass(frozen=True)
class RunResult:
    status: str
    assignment: tuple[int, ...]
    log: ResampleLog

    @property
    def resample_count(self) -> int:
        return len(self.log.steps)


def suggested_max_steps(params: LLLParams) -> int:
    """Ten times the expected-steps bound, rounded up (and at least 1)."""
    bound = sum((z / (ONE - z) for z in params.z), Fraction(0))
    return max(1, ceil(10 * bound))


def run_finite(system: ConstraintSystem, tape: Tape,
               max_steps: int) -> RunResult:
    """Run the resampling loop on a finite system.

    Truth tracking is incremental: after a resample only events sharing a
    changed variable are rechecked, with a lazy min-heap over true events
    standing in for a full rescan (differentially tested against one).
    """
    if max_steps < 0:
        raise ModelError("max_steps must be >= 0")
    n_events = len(system.events)
    assignment: list[int] = []
    try:
        for var in system.variables:
            assignment.append(tape.draw(var.index, var.distribution))
    except TapeExhausted:
        raise TapeExhausted(partial_log=None,
                            partial_assignment=tuple(assignment)) from None
    initial = tuple(assignment)

    is_true = [system.is_true(i, assignment) for i in range(n_events)]
    heap = [i for i in range(n_events) if is_true[i]]
    heapq.heapify(heap)
    steps: list[Step] = []

    while heap:
        i = heapq.heappop(heap)
        if not is_true[i]:
            continue
        if len(steps) >= max_steps:
            log = ResampleLog(initial, tuple(steps))
            return RunResult(BUDGET_EXCEEDED, tuple(assignment), log)
        ev = system.events[i]
        draws = []
        try:
            for v in ev.vbl:
                var = system.variables[v]
                position = tape.consumed_count(v)
                value = tape.draw(v, var.distribution)
                assignment[v] = value
                draws.append((v, position, value))
        except TapeExhausted:
            log = ResampleLog(initial, tuple(steps))
            raise TapeExhausted(partial_log=log,
                                partial_assignment=tuple(assignment),
                                in_flight_event=i) from None
        steps.append(Step(len(steps) + 1, i, tuple(draws)))
        dirty: set[int] = set()
        for v in ev.vbl:
            dirty.update(system.var_to_events[v])
        for j in sorted(dirty):
            now = system.is_true(j, assignment)
            # j's heap entry survives unless j was the event just popped;
            # events turning true get a fresh entry, stale entries are skipped.
            if now and (j == i or not is_true[j]):
                heapq.heappush(heap, j)
            is_true[j] = now

    log = ResampleLog(initial, tuple(steps))
    return RunResult(SATISFIED, tuple(assignment), log)


def run_stream(family, active_k: int, tape: Tape, max_steps: int) -> RunResult:
    """Run on the first `active_k` events of a family; identical semantics to
    `run_finite` on the materialized prefix (materialization is cached)."""
    system = family.materialize(active_k)
    return run_finite(system, tape, max_steps)


def replay(system: ConstraintSystem, log: ResampleLog,
           validate: bool = True) -> list[tuple[int, ...]]:
    """Assignments after 0, 1, ..., len(steps) resamples, recomputed from the log.

    With validate=True, checks that each step's event was true right before
    its resampling and that tape positions follow the consumption law.
    """
    if len(log.initial) != len(system.variables):
        raise EngineError("log initial draws do not match the variable count")
    assignment = list(log.initial)
    out = [tuple(assignment)]
    positions = {v: 1 for v in range(len(system.variables))}
    for step in log.steps:
        if validate:
            if not system.is_true(step.event, assignment):
                raise EngineError(
                    f"step {step.number}: event {step.event} was not true")
            expected = tuple(system.events[step.event].vbl)
            if tuple(v for v, _, _ in step.draws) != expected:
                raise EngineError(
                    f"step {step.number}: draws do not cover vbl in order")
        for v, position, value in step.draws:
            if validate and position != positions[v]:
                raise EngineError(
                    f"step {step.number}: x{v} position {position}, "
                    f"expected {positions[v]}")
            positions[v] = position + 1
            assignment[v] = value
        out.append(tuple(assignment))
    return out


def first_k_stable_time(log: ResampleLog, system: ConstraintSystem,
                        k: int) -> Optional[int]:
    """First step count after which events 0..k-1 are simultaneously false.

    Returns None when the logged run never reaches that state ("not reached").
    """
    if not 0 <= k <= len(system.events):
        raise ModelError(f"k must be in 0..{len(system.events)}")
    for t, assignment in enumerate(replay(system, log)):
        if all(not system.is_true(i, assignment) for i in range(k)):
            return t
    return None


def log_from_event_sequence(system: ConstraintSystem,
                            events: Sequence[int],
                            initial: Sequence[int] | None = None,
                            values: Sequence[Sequence[int]] | None = None,
                            validate: bool = False) -> ResampleLog:
    """Synthesize a log from a resample-order event sequence.

    Tape positions follow the consumption law (x^0 at initialization, then
    one fresh value per resampling touching the variable). Values default to
    zeros; pass `values` per step to make the log replay-valid.
    """
    if initial is None:
        initial = tuple(0 for _ in system.variables)
    positions = {v: 1 for v in range(len(system.variables))}
    steps = []
    for number, e in enumerate(events, start=1):
        ev = system.events[e]
        step_values = values[number - 1] if values is not None else [0] * len(ev.vbl)
        draws = []
        for v, value in zip(ev.vbl, step_values):
            draws.append((v, positions[v], value))
            positions[v] += 1
        steps.append(Step(number, e, tuple(draws)))
    log = ResampleLog(tuple(initial), tuple(steps))
    if validate:
        replay(system, log)
    return log
