"""File formats: DIMACS CNF, the line-oriented system format, and log dumps.

The system format, one directive per line (`#` comments allowed):

    var <index> <range> <p_0> ... <p_{range-1}>
    event <index> vbl <v1> ... <vk> forbid <t1> ... <tk> ; <t1> ... <tk> ; ...
    z <index> <num/den>
    alpha <num/den>

Rationals are written `num/den` (or a bare integer); floats are rejected.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .errors import ModelError
from .model import (ConstraintSystem, Event, LLLParams, VariableSpec,
                    clause_event, uniform_bit)
from .engine import ResampleLog, Step


class FormatError(ModelError):
    """Malformed input file; carries a 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def parse_rational(token: str) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"bad rational {token!r}: {exc}") from None


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def read_dimacs(text: str) -> ConstraintSystem:
    """A DIMACS CNF as a system over uniform bits.

    Clause (l1 .. lk) becomes one event forbidding the unique assignment
    falsifying every literal; value 1 means the variable is set true.
    """
    n_vars = None
    clauses: list[list[int]] = []
    pending: list[int] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(number, f"bad problem line {line!r}")
            try:
                n_vars = int(parts[2])
                int(parts[3])
            except ValueError:
                raise FormatError(number, f"bad problem line {line!r}") from None
            continue
        if n_vars is None:
            raise FormatError(number, "clause before the problem line")
        try:
            literals = [int(tok) for tok in line.split()]
        except ValueError:
            raise FormatError(number, f"bad clause line {line!r}") from None
        for lit in literals:
            if lit == 0:
                if pending:
                    clauses.append(pending)
                    pending = []
            else:
                if abs(lit) > n_vars:
                    raise FormatError(
                        number, f"literal {lit} out of range 1..{n_vars}")
                pending.append(lit)
    if pending:
        clauses.append(pending)
    if n_vars is None:
        raise FormatError(1, "missing problem line")
    variables = [uniform_bit(i) for i in range(n_vars)]
    events = []
    for index, clause in enumerate(clauses):
        seen = {}
        for lit in clause:
            v = abs(lit) - 1
            want = 0 if lit > 0 else 1  # the value falsifying this literal
            if v in seen and seen[v] != want:
                seen = None  # tautological clause: never false
                break
            if seen is not None:
                seen[v] = want
        if seen is None:
            continue
        vbl = tuple(sorted(seen))
        events.append(clause_event(len(events), vbl,
                                   tuple(seen[v] for v in vbl)))
    return ConstraintSystem.build(variables, events)


def read_system(text: str) -> tuple[ConstraintSystem, Optional[LLLParams]]:
    """Parse the line-oriented system format; params are returned when any
    z/alpha directives are present."""
    variables: dict[int, VariableSpec] = {}
    events: dict[int, Event] = {}
    z_values: dict[int, Fraction] = {}
    alpha: Optional[Fraction] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "var":
                index = int(parts[1])
                n = int(parts[2])
                probs = [parse_rational(tok) for tok in parts[3:]]
                if len(probs) != n:
                    raise ModelError(
                        f"expected {n} probabilities, got {len(probs)}")
                variables[index] = VariableSpec(index, tuple(probs))
            elif kind == "event":
                index = int(parts[1])
                if parts[2] != "vbl":
                    raise ModelError("expected 'vbl'")
                cut = parts.index("forbid")
                vbl = tuple(int(tok) for tok in parts[3:cut])
                tail = parts[cut + 1:]
                tuples = []
                current: list[int] = []
                for tok in tail + [";"]:
                    if tok == ";":
                        if current:
                            if len(current) != len(vbl):
                                raise ModelError(
                                    f"tuple {tuple(current)} has arity "
                                    f"{len(current)}, expected {len(vbl)}")
                            tuples.append(tuple(current))
                            current = []
                    else:
                        current.append(int(tok))
                events[index] = Event(index, vbl, frozenset(tuples))
            elif kind == "z":
                z_values[int(parts[1])] = parse_rational(parts[2])
            elif kind == "alpha":
                alpha = parse_rational(parts[1])
            else:
                raise ModelError(f"unknown directive {kind!r}")
        except FormatError:
            raise
        except (ModelError, ValueError, IndexError) as exc:
            raise FormatError(number, str(exc)) from None
    var_list = [variables[i] for i in sorted(variables)]
    event_list = [events[i] for i in sorted(events)]
    if sorted(variables) != list(range(len(variables))):
        raise FormatError(1, "variable indices must be 0..n-1")
    if sorted(events) != list(range(len(events))):
        raise FormatError(1, "event indices must be 0..m-1")
    system = ConstraintSystem.build(var_list, event_list)
    params = None
    if z_values or alpha is not None:
        if sorted(z_values) != list(range(len(event_list))):
            raise FormatError(1, "z directives must cover events 0..m-1")
        params = LLLParams(tuple(z_values[i] for i in sorted(z_values)),
                           alpha if alpha is not None else Fraction(1))
    return system, params


def write_system(system: ConstraintSystem,
                 params: Optional[LLLParams] = None) -> str:
    lines = []
    for var in system.variables:
        probs = " ".join(format_rational(p) for p in var.distribution)
        lines.append(f"var {var.index} {var.range_size} {probs}")
    for ev in system.events:
        vbl = " ".join(str(v) for v in ev.vbl)
        tuples = " ; ".join(" ".join(str(x) for x in t)
                            for t in sorted(ev.forbidden))
        lines.append(f"event {ev.index} vbl {vbl} forbid {tuples}")
    if params is not None:
        for i, z in enumerate(params.z):
            lines.append(f"z {i} {format_rational(z)}")
        lines.append(f"alpha {format_rational(params.alpha)}")
    return "\n".join(lines) + "\n"


def log_to_text(log: ResampleLog) -> str:
    lines = ["init " + " ".join(str(v) for v in log.initial)]
    for step in log.steps:
        draws = ",".join(f"{v}:{p}:{x}" for v, p, x in step.draws)
        lines.append(f"step {step.number} event {step.event} draws {draws}")
    return "\n".join(lines) + "\n"


def log_from_text(text: str) -> ResampleLog:
    initial: Optional[tuple[int, ...]] = None
    steps = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "init":
                initial = tuple(int(tok) for tok in parts[1:])
            elif parts[0] == "step":
                if parts[2] != "event" or parts[4] != "draws":
                    raise ModelError("bad step line")
                draws = []
                for item in parts[5].split(","):
                    v, p, x = item.split(":")
                    draws.append((int(v), int(p), int(x)))
                steps.append(Step(int(parts[1]), int(parts[3]), tuple(draws)))
            else:
                raise ModelError(f"unknown directive {parts[0]!r}")
        except (ValueError, IndexError, ModelError) as exc:
            raise FormatError(number, str(exc)) from None
    if initial is None:
        raise FormatError(1, "missing init line")
    return ResampleLog(initial, tuple(steps))
