"""Boolean clock expressions over the global discrete time base.

A clock decides, per tick, whether a flow carries a message. `every(n, c)`
fires on each n-th tick at which `c` fires, counting occurrences from 1;
the base clock fires on every tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ClockExpr:
    """Base class; concrete clocks below. Instances are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class BaseTick(ClockExpr):
    def __str__(self) -> str:
        return "base"


@dataclass(frozen=True)
class Every(ClockExpr):
    n: int
    sub: ClockExpr

    def __str__(self) -> str:
        return f"every({self.n}, {self.sub})"


@dataclass(frozen=True)
class PresenceOf(ClockExpr):
    port: str  # dotted port path, local to the enclosing definition

    def __str__(self) -> str:
        return f"present({self.port})"


@dataclass(frozen=True)
class ModeEquals(ClockExpr):
    """True while `ref` is in mode `mode`.

    `ref` names either an MTD block/component or a mode-valued flow (the
    form produced when an MTD is rewritten to dataflow).
    """

    ref: str
    mode: str

    def __str__(self) -> str:
        return f"in_mode({self.ref}, {self.mode})"


@dataclass(frozen=True)
class ClockAnd(ClockExpr):
    operands: tuple[ClockExpr, ...]

    def __str__(self) -> str:
        return " and ".join(_paren(c) for c in self.operands)


@dataclass(frozen=True)
class ClockOr(ClockExpr):
    operands: tuple[ClockExpr, ...]

    def __str__(self) -> str:
        return " or ".join(_paren(c) for c in self.operands)


@dataclass(frozen=True)
class ClockNot(ClockExpr):
    operand: ClockExpr

    def __str__(self) -> str:
        return f"not {_paren(self.operand)}"


BASE = BaseTick()


def _paren(c: ClockExpr) -> str:
    if isinstance(c, (ClockAnd, ClockOr, ClockNot)):
        return f"({c})"
    return str(c)


def normalize(clock: ClockExpr) -> ClockExpr:
    """Canonical form: nested every() multiplied out, every(1) dropped,
    and/or flattened with sorted, deduplicated operands, base dropped
    from conjunctions."""
    if isinstance(clock, Every):
        sub = normalize(clock.sub)
        n = clock.n
        while isinstance(sub, Every):
            n *= sub.n
            sub = sub.sub
        if n == 1:
            return sub
        return Every(n, sub)
    if isinstance(clock, ClockAnd):
        ops: list[ClockExpr] = []
        for op in clock.operands:
            norm = normalize(op)
            if isinstance(norm, ClockAnd):
                ops.extend(norm.operands)
            elif isinstance(norm, BaseTick):
                continue
            else:
                ops.append(norm)
        ops = _unique_sorted(ops)
        if not ops:
            return BASE
        if len(ops) == 1:
            return ops[0]
        return ClockAnd(tuple(ops))
    if isinstance(clock, ClockOr):
        ops = []
        for op in clock.operands:
            norm = normalize(op)
            if isinstance(norm, ClockOr):
                ops.extend(norm.operands)
            else:
                ops.append(norm)
        ops = _unique_sorted(ops)
        if len(ops) == 1:
            return ops[0]
        return ClockOr(tuple(ops))
    if isinstance(clock, ClockNot):
        inner = normalize(clock.operand)
        if isinstance(inner, ClockNot):
            return inner.operand
        return ClockNot(inner)
    return clock


def _unique_sorted(ops: list[ClockExpr]) -> list[ClockExpr]:
    seen: dict[str, ClockExpr] = {}
    for op in ops:
        seen.setdefault(str(op), op)
    return [seen[k] for k in sorted(seen)]


def clocks_equal(a: ClockExpr, b: ClockExpr) -> bool:
    return normalize(a) == normalize(b)


def periodic_factor(clock: ClockExpr) -> int | None:
    """For periodic clocks (base or every(n, base) after normalization),
    the period in base ticks; None for event-driven clocks."""
    norm = normalize(clock)
    if isinstance(norm, BaseTick):
        return 1
    if isinstance(norm, Every) and isinstance(norm.sub, BaseTick):
        return norm.n
    return None


def period_ms(clock: ClockExpr, tick_ms: int) -> int | None:
    factor = periodic_factor(clock)
    return None if factor is None else factor * tick_ms


def gcd_period(periods: list[int]) -> int:
    return math.gcd(*periods) if periods else 0


def referenced_ports(clock: ClockExpr) -> list[str]:
    """Port paths the clock reads at runtime (presence and mode refs)."""
    out: list[str] = []
    _collect_refs(clock, out)
    return out


def _collect_refs(clock: ClockExpr, out: list[str]) -> None:
    if isinstance(clock, PresenceOf):
        out.append(clock.port)
    elif isinstance(clock, ModeEquals):
        out.append(clock.ref)
    elif isinstance(clock, Every):
        _collect_refs(clock.sub, out)
    elif isinstance(clock, (ClockAnd, ClockOr)):
        for op in clock.operands:
            _collect_refs(op, out)
    elif isinstance(clock, ClockNot):
        _collect_refs(clock.operand, out)
