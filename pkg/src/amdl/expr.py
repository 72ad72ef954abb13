"""Expression language for function blocks, triggers, guards and actions.

Evaluation is strict over message absence: reading an absent operand makes
the whole expression absent, except that `present(p)` only tests presence,
`and`/`or` short-circuit on a decided left operand, and `if` evaluates only
the taken branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .datatypes import FixedPoint


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class RealLit(Expr):
    value: float


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class EnumLit(Expr):
    enum: str
    label: str


@dataclass(frozen=True)
class QuantLit(Expr):
    """Fixed-point constant produced by type refinement; value = decode(raw)."""

    raw: int
    impl: FixedPoint


@dataclass(frozen=True)
class NameRef(Expr):
    """Dotted reference: input port, local variable, or Enum.Label (resolved
    against the enclosing scope at check/eval time)."""

    path: tuple[str, ...]

    @property
    def dotted(self) -> str:
        return ".".join(self.path)


@dataclass(frozen=True)
class PresentTest(Expr):
    port: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-" | "not"
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # or and == != < <= > >= + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class IfExpr(Expr):
    cond: Expr
    then: Expr
    otherwise: Expr


class EvalError(Exception):
    """Arithmetic failure during expression evaluation (division by zero)."""


class _AbsentType:
    """The '-' message: no value on a flow at this tick."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "-"


ABSENT = _AbsentType()

# A message is either ABSENT or a scalar: bool | int | float | str (enum label).
Value = object


def is_present(v: Value) -> bool:
    return v is not ABSENT


def referenced_names(expr: Expr) -> list[str]:
    """Dotted names read by the expression, in first-use order; includes
    presence tests (they observe the flow even without reading the value)."""
    out: list[str] = []
    _collect(expr, out)
    seen: set[str] = set()
    uniq = []
    for name in out:
        if name not in seen:
            seen.add(name)
            uniq.append(name)
    return uniq


def _collect(expr: Expr, out: list[str]) -> None:
    if isinstance(expr, NameRef):
        out.append(expr.dotted)
    elif isinstance(expr, PresentTest):
        out.append(expr.port)
    elif isinstance(expr, Unary):
        _collect(expr.operand, out)
    elif isinstance(expr, Binary):
        _collect(expr.left, out)
        _collect(expr.right, out)
    elif isinstance(expr, IfExpr):
        _collect(expr.cond, out)
        _collect(expr.then, out)
        _collect(expr.otherwise, out)


def evaluate(expr: Expr, read: Callable[[str], Value], is_enum_ref: Callable[[str], str | None] = lambda _: None) -> Value:
    """Evaluate with `read(name)` supplying port/variable values (possibly
    ABSENT). `is_enum_ref(dotted)` maps Enum.Label references to the label."""
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, RealLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, EnumLit):
        return expr.label
    if isinstance(expr, QuantLit):
        return expr.impl.decode(expr.raw)
    if isinstance(expr, NameRef):
        label = is_enum_ref(expr.dotted)
        if label is not None:
            return label
        return read(expr.dotted)
    if isinstance(expr, PresentTest):
        return is_present(read(expr.port))
    if isinstance(expr, Unary):
        v = evaluate(expr.operand, read, is_enum_ref)
        if v is ABSENT:
            return ABSENT
        return (not v) if expr.op == "not" else -v
    if isinstance(expr, Binary):
        return _eval_binary(expr, read, is_enum_ref)
    if isinstance(expr, IfExpr):
        c = evaluate(expr.cond, read, is_enum_ref)
        if c is ABSENT:
            return ABSENT
        branch = expr.then if c else expr.otherwise
        return evaluate(branch, read, is_enum_ref)
    raise TypeError(f"unknown expression node {expr!r}")


def _eval_binary(expr: Binary, read, is_enum_ref) -> Value:
    op = expr.op
    left = evaluate(expr.left, read, is_enum_ref)
    if left is ABSENT:
        return ABSENT
    if op == "and":
        if left is False:
            return False
        return _as_bool(evaluate(expr.right, read, is_enum_ref))
    if op == "or":
        if left is True:
            return True
        return _as_bool(evaluate(expr.right, read, is_enum_ref))
    right = evaluate(expr.right, read, is_enum_ref)
    if right is ABSENT:
        return ABSENT
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0:
            raise EvalError("division by zero")
        if isinstance(left, int) and isinstance(right, int):
            q = abs(left) // abs(right)  # truncate toward zero
            return q if (left >= 0) == (right >= 0) else -q
        return left / right
    raise TypeError(f"unknown operator {op}")


def _as_bool(v: Value) -> Value:
    return v if v is ABSENT else bool(v)


_PREC = {
    "or": 1,
    "and": 2,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
}


def format_expr(expr: Expr) -> str:
    """Canonical text form; parses back to a structurally identical tree."""
    return _fmt(expr, 0)


def _fmt(expr: Expr, parent_prec: int) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, RealLit):
        return repr(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, EnumLit):
        return f"{expr.enum}.{expr.label}"
    if isinstance(expr, QuantLit):
        return f"raw({expr.raw}, {expr.impl})"
    if isinstance(expr, NameRef):
        return expr.dotted
    if isinstance(expr, PresentTest):
        return f"present({expr.port})"
    if isinstance(expr, IfExpr):
        body = f"if {_fmt(expr.cond, 1)} then {_fmt(expr.then, 1)} else {_fmt(expr.otherwise, 0)}"
        return f"({body})" if parent_prec > 0 else body
    if isinstance(expr, Unary):
        if expr.op == "not":
            body = f"not {_fmt(expr.operand, 3)}"
            return f"({body})" if parent_prec > 3 else body
        inner = _fmt(expr.operand, 7)
        if inner.startswith("-"):
            inner = f"({inner})"  # avoid '--', which would lex as a comment
        return f"-{inner}"
    if isinstance(expr, Binary):
        prec = _PREC[expr.op]
        left_prec = prec + 1 if prec == 4 else prec  # comparisons do not chain
        left = _fmt(expr.left, left_prec)
        right = _fmt(expr.right, prec + 1)  # left-assoc: parens on equal-prec right child
        body = f"{left} {expr.op} {right}"
        return f"({body})" if parent_prec > prec else body
    raise TypeError(f"unknown expression node {expr!r}")
