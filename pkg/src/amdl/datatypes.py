"""Abstract data types and platform implementation types.

Abstract types (bool/int/real/enum) describe flows on the analysis and
design levels; implementation types (sized integers, fixed-point) replace
them during refinement toward the logical architecture.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class IntType:
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class RealType:
    def __str__(self) -> str:
        return "real"


@dataclass(frozen=True)
class EnumType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class EnumDecl:
    """Named enumeration; labels non-empty and unique (validated)."""

    name: str
    labels: tuple[str, ...]


@dataclass(frozen=True)
class SizedInt:
    bits: int  # 8, 16 or 32; signed two's complement

    def __str__(self) -> str:
        return f"int{self.bits}"

    @property
    def min_value(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def max_value(self) -> int:
        return (1 << (self.bits - 1)) - 1


@dataclass(frozen=True)
class FixedPoint:
    """Scaled integer encoding: value = raw * scale + offset, raw in `base`."""

    base: SizedInt
    scale: Fraction
    offset: Fraction

    def __str__(self) -> str:
        return f"fixed({self.base}, {format_rational(self.scale)}, {format_rational(self.offset)})"

    def decode(self, raw: int) -> float:
        return float(raw * self.scale + self.offset)

    def encode(self, value: float) -> int:
        """Nearest raw code, ties away from zero. Range is NOT checked here."""
        q = (Fraction(value) - self.offset) / self.scale
        return round_half_away(q)


DataType = BoolType | IntType | RealType | EnumType
ImplType = SizedInt | FixedPoint
PortType = DataType | ImplType

BOOL = BoolType()
INT = IntType()
REAL = RealType()
INT8 = SizedInt(8)
INT16 = SizedInt(16)
INT32 = SizedInt(32)


def round_half_away(q: Fraction) -> int:
    """round() with .5 ties away from zero (round() itself ties to even)."""
    if q >= 0:
        return int(q + Fraction(1, 2))
    return -int(-q + Fraction(1, 2))


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return repr(float(x))


def is_impl(t: PortType) -> bool:
    return isinstance(t, (SizedInt, FixedPoint))


def is_numeric(t: PortType) -> bool:
    return isinstance(t, (IntType, RealType, SizedInt, FixedPoint))
