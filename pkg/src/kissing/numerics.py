"""Exact rationals, signed square roots of rationals, and outward-rounded intervals.

Rationals are :class:`fractions.Fraction` (already canonical: reduced, positive
denominator).  Intervals carry double endpoints; every operation widens its
result so that it encloses the exact image of its inputs.
"""
from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Union

Rational = Fraction

_DECIMAL_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")

_INF = math.inf


class ParseError(ValueError):
    """A token is not a decimal literal."""


class DomainError(ValueError):
    """An interval operation was applied outside its domain."""

    def __init__(self, message: str, interval: "Interval | None" = None):
        super().__init__(message)
        self.interval = interval


def rationalize(decimal_text: str) -> Fraction:
    """Return the exact rational denoted by a decimal literal like ``-1.25e-3``."""
    text = decimal_text.strip()
    if not _DECIMAL_RE.fullmatch(text):
        raise ParseError(f"not a decimal literal: {decimal_text!r}")
    return Fraction(text)


def _is_square(q: Fraction) -> bool:
    num, den = q.numerator, q.denominator
    return math.isqrt(num) ** 2 == num and math.isqrt(den) ** 2 == den


@total_ordering
@dataclass(frozen=True)
class SqrtRational:
    """The real number ``sign * sqrt(square)`` with ``square`` a non-negative rational."""

    sign: int
    square: Fraction

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        sq = Fraction(self.square)
        object.__setattr__(self, "square", sq)
        if sq < 0:
            raise ValueError("square must be non-negative")
        if (self.sign == 0) != (sq == 0):
            raise ValueError("sign is 0 exactly when square is 0")

    @classmethod
    def from_rational(cls, q) -> "SqrtRational":
        q = Fraction(q)
        return cls((q > 0) - (q < 0), q * q)

    @classmethod
    def from_signed_square(cls, sign: int, square) -> "SqrtRational":
        square = Fraction(square)
        if square == 0:
            return cls(0, square)
        return cls(sign, square)

    def is_rational(self) -> bool:
        return _is_square(self.square)

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        q = self.square
        return self.sign * Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))

    def to_interval(self) -> "Interval":
        if self.is_rational():
            return Interval.from_value(self.as_rational())
        mag = Interval.from_value(self.square).sqrt()
        return mag if self.sign > 0 else -mag

    def __neg__(self) -> "SqrtRational":
        return SqrtRational(-self.sign, self.square)

    def __mul__(self, other: "SqrtRational") -> "SqrtRational":
        if not isinstance(other, SqrtRational):
            other = SqrtRational.from_rational(other)
        return SqrtRational(self.sign * other.sign, self.square * other.square)

    def __float__(self) -> float:
        return self.sign * math.sqrt(self.square)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SqrtRational):
            try:
                other = SqrtRational.from_rational(other)
            except (TypeError, ValueError):
                return NotImplemented
        return sqrt_rational_compare(self, other) == 0

    def __lt__(self, other) -> bool:
        if not isinstance(other, SqrtRational):
            other = SqrtRational.from_rational(other)
        return sqrt_rational_compare(self, other) < 0

    def __hash__(self) -> int:
        return hash((self.sign, self.square))

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.as_rational())
        return f"{'-' if self.sign < 0 else ''}sqrt({self.square})"


def sqrt_rational_compare(x: SqrtRational, y: SqrtRational) -> int:
    """Exact three-way comparison: -1 if x < y, 0 if equal, 1 if x > y."""
    if x.sign != y.sign:
        return -1 if x.sign < y.sign else 1
    if x.sign == 0:
        return 0
    c = (x.square > y.square) - (x.square < y.square)
    return c if x.sign > 0 else -c


def _down(x: float, steps: int = 1) -> float:
    for _ in range(steps):
        x = math.nextafter(x, -_INF)
    return x


def _up(x: float, steps: int = 1) -> float:
    for _ in range(steps):
        x = math.nextafter(x, _INF)
    return x


# libm transcendental results are not correctly rounded; pad by this many ulps.
_TRANS_PAD = 2

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @classmethod
    def from_value(cls, q: Number) -> "Interval":
        """Tightest double enclosure of an exact int, float or rational."""
        if isinstance(q, Interval):
            return q
        if isinstance(q, float):
            return cls(q, q)
        q = Fraction(q)
        f = float(q)
        exact = Fraction(f)
        if exact == q:
            return cls(f, f)
        if exact > q:
            return cls(_down(f), f)
        return cls(f, _up(f))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, float):
            return self.lo <= x <= self.hi
        q = Fraction(x)
        return Fraction(self.lo) <= q <= Fraction(self.hi)

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise DomainError("empty intersection", self)
        return Interval(lo, hi)

    def _coerce(self, other) -> "Interval":
        return other if isinstance(other, Interval) else Interval.from_value(other)

    def __add__(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        o = self._coerce(other)
        return Interval(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other) -> "Interval":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Interval":
        o = self._coerce(other)
        prods = [a * b for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        prods = [0.0 if math.isnan(p) else p for p in prods]
        return Interval(_down(min(prods)), _up(max(prods)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        o = self._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise DomainError("division by an interval containing zero", o)
        quots = [a / b for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval(_down(min(quots)), _up(max(quots)))

    def __rtruediv__(self, other) -> "Interval":
        return self._coerce(other) / self

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise DomainError("sqrt of an interval with negative part", self)
        # the float product lo * lo rounds, so exactness is checked in rationals
        lo = math.sqrt(self.lo)
        lo = lo if Fraction(lo) ** 2 == Fraction(self.lo) else max(0.0, _down(lo))
        hi = math.sqrt(self.hi)
        hi = hi if Fraction(hi) ** 2 == Fraction(self.hi) else _up(hi)
        return Interval(lo, hi)

    def exp(self) -> "Interval":
        return _monotone(math.exp, self, increasing=True, floor=0.0)

    def cosh(self) -> "Interval":
        a, b = abs(self.lo), abs(self.hi)
        if self.lo <= 0.0 <= self.hi:
            lo_arg, hi_arg = 0.0, max(a, b)
        else:
            lo_arg, hi_arg = min(a, b), max(a, b)
        lo = 1.0 if lo_arg == 0.0 else max(1.0, _down(math.cosh(lo_arg), _TRANS_PAD))
        hi = 1.0 if hi_arg == 0.0 else _up(math.cosh(hi_arg), _TRANS_PAD)
        return Interval(lo, hi)

    def sech(self) -> "Interval":
        return 1 / self.cosh()

    def cos(self) -> "Interval":
        if self.width >= 2 * math.pi:
            return Interval(-1.0, 1.0)
        vals = [math.cos(self.lo), math.cos(self.hi)]
        lo = max(-1.0, _down(min(vals), _TRANS_PAD))
        hi = min(1.0, _up(max(vals), _TRANS_PAD))
        # extrema at multiples of pi; k ranges are widened so no multiple is missed
        k_lo = math.floor(self.lo / math.pi) - 1
        k_hi = math.ceil(self.hi / math.pi) + 1
        for k in range(k_lo, k_hi + 1):
            kpi = k * _PI_ENCLOSURE
            if kpi.hi >= self.lo and kpi.lo <= self.hi:
                if k % 2 == 0:
                    hi = 1.0
                else:
                    lo = -1.0
        return Interval(lo, hi)

    def sec(self) -> "Interval":
        return 1 / self.cos()

    def arccos(self) -> "Interval":
        if self.lo < -1.0 or self.hi > 1.0:
            raise DomainError("arccos needs [-1, 1]", self)
        lo = max(0.0, _down(math.acos(self.hi), _TRANS_PAD))
        hi = min(_PI_ENCLOSURE.hi, _up(math.acos(self.lo), _TRANS_PAD))
        return Interval(lo, hi)

    def arcsin(self) -> "Interval":
        if self.lo < -1.0 or self.hi > 1.0:
            raise DomainError("arcsin needs [-1, 1]", self)
        half = _PI_ENCLOSURE.hi / 2
        return Interval(
            max(-half, _down(math.asin(self.lo), _TRANS_PAD)),
            min(half, _up(math.asin(self.hi), _TRANS_PAD)),
        )

    def arccosh(self) -> "Interval":
        if self.lo < 1.0:
            raise DomainError("arccosh needs values >= 1", self)
        lo = 0.0 if self.lo == 1.0 else max(0.0, _down(math.acosh(self.lo), _TRANS_PAD))
        return Interval(lo, _up(math.acosh(self.hi), _TRANS_PAD))

    def hex(self) -> tuple[str, str]:
        return self.lo.hex(), self.hi.hex()

    def __str__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def _monotone(fn: Callable[[float], float], x: Interval, increasing: bool,
              floor: float = -_INF) -> Interval:
    a, b = fn(x.lo), fn(x.hi)
    if not increasing:
        a, b = b, a
    return Interval(max(floor, _down(a, _TRANS_PAD)), _up(b, _TRANS_PAD))


_PI_ENCLOSURE = Interval(math.pi, math.nextafter(math.pi, _INF))
PI = _PI_ENCLOSURE


def _unary(name: str) -> Callable[[Interval], Interval]:
    def fn(x):
        return getattr(Interval.from_value(x) if not isinstance(x, Interval) else x, name)()

    fn.__name__ = name
    return fn


sqrt = _unary("sqrt")
exp = _unary("exp")
cosh = _unary("cosh")
sech = _unary("sech")
cos = _unary("cos")
sec = _unary("sec")
arccos = _unary("arccos")
arcsin = _unary("arcsin")
arccosh = _unary("arccosh")

INTERVAL_FUNCTIONS: dict[str, Callable[[Interval], Interval]] = {
    f.__name__: f for f in (sqrt, exp, cosh, sech, cos, sec, arccos, arcsin, arccosh)
}


def interval_eval(expr: str, **args) -> Interval:
    """Evaluate an arithmetic expression over intervals.

    ``expr`` may use ``+ - * /``, the functions in :data:`INTERVAL_FUNCTIONS`,
    the constant ``pi``, numeric literals (enclosed exactly as decimals) and
    the names passed as keyword arguments (intervals or exact numbers).

    >>> interval_eval("cosh(x)", x=Interval(0.0, 0.0))
    Interval(lo=1.0, hi=1.0)
    """
    env = {k: Interval.from_value(v) for k, v in args.items()}
    tree = ast.parse(expr, mode="eval")
    return _eval_node(tree.body, env)


def _eval_node(node: ast.AST, env: dict[str, Interval]) -> Interval:
    if isinstance(node, ast.BinOp):
        left, right = _eval_node(node.left, env), _eval_node(node.right, env)
        ops = {ast.Add: Interval.__add__, ast.Sub: Interval.__sub__,
               ast.Mult: Interval.__mul__, ast.Div: Interval.__truediv__}
        for op_type, op in ops.items():
            if isinstance(node.op, op_type):
                return op(left, right)
        raise ValueError(f"unsupported operator {type(node.op).__name__}")
    if isinstance(node, ast.UnaryOp):
        operand = _eval_node(node.operand, env)
        if isinstance(node.op, ast.USub):
            return -operand
        if isinstance(node.op, ast.UAdd):
            return operand
        raise ValueError(f"unsupported unary operator {type(node.op).__name__}")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in INTERVAL_FUNCTIONS:
            raise ValueError(f"unsupported function in {ast.unparse(node)}")
        if len(node.args) != 1 or node.keywords:
            raise ValueError(f"{node.func.id} takes exactly one argument")
        return INTERVAL_FUNCTIONS[node.func.id](_eval_node(node.args[0], env))
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return PI
        if node.id not in env:
            raise ValueError(f"unbound name {node.id!r}")
        return env[node.id]
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        value = node.value
        return Interval.from_value(value if isinstance(value, int) else Fraction(repr(value)))
    raise ValueError(f"unsupported expression element {ast.dump(node)}")
