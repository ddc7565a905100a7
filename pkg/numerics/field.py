# numerics/field.py
"""
Exact arithmetic in the quadratic field Q(sqrt 5).

Elements are stored as a + b*phi with rational a, b and phi = (1 + sqrt 5)/2.
Every constant the construction needs (partition endpoints, cylinder
endpoints, gluing offsets) has small coordinates in this basis.
"""
from __future__ import annotations

import math
import re
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath


Rational = Union[int, Fraction]

DEFAULT_PRECISION = 53
GUARD_BITS = 32

_TEXT_PATTERN = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)\s*"
    r"(?:\+\s*(?P<b>[+-]?\d+(?:/\d+)?)\s*[·*]\s*phi)?\s*$"
)

_local = threading.local()


def _context() -> mpmath.MPContext:
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = mpmath.MPContext()
        _local.ctx = ctx
    return ctx


class FieldElement:
    """Value a + b*phi of Q(sqrt 5); immutable and hashable."""

    __slots__ = ("a", "b")

    def __init__(self, a: Rational = 0, b: Rational = 0):
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def __reduce__(self):
        return FieldElement, (self.a, self.b)

    # -- construction ---------------------------------------------------
    @classmethod
    def coerce(cls, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value, 0)
        if isinstance(value, str):
            return cls.parse(value)
        raise TypeError(f"cannot represent {value!r} exactly in Q(sqrt 5)")

    @classmethod
    def parse(cls, text: str) -> "FieldElement":
        """Read the textual form ``p/q + r/s·phi`` (or a bare rational)."""
        match = _TEXT_PATTERN.match(text)
        if match is None:
            raise ValueError(f"not a field element: {text!r}")
        b = match.group("b")
        return cls(Fraction(match.group("a")), Fraction(b) if b is not None else 0)

    def __str__(self) -> str:
        return f"{self.a} + {self.b}·phi"

    def __repr__(self) -> str:
        return f"FieldElement({self})"

    # -- ring structure -------------------------------------------------
    def __add__(self, other):
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return FieldElement(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return FieldElement(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __neg__(self):
        return FieldElement(-self.a, -self.b)

    def __pos__(self):
        return self

    def __mul__(self, other):
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, c, d = self.a, self.b, other.a, other.b
        # phi^2 = phi + 1
        bd = b * d
        return FieldElement(a * c + bd, a * d + b * c + bd)

    __rmul__ = __mul__

    def conjugate(self) -> "FieldElement":
        """Galois conjugate a + b*(1 - phi)."""
        return FieldElement(self.a + self.b, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a + self.a * self.b - self.b * self.b

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 5)")
        conj = self.conjugate()
        return FieldElement(conj.a / n, conj.b / n)

    def __truediv__(self, other):
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = ONE, self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # -- order ----------------------------------------------------------
    def sign(self) -> int:
        """Exact sign of the real embedding.

        Writing the value as c + d*sqrt5 with c = a + b/2 and d = b/2, the
        sign is immediate when c and d agree; otherwise the norm c^2 - 5d^2
        decides which term dominates.
        """
        c = self.a + self.b / 2
        d = self.b / 2
        sc = (c > 0) - (c < 0)
        sd = (d > 0) - (d < 0)
        if sd == 0:
            return sc
        if sc == 0 or sc == sd:
            return sd
        norm = c * c - 5 * d * d
        assert norm != 0, "nonzero element with vanishing norm"
        return sc if norm > 0 else sd

    def _compare(self, other) -> int:
        other = FieldElement.coerce(other)
        return (self - other).sign()

    def __eq__(self, other):
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __lt__(self, other):
        try:
            return self._compare(other) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other):
        try:
            return self._compare(other) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other):
        try:
            return self._compare(other) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other):
        try:
            return self._compare(other) >= 0
        except TypeError:
            return NotImplemented

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def floor(self) -> int:
        """Largest integer not above the value, decided exactly."""
        guess = math.floor(float(self))
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess

    def __float__(self) -> float:
        return float(to_float(self, DEFAULT_PRECISION))


def field_cmp(x, y) -> int:
    """-1, 0 or 1 according to the real order of x and y."""
    return FieldElement.coerce(x)._compare(y)


def to_float(x, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Round x to a binary float with ``precision`` mantissa bits.

    The value is evaluated with guard bits; the guard grows until the
    cancellation between the rational and irrational parts can no longer
    affect the final rounding.
    """
    x = FieldElement.coerce(x)
    ctx = _context()
    c = x.a + x.b / 2
    d = x.b / 2
    if d == 0:
        ctx.prec = precision
        return ctx.mpf(c.numerator) / c.denominator
    guard = GUARD_BITS
    while True:
        ctx.prec = precision + guard
        first = ctx.mpf(c.numerator) / c.denominator
        second = ctx.mpf(d.numerator) / d.denominator * ctx.sqrt(5)
        value = first + second
        scale = abs(first) + abs(second)
        if value != 0 and scale / abs(value) < ctx.mpf(2) ** (guard - 8):
            break
        guard *= 2
    ctx.prec = precision
    return +value


ZERO = FieldElement(0, 0)
ONE = FieldElement(1, 0)
PHI = FieldElement(0, 1)
INV_PHI = FieldElement(-1, 1)
INV_PHI2 = FieldElement(2, -1)
INV_PHI3 = FieldElement(-3, 2)
SQRT5 = FieldElement(-1, 2)


@lru_cache(maxsize=1 << 16)
def approximate(x: FieldElement, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Memoized ``to_float`` for the constants evaluation loops keep lifting."""
    return to_float(x, precision)
