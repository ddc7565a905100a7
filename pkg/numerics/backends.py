# numerics/backends.py
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Union

import mpmath
from django.conf import settings

from .field import FieldElement, to_float


logger = logging.getLogger(__name__)

Scalar = Union[FieldElement, float, mpmath.mpf]

NATIVE_FLOAT_BITS = 53


class PrecisionBudgetError(ArithmeticError):
    """A tolerance is below what the backend can certify."""


class Backend:
    """Arithmetic backend shared by every evaluation routine.

    Routines are written against plain operators (+, -, *, /, <); the
    backend only decides how constants enter that arithmetic.
    """

    name = "abstract"
    exact = False
    precision: int | None = None

    def lift(self, value) -> Scalar:
        raise NotImplementedError

    def to_float(self, value) -> float:
        if isinstance(value, FieldElement):
            return float(value)
        return float(value)

    def exp(self, value) -> Scalar:
        raise PrecisionBudgetError(f"{self.name} backend has no transcendental functions")

    def log(self, value) -> Scalar:
        raise PrecisionBudgetError(f"{self.name} backend has no transcendental functions")

    def sqrt(self, value) -> Scalar:
        raise PrecisionBudgetError(f"{self.name} backend has no transcendental functions")

    def resolution(self) -> Scalar:
        """Smallest relative tolerance the backend can certify."""
        return self.lift(0)

    def describe(self) -> dict:
        return {"backend": self.name, "precision": self.precision}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(precision={self.precision})"


class ExactBackend(Backend):
    name = "exact"
    exact = True

    def lift(self, value) -> FieldElement:
        return FieldElement.coerce(value)

    def resolution(self) -> FieldElement:
        return FieldElement(0)


class FloatBackend(Backend):
    """Binary floating point with a fixed mantissa width.

    Up to 53 bits the native float is used; beyond that a private
    mpmath context keeps the precision independent of the global one.
    """

    name = "float"

    def __init__(self, precision: int | None = None):
        if precision is None:
            precision = getattr(settings, "GOLDEN_PRECISION_BITS", 80)
        if precision < 16:
            raise ValueError("float backend needs at least 16 bits of precision")
        self.precision = int(precision)
        self.native = self.precision <= NATIVE_FLOAT_BITS
        if not self.native:
            self.ctx = mpmath.MPContext()
            self.ctx.prec = self.precision

    def lift(self, value) -> Scalar:
        if isinstance(value, FieldElement):
            if self.native:
                return float(to_float(value, NATIVE_FLOAT_BITS))
            return self.ctx.mpf(to_float(value, self.precision))
        if isinstance(value, Fraction):
            if self.native:
                return value.numerator / value.denominator
            return self.ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            return self.lift(FieldElement.parse(value))
        if self.native:
            return float(value)
        return self.ctx.mpf(value)

    def exp(self, value) -> Scalar:
        return math.exp(value) if self.native else self.ctx.exp(value)

    def log(self, value) -> Scalar:
        return math.log(value) if self.native else self.ctx.log(value)

    def sqrt(self, value) -> Scalar:
        return math.sqrt(value) if self.native else self.ctx.sqrt(value)

    def resolution(self) -> Scalar:
        return self.lift(Fraction(1, 2 ** (self.precision - 4)))


def get_backend(name: str = "float", precision: int | None = None) -> Backend:
    if name == "exact":
        return ExactBackend()
    if name == "float":
        return FloatBackend(precision)
    raise ValueError(f"unknown backend {name!r}")
