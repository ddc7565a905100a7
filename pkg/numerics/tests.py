"""
Tests for exact Q(sqrt 5) arithmetic and the evaluation backends.
"""
import random
from fractions import Fraction

import mpmath
from django.test import SimpleTestCase, override_settings

from .backends import ExactBackend, FloatBackend, PrecisionBudgetError, get_backend
from .field import (
    INV_PHI,
    INV_PHI2,
    ONE,
    PHI,
    SQRT5,
    ZERO,
    FieldElement,
    approximate,
    field_cmp,
    to_float,
)


class FieldArithmeticTests(SimpleTestCase):
    """Ring and order structure of the golden field."""

    def test_phi_squared_is_phi_plus_one(self):
        """Test: phi * phi = 1 + phi."""
        self.assertEqual(PHI * PHI, FieldElement(1, 1))

    def test_inverse_of_phi(self):
        """Test: 1/phi = -1 + phi."""
        self.assertEqual(ONE / PHI, FieldElement(-1, 1))
        self.assertEqual(PHI * INV_PHI, ONE)

    def test_partition_lengths_add_up(self):
        """1/phi + 1/phi^2 = 1 exactly."""
        self.assertEqual(INV_PHI + INV_PHI2, ONE)

    def test_compare_partition_points(self):
        """Test: 1/phi^2 < 1/phi."""
        self.assertEqual(field_cmp(INV_PHI2, INV_PHI), -1)
        self.assertEqual(field_cmp(INV_PHI, INV_PHI), 0)
        self.assertTrue(INV_PHI2 < INV_PHI)
        self.assertFalse(INV_PHI < INV_PHI2)

    def test_sign_of_near_cancellation(self):
        """Convergent ratios F(n+1)/F(n) approach phi from alternating sides."""
        fib = [1, 1]
        for _ in range(40):
            fib.append(fib[-1] + fib[-2])
        for k in range(2, 40):
            ratio = Fraction(fib[k + 1], fib[k])
            expected = -1 if k % 2 == 0 else 1
            self.assertEqual(field_cmp(ratio, PHI), expected, k)

    def test_sqrt5_squares_to_five(self):
        self.assertEqual(SQRT5 * SQRT5, FieldElement(5))

    def test_division_by_zero(self):
        """Test: dividing by zero raises ZeroDivisionError."""
        with self.assertRaises(ZeroDivisionError):
            PHI / ZERO

    def test_text_round_trip(self):
        """The JSON text form parses back to the same element."""
        x = FieldElement(Fraction(-3, 7), Fraction(5, 11))
        self.assertEqual(FieldElement.parse(str(x)), x)
        self.assertEqual(FieldElement.parse("2/3"), FieldElement(Fraction(2, 3)))
        with self.assertRaises(ValueError):
            FieldElement.parse("phi + 1")

    def test_floor(self):
        self.assertEqual(PHI.floor(), 1)
        self.assertEqual((-INV_PHI).floor(), -1)
        self.assertEqual((PHI ** 10).floor(), 122)

    def test_hash_agrees_with_rationals(self):
        """Rational elements hash like the Fraction they equal."""
        self.assertEqual(hash(FieldElement(Fraction(1, 3))), hash(Fraction(1, 3)))
        self.assertEqual(len({PHI * INV_PHI, ONE}), 1)


class ToFloatTests(SimpleTestCase):
    def test_phi(self):
        """Test: phi -> 1.6180339887..."""
        self.assertAlmostEqual(float(to_float(PHI)), 1.6180339887498949, places=15)

    def test_top_level(self):
        """phi^2/(phi+2) -> 0.7236067977... at 128 bits."""
        value = to_float(PHI * PHI / (PHI + 2), 128)
        ctx = mpmath.MPContext()
        ctx.prec = 160
        reference = ctx.mpf("0.72360679774997896964091736687312762354406183596115")
        self.assertLess(abs(value - reference), ctx.mpf(2) ** -120)

    def test_zero(self):
        self.assertEqual(float(to_float(ZERO)), 0.0)

    def test_cached_approximation(self):
        self.assertEqual(approximate(INV_PHI, 64), to_float(INV_PHI, 64))

    def test_random_chains_agree_with_high_precision(self):
        """Exact and 128-bit float chains agree to 2^-100 relative error."""
        rng = random.Random(7)
        ctx = mpmath.MPContext()
        ctx.prec = 128
        sqrt5 = ctx.sqrt(5)

        def lift(x):
            return (ctx.mpf(x.a.numerator) / x.a.denominator
                    + ctx.mpf(x.b.numerator) / x.b.denominator * (1 + sqrt5) / 2)

        for _ in range(300):
            x = FieldElement(Fraction(rng.randint(1, 50), rng.randint(1, 50)),
                             Fraction(rng.randint(0, 20), rng.randint(1, 20)))
            fx = lift(x)
            for _ in range(20):
                y = FieldElement(Fraction(rng.randint(1, 30), rng.randint(1, 30)),
                                 Fraction(rng.randint(0, 5), rng.randint(1, 9)))
                op = rng.choice("+*/")
                if op == "+":
                    x, fx = x + y, fx + lift(y)
                elif op == "*":
                    x, fx = x * y, fx * lift(y)
                else:
                    x, fx = x / y, fx / lift(y)
            exact = to_float(x, 128)
            if exact != 0:
                self.assertLess(abs((fx - exact) / exact), ctx.mpf(2) ** -100)


class BackendTests(SimpleTestCase):
    def test_exact_backend_keeps_field_elements(self):
        backend = ExactBackend()
        self.assertEqual(backend.lift(Fraction(1, 2)), FieldElement(Fraction(1, 2)))
        self.assertTrue(backend.exact)
        with self.assertRaises(PrecisionBudgetError):
            backend.exp(ONE)

    def test_native_float_backend(self):
        backend = FloatBackend(53)
        self.assertIsInstance(backend.lift(PHI), float)
        self.assertAlmostEqual(backend.lift("0 + 1·phi"), 1.618033988749895)

    @override_settings(GOLDEN_PRECISION_BITS=96)
    def test_default_precision_from_settings(self):
        """Test: the precision default comes from GOLDEN_PRECISION_BITS."""
        backend = FloatBackend()
        self.assertEqual(backend.precision, 96)
        self.assertEqual(backend.describe(), {"backend": "float", "precision": 96})

    def test_too_little_precision(self):
        with self.assertRaises(ValueError):
            FloatBackend(8)

    def test_get_backend(self):
        self.assertIsInstance(get_backend("exact"), ExactBackend)
        with self.assertRaises(ValueError):
            get_backend("interval")
