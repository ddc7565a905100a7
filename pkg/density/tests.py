"""
Tests for the stage densities z_t, their martingale structure and the mu+ CDF.
"""
from fractions import Fraction

from django.test import SimpleTestCase

from homeo1d.construction import Construction
from markov.measures import MeasureSpec
from numerics.backends import ExactBackend, FloatBackend
from numerics.field import INV_PHI, INV_PHI2, FieldElement
from schedule.engine import Schedule, StageParams
from schedule.profiles import RigorProfile
from symbolic.shift import endpoints, enumerate_words

from .cdf import mu_plus_cdf
from .martingale import (
    conditional_average,
    cylinder_density,
    density_spread,
    mass_balance,
    stage_density_2d,
    substitution_schedule,
    ui_diagnostic,
    z_eval,
    z_telescoping,
)


def one_block(epsilon=Fraction(1, 64)) -> Schedule:
    stage = StageParams(1, FieldElement(Fraction(11, 10)), 2, 3, 3, 6, Fraction(epsilon), 1)
    return Schedule(RigorProfile.toy(), (stage,))


def two_blocks(epsilon=Fraction(1, 64)) -> Schedule:
    first = StageParams(1, FieldElement(Fraction(11, 10)), 2, 3, 3, 6, Fraction(epsilon), 2)
    second = StageParams(2, FieldElement(Fraction(21, 20)), 3, 9, 3, 12, Fraction(epsilon) / 2, 1)
    return Schedule(RigorProfile.toy(), (first, second))


class PointDensityTests(SimpleTestCase):
    def setUp(self):
        self.schedule = two_blocks()
        self.backend = FloatBackend(53)

    def test_no_collars(self):
        """Test: eps = 0 -> z_t = 1."""
        schedule = two_blocks(0)
        x = FieldElement(Fraction(3, 10))
        self.assertEqual(z_eval(schedule, 1, x, ExactBackend()), 1)
        self.assertEqual(z_eval(schedule, 2, 0.3, self.backend), 1.0)

    def test_direct_matches_telescoping(self):
        for x in (0.011, 0.27, 0.5, 0.83):
            direct = z_eval(self.schedule, 2, x, self.backend)
            product, factors = z_telescoping(self.schedule, 2, x, self.backend)
            self.assertEqual(len(factors), 2)
            self.assertAlmostEqual(direct, product, places=12)

    def test_one_block_ratio(self):
        """Test: t = 1 -> ratio of the two stage derivatives."""
        schedule = one_block()
        x = 0.0031
        perturbed = Construction(schedule, self.backend).eval_H(3, x)[1]
        reference = Construction(schedule.zero_epsilon(), self.backend).eval_H(3, x)[1]
        self.assertAlmostEqual(z_eval(schedule, 1, x, self.backend), perturbed / reference, places=14)

    def test_endpoint_is_rejected(self):
        with self.assertRaises(ValueError):
            z_eval(self.schedule, 1, INV_PHI2, ExactBackend())
        with self.assertRaises(ValueError):
            z_eval(self.schedule, 1, 0.0, self.backend)

    def test_substitution_keeps_leading_collars(self):
        partial = substitution_schedule(self.schedule, 1)
        self.assertEqual(partial.epsilons(), (Fraction(1, 64), 0))
        with self.assertRaises(ValueError):
            substitution_schedule(self.schedule, 3)


class MartingaleTests(SimpleTestCase):
    def test_mass_balance_is_exact(self):
        """Test: E_mu+[z_1] = 1 exactly for one block."""
        self.assertEqual(mass_balance(one_block(), 1, ExactBackend()), 1)

    def test_mass_balance_two_blocks(self):
        self.assertAlmostEqual(float(mass_balance(two_blocks(), 2, FloatBackend(53))), 1.0, places=12)

    def test_conditional_average_is_previous_density(self):
        """Averages of z_2 over depth-N_1 cylinders equal z_1 there."""
        schedule = two_blocks()
        backend = ExactBackend()
        for word in enumerate_words(3):
            self.assertEqual(
                conditional_average(schedule, 1, word, 2, backend),
                cylinder_density(schedule, 1, word, backend),
                word,
            )

    def test_spread_brackets_one(self):
        low, high = density_spread(two_blocks(), 2, FloatBackend(53))
        self.assertLessEqual(low, 1.0)
        self.assertGreaterEqual(high, 1.0)

    def test_wrong_word_length(self):
        with self.assertRaises(ValueError):
            cylinder_density(two_blocks(), 1, "13", ExactBackend())


class UniformIntegrabilityTests(SimpleTestCase):
    def test_tails_without_collars(self):
        """Test: eps = 0 -> tail 0 for M >= 1."""
        report = ui_diagnostic(two_blocks(0), 2, [1.0, 1.5, 2.0], FloatBackend(53))
        for level in report.levels:
            self.assertEqual(report.sup_tail(level), 0.0)

    def test_tails_decrease(self):
        """Tails are nonincreasing in M; below min z_t the tail is the whole mass."""
        report = ui_diagnostic(two_blocks(), 2, [0.1, 0.9, 1.0, 1.02, 1.2, 3.0], FloatBackend(53))
        self.assertTrue(report.nonincreasing)
        self.assertAlmostEqual(report.sup_tail(0.1), 1.0, places=9)
        self.assertEqual(report.sup_tail(3.0), 0.0)
        self.assertEqual(len(report.to_dict()["rows"]), 12)

    def test_t_max_range(self):
        with self.assertRaises(ValueError):
            ui_diagnostic(two_blocks(), 3, [1.0])


class CdfTests(SimpleTestCase):
    def setUp(self):
        self.schedule = two_blocks()

    def test_golden_point(self):
        """Test: x = 1/phi -> 1/phi."""
        for n in (1, 4, 9):
            self.assertEqual(mu_plus_cdf(self.schedule, n, INV_PHI), INV_PHI)

    def test_right_end(self):
        self.assertEqual(mu_plus_cdf(self.schedule, 5, 1), 1)

    def test_lebesgue_is_identity(self):
        """Test: x = 1/phi^2 under Lebesgue -> 1/phi^2."""
        spec = MeasureSpec.lebesgue()
        self.assertEqual(mu_plus_cdf(None, 6, INV_PHI2, spec=spec), INV_PHI2)
        x = FieldElement(Fraction(2, 9))
        self.assertEqual(mu_plus_cdf(None, 6, x, spec=spec), x)

    def test_monotone(self):
        backend = FloatBackend(53)
        values = [mu_plus_cdf(self.schedule, 8, k / 300, backend=backend) for k in range(301)]
        self.assertTrue(all(a <= b for a, b in zip(values, values[1:])))

    def test_refinement_consistency(self):
        for e in endpoints(4):
            self.assertEqual(mu_plus_cdf(self.schedule, 4, e), mu_plus_cdf(self.schedule, 5, e))

    def test_matches_zero_collar_images(self):
        """At cylinder endpoints the CDF is the zero-collar H."""
        reference = Construction(self.schedule.zero_epsilon(), ExactBackend())
        for e in endpoints(5):
            self.assertEqual(mu_plus_cdf(self.schedule, 5, e), reference.value_at(e))


class FiberedDensityTests(SimpleTestCase):
    def test_interior_fiber_matches_one_dimensional_density(self):
        """Away from the horizontal boundary z_{t,y} = z_t."""
        schedule = two_blocks()
        backend = FloatBackend(53)
        for x in (0.1, 0.45):
            self.assertAlmostEqual(
                stage_density_2d(schedule, 2, x, 0.0, backend),
                z_eval(schedule, 2, x, backend),
                places=12,
            )
