"""
Tests for the schedule engine, rigor profiles and the JSON schedule file.
"""
import json
import math
from fractions import Fraction

from django.test import SimpleTestCase
from rest_framework import serializers

from markov.chains import distortion_ratio
from numerics.field import PHI, FieldElement
from symbolic.shift import enumerate_words, cylinder_of

from .engine import (
    BAND_HIGH,
    BAND_LOW,
    InfeasibleScheduleError,
    LatticeError,
    Schedule,
    band_product,
    build_schedule,
    correction_flatness_bound,
    default_theta,
    lambda_from_ratio,
    solve_epsilon,
    solve_lambda,
)
from .profiles import RigorProfile
from .serializers import schedule_from_dict, schedule_to_dict


class ProfileTests(SimpleTestCase):
    def test_toy_tolerances_must_lie_in_unit_interval(self):
        """Test: toy delta = 1 is rejected."""
        with self.assertRaises(ValueError):
            RigorProfile.toy(delta=1)
        with self.assertRaises(ValueError):
            RigorProfile.toy(eta=0)

    def test_strict_constants(self):
        strict = RigorProfile.strict()
        self.assertEqual(strict.mixing_tolerance(2), Fraction(1, 3 ** 6))
        self.assertEqual(strict.frequency_tolerance(3), Fraction(1, 8))
        self.assertEqual(strict.drift(1, 21), Fraction(1, 2 ** 17))
        self.assertEqual(strict.lattice_drift(2, 21), Fraction(1, 2 ** 21))

    def test_toy_drift_halves_per_block(self):
        toy = RigorProfile.toy()
        self.assertEqual(toy.drift(2, 99), toy.drift(1, 5) / 2)

    def test_profile_dict_round_trip(self):
        toy = RigorProfile.toy(delta=Fraction(1, 3))
        self.assertEqual(RigorProfile.from_dict(toy.to_dict()), toy)

    def test_unknown_profile(self):
        with self.assertRaises(ValueError):
            RigorProfile.named("lenient")


class LambdaTests(SimpleTestCase):
    def test_closed_form_inverse(self):
        """Test: f(lambda_from_ratio(r)) = r exactly."""
        r = Fraction(1001, 1000)
        self.assertEqual(distortion_ratio(lambda_from_ratio(r)), FieldElement(r))

    def test_ratio_one_is_rejected(self):
        """Test: f(1) = 1, and lambda = 1 is not admissible."""
        with self.assertRaises(LatticeError):
            lambda_from_ratio(1)
        with self.assertRaises(LatticeError):
            lambda_from_ratio(Fraction(2))

    def test_square_root_step_is_exact(self):
        """Test: f(prev) = theta^2, p = 2 -> f(lambda) = theta."""
        theta = Fraction(10001, 10000)
        prev = lambda_from_ratio(theta ** 2)
        choice = solve_lambda(prev, 2, t=2, m_prev=3, N_prev=3, M_prev=6)
        self.assertIsInstance(choice.lam, FieldElement)
        self.assertEqual(distortion_ratio(choice.lam), FieldElement(theta))
        self.assertLess(choice.lam, prev)

    def test_irrational_step_falls_back_to_floats(self):
        """Test: lambda_{t-1} = 1.02, p = 4 -> f(lambda)^4 = f(1.02)."""
        prev = FieldElement(Fraction(51, 50))
        choice = solve_lambda(prev, 4, t=2, m_prev=3, N_prev=3, M_prev=6)
        phi = float(PHI)
        f = choice.lam * (1 + phi) / (1 + phi * choice.lam)
        self.assertAlmostEqual(f ** 4, float(distortion_ratio(prev)), places=12)

    def test_failing_checks_are_named(self):
        """A large lambda against a long previous block fails the block drift bound."""
        prev = lambda_from_ratio(Fraction(3, 2))
        choice = solve_lambda(prev, 2, t=2, m_prev=40, N_prev=30, M_prev=70)
        self.assertFalse(choice.admissible)
        self.assertIn("block-drift", choice.failing)

    def test_p_must_be_at_least_two(self):
        with self.assertRaises(ValueError):
            solve_lambda(lambda_from_ratio(Fraction(11, 10)), 1, t=2, m_prev=3, N_prev=3, M_prev=6)


class EpsilonTests(SimpleTestCase):
    def setUp(self):
        self.partial = build_schedule(1, "toy")

    def test_zero_collar_is_always_admissible(self):
        choice = solve_epsilon(2, self.partial, self.partial.stage(1).lam, 4, 10, zero=True)
        self.assertEqual(choice.epsilon, 0)
        self.assertEqual(len(choice.bounds), 4)

    def test_dyadic_below_half_the_bounds(self):
        lam = self.partial.stage(1).lam
        choice = solve_epsilon(2, self.partial, lam, 4, 10)
        self.assertLessEqual(choice.epsilon, min(choice.bounds.values()) / 2)
        self.assertGreater(2 * choice.epsilon, min(choice.bounds.values()) / 2)
        self.assertEqual(choice.epsilon.numerator, 1)

    def test_collar_gap_never_exceeds_shortest_cylinder(self):
        """Test: N_t = 3 (t = 1) -> gap <= phi^2 x longest depth-4 length, >= shortest."""
        empty = Schedule(RigorProfile.toy(), ())
        choice = solve_epsilon(1, empty, self.partial.stage(1).lam, 2, 3)
        lengths = [float(cylinder_of(w).length) for w in enumerate_words(4)]
        gap = choice.bounds["collar-gap"] / float(PHI * PHI)
        self.assertGreaterEqual(gap, min(lengths) - 1e-15)
        self.assertLessEqual(gap, max(lengths) + 1e-15)

    def test_deeper_blocks_shrink_the_gap(self):
        lam = self.partial.stage(1).lam
        shallow = solve_epsilon(2, self.partial, lam, 4, 10).bounds["collar-gap"]
        deep = solve_epsilon(2, self.partial, lam, 4, 20).bounds["collar-gap"]
        self.assertLess(deep, shallow)


class BuildScheduleTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.toy = build_schedule(2, "toy")

    def test_base_case(self):
        """Test: toy base block is n1=2, N1=3, m1=3, M1=6."""
        first = self.toy.stage(1)
        self.assertEqual((first.n, first.N, first.m, first.M), (2, 3, 3, 6))

    def test_all_certificates_green(self):
        """Test: stages=2, toy -> every certificate passes or is waived."""
        self.assertTrue(self.toy.passed, self.toy.failures())
        names = {c.name for c in self.toy.certificates}
        for name in ("step-drift", "block-drift", "stationary-gap", "lattice-floor", "symbol-frequency", "pair-frequency", "mixing-length", "derivative-growth", "band", "lattice"):
            self.assertIn(name, names)

    def test_block_arithmetic(self):
        for stage in self.toy.stages:
            self.assertEqual(stage.N, self.toy.M(stage.t - 1) + stage.n)
            self.assertEqual(stage.M, stage.N + stage.m)

    def test_lattice_is_exact(self):
        """Test: f(lambda_t) = theta^(a_t) exactly, a_t | a_{t-1}."""
        for stage in self.toy.stages:
            self.assertEqual(distortion_ratio(stage.lam), FieldElement(self.toy.theta ** stage.exponent))
        first, second = self.toy.stages
        self.assertEqual(first.exponent % second.exponent, 0)
        self.assertGreater(first.lam, second.lam)
        self.assertGreater(second.lam, 1)

    def test_band_share_forces_larger_step(self):
        """p = 2 leaves too little band room after M_1 = 6, so p = 4 is taken."""
        self.assertEqual(self.toy.theta, default_theta(3))
        self.assertEqual(self.toy.stage(2).exponent, 2)

    def test_lattice_floor_on_n(self):
        second = self.toy.stage(2)
        self.assertGreaterEqual(second.n, self.toy.stage(1).exponent // second.exponent)

    def test_mixing_and_derivative_growth(self):
        """Test: delta = 1/2, t = 2 -> m >= 4k; (m - N) lambda_1^(-2N) >= 1."""
        second = self.toy.stage(2)
        self.assertGreaterEqual(second.m, 4 * second.mixing_steps)
        lam1 = float(self.toy.stage(1).lam)
        self.assertGreaterEqual((second.M - second.N) * lam1 ** (-2 * second.N), 1)

    def test_band_product(self):
        low, high = band_product(self.toy)
        self.assertGreaterEqual(low, BAND_LOW)
        self.assertLessEqual(high, BAND_HIGH)
        self.assertLess(low, float(PHI))

    def test_flatness_within_drift(self):
        second = self.toy.stage(2)
        self.assertLessEqual(correction_flatness_bound(second), float(self.toy.profile.drift(2, second.N)))

    def test_block_lookup(self):
        self.assertEqual(self.toy.block_of(1), 1)
        self.assertEqual(self.toy.block_of(6), 1)
        self.assertEqual(self.toy.block_of(7), 2)
        with self.assertRaises(ValueError):
            self.toy.block_of(self.toy.depth + 1)

    def test_zero_epsilon_variant(self):
        flat = self.toy.zero_epsilon()
        self.assertEqual(flat.epsilons(), (0, 0))
        self.assertEqual(correction_flatness_bound(flat.stage(2)), 0.0)

    def test_no_blocks(self):
        """Test: stages = 0 -> error."""
        with self.assertRaises(ValueError):
            build_schedule(0)


class StrictScheduleTests(SimpleTestCase):
    def test_single_strict_block(self):
        """Test: stages=1, strict -> N1 = 21 and the band sits inside (1.6, 1.7)."""
        schedule = build_schedule(1, "strict")
        self.assertEqual(schedule.stage(1).N, 21)
        self.assertTrue(schedule.passed, schedule.failures())
        low, high = band_product(schedule)
        self.assertTrue(BAND_LOW < low < float(PHI) < high < BAND_HIGH)
        self.assertGreater(schedule.stage(1).mixing_steps, 21)

    def test_two_strict_blocks_fail_loudly(self):
        """Desk-scale strict schedules are reported infeasible with a toy suggestion."""
        with self.assertRaises(InfeasibleScheduleError) as caught:
            build_schedule(2, "strict")
        self.assertIn("toy", caught.exception.suggestion)
        self.assertTrue(caught.exception.inequality)


class ScheduleFileTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.schedule = build_schedule(2, "toy")

    def test_json_round_trip(self):
        text = json.dumps(schedule_to_dict(self.schedule))
        restored = schedule_from_dict(json.loads(text))
        self.assertEqual(restored, self.schedule)

    def test_exact_values_are_strings(self):
        data = schedule_to_dict(self.schedule)
        self.assertIsInstance(data["stages"][0]["lam"], str)
        self.assertIsInstance(data["theta"], str)
        self.assertEqual(FieldElement.parse(data["stages"][1]["lam"]), self.schedule.stage(2).lam)

    def test_broken_block_arithmetic_is_rejected(self):
        data = json.loads(json.dumps(schedule_to_dict(self.schedule)))
        data["stages"][1]["N"] += 1
        with self.assertRaises(serializers.ValidationError):
            schedule_from_dict(data)

    def test_increasing_lambda_is_rejected(self):
        data = json.loads(json.dumps(schedule_to_dict(self.schedule)))
        data["stages"][0]["lam"], data["stages"][1]["lam"] = data["stages"][1]["lam"], data["stages"][0]["lam"]
        with self.assertRaises(serializers.ValidationError):
            schedule_from_dict(data)

    def test_margins_survive(self):
        restored = schedule_from_dict(json.loads(json.dumps(schedule_to_dict(self.schedule))))
        for before, after in zip(self.schedule.certificates, restored.certificates):
            self.assertTrue(math.isclose(before.margin, after.margin))
