"""
Tests for the interpolation profiles and the staged homeomorphisms.
"""
import math
from fractions import Fraction

from django.test import SimpleTestCase

from markov.measures import MeasureSpec
from numerics.backends import ExactBackend, FloatBackend, PrecisionBudgetError
from numerics.field import INV_PHI, INV_PHI2, INV_PHI3, ONE, PHI, ZERO, FieldElement
from schedule.engine import Schedule, StageParams
from schedule.profiles import RigorProfile
from symbolic.shift import cylinder_of, enumerate_words

from .badsets import bad_sets
from .construction import (
    CORRECTION,
    IDENTITY,
    PSI_STAGE,
    Construction,
    ScheduleViolationError,
    build_stage,
    eval_g,
    eval_H,
    proportion_transport_defect,
    stage_factors,
    stage_kind,
    uniform_cauchy_gap,
)
from .profiles import Profile, profile_eval


LAMBDA = FieldElement(Fraction(11, 10))


def one_block(epsilon=Fraction(1, 64)) -> Schedule:
    """n1 = 2, N1 = 3, m1 = 3, M1 = 6 with a visible lambda."""
    stage = StageParams(1, LAMBDA, 2, 3, 3, 6, Fraction(epsilon), 1)
    return Schedule(RigorProfile.toy(), (stage,))


def two_blocks(epsilon=Fraction(1, 64)) -> Schedule:
    first = StageParams(1, LAMBDA, 2, 3, 3, 6, Fraction(epsilon), 2)
    second = StageParams(2, FieldElement(Fraction(21, 20)), 3, 9, 3, 12, Fraction(epsilon) / 2, 1)
    return Schedule(RigorProfile.toy(), (first, second))


class GAlphaTests(SimpleTestCase):
    def test_mean_is_alpha(self):
        """Test: gAlpha(alpha) has integral alpha over [0, 1]."""
        for alpha in (Fraction(1, 4), Fraction(3, 4), Fraction(3, 2), Fraction(7)):
            value, density = Profile.g_alpha(alpha).evaluate(FieldElement(1))
            self.assertEqual(value, FieldElement(alpha))
            self.assertEqual(density, FieldElement(alpha))

    def test_starts_at_one(self):
        self.assertEqual(profile_eval(Profile.g_alpha(Fraction(5, 2)), 0), (ZERO, ONE))

    def test_range_above_one(self):
        """For alpha > 1: 1 = inf <= sup = (5 alpha - 1)/4 < alpha^2."""
        alpha = 1.5
        profile = Profile.g_alpha(alpha, FloatBackend(53))
        densities = [profile.evaluate(k / 300)[1] for k in range(301)]
        self.assertAlmostEqual(min(densities), 1.0)
        self.assertAlmostEqual(max(densities), (5 * alpha - 1) / 4)
        self.assertLess(max(densities), alpha ** 2)

    def test_range_below_one(self):
        alpha = 0.5
        profile = Profile.g_alpha(alpha, FloatBackend(53))
        densities = [profile.evaluate(k / 300)[1] for k in range(301)]
        self.assertAlmostEqual(min(densities), (5 * alpha - 1) / 4)
        self.assertAlmostEqual(max(densities), 1.0)

    def test_alpha_below_quarter(self):
        with self.assertRaises(ValueError):
            Profile.g_alpha(Fraction(1, 5))

    def test_argument_outside_unit_interval(self):
        with self.assertRaises(ValueError):
            profile_eval(Profile.g_alpha(2), Fraction(3, 2))


class PsiTests(SimpleTestCase):
    def setUp(self):
        self.psi = Profile.psi(Fraction(1, 20), LAMBDA)

    def test_golden_point(self):
        """Test: psi at 1/phi -> lambda phi / (1 + lambda phi)."""
        value, density = self.psi.evaluate(INV_PHI)
        self.assertEqual(value, LAMBDA * PHI / (1 + LAMBDA * PHI))
        self.assertEqual(density, ONE)

    def test_endpoints(self):
        self.assertEqual(self.psi.evaluate(ZERO), (ZERO, ONE))
        self.assertEqual(self.psi.evaluate(ONE), (ONE, ONE))

    def test_affine_middles(self):
        a, b = self.psi.slopes
        x = FieldElement(Fraction(3, 10))
        self.assertEqual(self.psi.evaluate(x), (a * x, a))
        y = FieldElement(Fraction(4, 5))
        self.assertEqual(self.psi.evaluate(y), (a * INV_PHI + b * (y - INV_PHI), b))

    def test_no_distortion_is_identity(self):
        """Test: psi(eps, 1) -> identity map."""
        flat = Profile.psi(Fraction(1, 20), 1)
        for k in range(0, 21):
            x = FieldElement(Fraction(k, 20))
            self.assertEqual(flat.evaluate(x), (x, ONE))

    def test_derivative_within_lambda_squared(self):
        """lambda^-2 < psi' < lambda^2 on a fine grid."""
        lam = 1.1
        psi = Profile.psi(0.05, lam, FloatBackend(53))
        for k in range(0, 1001):
            density = psi.evaluate(k / 1000)[1]
            self.assertLess(density, lam ** 2)
            self.assertGreater(density, lam ** -2)

    def test_continuity_at_collar_edges(self):
        psi = Profile.psi(0.05, 1.1, FloatBackend(53))
        inv_phi = 1 / float(PHI)
        for edge in (0.05, inv_phi - 0.05, inv_phi + 0.05, 0.95):
            left, right = psi.evaluate(edge - 1e-12), psi.evaluate(edge + 1e-12)
            self.assertAlmostEqual(left[0], right[0], places=9)
            self.assertAlmostEqual(left[1], right[1], places=6)

    def test_wide_collar(self):
        with self.assertRaises(ValueError):
            Profile.psi(Fraction(1, 4), LAMBDA)


class BridgeTests(SimpleTestCase):
    def test_bridge_endpoints(self):
        """G(1) = a2, G'(0) = a1, G'(1) = a2."""
        bridge = Profile.g_ab(Fraction(6, 5), Fraction(9, 10))
        self.assertEqual(bridge.evaluate(ZERO), (ZERO, FieldElement(Fraction(6, 5))))
        self.assertEqual(bridge.evaluate(ONE), (FieldElement(Fraction(9, 10)), FieldElement(Fraction(9, 10))))

    def test_slope_partials(self):
        """The bridge integral is a1 * P1(x) + a2 * P2(x) with P1 + P2 = x."""
        a1, a2 = FieldElement(Fraction(6, 5)), FieldElement(Fraction(9, 10))
        bridge = Profile.g_ab(a1, a2)
        for x in (Fraction(1, 5), Fraction(1, 2), Fraction(5, 6), 1):
            x = FieldElement(x)
            by_a1, by_a2 = bridge.slope_partials(x)
            self.assertEqual(bridge.evaluate(x)[0], a1 * by_a1 + a2 * by_a2)
            self.assertEqual(by_a1 + by_a2, x)
        with self.assertRaises(AttributeError):
            Profile.g_alpha(2).slope_partials(ZERO)


class StageLayoutTests(SimpleTestCase):
    def test_kinds(self):
        schedule = two_blocks()
        kinds = [stage_kind(schedule, n) for n in range(1, 13)]
        self.assertEqual(kinds, [PSI_STAGE] * 3 + [IDENTITY] * 2 + [CORRECTION]
                         + [PSI_STAGE] * 3 + [IDENTITY] * 2 + [CORRECTION])

    def test_wide_collar_is_a_schedule_violation(self):
        with self.assertRaises(ScheduleViolationError):
            Construction(one_block(Fraction(1, 4)), ExactBackend())


class ExactConstructionTests(SimpleTestCase):
    def setUp(self):
        self.schedule = one_block()
        self.construction = Construction(self.schedule, ExactBackend())

    def test_empty_composition(self):
        """Test: n = 0 -> (x, 1)."""
        x = FieldElement(Fraction(2, 7))
        self.assertEqual(self.construction.eval_H(0, x), (x, ONE))

    def test_partition_is_fixed(self):
        """Test: x in {0, 1/phi^2, 1/phi} -> H_n(x) = x for every n."""
        for n in range(0, 7):
            for point in (ZERO, INV_PHI2, INV_PHI):
                self.assertEqual(self.construction.eval_H(n, point)[0], point)

    def test_first_stage_is_scaled_psi(self):
        """Test: n = 1, h_1 on J1 is psi scaled to [0, 1/phi^2)."""
        stage = build_stage(self.schedule, 1, ExactBackend())
        value, density = stage.evaluate(INV_PHI3)
        self.assertEqual(value, INV_PHI2 * LAMBDA * PHI / (1 + LAMBDA * PHI))
        self.assertEqual(density, ONE)

    def test_identity_stage(self):
        stage = build_stage(self.schedule, 4, ExactBackend())
        z = FieldElement(Fraction(1, 3))
        self.assertEqual(stage.evaluate(z), (z, ONE))

    def test_stages_fix_cylinder_images(self):
        """h_n maps every H_{n-1}(C_w) onto itself with derivative 1 at the ends."""
        for n in (1, 2, 3):
            stage = build_stage(self.schedule, n, ExactBackend())
            for word, low, high in stage.intervals():
                self.assertEqual(stage.evaluate(low), (low, ONE), word)

    def test_correction_keeps_images(self):
        """The correction keeps cylinder images: H_M(C_w) = H_{M-1}(C_w)."""
        for word in enumerate_words(6):
            low = cylinder_of(word).low
            self.assertEqual(self.construction.eval_H(6, low)[0], self.construction.eval_H(5, low)[0])

    def test_correction_flattens_derivative(self):
        """Past the collar H_M' equals alpha(w) = |H_{M-1}(C_w)| / |C_w|."""
        for word in enumerate_words(6)[:8]:
            cylinder = cylinder_of(word)
            middle = cylinder.low + cylinder.length / 2
            _, slope = self.construction.eval_H(6, middle)
            low, high = self.construction.image(cylinder)
            self.assertEqual(slope, (high - low) / cylinder.length)
            self.assertEqual(slope, self.construction.alpha(word))


class CorrectionShareTests(SimpleTestCase):
    def setUp(self):
        self.schedule = two_blocks()
        self.construction = Construction(self.schedule, ExactBackend())

    def test_next_block_cylinders_take_lebesgue_shares(self):
        """Test: |H_6(C_v)| = |H_6(C_w)| |C_v| / |C_w| for every v of length N_2 = 9 below w."""
        for word in enumerate_words(9):
            child, parent = cylinder_of(word), cylinder_of(word[:6])
            start, _ = self.construction.eval_H(6, child.low)
            end = ONE if child.high == ONE else self.construction.eval_H(6, child.high)[0]
            low, high = self.construction.image(parent)
            self.assertEqual(end - start, (high - low) * child.length / parent.length, word)

    def test_stage_factors_multiply_to_the_derivative(self):
        for x in (Fraction(1, 50), Fraction(2, 7), Fraction(5, 8), Fraction(9, 10)):
            x = FieldElement(x)
            factors = stage_factors(self.schedule, 9, x, ExactBackend())
            self.assertEqual(factors[0].kind, CORRECTION)
            self.assertEqual(factors[0].n, 6)
            self.assertTrue(all(f.kind == PSI_STAGE and 6 < f.n <= 9 for f in factors[1:]))
            product = ONE
            for factor in factors:
                product = product * factor.factor
            self.assertEqual(product, self.construction.eval_H(9, x)[1])

    def test_unreachable_exact_preimage(self):
        """Test: a preimage inside a correction collar is not a bisection point."""
        x = cylinder_of("111111").length * Fraction(1, 192)
        y, _ = self.construction.eval_H(6, x)
        with self.assertRaises(PrecisionBudgetError):
            self.construction.eval_H_inverse(6, y)


class ZeroCollarTests(SimpleTestCase):
    def setUp(self):
        self.schedule = one_block(0)
        self.construction = Construction(self.schedule, ExactBackend())

    def test_image_measure_is_mu_plus(self):
        """With eps = 0, |H_n(C_w)| = mu+(C_w) exactly for |w| <= n + 1."""
        spec = MeasureSpec.from_schedule(self.schedule)
        for n in (1, 3, 6):
            for length in range(1, n + 2):
                for word in enumerate_words(length):
                    low, high = self.construction.image(cylinder_of(word))
                    self.assertEqual(high - low, spec.cylinder_mass(word), (n, word))

    def test_correction_restores_lebesgue_conditionals(self):
        for word in enumerate_words(6):
            parent = cylinder_of(word)
            low, high = self.construction.image(parent)
            for child in parent.children():
                c_low, c_high = self.construction.image(child)
                self.assertEqual((c_high - c_low) / (high - low), child.length / parent.length)

    def test_inverse_is_exact(self):
        x = FieldElement(Fraction(5, 11))
        y, _ = self.construction.eval_H(6, x)
        self.assertEqual(self.construction.eval_H_inverse(6, y), x)

    def test_transport_is_exact(self):
        self.assertAlmostEqual(proportion_transport_defect(self.schedule, 7, "1321321", ExactBackend()), 0.0, places=12)

    def test_bad_sets_are_empty(self):
        """Test: eps = 0 -> empty bad set."""
        self.assertEqual(bad_sets(self.schedule, 2, "11").intervals, ())


class FloatConstructionTests(SimpleTestCase):
    def setUp(self):
        self.schedule = two_blocks()
        self.backend = FloatBackend(53)
        self.construction = Construction(self.schedule, self.backend)

    def test_derivative_matches_finite_differences(self):
        step = 1e-8
        for x in (0.013, 0.2, 0.37, 0.5, 0.71, 0.93):
            _, slope = self.construction.eval_H(12, x)
            ahead, _ = self.construction.eval_H(12, x + step)
            behind, _ = self.construction.eval_H(12, x - step)
            self.assertAlmostEqual((ahead - behind) / (2 * step), slope, places=3)

    def test_inverse_round_trip(self):
        for x in (0.05, 0.3, 0.61, 0.99):
            y, _ = self.construction.eval_H(12, x)
            self.assertAlmostEqual(self.construction.eval_H_inverse(12, y), x, places=10)

    def test_monotone(self):
        values = [self.construction.eval_H(12, k / 500)[0] for k in range(500)]
        self.assertTrue(all(a < b for a, b in zip(values, values[1:])))

    def test_uniform_cauchy_rate(self):
        """Test: sup |H_{n+1} - H_n| <= 3 (1.5)^-n on a grid."""
        grid = [k / 200 for k in range(200)]
        for n in range(0, 12):
            self.assertLessEqual(uniform_cauchy_gap(self.schedule, n, grid, self.backend), 3 * 1.5 ** -n)

    def test_stage_displacement(self):
        """sup |h_n(x) - x| <= e (1.6)^-n, measured as |H_n - H_{n-1}|."""
        grid = [k / 200 for k in range(200)]
        for n in range(1, 13):
            gap = uniform_cauchy_gap(self.schedule, n - 1, grid, self.backend)
            self.assertLessEqual(gap, math.e * 1.6 ** -n)

    def test_expanding_map_without_stages(self):
        """Test: n = 0 -> golden-mean map S, derivative phi."""
        value, slope = eval_g(self.schedule, 0, 0.25, self.backend)
        self.assertAlmostEqual(value, 0.25 * float(PHI))
        self.assertAlmostEqual(slope, float(PHI))

    def test_expanding_map_fixes_zero(self):
        value, slope = eval_g(self.schedule, 12, 0.0, self.backend)
        self.assertEqual(value, 0.0)
        self.assertGreater(slope, 1.5)

    def test_correction_stage_is_flat(self):
        """h_M' stays close to 1 at the correction closing block 1."""
        stage = build_stage(self.schedule, 6, self.backend)
        for z in (0.1, 0.33, 0.52, 0.8):
            _, slope = stage.evaluate(z)
            self.assertLess(abs(math.log(slope)), 0.2)

    def test_transport_defect_is_small(self):
        defect = proportion_transport_defect(self.schedule, 7, "1321321", self.backend)
        self.assertLess(defect, 0.1)

    def test_bad_sets_are_four_collars(self):
        """Test: collar count = 4, ordered inside C_w."""
        found = bad_sets(self.schedule, 2, "11", self.backend)
        self.assertEqual(len(found.intervals), 4)
        cylinder = cylinder_of("11")
        points = [p for interval in found.intervals for p in interval]
        self.assertEqual(points, sorted(points))
        self.assertGreaterEqual(points[0], float(cylinder.low))
        self.assertLessEqual(points[-1], float(cylinder.high))
        self.assertLess(found.length, 4 * float(self.schedule.stage(1).epsilon) * float(cylinder.length) * 1.5)

    def test_agrees_with_exact_backend(self):
        exact = Construction(self.schedule, ExactBackend())
        x = FieldElement(Fraction(3, 7))
        self.assertAlmostEqual(float(exact.eval_H(8, x)[0]), self.construction.eval_H(8, x)[0], places=12)

    def test_module_level_evaluation(self):
        value, slope = eval_H(self.schedule, 12, 0.4, self.backend)
        self.assertEqual((value, slope), self.construction.eval_H(12, 0.4))
