"""
Tests for stochastic matrices, inhomogeneous measures and frequency certificates.
"""
from fractions import Fraction

from django.test import SimpleTestCase, override_settings

from numerics.backends import FloatBackend, PrecisionBudgetError
from numerics.field import INV_PHI, INV_PHI2, INV_PHI3, ONE, PHI, SQRT5, ZERO, FieldElement
from symbolic.shift import cylinder_of, enumerate_words

from .chains import (
    ReducibleChainError,
    StochasticMatrix,
    distortion_ratio,
    matrix_q,
    matrix_q_lambda,
    mixing_certificate,
    mixing_time,
    stationary,
    stationary_q,
    sup_distance,
)
from .frequencies import PairFrequency, SymbolFrequency, empirical_frequency_prob
from .measures import MeasureSpec, ZeroMassError, ratio_set_probe, rn_shift


LAMBDA = FieldElement(Fraction(11, 10))


class MatrixTests(SimpleTestCase):
    def test_q_first_row(self):
        """Test: Q row 1 = (1/phi, 0, 1/phi^2)."""
        q = matrix_q()
        self.assertEqual(q.rows[0], (INV_PHI, ZERO, INV_PHI2))
        self.assertEqual(q.row_sums(), [ONE, ONE, ONE])

    def test_q_lambda_at_one_is_q(self):
        self.assertEqual(matrix_q_lambda(1), matrix_q())

    def test_q_lambda_second_row_fixed(self):
        """Row 2 of Q_lambda is (phi/(1+phi), 0, 1/(1+phi)) for every lambda."""
        tilted = matrix_q_lambda(LAMBDA)
        self.assertEqual(tilted.rows[1], (PHI / (1 + PHI), ZERO, 1 / (1 + PHI)))
        self.assertEqual(tilted("1", "1"), PHI * LAMBDA / (1 + PHI * LAMBDA))
        self.assertEqual(tilted.row_sums(), [ONE, ONE, ONE])

    def test_lambda_below_one(self):
        with self.assertRaises(ValueError):
            matrix_q_lambda(Fraction(9, 10))

    def test_float_lift(self):
        tilted = matrix_q_lambda(1.02, FloatBackend(53))
        self.assertAlmostEqual(sum(tilted.rows[0]), 1.0, places=15)


class StationaryTests(SimpleTestCase):
    def test_stationary_q_exact(self):
        """Test: pi_Q = (1/sqrt5, 1/(phi sqrt5), 1/(phi sqrt5)) exactly."""
        pi = stationary(matrix_q())
        self.assertEqual(pi, (1 / SQRT5, 1 / (PHI * SQRT5), 1 / (PHI * SQRT5)))
        self.assertEqual(pi, stationary_q())

    def test_stationary_q_float(self):
        pi = stationary(matrix_q(FloatBackend(53)))
        for value, expected in zip(pi, (0.4472135954999579, 0.27639320225002106, 0.27639320225002106)):
            self.assertAlmostEqual(value, expected, places=12)

    def test_edge_flow(self):
        """pi_Q(2) Q(2,3) = 1/(phi sqrt5 (phi+1)) at lambda = 1."""
        pi = stationary(matrix_q_lambda(1))
        self.assertEqual(pi[1] * matrix_q()("2", "3"), 1 / (PHI * SQRT5 * (PHI + 1)))

    def test_continuity_in_lambda(self):
        """||pi_{Q_lambda} - pi_Q|| shrinks monotonically as lambda decreases to 1."""
        pi_q = stationary_q()
        distances = [
            sup_distance(stationary(matrix_q_lambda(1 + Fraction(1, 2 ** k))), pi_q)
            for k in range(1, 12)
        ]
        self.assertTrue(all(a > b for a, b in zip(distances, distances[1:])))

    def test_reducible_chain(self):
        swap = StochasticMatrix(((ZERO, ONE, ZERO), (ONE, ZERO, ZERO), (ZERO, ZERO, ONE)))
        with self.assertRaises(ReducibleChainError):
            stationary(swap)


class MixingTests(SimpleTestCase):
    def test_quarter_tolerance(self):
        """Test: Q mixes to delta = 0.25 within ten steps."""
        self.assertLessEqual(mixing_time(matrix_q(), Fraction(1, 4)), 10)

    def test_vacuous_tolerance(self):
        self.assertEqual(mixing_time(matrix_q(), 1), 1)

    def test_exact_certificate(self):
        """delta = 3^-6 is certified exactly and bounds the row distance."""
        certificate = mixing_certificate(matrix_q(), Fraction(1, 3 ** 6))
        self.assertGreater(certificate.steps, 1)
        self.assertLessEqual(certificate.distance, FieldElement(Fraction(1, 3 ** 6)))
        power = matrix_q().power(certificate.steps - 1)
        pi = stationary_q()
        previous = min(power.rows[i][j] / pi[j] for i in range(3) for j in range(3))
        self.assertGreater(1 - previous, FieldElement(Fraction(1, 3 ** 6)))

    def test_float_backend_refuses_tiny_tolerance(self):
        """Test: tolerances below the float resolution need more precision."""
        with self.assertRaises(PrecisionBudgetError):
            mixing_time(matrix_q(), Fraction(1, 3 ** 60), FloatBackend(53))


class MeasureTests(SimpleTestCase):
    def test_lebesgue_reproduces_lengths(self):
        """Test: Lebesgue spec, word 1 at k=1 -> 1/phi^2."""
        spec = MeasureSpec.lebesgue()
        self.assertEqual(spec.cylinder_mass("1"), INV_PHI2)
        self.assertEqual(spec.cylinder_mass("2"), INV_PHI2)
        self.assertEqual(spec.cylinder_mass("3"), INV_PHI3)
        for word in enumerate_words(7):
            self.assertEqual(spec.cylinder_mass(word), cylinder_of(word).length)

    def test_product_formula_step(self):
        spec = MeasureSpec.single_block(LAMBDA, 1, 3)
        self.assertEqual(spec.cylinder_mass("23"), spec.cylinder_mass("2") * spec.matrix(1)("2", "3"))

    def test_total_mass_and_additivity(self):
        """Masses add up over extensions at every node to depth 8."""
        spec = MeasureSpec.single_block(LAMBDA, 2, 5, initial="lebesgue")
        for n in range(1, 9):
            words = enumerate_words(n)
            self.assertEqual(sum((spec.cylinder_mass(w) for w in words), ZERO), ONE)
        for word in enumerate_words(6):
            children = [word + s for s in ("1", "2", "3") if word + s in enumerate_words(7)]
            total = sum((spec.cylinder_mass(child) for child in children), ZERO)
            self.assertEqual(total, spec.cylinder_mass(word))

    def test_consistency_is_exact(self):
        spec = MeasureSpec.single_block(LAMBDA, 3, 9, initial="lebesgue")
        for j in range(1, 15):
            self.assertEqual(spec.consistency_residual(j), ZERO)

    def test_marginals_before_start(self):
        self.assertEqual(MeasureSpec.stationary().marginal(-4), stationary_q())
        with self.assertRaises(ValueError):
            MeasureSpec.lebesgue().marginal(0)


class ShiftDerivativeTests(SimpleTestCase):
    def test_stationary_measure_is_invariant(self):
        """Test: all P = Q from pi_Q gives RN = 1 for every word and power."""
        spec = MeasureSpec.stationary()
        for word in enumerate_words(4):
            for n in range(0, 4):
                self.assertEqual(rn_shift(spec, word, 1, n), ONE)

    def test_single_block_ratio(self):
        """Q_lambda on [1,3): the ratio equals the explicit cylinder products."""
        spec = MeasureSpec.single_block(LAMBDA, 1, 3)
        q, tilted = matrix_q(), matrix_q_lambda(LAMBDA)
        pi_4 = q.apply(tilted.apply(tilted.apply(stationary_q())))
        expected = pi_4[0] * q("1", "1") / (stationary_q()[0] * tilted("1", "1"))
        self.assertEqual(rn_shift(spec, "11", 1, 3), expected)

    def test_telescoping(self):
        """RN over powers n then m composes to the power n + m."""
        spec = MeasureSpec.single_block(LAMBDA, 2, 6, initial="lebesgue")
        for word in ("13", "211", "3213"):
            joint = rn_shift(spec, word, 1, 5)
            split = rn_shift(spec, word, 1, 2) * rn_shift(spec, word, 3, 3)
            self.assertEqual(joint, split)

    def test_zero_power(self):
        self.assertEqual(rn_shift(MeasureSpec.lebesgue(), "132", 2, 0), ONE)

    def test_zero_mass(self):
        spec = MeasureSpec(initial=(ONE, ZERO, ZERO))
        with self.assertRaises(ZeroMassError):
            rn_shift(spec, "2", 1, 1)


class RatioSetProbeTests(SimpleTestCase):
    def test_invariant_measure_has_unit_witnesses(self):
        witnesses = ratio_set_probe(MeasureSpec.stationary(), 1, 1e-12, 2, 2)
        cylinders = {w.cylinder for w in witnesses}
        self.assertTrue(set(enumerate_words(1)).issubset(cylinders))

    def test_block_ratio_is_witnessed(self):
        """Test: the block creates the RN value lambda(1+phi)/(1+phi lambda)."""
        spec = MeasureSpec.single_block(LAMBDA, 3, 5)
        target = distortion_ratio(LAMBDA)
        witnesses = ratio_set_probe(spec, float(target), 1e-9, 2, 2)
        self.assertTrue(any(w.cylinder == "11" and w.power == 2 and w.subword == "1111"
                            for w in witnesses))

    def test_negative_target(self):
        with self.assertRaises(ValueError):
            ratio_set_probe(MeasureSpec.stationary(), -1, 0.1, 1, 1)


class FrequencyTests(SimpleTestCase):
    def setUp(self):
        self.q = matrix_q()
        self.pi = stationary_q()

    def test_sure_event(self):
        """Test: n=1, count of symbol 1 >= 0 -> 1."""
        result = empirical_frequency_prob(self.q, self.pi, 1, SymbolFrequency("1", 0.0, 1.0))
        self.assertAlmostEqual(result.probability, 1.0, places=12)
        self.assertEqual(result.method, "dp")

    def test_single_transition(self):
        """Test: n=2, pair 23 occurs -> pi_Q(2) Q(2,3)."""
        result = empirical_frequency_prob(self.q, self.pi, 2, PairFrequency("23", 0.0))
        self.assertAlmostEqual(result.probability, float(self.pi[1] * self.q("2", "3")), places=12)

    def test_matches_enumeration(self):
        """Test: the DP equals the sum over every admissible word of length 12."""
        n = 12
        centre = float(1 / SQRT5)
        event = SymbolFrequency("1", centre - 0.1, centre + 0.1)
        total = ZERO
        for word in enumerate_words(n):
            share = word.count("1") / n
            if not event.low <= share <= event.high:
                continue
            mass = self.pi[int(word[0]) - 1]
            for a, b in zip(word, word[1:]):
                mass = mass * self.q(a, b)
            total = total + mass
        result = empirical_frequency_prob(self.q, self.pi, n, event)
        self.assertAlmostEqual(result.probability, float(total), places=12)

    def test_law_of_large_numbers(self):
        """Frequency of 1 within 0.1 of 1/sqrt5 concentrates as n grows."""
        centre = float(1 / SQRT5)
        event = SymbolFrequency("1", centre - 0.1, centre + 0.1)
        probabilities = [empirical_frequency_prob(self.q, self.pi, n, event).probability for n in (50, 100, 200, 400)]
        self.assertTrue(all(a < b for a, b in zip(probabilities, probabilities[1:])), probabilities)
        self.assertGreater(probabilities[-1], 0.98)

    @override_settings(GOLDEN_MC_SAMPLES=4000, GOLDEN_SEED=3)
    def test_monte_carlo_fallback(self):
        """Beyond the cutoff the answer comes with a Wilson interval."""
        event = PairFrequency("23", 1 / 15)
        exact = empirical_frequency_prob(self.q, self.pi, 60, event)
        sampled = empirical_frequency_prob(self.q, self.pi, 60, event, cutoff=10)
        self.assertEqual(sampled.method, "monte-carlo")
        self.assertLessEqual(sampled.ci_low, sampled.probability)
        self.assertLessEqual(sampled.probability, sampled.ci_high)
        self.assertLess(abs(sampled.probability - exact.probability), 0.05)

    def test_monte_carlo_is_seeded(self):
        event = SymbolFrequency("1", 0.3, 0.6)
        first = empirical_frequency_prob(self.q, self.pi, 40, event, cutoff=5, samples=500, seed=11)
        second = empirical_frequency_prob(self.q, self.pi, 40, event, cutoff=5, samples=500, seed=11)
        self.assertEqual(first, second)
