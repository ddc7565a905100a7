"""
Tests for the glued rectangle, the fibered homeomorphisms K_{n,y} and Y_N.
"""
import math
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from homeo1d.construction import eval_H
from numerics.backends import ExactBackend
from numerics.field import INV_PHI, INV_PHI2, INV_PHI3, PHI, ZERO, FieldElement
from schedule.engine import Schedule, StageParams, build_schedule
from schedule.profiles import RigorProfile
from symbolic.coupling import BOTTOM, MID, TOP, coupling_segment, lower_word, upper_word
from symbolic.shift import cylinder_containing, cylinder_of

from .audits import hyperbolicity_certificate, proximity_audit, sobol_seeds, y_derivative_audit
from .diffeo import AnosovMap, eval_Z, eval_Z_inverse, lyapunov_exponents
from .fibered import FiberedHomeo, eval_K, eval_K_inverse, q_interp, q_interp_du, x_delta
from .manifold import (
    BOUNDARY,
    GLUING_TABLE,
    R1,
    R2,
    R3,
    U_WIDTH,
    boundary_geometry,
    coupling_cascade_holds,
    coupling_index,
    f_tilde,
    f_tilde_inv,
    f_tilde_jacobian,
    gluing_partners,
    region_of,
)


def one_block(epsilon=Fraction(1, 64)) -> Schedule:
    stage = StageParams(1, FieldElement(Fraction(11, 10)), 2, 3, 3, 6, Fraction(epsilon), 1)
    return Schedule(RigorProfile.toy(), (stage,))


def two_blocks(epsilon=Fraction(1, 64)) -> Schedule:
    first = StageParams(1, FieldElement(Fraction(11, 10)), 2, 3, 3, 6, Fraction(epsilon), 2)
    second = StageParams(2, FieldElement(Fraction(21, 20)), 3, 9, 3, 12, Fraction(epsilon) / 2, 1)
    return Schedule(RigorProfile.toy(), (first, second))


def edge_points(low, high, count=6):
    return [low + (high - low) * Fraction(k, count + 1) for k in range(1, count + 1)]


class ManifoldTests(SimpleTestCase):
    def test_regions(self):
        self.assertEqual(region_of(0.1, 0.0), R1)
        self.assertEqual(region_of(0.5, 0.1), R3)
        self.assertEqual(region_of(0.8, 0.0), R2)
        self.assertEqual(region_of(Fraction(3, 10), TOP), BOUNDARY)
        self.assertEqual(region_of(ZERO, Fraction(1, 10)), BOUNDARY)

    def test_points_outside(self):
        """Test: right of 1/phi the fiber stops at 1/(phi+2)."""
        with self.assertRaises(ValueError):
            region_of(0.8, 0.3)
        with self.assertRaises(ValueError):
            f_tilde(0.2, 0.9)

    def test_fixed_point(self):
        """Test: f~(0, 0) = (0, 0)."""
        self.assertEqual(f_tilde(ZERO, ZERO), (ZERO, ZERO))

    def test_inverse_is_exact(self):
        for point in ((Fraction(1, 3), Fraction(1, 10)), (Fraction(7, 10), Fraction(1, 10)),
                      (Fraction(1, 2), Fraction(-2, 5)), (Fraction(1, 5), Fraction(7, 10))):
            image = f_tilde(*point)
            self.assertEqual(f_tilde_inv(*image), tuple(FieldElement(v) for v in point))

    def test_area_preserving(self):
        """Test: det Df~ = -1."""
        self.assertAlmostEqual(float(np.linalg.det(f_tilde_jacobian())), -1.0, places=14)

    def test_coupling_cascade(self):
        """Test: f~(V_j) = V_{j-1} exactly for 2 <= j <= 12."""
        for j in range(1, 13):
            self.assertTrue(coupling_cascade_holds(j), j)

    def test_gluing_round_trip(self):
        for identification in GLUING_TABLE:
            source = identification.source
            for t in edge_points(source.low, source.high):
                point = (source.fixed, t) if source.axis == "vertical" else (t, source.fixed)
                image = identification.forward(*point, ExactBackend())
                self.assertEqual(identification.backward(*image, ExactBackend()), point)
                self.assertIn(image, gluing_partners(*point))
                self.assertIn(point, gluing_partners(*image))

    def test_f_tilde_respects_gluing(self):
        """Identified boundary points have identified images."""
        for identification in GLUING_TABLE:
            source = identification.source
            for t in edge_points(source.low, source.high):
                point = (source.fixed, t) if source.axis == "vertical" else (t, source.fixed)
                partner = identification.forward(*point, ExactBackend())
                first, second = f_tilde(*point), f_tilde(*partner)
                self.assertTrue(first == second or second in gluing_partners(*first), (identification.index, t))


class BoundaryGeometryTests(SimpleTestCase):
    def test_top_edge_start_is_second_segment(self):
        """Test: y = TOP, x in [0, 1/phi^3) -> j = 2."""
        geometry = boundary_geometry(Fraction(1, 10), TOP)
        self.assertEqual(geometry.u, ZERO)
        self.assertFalse(geometry.in_u)
        self.assertEqual((geometry.j, geometry.word), (2, "11"))

    def test_distance_at_zero_height(self):
        """Test: u(x, 0) = min(TOP, phi/(phi+2)) for x < 1/phi."""
        geometry = boundary_geometry(Fraction(1, 4), 0)
        self.assertEqual(geometry.u, PHI / (PHI + 2))
        self.assertEqual(geometry.level, BOTTOM)
        self.assertTrue(geometry.in_u)
        self.assertIsNone(geometry.j)

    def test_collar_width(self):
        self.assertTrue(boundary_geometry(Fraction(1, 10), TOP - U_WIDTH).in_u)
        self.assertFalse(boundary_geometry(Fraction(1, 10), TOP - U_WIDTH / 2).in_u)
        geometry = boundary_geometry(Fraction(9, 10), MID - U_WIDTH / 3)
        self.assertEqual((geometry.j, geometry.level), (1, MID))

    def test_coupling_words_located(self):
        for j in range(2, 11):
            for word, level in ((upper_word(j), TOP), (lower_word(j), BOTTOM)):
                cylinder = cylinder_of(word)
                middle = (cylinder.low + cylinder.high) / 2
                self.assertEqual(coupling_index(middle, level), (j, word))
        self.assertEqual(coupling_index(INV_PHI3, BOTTOM), (1, "1"))
        self.assertEqual(coupling_index(INV_PHI, MID), (1, "2"))

    def test_search_limit_fallback(self):
        cylinder = cylinder_of(upper_word(8))
        x = (cylinder.low + cylinder.high) / 2
        self.assertEqual(coupling_index(x, TOP, limit=4), (4, cylinder_containing(x, 4).word))


class QInterpTests(SimpleTestCase):
    def setUp(self):
        self.schedule = one_block()
        self.exact = ExactBackend()
        self.x = FieldElement(Fraction(1, 5))

    def test_edge_values(self):
        """Test: q_J(x, 0) = x and q_J(x, 1/phi^10) = H_J(x)."""
        self.assertEqual(q_interp(self.schedule, 2, self.x, 0, self.exact), self.x)
        H, _ = eval_H(self.schedule, 2, self.x, self.exact)
        self.assertEqual(q_interp(self.schedule, 2, self.x, U_WIDTH, self.exact), H)

    def test_flat_at_both_ends(self):
        """Test: dq/du vanishes at u = 0 and u = 1/phi^10."""
        self.assertEqual(q_interp_du(self.schedule, 3, self.x, 0, self.exact), ZERO)
        self.assertEqual(q_interp_du(self.schedule, 3, self.x, U_WIDTH, self.exact), ZERO)

    def test_largest_slope(self):
        H, _ = eval_H(self.schedule, 3, self.x, self.exact)
        slope = q_interp_du(self.schedule, 3, self.x, U_WIDTH / 2, self.exact)
        self.assertEqual(slope, Fraction(3, 2) * PHI ** 10 * (H - self.x))

    def test_u_out_of_range(self):
        with self.assertRaises(ValueError):
            q_interp(self.schedule, 2, self.x, U_WIDTH * 2, self.exact)
        with self.assertRaises(ValueError):
            q_interp(self.schedule, 2, self.x, -1, self.exact)


class FiberedTests(SimpleTestCase):
    def setUp(self):
        self.schedule = one_block()
        self.exact = ExactBackend()

    def test_reduces_to_H_in_U(self):
        for n in range(1, 7):
            value, dx, dy = eval_K(self.schedule, n, 0.0, 0.3)
            H, dH = eval_H(self.schedule, n, 0.3, FiberedHomeo(self.schedule).backend)
            self.assertEqual((value, dx, dy), (H, dH, 0.0))

    def test_identity_on_edge_up_to_coupling_index(self):
        """Test: K_{j,y}(x) = x on the edge carrying V_j."""
        x = FieldElement(Fraction(1, 10))
        value, _, dy = eval_K(self.schedule, 2, TOP, x, self.exact)
        self.assertEqual(value, x)
        self.assertEqual(dy, ZERO)

    def test_fixed_points(self):
        homeo = FiberedHomeo(self.schedule, self.exact)
        heights = (TOP, TOP - U_WIDTH / 2, FieldElement(0), BOTTOM + U_WIDTH / 3, BOTTOM)
        for n in range(1, 7):
            for y in heights:
                for x in (ZERO, INV_PHI2, INV_PHI):
                    self.assertEqual(homeo.value(n, y, x), x, (n, y, x))

    def test_gluing_equivariance(self):
        """(K_{n,y}(x), y) and (K_{n,y^}(x^), y^) are glued for glued edge points."""
        homeo = FiberedHomeo(self.schedule, self.exact)
        for j in (1, 2, 3):
            segment = coupling_segment(j)
            low, high = segment.upper.interval
            for x in edge_points(low, high, 3):
                partner = x + segment.offset
                for n in range(1, 7):
                    upper = homeo.value(n, segment.upper.level, x)
                    lower = homeo.value(n, segment.lower.level, partner)
                    self.assertEqual(lower, upper + segment.offset, (j, n))
                    self.assertIn((lower, segment.lower.level), gluing_partners(upper, segment.upper.level))

    def test_inverse(self):
        homeo = FiberedHomeo(self.schedule)
        y = float(TOP) - 1e-4
        for target in (0.05, 0.3, 0.5):
            x = homeo.inverse(6, y, target)
            self.assertAlmostEqual(float(homeo.value(6, y, x)), target, places=12)

    def test_eval_K_inverse(self):
        schedule = two_blocks()
        for y in (float(TOP) - float(U_WIDTH) / 2, float(BOTTOM) + float(U_WIDTH) / 5, 0.0):
            for target in (0.02, 0.41, 0.77):
                x = eval_K_inverse(schedule, 12, y, target)
                value, _, _ = eval_K(schedule, 12, y, x)
                self.assertAlmostEqual(float(value), target, places=12)

    def test_continuous_across_boundary_of_U(self):
        """Test: a correction collar whose predecessor lies in another coupling cylinder.

        x sits in the left collar of C_111111, whose predecessor 232323 is on
        the far side of the circle; K_{n,y} must meet H_n as y crosses u = 1/phi^10.
        """
        schedule = two_blocks()
        homeo = FiberedHomeo(schedule)
        width = float(U_WIDTH)
        x = float(cylinder_of("111111").length) / 1000
        for upper, (inside_y, outside_y) in (
            (True, (float(TOP) - width * (1 + 1e-12), float(TOP) - width * (1 - 1e-12))),
            (False, (float(BOTTOM) + width * (1 + 1e-12), float(BOTTOM) + width * (1 - 1e-12))),
        ):
            self.assertFalse(homeo.geometry(x, outside_y).in_u)
            for n in range(6, 13):
                inside = float(homeo.value(n, inside_y, x))
                outside = float(homeo.value(n, outside_y, x))
                H, _ = eval_H(schedule, n, x, homeo.backend)
                self.assertAlmostEqual(inside, float(H), delta=1e-15, msg=(upper, n))
                self.assertAlmostEqual(outside, inside, delta=1e-12, msg=(upper, n))

    def test_y_derivative_matches_differences(self):
        """Test: the analytic dK/dy agrees with central differences past the coupling index."""
        schedule = two_blocks()
        homeo = FiberedHomeo(schedule)
        width = float(U_WIDTH)
        step = 1e-7
        points = (
            (0.3, float(TOP) - width / 3),
            (0.8, float(MID) - width / 4),
            (0.5, float(BOTTOM) + width / 5),
            (float(cylinder_of("111111").length) / 1000, float(TOP) - width / 2),
        )
        for x, y in points:
            for n in (7, 9, 12):
                _, _, dy = homeo.evaluate(n, y, x)
                above = float(homeo.value(n, y + step, x))
                below = float(homeo.value(n, y - step, x))
                fd = (above - below) / (2 * step)
                self.assertAlmostEqual(float(dy), fd, delta=1e-6 + 1e-5 * abs(fd), msg=(x, y, n))

    def test_close_to_identity(self):
        """Test: |K_{n,y}(x) - x| <= 1.5^-n on a grid, toy schedule."""
        schedule = build_schedule(1, "toy")
        homeo = FiberedHomeo(schedule)
        grid = [(i / 17, float(BOTTOM) + (float(MID) - float(BOTTOM)) * k / 9) for i in range(17) for k in range(10)]
        for n in range(1, schedule.depth + 1):
            worst = max(abs(float(homeo.value(n, y, x)) - x) for x, y in grid)
            self.assertLessEqual(worst, 1.5 ** -n)

    def test_x_delta(self):
        """Test: delta = 0 gives x; a small delta barely moves it."""
        schedule = build_schedule(1, "toy")
        cylinder = cylinder_of(upper_word(4))
        x = float(cylinder.low) + 0.37 * float(cylinder.length)
        y = float(TOP) - float(U_WIDTH) / 3
        self.assertEqual(x_delta(schedule, None, x, y, 0.0), x)
        self.assertAlmostEqual(x_delta(schedule, None, x, y, 1e-4), x, delta=1e-5)
        with self.assertRaises(ValueError):
            x_delta(schedule, None, x, y, -0.5)


class AnosovMapTests(SimpleTestCase):
    def setUp(self):
        self.schedule = one_block()

    def test_linear_case(self):
        """Test: N = 0 -> f~ with Jacobian diag(phi, -1/phi)."""
        image = eval_Z(self.schedule, 0, 0.3, 0.1)
        expected = f_tilde(0.3, 0.1)
        self.assertAlmostEqual(image.point[0], expected[0], places=14)
        self.assertAlmostEqual(image.point[1], expected[1], places=14)
        np.testing.assert_allclose(image.jacobian, f_tilde_jacobian(), atol=1e-14)

    def test_triangular_jacobian(self):
        for point in ((0.1, 0.5), (0.3, 0.0), (0.5, -0.3), (0.8, 0.1), (0.2, float(TOP) - 1e-3)):
            image = eval_Z(self.schedule, 6, *point)
            self.assertEqual(image.jacobian[1, 0], 0.0)
            self.assertAlmostEqual(image.jacobian[1, 1], -1 / float(PHI), places=15)

    def test_inverse(self):
        for point in ((0.1, 0.5), (0.3, 0.0), (0.5, -0.3), (0.8, 0.1), (0.7, -0.4)):
            image = eval_Z(self.schedule, 6, *point)
            x, y = eval_Z_inverse(self.schedule, 6, *image.point)
            self.assertAlmostEqual(x, point[0], places=10)
            self.assertAlmostEqual(y, point[1], places=12)

    def test_jacobian_matches_differences(self):
        """Test: analytic and central-difference Jacobians agree in U."""
        anosov = AnosovMap(self.schedule, 6)
        image = anosov(0.3, 0.0)
        np.testing.assert_allclose(anosov.jacobian_fd(0.3, 0.0), image.jacobian, rtol=1e-4, atol=1e-6)

    def test_determinant_band(self):
        """Test: |det DY_N| in [1.6/phi, 1.7/phi] on the toy schedule."""
        schedule = build_schedule(1, "toy")
        anosov = AnosovMap(schedule, schedule.depth)
        phi = float(PHI)
        for point in sobol_seeds(16, seed=3):
            determinant = abs(anosov(*point).determinant)
            self.assertGreaterEqual(determinant, 1.6 / phi - 1e-9)
            self.assertLessEqual(determinant, 1.7 / phi + 1e-9)


class AuditTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.schedule = build_schedule(1, "toy")

    def test_linear_exponents(self):
        """Test: N = 0 -> exponents (log phi, -log phi)."""
        exponents = lyapunov_exponents([f_tilde_jacobian()] * 50)
        self.assertAlmostEqual(exponents[0], math.log(float(PHI)), places=12)
        self.assertAlmostEqual(exponents[1], -math.log(float(PHI)), places=12)
        report = hyperbolicity_certificate(self.schedule, 0, samples=2, horizon=10, seed=1)
        self.assertAlmostEqual(report.exponents[0], math.log(float(PHI)), places=10)

    def test_hyperbolicity(self):
        report = hyperbolicity_certificate(self.schedule, self.schedule.depth, samples=4, horizon=20, seed=0)
        self.assertEqual(len(report.orbits), 4)
        self.assertTrue(report.passed, report.to_dict())
        self.assertGreaterEqual(report.min_normalized_growth, 1.52 - 0.01)
        self.assertGreater(report.exponents[0], 0)
        self.assertLess(report.exponents[1], 0)

    def test_y_derivatives(self):
        top = float(TOP)
        width = float(U_WIDTH)
        j5 = cylinder_of(upper_word(5))
        grid = [
            (0.3, 0.0),
            (0.1, top),
            (0.9, float(MID)),
            (float(j5.low) + 0.4 * float(j5.length), top - width / 3),
            (0.5, float(BOTTOM) + width / 2),
        ]
        audit = y_derivative_audit(self.schedule, self.schedule.depth, grid)
        self.assertTrue(audit.passed, audit.to_dict())
        self.assertEqual(audit.rows[0].dy, 0.0)
        self.assertEqual(audit.rows[3].j, 5)

    def test_proximity(self):
        rows = proximity_audit(self.schedule, range(3, self.schedule.depth + 1))
        self.assertTrue(rows)
        self.assertTrue(all(row.passed for row in rows))
