"""
Tests for the golden-mean shift: words, cylinders, order and coupling words.
"""
from fractions import Fraction

from django.test import SimpleTestCase

from numerics.field import INV_PHI, INV_PHI2, INV_PHI3, ONE, PHI, ZERO, FieldElement

from .coupling import BOTTOM, MID, TOP, coupling_segment, lower_word, upper_word
from .shift import (
    ADJACENCY,
    InadmissibleWordError,
    adjacent_cylinder,
    cylinder_chain,
    cylinder_containing,
    cylinder_of,
    enumerate_words,
    inverse_branches,
    is_admissible,
    precede,
    predecessor,
    shift_map,
    word_count,
)


class WordTests(SimpleTestCase):
    def test_first_level_order(self):
        """Test: n=1 lists the partition left to right, 1 3 2."""
        self.assertEqual(list(enumerate_words(1)), ["1", "3", "2"])

    def test_counts(self):
        """Word counts follow the Fibonacci recursion."""
        self.assertEqual(len(enumerate_words(2)), 5)
        self.assertEqual(set(enumerate_words(2)), {"11", "13", "32", "21", "23"})
        self.assertEqual(len(enumerate_words(3)), 8)
        for n in range(1, 15):
            self.assertEqual(len(enumerate_words(n)), word_count(n))
        self.assertEqual(word_count(14), 1597)

    def test_adjacency_is_mixing(self):
        """A^3 is strictly positive."""
        cube = [[sum(ADJACENCY[i][k] * ADJACENCY[k][j] for k in range(3)) for j in range(3)]
                for i in range(3)]
        cube = [[sum(cube[i][k] * ADJACENCY[k][j] for k in range(3)) for j in range(3)]
                for i in range(3)]
        self.assertTrue(all(entry > 0 for row in cube for entry in row))

    def test_inadmissible_word(self):
        """Test: 12 and 33 are forbidden transitions."""
        self.assertFalse(is_admissible("12"))
        self.assertFalse(is_admissible("33"))
        self.assertFalse(is_admissible("14"))
        with self.assertRaises(InadmissibleWordError):
            cylinder_of("312")


class CylinderTests(SimpleTestCase):
    def test_known_cylinders(self):
        """Test: C_1, C_32 and C_11 match the partition geometry."""
        self.assertEqual((cylinder_of("1").low, cylinder_of("1").high), (ZERO, INV_PHI2))
        self.assertEqual((cylinder_of("32").low, cylinder_of("32").high), (INV_PHI2, INV_PHI))
        self.assertEqual((cylinder_of("11").low, cylinder_of("11").high), (ZERO, INV_PHI3))

    def test_tiling_is_exact(self):
        """Depth-n cylinders chain exactly from 0 to 1 for n <= 14."""
        for n in range(1, 15):
            position = ZERO
            for word in enumerate_words(n):
                cylinder = cylinder_of(word)
                self.assertEqual(cylinder.low, position)
                self.assertGreater(cylinder.high, cylinder.low)
                position = cylinder.high
            self.assertEqual(position, ONE)

    def test_refinement(self):
        for word in enumerate_words(6):
            parent = cylinder_of(word[:-1])
            child = cylinder_of(word)
            self.assertTrue(parent.low <= child.low and child.high <= parent.high)

    def test_lengths_are_powers_of_inverse_phi(self):
        """Every cylinder length is phi^-k for an integer k."""
        for word in enumerate_words(7):
            length = cylinder_of(word).length
            while length < 1:
                length = length * PHI
            self.assertEqual(length, ONE)

    def test_order_matches_geometry(self):
        """precede(w, z) iff C_w ends before C_z starts."""
        words = enumerate_words(5)
        for w in words[::3]:
            for z in words[::2]:
                geometric = cylinder_of(w).high <= cylinder_of(z).low
                self.assertEqual(precede(w, z), geometric, (w, z))

    def test_order_examples(self):
        self.assertTrue(precede("13", "32"))
        self.assertTrue(precede("32", "21"))
        self.assertFalse(precede("132", "132"))

    def test_point_location(self):
        """Exact and float points find the same cylinder."""
        x = FieldElement(Fraction(1, 3))
        exact = cylinder_containing(x, 8)
        approx = cylinder_containing(float(x), 8)
        self.assertEqual(exact.word, approx.word)
        self.assertTrue(exact.contains(x))
        chain = cylinder_chain(0.9, 6)
        self.assertEqual([c.depth for c in chain], [1, 2, 3, 4, 5, 6])
        self.assertEqual(chain[0].word, "2")

    def test_point_outside_circle(self):
        with self.assertRaises(ValueError):
            cylinder_containing(-0.1, 3)
        with self.assertRaises(ValueError):
            cylinder_containing(ONE, 3)

    def test_adjacent_cylinders(self):
        """Cylinders touching 1/phi^2 from either side."""
        right = adjacent_cylinder(INV_PHI2, 5, "right")
        left = adjacent_cylinder(INV_PHI2, 5, "left")
        self.assertEqual(right.low, INV_PHI2)
        self.assertEqual(left.high, INV_PHI2)
        self.assertEqual(right.word, "32111")
        with self.assertRaises(ValueError):
            adjacent_cylinder(ZERO, 3, "left")

    def test_predecessor_is_cyclic(self):
        words = enumerate_words(6)
        for index, word in enumerate(words):
            self.assertEqual(predecessor(word), words[index - 1])

    def test_shift_map(self):
        """S maps C_{sw} onto C_w."""
        cylinder = cylinder_of("2132")
        self.assertEqual(shift_map(cylinder.low), cylinder_of("132").low)
        self.assertEqual(shift_map(INV_PHI), ZERO)
        self.assertAlmostEqual(shift_map(0.5), 0.5 * 1.618033988749895)
        left, right = inverse_branches(INV_PHI2)
        self.assertEqual(shift_map(left), INV_PHI2)
        self.assertEqual(shift_map(right), INV_PHI2)
        self.assertEqual(len(inverse_branches(INV_PHI)), 1)


class CouplingTests(SimpleTestCase):
    def test_second_segment(self):
        """Test: V_2 joins C_11 on the top edge with C_32 on the bottom."""
        segment = coupling_segment(2)
        self.assertEqual(segment.upper.interval, (ZERO, INV_PHI3))
        self.assertEqual(segment.upper.level, TOP)
        self.assertEqual(segment.lower.interval, (INV_PHI2, INV_PHI))
        self.assertEqual(segment.lower.level, BOTTOM)

    def test_fifth_words(self):
        """Test: w(5)=32132 and w~(5)=23211."""
        self.assertEqual(upper_word(5), "32132")
        self.assertEqual(lower_word(5), "23211")
        self.assertEqual(upper_word(6), "323211")
        self.assertEqual(lower_word(6), "232132")

    def test_first_segment(self):
        segment = coupling_segment(1)
        self.assertEqual(segment.coupling_time, 2)
        self.assertEqual(segment.upper.level, BOTTOM)
        self.assertEqual(segment.lower.level, MID)
        self.assertEqual(segment.offset, INV_PHI)

    def test_words_admissible_and_late_ones(self):
        """Symbol 1 only appears in the last three places of w(j)."""
        for j in range(1, 31):
            self.assertTrue(is_admissible(upper_word(j)))
            self.assertTrue(is_admissible(lower_word(j)))
            self.assertEqual(len(upper_word(j)), j)
            self.assertNotIn("1", upper_word(j)[: max(j - 3, 0)])

    def test_segments_tile_top_edge(self):
        """C_{w(j)} for j >= 2 are consecutive along [0, 1/phi)."""
        position = ZERO
        for j in range(2, 20):
            low, high = coupling_segment(j).upper.interval
            self.assertEqual(low, position)
            position = high
        self.assertLess(position, INV_PHI)

    def test_levels(self):
        area = INV_PHI * (TOP - BOTTOM) + INV_PHI2 * (MID - BOTTOM)
        self.assertEqual(area, ONE)
        self.assertEqual(TOP + BOTTOM, MID)
