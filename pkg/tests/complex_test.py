'''
Derived Limits: Cochain Complexes: Unit Tests
'''

import logging
import unittest

from hypothesis import given, settings, strategies as st

from derivedlimits.complex import (
    build_complex,
    coboundary_preimage,
    cohomology_at,
    field_dimension_oracle,
    is_cocycle,
    universal_coefficient_dimension,
)
from derivedlimits.errors import DimensionMismatch, NotAComplex
from derivedlimits.zmodule import FinAbGroup, IntegerMatrix


##############################################################################
# Module Setup


def setUpModule():
    logging.disable(logging.CRITICAL)


##############################################################################
# Test Cases


class TestBuildComplex(unittest.TestCase):

    def test_missing_differentials_are_zero(self):
        c = build_complex([1, 2, 1])
        self.assertEqual(c.differential_at(1), IntegerMatrix.zeros(1, 2))
        self.assertEqual(c.differential_at(5).shape, (0, 0))
        self.assertEqual(c.differential_at(-1).shape, (1, 0))

    def test_shape_mismatch(self):
        with self.assertRaisesRegex(DimensionMismatch, r'd\^0 has shape'):
            build_complex([1, 2], [IntegerMatrix([[1, 1]])])
        with self.assertRaises(DimensionMismatch):
            build_complex([1, 1], [[[1]], [[1]]])
        with self.assertRaises(DimensionMismatch):
            build_complex([-1])

    def test_not_a_complex(self):
        with self.assertRaisesRegex(NotAComplex, r'd\^1 o d\^0 is not zero: entry \(0, 0\) is 1') as cm:
            build_complex([1, 1, 1], [[[1]], [[1]]])
        self.assertEqual(cm.exception.degree, 0)
        self.assertEqual(cm.exception.exit_code, 1)

    def test_reduction_hides_composite(self):
        # d^1 d^0 = 2 vanishes mod 2.
        c = build_complex([1, 1, 1], [[[1]], [[2]]], coeff='Z/2')
        self.assertEqual(c.euler_characteristic(), 1)


class TestCohomology(unittest.TestCase):

    def test_multiplication_by_two(self):
        c = build_complex([1, 1], [[[2]]])
        self.assertEqual(cohomology_at(c, 0), FinAbGroup())
        self.assertEqual(cohomology_at(c, 1), FinAbGroup(0, (2,)))
        self.assertEqual(cohomology_at(c, 7), FinAbGroup())

    def test_circle(self):
        c = build_complex([1, 2, 1], [[[1], [1]], [[1, -1]]])
        self.assertEqual(c.cohomology(), {0: FinAbGroup(), 1: FinAbGroup(), 2: FinAbGroup()})
        self.assertEqual(c.euler_characteristic(), 0)

    def test_mixed(self):
        c = build_complex([1, 1, 1], [[[0]], [[3]]])
        self.assertEqual(c.cohomology(), {0: FinAbGroup(1), 1: FinAbGroup(), 2: FinAbGroup(0, (3,))})

    def test_start_degree(self):
        c = build_complex([2], start=1)
        self.assertEqual(list(c.degrees), [1])
        self.assertEqual(cohomology_at(c, 1), FinAbGroup(2))
        self.assertEqual(cohomology_at(c, 0), FinAbGroup())

    def test_field_coefficients(self):
        c = build_complex([1, 1], [[[2]]])
        for p, expected in ((2, 1), (3, 0), (5, 0)):
            with self.subTest(p=p):
                reduced = c.reduce(f'Z/{p}')
                self.assertEqual(cohomology_at(reduced, 0).free_rank, expected)
                self.assertEqual(cohomology_at(reduced, 1).free_rank, expected)
                self.assertEqual(field_dimension_oracle(c, 1, p), expected)
                self.assertEqual(universal_coefficient_dimension(c, 0, p), expected)
                self.assertEqual(universal_coefficient_dimension(c, 1, p), expected)
        with self.assertRaises(ValueError):
            universal_coefficient_dimension(c.reduce('Z/2'), 0, 2)

    def test_cocycles_and_coboundaries(self):
        c = build_complex([1, 2, 1], [[[1], [1]], [[1, -1]]])
        self.assertTrue(is_cocycle(c, 1, (1, 1)))
        self.assertFalse(is_cocycle(c, 1, (1, 0)))
        self.assertEqual(coboundary_preimage(c, 1, (3, 3)), (3,))
        self.assertIsNone(coboundary_preimage(c, 1, (1, 0)))

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(st.integers(-6, 6), st.integers(-6, 6), st.integers(1, 4))
    def test_universal_coefficients(self, a, b, k):
        # Equal rows in d^0 make it compose to zero with d^1 = (k, -k).
        d0 = [[a, b], [a, b]]
        d1 = [[k, -k]]
        c = build_complex([2, 2, 1], [d0, d1])
        for n in (0, 1, 2):
            for p in (2, 3):
                self.assertEqual(field_dimension_oracle(c, n, p), universal_coefficient_dimension(c, n, p))
                self.assertEqual(cohomology_at(c.reduce(p), n).free_rank, field_dimension_oracle(c, n, p))
