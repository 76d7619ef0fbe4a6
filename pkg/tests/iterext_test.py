'''
Derived Limits: Iteration Helpers: Unit Tests
'''

import itertools
import logging
import unittest

from hypothesis import given, strategies as st

from derivedlimits import iterext


##############################################################################
# Module Setup


def setUpModule():
    logging.disable(logging.CRITICAL)


##############################################################################
# Test Cases


class TestBatch(unittest.TestCase):

    def test_batch(self):
        self.assertEqual(list(iterext.batch(0, 5, 2)), [(0, 2), (2, 4), (4, 5)])
        self.assertEqual(list(iterext.batch(1, 5, 2)), [(1, 3), (3, 5)])
        self.assertEqual(list(iterext.batch(0, 10, 5)), [(0, 5), (5, 10)])
        self.assertEqual(list(iterext.batch(0, 11, 5)), [(0, 5), (5, 10), (10, 11)])
        self.assertEqual(list(iterext.batch(3, 3, 4)), [(3, 3)])

    def test_invalid_step(self):
        for step in (0, -1):
            with self.subTest(step=step):
                with self.assertRaisesRegex(ValueError, 'Invalid batch step'):
                    list(iterext.batch(0, 4, step))

    @given(st.integers(0, 50), st.integers(0, 50), st.integers(1, 12))
    def test_windows_cover_range(self, start, length, step):
        windows = list(iterext.batch(start, start + length, step))
        covered = [i for lower, upper in windows for i in range(lower, upper)]
        self.assertEqual(covered, list(range(start, start + length)))


class TestTuples(unittest.TestCase):

    def test_increasing_tuples(self):
        self.assertEqual(list(iterext.increasing_tuples(3, 2)), [(0, 1), (0, 2), (1, 2)])
        self.assertEqual(list(iterext.increasing_tuples(3, 0)), [()])
        self.assertEqual(list(iterext.increasing_tuples(2, 3)), [])

    def test_faces(self):
        self.assertEqual(list(iterext.faces((4, 5, 6))), [(0, (5, 6)), (1, (4, 6)), (2, (4, 5))])
        self.assertEqual(list(iterext.faces(())), [])

    def test_permutation_sign(self):
        tests = [
            ((0, 1, 2), (1, (0, 1, 2))),
            ((1, 0, 2), (-1, (0, 1, 2))),
            ((2, 0, 1), (1, (0, 1, 2))),
            ((2, 1, 0), (-1, (0, 1, 2))),
            ((1, 1), (0, None)),
            ((), (1, ())),
        ]
        for indices, expected in tests:
            with self.subTest(indices=indices):
                self.assertEqual(iterext.permutation_sign(indices), expected)

    @given(st.permutations(range(5)), st.permutations(range(5)))
    def test_sign_is_multiplicative(self, p, q):
        composed = [p[i] for i in q]
        sign_p, _ = iterext.permutation_sign(p)
        sign_q, _ = iterext.permutation_sign(q)
        self.assertEqual(iterext.permutation_sign(composed)[0], sign_p * sign_q)


class TestMasks(unittest.TestCase):

    def test_mask_members(self):
        self.assertEqual(iterext.mask_members(0b101, 'abc'), ('a', 'c'))
        self.assertEqual(iterext.mask_members(0, 'abc'), ())

    def test_vector_from_index(self):
        self.assertEqual(iterext.vector_from_index(5, 2, 4), (1, 0, 1, 0))
        self.assertEqual(iterext.vector_from_index(7, 3, 2), (1, 2))
        vectors = [iterext.vector_from_index(i, 2, 3) for i in range(8)]
        self.assertEqual(sorted(vectors), sorted(itertools.product((0, 1), repeat=3)))
