'''
Derived Limits: Ordinals: Unit Tests
'''

import unittest

from hypothesis import given, settings, strategies as st

from derivedlimits.ordinals import OMEGA, Ordinal, ZERO


@st.composite
def ordinals(draw, max_degree=3, max_coefficient=4):
    exponents = draw(st.lists(st.integers(0, max_degree), unique=True, max_size=max_degree + 1))
    terms = [(e, draw(st.integers(1, max_coefficient))) for e in sorted(exponents, reverse=True)]
    return Ordinal(terms)


##############################################################################
# Test Cases


class TestOrdinal(unittest.TestCase):

    def test_parse_and_str(self):
        tests = [
            ('0', '0'),
            ('7', '7'),
            ('w', 'w'),
            ('w^2*3 + w + 4', 'w^2*3+w+4'),
            ('ω·2+1', 'w*2+1'),
            ('w + w', 'w*2'),
            ('3 + w', 'w'),
        ]
        for text, expected in tests:
            with self.subTest(text):
                self.assertEqual(str(Ordinal(text)), expected)

    def test_invalid(self):
        for value in (-1, 'x', '', 'w^', 'w*0x', [[1, 1], [1, 2]], [[0, 0]]):
            with self.subTest(value=value):
                with self.assertRaisesRegex(ValueError, 'Invalid ordinal'):
                    Ordinal(value)
        for value in (True, 1.5, None):
            with self.subTest(value=value):
                with self.assertRaises(TypeError):
                    Ordinal(value)

    def test_addition_absorbs(self):
        self.assertEqual(3 + OMEGA, OMEGA)
        self.assertEqual((OMEGA + 3) + OMEGA, Ordinal('w*2'))
        self.assertEqual(OMEGA + 3, Ordinal('w+3'))
        self.assertEqual(Ordinal('w^2') + Ordinal('w*2+1'), Ordinal('w^2+w*2+1'))
        self.assertEqual(Ordinal('w+5') + Ordinal('w^2'), Ordinal('w^2'))

    def test_multiplication(self):
        self.assertEqual((OMEGA + 1) * 2, Ordinal('w*2+1'))
        self.assertEqual(OMEGA * 0, ZERO)
        self.assertEqual(Ordinal(3) * 4, 12)

    def test_minus(self):
        self.assertEqual(Ordinal('w*2+3').minus(OMEGA), Ordinal('w+3'))
        self.assertEqual(Ordinal('w^2+1').minus(5), Ordinal('w^2+1'))
        self.assertEqual(OMEGA.minus(OMEGA), ZERO)
        with self.assertRaisesRegex(ValueError, 'exceeds'):
            OMEGA.minus(Ordinal('w+1'))

    def test_order(self):
        chain = [ZERO, Ordinal(5), OMEGA, OMEGA + 1, Ordinal('w+5'), Ordinal('w*2'), Ordinal('w^2'), Ordinal('w^2+1')]
        for a, b in zip(chain, chain[1:]):
            with self.subTest(a=str(a), b=str(b)):
                self.assertLess(a, b)
                self.assertGreater(b, a)
        self.assertEqual(Ordinal(3), 3)
        self.assertLess(2, OMEGA)

    def test_kinds(self):
        self.assertTrue(ZERO.is_zero)
        self.assertTrue(Ordinal('w+2').is_successor)
        self.assertTrue(Ordinal('w^2*2').is_limit)
        self.assertEqual(Ordinal('w+2').split_finite(), (OMEGA, 2))
        self.assertEqual(OMEGA.split_finite(), (OMEGA, 0))
        self.assertEqual(Ordinal('w+2').predecessor(), OMEGA + 1)
        with self.assertRaisesRegex(ValueError, 'no predecessor'):
            OMEGA.predecessor()
        self.assertEqual(int(Ordinal(4)), 4)
        with self.assertRaisesRegex(ValueError, 'not finite'):
            int(OMEGA)
        self.assertEqual(Ordinal('w^3+w').degree, 3)

    def test_immutable(self):
        with self.assertRaises(TypeError):
            OMEGA.terms = ()
        self.assertEqual(hash(Ordinal('w+1')), hash(OMEGA + 1))
        self.assertEqual(Ordinal(Ordinal('w').to_list()), OMEGA)

    @settings(max_examples=100, derandomize=True)
    @given(ordinals(), ordinals())
    def test_minus_inverts_addition(self, a, b):
        lo, hi = sorted([a, b])
        self.assertEqual(lo + hi.minus(lo), hi)

    @settings(max_examples=100, derandomize=True)
    @given(ordinals(), ordinals(), ordinals())
    def test_addition_is_associative(self, a, b, c):
        self.assertEqual((a + b) + c, a + (b + c))
        self.assertLessEqual(a, a + b)
        self.assertLessEqual(b, a + b)

    @settings(max_examples=50, derandomize=True)
    @given(ordinals())
    def test_str_parses_back(self, a):
        self.assertEqual(Ordinal(str(a)), a)
