'''
Derived Limits: Walks on Ordinals: Unit Tests
'''

import itertools
import logging
import unittest

from unittest import mock

import numpy as np

import derivedlimits.walks

from derivedlimits.coherence import IndexedFunction
from derivedlimits.errors import BoundExceeded, DimensionMismatch, RingError, VerificationError
from derivedlimits.ordinals import OMEGA, Ordinal, ZERO
from derivedlimits.walks import (
    LadderSystem,
    Stage,
    WalkFamily,
    build_tau_phi,
    canonical_term,
    ordinal_grid,
    recursive_base_family,
    shift_rows,
    walk_statistics,
)


##############################################################################
# Module Setup


def setUpModule():
    logging.disable(logging.CRITICAL)


def w(text):
    return Ordinal(text)


def shifted(gamma, n):
    return canonical_term(gamma, n + 1)


def random_ordinal(rng, degree=3, top=3, width=5):
    # Below w^degree * top, every lower coefficient below width.
    coefficients = [int(rng.integers(0, top))] + [int(rng.integers(0, width)) for _ in range(degree)]
    return Ordinal([(degree - k, c) for k, c in enumerate(coefficients) if c])


##############################################################################
# Test Cases


class TestLadders(unittest.TestCase):

    def test_canonical_term(self):
        self.assertEqual(canonical_term(OMEGA, 4), 4)
        self.assertEqual(canonical_term(w('w^2'), 2), w('w*2'))
        self.assertEqual(canonical_term(w('w*2'), 3), w('w+3'))
        self.assertEqual(canonical_term(w('w^2*2+w'), 1), w('w^2*2+1'))

    def test_count_below(self):
        ladders = LadderSystem()
        tests = [
            ('w^2', 'w+3', 2),
            ('w^2', 'w', 1),
            ('w^2', '0', 0),
            ('w', '5', 5),
            ('w*2', 'w+1', 1),
            ('w*2', '7', 0),
        ]
        for gamma, xi, expected in tests:
            with self.subTest(gamma=gamma, xi=xi):
                self.assertEqual(ladders.count_below(w(gamma), w(xi)), expected)
        with self.assertRaisesRegex(ValueError, 'not below'):
            ladders.count_below(OMEGA, OMEGA)
        with self.assertRaisesRegex(ValueError, 'not a limit'):
            ladders.term(w('w+1'), 0)

    def test_contains(self):
        ladders = LadderSystem()
        self.assertTrue(ladders.contains(w('w^2'), w('w*3')))
        self.assertFalse(ladders.contains(w('w^2'), w('w+1')))
        self.assertFalse(ladders.contains(w('w*2'), ZERO))

    def test_custom_rule(self):
        ladders = LadderSystem(shifted)
        self.assertEqual(ladders.name, 'shifted')
        self.assertEqual(ladders.count_below(OMEGA, w('5')), 4)
        self.assertEqual(WalkFamily(ladders).rho1(5, OMEGA), 4)


class TestWalks(unittest.TestCase):

    def setUp(self):
        self.walks = WalkFamily()

    def test_rho1(self):
        for n in range(6):
            with self.subTest(n=n):
                self.assertEqual(self.walks.rho1(n, OMEGA), n)
        for alpha in ('0', '4', 'w', 'w*2+3', 'w^2'):
            with self.subTest(alpha=alpha):
                self.assertEqual(self.walks.rho1(w(alpha), w(alpha) + 1), 0)
                self.assertEqual(self.walks(w(alpha), w(alpha)), 0)
        self.assertEqual(self.walks.rho1(3, w('w+2')), 3)
        self.assertEqual(self.walks.rho1(w('w+1'), w('w^2')), 2)
        with self.assertRaisesRegex(ValueError, 'Walks go down'):
            self.walks.rho1(OMEGA, 3)

    def test_walk(self):
        self.assertEqual(self.walks.walk(3, OMEGA), [(OMEGA, 3)])
        self.assertEqual(self.walks.walk(3, w('w+2')), [(w('w+2'), 0), (w('w+1'), 0), (OMEGA, 3)])
        self.assertEqual(self.walks.rho2(3, w('w+2')), 3)
        self.assertEqual(self.walks.walk(OMEGA, OMEGA), [])

    def test_fibers(self):
        self.assertEqual(self.walks.fiber_upto(w('w*2'), 2), [w(x) for x in ('0', '1', '2', 'w', 'w+1', 'w+2')])
        self.assertEqual(self.walks.fiber_upto(w('w*2'), 1, lo=w('w+1')), [w('w+1')])
        self.assertEqual(self.walks.fiber(w('w*2'), 1), [w('1'), w('w+1')])
        self.assertEqual(self.walks.fiber(w('w+2'), 0), [ZERO, OMEGA, w('w+1')])

    def test_fibers_match_rho1(self):
        beta = w('w^2+w+1')
        below = [xi for xi in ordinal_grid('w^2*2', 4) if xi < beta]
        for m in range(3):
            fiber = set(self.walks.fiber_upto(beta, m))
            for xi in below:
                with self.subTest(m=m, xi=str(xi)):
                    self.assertEqual(xi in fiber, self.walks.rho1(xi, beta) <= m)

    def test_bound(self):
        walks = WalkFamily(bound='w^2')
        with self.assertRaisesRegex(BoundExceeded, 'not below the configured bound w\\^2') as cm:
            walks.rho1(0, w('w^2'))
        self.assertEqual(cm.exception.exit_code, 2)
        with self.assertRaises(BoundExceeded):
            walks.coherence_defect(OMEGA, w('w^2+1'))

    def test_memo_table(self):
        self.walks.rho1(3, w('w^2'))
        self.assertIn((w('3'), w('w^2')), self.walks.table)


class TestCoherenceDefect(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.walks = WalkFamily()
        cls.grid = ordinal_grid('w^2*2', 3)
        cls.sample = ordinal_grid('w^2*2', 4)
        cls.defects = {
            (alpha, beta): cls.walks.coherence_defect(alpha, beta)
            for alpha, beta in itertools.combinations(cls.grid, 2)
        }

    def test_known_defect(self):
        self.assertEqual(self.walks.coherence_defect(w('w*2'), w('w^2')), [OMEGA, w('w+1')])
        self.assertEqual(self.walks.coherence_defect(OMEGA, OMEGA), [])
        self.assertEqual(self.walks.coherence_defect(5, OMEGA), [1, 2, 3, 4])

    def test_matches_direct_comparison(self):
        for (alpha, beta), defect in self.defects.items():
            with self.subTest(alpha=str(alpha), beta=str(beta)):
                for xi in defect:
                    self.assertLess(xi, alpha)
                    self.assertNotEqual(self.walks.rho1(xi, alpha), self.walks.rho1(xi, beta))
                found = set(defect)
                for xi in self.sample:
                    if xi < alpha:
                        differs = self.walks.rho1(xi, alpha) != self.walks.rho1(xi, beta)
                        self.assertEqual(xi in found, differs)

    def test_triangle_inclusion(self):
        for alpha, beta, gamma in itertools.combinations(self.grid, 3):
            outer = set(self.defects[(alpha, gamma)])
            inner = set(self.defects[(alpha, beta)]) | {xi for xi in self.defects[(beta, gamma)] if xi < alpha}
            with self.subTest(alpha=str(alpha), beta=str(beta), gamma=str(gamma)):
                self.assertLessEqual(outer, inner)

    def test_triangle_inclusion_on_sampled_triples(self):
        rng = np.random.default_rng(0)
        walks = WalkFamily()
        checked = 0
        while checked < 500:
            alpha, beta, gamma = sorted(random_ordinal(rng) for _ in range(3))
            if not alpha < beta < gamma:
                continue
            outer = set(walks.coherence_defect(alpha, gamma))
            inner = set(walks.coherence_defect(alpha, beta))
            inner.update(xi for xi in walks.coherence_defect(beta, gamma) if xi < alpha)
            with self.subTest(alpha=str(alpha), beta=str(beta), gamma=str(gamma)):
                self.assertLessEqual(outer, inner)
            checked += 1


class TestFamilies(unittest.TestCase):

    def test_ordinal_grid(self):
        grid = ordinal_grid('w^2', 3)
        self.assertEqual([str(o) for o in grid], ['0', '1', '2', 'w', 'w+1', 'w+2', 'w*2', 'w*2+1', 'w*2+2'])
        self.assertEqual(len(ordinal_grid('w^2*2', 3)), 18)
        with self.assertRaisesRegex(DimensionMismatch, 'at least 2'):
            ordinal_grid('w', 1)

    def test_shift_rows(self):
        psi = {(ZERO, w('1')): 1, (w('2'), OMEGA): 1}
        self.assertEqual(shift_rows(psi, OMEGA), {(OMEGA, w('1')): 1, (w('w+2'), OMEGA): 1})

    def test_tau_phi(self):
        f = IndexedFunction([[w('0'), w('1'), OMEGA], [w('w+1')]], None)
        gamma, tau, phi = build_tau_phi(f, WalkFamily())
        self.assertEqual(gamma, w('w+2'))
        self.assertEqual(tau, {w('0'): 0, w('1'): 1, OMEGA: 0, w('w+1'): 0})
        self.assertEqual(phi, {(0, w('0')), (0, OMEGA)})

    def test_tau_phi_on_sampled_functions(self):
        rng = np.random.default_rng(1)
        walks = WalkFamily()
        for trial in range(100):
            kappa = int(rng.integers(1, 4))
            rows = [{random_ordinal(rng) for _ in range(int(rng.integers(0 if i else 1, 5)))} for i in range(kappa)]
            f = IndexedFunction(rows, None)
            gamma, tau, phi = build_tau_phi(f, walks)
            with self.subTest(trial=trial, f=str(f)):
                self.assertEqual(gamma, max(xi for _, xi in f.support) + 1)
                self.assertEqual(tau, {xi: walks.rho1(xi, gamma) for _, xi in f.support})
                self.assertEqual(phi, {(i, xi) for i, xi in f.support if walks.rho1(xi, gamma) == i})

    def test_support_is_checked_after_the_last_stage(self):
        check = derivedlimits.walks._check_support
        with mock.patch('derivedlimits.walks._check_support', wraps=check) as spy:
            stages = recursive_base_family('w^2', 3, 'Z/2')
        self.assertEqual(spy.call_count, len(stages) + 1)
        self.assertEqual(spy.call_args[0][1], w('w*2+3'))
        bad = Stage(w('1'), 'successor', {(w('2'), ZERO): 1})
        with self.assertRaisesRegex(VerificationError, 'Support invariant failed'):
            check([bad], w('2'))
        check([bad], w('3'))

    def test_recursive_base_family(self):
        stages = recursive_base_family('w^2', 3, 'Z/2')
        kinds = [s.kind for s in stages]
        self.assertEqual(kinds, [
            'zero', 'successor', 'successor', 'limit', 'successor', 'successor', 'limit', 'successor', 'successor',
        ])
        first, second = stages[3], stages[6]
        self.assertEqual({xi for (eta, xi) in first.insertion}, {w('0'), w('1'), w('2')})
        self.assertEqual(set(second.insertion), {(w('w*2'), OMEGA), (w('w*2'), w('w+1')), (w('w*2'), w('w+2'))})
        self.assertEqual({xi for (eta, xi) in second.values if eta == w('w*2')}, {OMEGA, w('w+1'), w('w+2')})
        # Successor stages keep the earlier columns only.
        self.assertTrue(all(xi < OMEGA for (_, xi) in stages[4].values))
        for stage in stages:
            with self.subTest(stage=str(stage.ordinal)):
                self.assertTrue(all(eta <= stage.ordinal for (eta, _) in stage.values))
        self.assertEqual(stages[3].to_dict()['kind'], 'limit')
        self.assertIsNone(stages[1].to_dict()['trivialization'])

    def test_recursive_base_family_needs_field(self):
        with self.assertRaises(RingError):
            recursive_base_family('w^2', 3, 'Z')


class TestStatistics(unittest.TestCase):

    def test_walk_statistics(self):
        stats = walk_statistics(WalkFamily(), ['0', 1, 'w', 'w+1', 'w*2'], depth=2)
        self.assertEqual(stats['ordinals'], 5)
        self.assertEqual(stats['pairs'], 10)
        self.assertEqual(stats['triples'], 10)
        self.assertEqual(sum(stats['defect_sizes'].values()), 10)
        self.assertEqual(sorted(stats['max_fiber']), [0, 1, 2])
        self.assertEqual(set(stats['subadditivity_failures']), {'upper', 'lower'})
