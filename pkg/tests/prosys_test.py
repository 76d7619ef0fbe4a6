'''
Derived Limits: Inverse Systems: Unit Tests
'''

import logging
import unittest

import numpy as np

from derivedlimits.coherence import build_akl_systems
from derivedlimits.complex import cohomology_at, field_dimension_oracle, universal_coefficient_dimension
from derivedlimits.errors import (
    ChainCapExceeded,
    DimensionMismatch,
    MissingTransitionMap,
    NotExactInput,
    NotFunctorial,
    PosetError,
    SubsetCapExceeded,
)
from derivedlimits.prosys import (
    build_poset,
    build_ses,
    build_system,
    derived_limit,
    derived_limits,
    is_flasque,
    les_of_ses,
    random_directed_system,
    random_flasque_system,
    random_system,
    restrict_cofinal,
    roos_complex,
)
from derivedlimits.zmodule import FinAbGroup


##############################################################################
# Module Setup


def setUpModule():
    logging.disable(logging.CRITICAL)


def vposet():
    return build_poset(['c', 'a', 'b'], [('c', 'a'), ('c', 'b')])


def chain():
    return build_poset(['a', 'b', 'c'], [('a', 'b'), ('b', 'c')])


def vposet_ses():
    poset = vposet()
    sub = build_system(poset, {'c': 1, 'a': 0, 'b': 0})
    mid = build_system(poset, [1, 1, 1], {('c', 'a'): [[1]], ('c', 'b'): [[1]]})
    quot = build_system(poset, {'c': 0, 'a': 1, 'b': 1})
    return build_ses(sub, mid, quot, {'c': [[1]]}, {'a': [[1]], 'b': [[1]]})


##############################################################################
# Test Cases


class TestPoset(unittest.TestCase):

    def test_order(self):
        poset = chain()
        self.assertTrue(poset.leq('a', 'c'))
        self.assertFalse(poset.leq('c', 'a'))
        self.assertFalse(poset.lt('b', 'b'))
        self.assertEqual(poset.covering_pairs(), [(0, 1), (1, 2)])
        self.assertEqual(poset.maximum, 'c')
        self.assertEqual(poset.height, 3)
        self.assertTrue(poset.is_directed())

    def test_chains(self):
        poset = chain()
        self.assertEqual(poset.chains(0), [('a',), ('b',), ('c',)])
        self.assertEqual(poset.chains(1), [('a', 'b'), ('a', 'c'), ('b', 'c')])
        self.assertEqual(poset.chains(2), [('a', 'b', 'c')])
        self.assertEqual(poset.chains(3), [])
        self.assertEqual(poset.chain_counts(3), [3, 3, 1, 0])

    def test_down_sets(self):
        poset = vposet()
        self.assertEqual(list(poset.down_sets()),
                         [(), ('c',), ('c', 'a'), ('c', 'b'), ('c', 'a', 'b')])
        self.assertTrue(poset.is_down_set(['c']))
        self.assertFalse(poset.is_down_set(['a']))
        self.assertTrue(poset.is_cofinal(['a', 'b']))
        self.assertFalse(poset.is_cofinal(['a']))
        self.assertIsNone(poset.maximum)
        self.assertFalse(poset.is_directed())
        with self.assertRaises(SubsetCapExceeded):
            list(poset.down_sets(max_subsets=4))

    def test_invalid(self):
        with self.assertRaisesRegex(PosetError, 'Duplicate'):
            build_poset(['a', 'a'])
        with self.assertRaisesRegex(PosetError, 'unknown element'):
            build_poset(['a'], [('a', 'b')])
        with self.assertRaisesRegex(PosetError, 'cycle') as cm:
            build_poset(['a', 'b', 'c'], [('a', 'b'), ('b', 'c'), ('c', 'a')])
        self.assertEqual(len(cm.exception.elements), 2)
        with self.assertRaisesRegex(PosetError, 'must be pairs'):
            build_poset(['a'], [('a',)])
        with self.assertRaisesRegex(PosetError, 'Unknown poset element'):
            chain().leq('a', 'z')


class TestBuildSystem(unittest.TestCase):

    def test_derived_maps(self):
        s = build_system(chain(), [1, 1, 1], {('a', 'b'): [[2]], ('b', 'c'): [[3]]})
        self.assertEqual(s.map_for('a', 'c').to_list(), [[6]])
        self.assertEqual(s.map_for('b', 'b').to_list(), [[1]])
        with self.assertRaises(PosetError):
            s.map_for('c', 'a')

    def test_missing_map(self):
        with self.assertRaises(MissingTransitionMap) as cm:
            build_system(chain(), [1, 1, 1], {('a', 'b'): [[1]]})
        self.assertEqual(cm.exception.pair, ('b', 'c'))

    def test_zero_terms_need_no_maps(self):
        s = build_system(vposet(), {'c': 1, 'a': 0, 'b': 0})
        self.assertEqual(s.map_for('c', 'a').shape, (1, 0))

    def test_not_functorial(self):
        maps = {('a', 'b'): [[1]], ('b', 'c'): [[1]], ('a', 'c'): [[2]]}
        with self.assertRaisesRegex(NotFunctorial, r'p\[a,c\] != p\[a,b\] p\[b,c\]') as cm:
            build_system(chain(), [1, 1, 1], maps)
        self.assertEqual(cm.exception.triple, ('a', 'b', 'c'))

    def test_invalid(self):
        with self.assertRaises(DimensionMismatch):
            build_system(chain(), [1, 1, 1], {('a', 'b'): [[1, 2]], ('b', 'c'): [[1]]})
        with self.assertRaisesRegex(DimensionMismatch, 'No rank given'):
            build_system(chain(), {'a': 1})
        with self.assertRaises(DimensionMismatch):
            build_system(chain(), [1, 1])
        with self.assertRaisesRegex(PosetError, 'not a strict relation'):
            build_system(chain(), [1, 1, 1], {('b', 'a'): [[1]]})


class TestDerivedLimits(unittest.TestCase):

    def test_one_point(self):
        s = build_system(build_poset(['x']), [1])
        self.assertEqual(derived_limits(s, 2), {0: FinAbGroup(1), 1: FinAbGroup(), 2: FinAbGroup()})

    def test_chain(self):
        s = build_system(chain(), [1, 1, 1], {('a', 'b'): [[2]], ('b', 'c'): [[1]]})
        self.assertEqual(derived_limits(s, 2), {0: FinAbGroup(1), 1: FinAbGroup(), 2: FinAbGroup()})

    def test_vposet(self):
        s = build_system(vposet(), {'c': 1, 'a': 0, 'b': 0})
        self.assertEqual(derived_limit(s, 0), FinAbGroup())
        self.assertEqual(derived_limit(s, 1), FinAbGroup(1))
        self.assertEqual(derived_limit(s, 2), FinAbGroup())
        for p in (2, 3):
            with self.subTest(p=p):
                reduced = s.reduce(f'Z/{p}')
                self.assertEqual(derived_limit(reduced, 1), FinAbGroup(1, ring=f'Z/{p}'))
                self.assertEqual(field_dimension_oracle(roos_complex(s, 1), 1, p), 1)

    def test_roos_ranks(self):
        s = build_system(vposet(), {'c': 1, 'a': 0, 'b': 0})
        c = roos_complex(s)
        self.assertEqual(c.ranks, (1, 2))
        self.assertEqual(c.differential_at(0).to_list(), [[-1], [-1]])
        self.assertEqual(s.total_roos_rank(1), 3)

    def test_unnormalized_complex_agrees(self):
        systems = [
            build_system(vposet(), {'c': 1, 'a': 0, 'b': 0}),
            build_system(chain(), [1, 1, 1], {('a', 'b'): [[2]], ('b', 'c'): [[1]]}),
            build_system(vposet(), [2, 1, 1], {('c', 'a'): [[1], [0]], ('c', 'b'): [[0], [2]]}),
        ]
        for s in systems:
            normalized = roos_complex(s, 2)
            unnormalized = roos_complex(s, 2, normalized=False)
            for n in range(3):
                with self.subTest(system=repr(s), n=n):
                    self.assertEqual(cohomology_at(unnormalized, n), cohomology_at(normalized, n))

    def test_torsion(self):
        s = build_system(vposet(), [1, 1, 1], {('c', 'a'): [[1]], ('c', 'b'): [[2]]})
        self.assertEqual(derived_limits(s, 1), {0: FinAbGroup(1), 1: FinAbGroup()})
        # Both legs multiply by two.
        s = build_system(vposet(), [1, 1, 1], {('c', 'a'): [[2]], ('c', 'b'): [[2]]})
        self.assertEqual(derived_limits(s, 1), {0: FinAbGroup(1), 1: FinAbGroup(0, (2,))})

    def test_chain_cap(self):
        s = build_system(chain(), [1, 1, 1], {('a', 'b'): [[1]], ('b', 'c'): [[1]]})
        with self.assertRaises(ChainCapExceeded) as cm:
            roos_complex(s, 2, max_chains=3)
        self.assertEqual(cm.exception.exit_code, 2)
        self.assertEqual(cm.exception.needed, 7)
        with self.assertRaises(ValueError):
            roos_complex(s, normalized=False)

    def test_cofinal_restriction(self):
        s = build_system(chain(), [1, 1, 1], {('a', 'b'): [[2]], ('b', 'c'): [[3]]})
        expected = derived_limits(s, 2)
        for subset in (['c'], ['b', 'c'], ['a', 'c']):
            with self.subTest(subset=subset):
                self.assertEqual(derived_limits(restrict_cofinal(s, subset), 2), expected)

    def test_random_cofinal_restriction(self):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            s = random_directed_system(rng, size=int(rng.integers(2, 7)))
            top = s.poset.maximum
            subset = [x for x in s.poset.elements if x == top or rng.random() < 0.5]
            with self.subTest(seed=seed, subset=subset):
                self.assertTrue(s.poset.is_cofinal(subset))
                self.assertEqual(derived_limits(restrict_cofinal(s, subset), 2), derived_limits(s, 2))

    def test_akl_restricted_to_an_up_set(self):
        s = build_akl_systems(2, 2).sub
        expected = derived_limits(s, 2)
        self.assertEqual(expected[0], FinAbGroup(4))
        for x in (s.poset.elements[1], s.poset.elements[6]):
            up = s.poset.up(x)
            with self.subTest(x=str(x)):
                self.assertLess(len(up), len(s.poset))
                self.assertTrue(s.poset.is_cofinal(up))
                self.assertEqual(derived_limits(restrict_cofinal(s, up), 2), expected)

    def test_directed_systems_are_acyclic(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            s = random_directed_system(rng, size=int(rng.integers(1, 7)))
            with self.subTest(seed=seed):
                groups = derived_limits(s, 2)
                self.assertEqual(groups[0], FinAbGroup(s.term_rank(s.poset.maximum)))
                self.assertTrue(groups[1].is_trivial)
                self.assertTrue(groups[2].is_trivial)

    def test_random_systems_match_oracles(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            s = random_system(rng, size=int(rng.integers(2, 6)))
            c = roos_complex(s, 2)
            for n in range(3):
                for p in (2, 3):
                    with self.subTest(seed=seed, n=n, p=p):
                        expected = field_dimension_oracle(c, n, p)
                        self.assertEqual(universal_coefficient_dimension(c, n, p), expected)
                        self.assertEqual(derived_limits(s.reduce(p), 2)[n].free_rank, expected)


class TestFlasque(unittest.TestCase):

    def test_constant_system(self):
        s = build_system(vposet(), [1, 1, 1], {('c', 'a'): [[1]], ('c', 'b'): [[1]]})
        result = is_flasque(s)
        self.assertTrue(result)
        self.assertEqual(result.checked, 4)

    def test_not_flasque(self):
        s = build_system(vposet(), {'c': 1, 'a': 0, 'b': 0})
        result = is_flasque(s)
        self.assertFalse(result)
        self.assertEqual(result.witness, ('c',))

    def test_explicit_down_sets(self):
        s = build_system(vposet(), [1, 1, 1], {('c', 'a'): [[1]], ('c', 'b'): [[2]]})
        self.assertTrue(is_flasque(s, down_sets=[['c', 'b'], ['c', 'a', 'b']]))
        result = is_flasque(s, down_sets=[['c', 'b'], ['c']])
        self.assertFalse(result)
        self.assertEqual(result.witness, ('c',))
        with self.assertRaisesRegex(PosetError, 'not a down-set'):
            is_flasque(s, down_sets=[['a']])

    def test_random_flasque_systems(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            s = random_flasque_system(rng, size=int(rng.integers(1, 6)))
            with self.subTest(seed=seed):
                self.assertTrue(is_flasque(s))
                groups = derived_limits(s, 2)
                self.assertEqual(groups[0], FinAbGroup(s.term_rank(s.poset.maximum)))
                self.assertTrue(groups[1].is_trivial)
                self.assertTrue(groups[2].is_trivial)


class TestLongExactSequence(unittest.TestCase):

    def test_vposet_sequence(self):
        report = les_of_ses(vposet_ses(), 2)
        self.assertTrue(report.exact)
        groups = report['groups']
        self.assertEqual(groups[0], {'sub': FinAbGroup(), 'mid': FinAbGroup(1), 'quot': FinAbGroup(2)})
        self.assertEqual(groups[1], {'sub': FinAbGroup(1), 'mid': FinAbGroup(), 'quot': FinAbGroup()})
        self.assertFalse(report['connecting'][0]['zero'])
        self.assertEqual(len(report['exactness']), 9)
        middle = report['flasque_middle']
        self.assertTrue(middle['flasque'])
        self.assertTrue(all(identity['holds'] for identity in middle['identities']))
        self.assertEqual(middle['identities'][0]['left'], 'Z')

    def test_not_exact(self):
        poset = vposet()
        sub = build_system(poset, {'c': 1, 'a': 0, 'b': 0})
        mid = build_system(poset, [1, 1, 1], {('c', 'a'): [[1]], ('c', 'b'): [[1]]})
        quot = build_system(poset, {'c': 0, 'a': 1, 'b': 1})
        with self.assertRaisesRegex(NotExactInput, 'not exact at c: inclusion is not injective'):
            build_ses(sub, mid, quot, {'c': [[0]]}, {'a': [[1]], 'b': [[1]]})
        with self.assertRaisesRegex(NotExactInput, 'not exact at a: projection is not surjective'):
            build_ses(sub, mid, quot, {'c': [[1]]}, {'a': [[2]], 'b': [[1]]})
        with self.assertRaisesRegex(NotExactInput, 'kernel of the projection'):
            build_ses(sub, mid, quot, {'c': [[2]]}, {'a': [[1]], 'b': [[1]]})
