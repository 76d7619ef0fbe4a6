'''
Derived Limits: Coherent Families

Set ideals on a finite ground set, the inverse systems they index, families
of functions that are n-coherent modulo an ideal, their trivializations and
the dictionary between such families and Roos cocycles.

Modulo an ideal ``J`` on a finite set, "supported in ``J``" means "contained
in the union ``J_max`` of its generators", so every coherence question here
is an exact linear system over the coefficient ring on the coordinates
outside ``J_max``.
'''

import concurrent.futures
import itertools
import logging

from derivedlimits.config import MAX_FAMILIES, MAX_POSET
from derivedlimits.errors import (
    DimensionMismatch,
    FamilyCapExceeded,
    GeneratorOutOfGround,
    NotACocycle,
    NotCoherent,
    NotRepresentable,
    ParameterNotLarger,
    PosetCapExceeded,
    PosetError,
    VerificationError,
)
from derivedlimits.iterext import batch, faces, increasing_tuples, permutation_sign, vector_from_index
from derivedlimits.prosys import build_poset, build_ses, build_system, derived_limit, roos_complex
from derivedlimits.zmodule import IntegerMatrix, Ring, ZZ, group_from_map, normal_form, solve_integer_system

logger = logging.getLogger(name=__name__)

__all__ = [
    'SetIdeal', 'IndexedFunction', 'CoherentFamily', 'FamilyComplex', 'label', 'ordered', 'points_of',
    'build_ideal', 'akl_index', 'is_n_coherent', 'coherence_witness', 'find_trivialization', 'is_trivialized_by',
    'build_ideal_systems', 'build_X_system', 'build_akl_systems', 'build_Y_system',
    'cocycle_to_family', 'family_to_cocycle', 'extend_family',
    'coboundary_image', 'enumerate_families', 'all_coherent_families_trivial', 'lemma_equivalence',
    'lemma_instances', 'random_coherent_family',
]


def ordered(points):
    '''
    Points of a ground set in their canonical order.
    '''
    try:
        return sorted(points)
    except TypeError:
        return sorted(points, key=repr)


def label(element):
    '''
    A short text label for an index element.
    '''
    if isinstance(element, (set, frozenset)):
        return '{' + ','.join(str(_point_label(p)) for p in ordered(element)) + '}'
    return str(element)


def points_of(element):
    '''
    The underlying point set of an index element: a set, or the graph
    ``X(f)`` of an ``IndexedFunction``.
    '''
    if isinstance(element, IndexedFunction):
        return element.support
    return frozenset(element)


##############################################################################
# Classes


class SetIdeal:
    '''
    The ideal on ``ground`` generated by finitely many subsets. A set belongs
    to it exactly when it lies inside ``j_max``, the union of the generators.
    '''

    __slots__ = ['ground', 'generators', 'j_max']

    def __init__(self, ground, generators):
        generators = tuple(frozenset(g) for g in generators)
        object.__setattr__(self, 'ground', frozenset(ground))
        object.__setattr__(self, 'generators', generators)
        object.__setattr__(self, 'j_max', frozenset().union(*generators))

    def __setattr__(self, key, value):
        raise TypeError('SetIdeal objects are immutable.')

    def __eq__(self, other):
        if not isinstance(other, SetIdeal):
            return NotImplemented
        return self.ground == other.ground and self.generators == other.generators

    def __hash__(self):
        return hash((self.ground, self.generators))

    def __repr__(self):
        return f'{self.__class__.__qualname__}(ground={ordered(self.ground)!r}, j_max={ordered(self.j_max)!r})'

    def contains(self, subset):
        return frozenset(subset) <= self.j_max

    __contains__ = contains

    @property
    def proper(self):
        return self.j_max != self.ground

    def union_closure(self):
        '''
        The unions of nonempty sets of generators, without repeats, in
        ascending bitmask order over the generator list. The result is
        directed: its last distinct element is ``j_max``.
        '''
        seen, closure = set(), []
        for mask in range(1, 1 << len(self.generators)):
            union = frozenset().union(*(g for bit, g in enumerate(self.generators) if mask >> bit & 1))
            if union not in seen:
                seen.add(union)
                closure.append(union)
        return closure


class IndexedFunction:
    '''
    A function ``f`` from ``range(kappa)`` to subsets of ``range(width)``.
    ``support`` is its graph ``X(f) = {(i, j) : j in f(i)}`` and ``f <= g``
    means ``X(f) <= X(g)``.

    With ``width=None`` the values are finite sets of arbitrary ordered
    points, e.g. ordinals.
    '''

    __slots__ = ['rows', 'width', 'support']

    def __init__(self, rows, width):
        if width is None:
            rows = tuple(frozenset(row) for row in rows)
        else:
            rows = tuple(frozenset(int(j) for j in row) for row in rows)
            for row in rows:
                if any(j < 0 or j >= width for j in row):
                    raise DimensionMismatch(f'Function values must lie in range({width}): {sorted(row)}')
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'width', width)
        object.__setattr__(self, 'support', frozenset((i, j) for i, row in enumerate(rows) for j in row))

    def __setattr__(self, key, value):
        raise TypeError('IndexedFunction objects are immutable.')

    def __reduce__(self):
        return (self.__class__, ([sorted(r) for r in self.rows], self.width))

    @property
    def kappa(self):
        return len(self.rows)

    def restrict(self, kappa, width):
        '''
        ``g(i) = f(i) & range(width)`` for ``i < kappa``.
        '''
        return IndexedFunction([[j for j in self.rows[i] if j < width] for i in range(kappa)], width)

    def __le__(self, other):
        return self.support <= other.support

    def __eq__(self, other):
        if not isinstance(other, IndexedFunction):
            return NotImplemented
        return self.rows == other.rows and self.width == other.width

    def __hash__(self):
        return hash((self.rows, self.width))

    def __repr__(self):
        return f'{self.__class__.__qualname__}({[sorted(r) for r in self.rows]!r}, {self.width})'

    def __str__(self):
        return '<' + '; '.join(','.join(map(str, sorted(r))) or '-' for r in self.rows) + '>'


class CoherentFamily:
    '''
    An alternating family of functions ``phi_T`` indexed by strictly
    increasing ``n``-tuples ``T`` of positions in ``index``, each defined on
    the intersection of the tuple's sets with values in ``ring^rank``.

    ``values`` maps a tuple to ``{point: vector}``; missing points are zero.
    A family of dimension 0 is a single function on the whole ground set.
    '''

    __slots__ = ['n', 'index', 'modulus', 'rank', 'ring', 'values', '_points']

    def __init__(self, n, index, modulus, values=None, rank=1, ring=ZZ):
        ring = Ring.parse(ring)
        index = tuple(index)
        points = tuple(points_of(x) for x in index)
        clean = {}
        for key, mapping in (values or {}).items():
            key = tuple(key)
            if len(key) != n or any(b <= a for a, b in zip(key, key[1:])) or any(not 0 <= t < len(index) for t in key):
                raise DimensionMismatch(f'Family of dimension {n} cannot hold tuple {key}')
            domain = modulus.ground.intersection(*(points[t] for t in key))
            entries = {}
            for point, vector in mapping.items():
                if point not in domain:
                    raise DimensionMismatch(f'Point {point!r} is outside the domain of tuple {key}')
                raw = vector if isinstance(vector, (list, tuple)) else [vector]
                vector = tuple(ring.reduce(int(v)) for v in raw)
                if len(vector) != rank:
                    raise DimensionMismatch('Value has the wrong rank.', expected=rank, actual=len(vector))
                if any(vector):
                    entries[point] = vector
            if entries:
                clean[key] = entries
        for key, value in (('n', n), ('index', index), ('modulus', modulus), ('rank', rank), ('ring', ring),
                           ('values', clean), ('_points', points)):
            object.__setattr__(self, key, value)

    def __setattr__(self, key, value):
        raise TypeError('CoherentFamily objects are immutable.')

    def __eq__(self, other):
        if not isinstance(other, CoherentFamily):
            return NotImplemented
        return (self.n, self.index, self.modulus, self.rank, self.ring, self.values) == \
            (other.n, other.index, other.modulus, other.rank, other.ring, other.values)

    def __repr__(self):
        return f'{self.__class__.__qualname__}(n={self.n}, index={len(self.index)} sets, stored={len(self.values)})'

    def domain(self, indices):
        return self.modulus.ground.intersection(*(self._points[t] for t in indices))

    def lookup(self, indices, point):
        '''
        ``phi`` at any ``n``-tuple of positions (in any order) and a point of
        its domain; permutations contribute their sign, repeats give zero.
        '''
        sign, key = permutation_sign(indices)
        zero = (0,) * self.rank
        if not sign:
            return zero
        vector = self.values.get(key, {}).get(point)
        if vector is None:
            return zero
        return tuple(self.ring.reduce(sign * v) for v in vector)

    def is_zero(self):
        return not self.values

    def to_dict(self):
        '''
        A JSON-friendly rendering: one entry per stored tuple.
        '''
        labels = [label(x) for x in self.index]
        return {
            'n': self.n,
            'rank': self.rank,
            'ring': str(self.ring),
            'values': [{'tuple': list(key),
                        'labels': [labels[t] for t in key],
                        'points': [[_point_label(p), list(mapping[p])] for p in ordered(mapping)]}
                       for key, mapping in sorted(self.values.items())],
        }


def _point_label(point):
    return list(point) if isinstance(point, tuple) else point


class FamilyComplex:
    '''
    The alternating cochain complex of families over ``index`` modulo an
    ideal: in dimension ``m`` one coordinate per ``(tuple, point, component)``
    with the point in the tuple's intersection but outside ``J_max``.

    ``delta(m)`` maps dimension ``m`` to ``m + 1`` by
    ``(delta phi)_T = sum_i (-1)^i phi_{T minus T_i}`` restricted. Coordinate
    lists, coboundary matrices and their normal forms are filled once and
    shared by every solve.
    '''

    def __init__(self, index, modulus, rank=1, coeff=ZZ):
        self.index = tuple(index)
        self.modulus = modulus
        self.rank = rank
        self.ring = Ring.parse(coeff)
        self._points = [points_of(x) for x in self.index]
        self._coordinates = {}
        self._deltas = {}
        self._forms = {}
        self._quotient = None

    def domain(self, indices):
        return self.modulus.ground.intersection(*(self._points[t] for t in indices))

    def coordinates(self, m):
        if m not in self._coordinates:
            coordinates = []
            for key in increasing_tuples(len(self.index), m):
                for point in ordered(self.domain(key) - self.modulus.j_max):
                    coordinates.extend((key, point, k) for k in range(self.rank))
            positions = {c: i for i, c in enumerate(coordinates)}
            self._coordinates.setdefault(m, (coordinates, positions))
        return self._coordinates[m]

    def size(self, m):
        return len(self.coordinates(m)[0])

    def delta(self, m):
        if m not in self._deltas:
            source = self.coordinates(m)[1]
            target = self.coordinates(m + 1)[0]
            entries = []
            for row, (key, point, k) in enumerate(target):
                for i, face in faces(key):
                    entries.append(((row, source[(face, point, k)]), -1 if i % 2 else 1))
            matrix = IntegerMatrix.from_entries(len(target), len(source), entries, self.ring)
            self._deltas.setdefault(m, matrix)
            logger.debug('Family coboundary in dimension %d has shape %s', m, matrix.shape)
        return self._deltas[m]

    def form(self, m):
        if m not in self._forms:
            self._forms.setdefault(m, normal_form(self.delta(m)))
        return self._forms[m]

    def vector(self, family):
        '''
        The coordinates of ``family`` outside ``J_max``.
        '''
        zero = (0,) * self.rank
        return tuple(family.values.get(key, {}).get(point, zero)[k] for key, point, k in self.coordinates(family.n)[0])

    def family(self, m, vector):
        values = {}
        for (key, point, k), value in zip(self.coordinates(m)[0], vector):
            if value:
                entry = values.setdefault(key, {}).setdefault(point, [0] * self.rank)
                entry[k] = value
        return CoherentFamily(m, self.index, self.modulus, values, self.rank, self.ring)

    def coboundary(self, family):
        return self.family(family.n + 1, self.delta(family.n).apply(self.vector(family)))

    def is_coherent_vector(self, m, vector):
        return not any(self.delta(m).apply(vector))

    def trivialize_vector(self, m, vector):
        '''
        Some ``(m - 1)``-dimensional coordinates ``x`` with ``delta x`` equal
        to ``vector``, or None.
        '''
        return solve_integer_system(self.delta(m - 1), vector, form=self.form(m - 1))

    def quotient_system(self):
        '''
        The system of functions modulo ``J`` over the index, whose Roos
        cocycles correspond to coherent families.
        '''
        if self._quotient is None:
            self._quotient = build_ideal_systems(self.index, self.modulus, self.rank, self.ring).quot
        return self._quotient

    def restriction_to_chains(self, n):
        '''
        The cochain map from dimension ``n`` families to Roos degree ``n - 1``
        of the quotient system: a family is read off along chains.
        '''
        quot = self.quotient_system()
        poset = quot.poset
        positions = self.coordinates(n)[1]
        entries, row = [], 0
        for chain in poset.index_chains(n):
            sign, key = permutation_sign(chain)
            for point in ordered(self._points[chain[0]] - self.modulus.j_max):
                for k in range(self.rank):
                    entries.append(((row, positions[(key, point, k)]), sign))
                    row += 1
        return IntegerMatrix.from_entries(row, self.size(n), entries, self.ring)


##############################################################################
# Ideals and Index Sets


def build_ideal(ground, generators, warn=True):
    '''
    Validates and builds a set ideal.

    :raises GeneratorOutOfGround: if a generator is not a subset of ``ground``.
    :rtype: SetIdeal
    '''
    ground = frozenset(ground)
    for g in generators:
        extra = frozenset(g) - ground
        if extra:
            raise GeneratorOutOfGround(frozenset(g), extra)
    ideal = SetIdeal(ground, generators)
    if warn and ground and not ideal.proper:
        logger.warning('Ideal contains the whole ground set; every coherence condition is vacuous')
    return ideal


def akl_index(kappa, lam, max_poset=MAX_POSET):
    '''
    All functions from ``range(kappa)`` to subsets of ``range(lam)``, in
    canonical order (row ``i`` is digit ``i`` of the position in base
    ``2 ** lam``, bit ``j`` of a digit meaning ``j in f(i)``).

    :raises PosetCapExceeded: if there are more than ``max_poset`` functions.
    :rtype: list
    '''
    if kappa < 0 or lam < 0:
        raise DimensionMismatch(f'Invalid parameters kappa={kappa}, lambda={lam}')
    size = (1 << lam) ** kappa
    if size > max_poset:
        raise PosetCapExceeded(max_poset, size)
    functions = []
    for position in range(size):
        digits = vector_from_index(position, 1 << lam, kappa)
        functions.append(IndexedFunction([[j for j in range(lam) if d >> j & 1] for d in digits], lam))
    return functions


def product_ground(kappa, lam):
    return frozenset(itertools.product(range(kappa), range(lam)))


##############################################################################
# Coherence and Trivialization


def coherence_witness(family):
    '''
    Evaluates every coherence sum directly. Returns ``(tuple, point)`` for
    the first sum with support outside ``J_max``, or None.
    '''
    j_max = family.modulus.j_max
    zero = (0,) * family.rank
    for key in increasing_tuples(len(family.index), family.n + 1):
        for point in ordered(family.domain(key) - j_max):
            total = list(zero)
            for i, face in faces(key):
                value = family.lookup(face, point)
                for k in range(family.rank):
                    total[k] += -value[k] if i % 2 else value[k]
            if any(family.ring.reduce(t) for t in total):
                return key, point
    return None


def is_n_coherent(family):
    '''
    Whether a family of dimension ``n >= 1`` is ``n``-coherent modulo its ideal.

    :returns: ``(True, None)`` or ``(False, (tuple, point))`` where ``tuple``
        lists index elements.
    :rtype: tuple
    '''
    if family.n < 1:
        raise DimensionMismatch('Coherence is defined for families of dimension at least 1.')
    witness = coherence_witness(family)
    if witness is None:
        return True, None
    key, point = witness
    return False, (tuple(family.index[t] for t in key), point)


def is_trivialized_by(family, psi):
    '''
    Whether ``sum_i (-1)^i psi_{T minus T_i} - phi_T`` is supported in
    ``J_max`` for every ``n``-tuple ``T``, by direct evaluation.
    '''
    if psi.n != family.n - 1:
        raise DimensionMismatch('A trivialization has dimension one less than the family.',
                                expected=family.n - 1, actual=psi.n)
    j_max = family.modulus.j_max
    for key in increasing_tuples(len(family.index), family.n):
        for point in ordered(family.domain(key) - j_max):
            total = [-v for v in family.lookup(key, point)]
            for i, face in faces(key):
                value = psi.lookup(face, point)
                for k in range(family.rank):
                    total[k] += -value[k] if i % 2 else value[k]
            if any(family.ring.reduce(t) for t in total):
                return False
    return True


def find_trivialization(family, complex_=None):
    '''
    Searches for a trivialization of an ``n``-coherent family.

    The search is one exact linear system ``delta psi = phi`` on the
    coordinates outside ``J_max``; a solution is re-verified by direct
    evaluation. For ``n == 1`` the trivialization is a single function on
    the ground set (a dimension-0 family).

    :param complex_: a ``FamilyComplex`` for the same data whose cached
        normal forms should be reused.
    :type complex_: FamilyComplex
    :returns: the trivializing family, or None.
    :rtype: CoherentFamily
    :raises NotCoherent: if the family is not coherent.
    :raises VerificationError: if a solution fails re-verification.
    '''
    if family.n < 1:
        raise DimensionMismatch('Families have dimension at least 1.')
    witness = coherence_witness(family)
    if witness is not None:
        key, point = witness
        raise NotCoherent(tuple(label(family.index[t]) for t in key), point)
    fc = complex_ or FamilyComplex(family.index, family.modulus, family.rank, family.ring)
    solution = fc.trivialize_vector(family.n, fc.vector(family))
    if solution is None:
        logger.debug('No trivialization for a %d-dimensional family', family.n)
        return None
    psi = fc.family(family.n - 1, solution)
    if not is_trivialized_by(family, psi):
        raise VerificationError('Trivialization failed direct evaluation', n=family.n)
    return psi


##############################################################################
# Systems


def _index_poset(index):
    points = [points_of(x) for x in index]
    for a, b in itertools.combinations(range(len(index)), 2):
        if points[a] == points[b]:
            raise PosetError(f'Index elements {index[a]} and {index[b]} have the same points', (index[a], index[b]))
    relations = [(index[a], index[b]) for a in range(len(index)) for b in range(len(index))
                 if a != b and points[a] < points[b]]
    return build_poset(index, relations), points


def _restriction(rows, cols):
    # Matrix from coordinates ``cols`` onto the subset ``rows``.
    positions = {c: i for i, c in enumerate(cols)}
    return IntegerMatrix.from_entries(len(rows), len(cols), {(i, positions[c]): 1 for i, c in enumerate(rows)})


def build_ideal_systems(index, modulus, rank=1, coeff=ZZ):
    '''
    The short exact sequence ``X -> B -> Q`` over ``index`` ordered by
    inclusion: ``B`` has the functions on each set, ``X`` those supported in
    ``J_max`` and ``Q`` the functions on the coordinates outside ``J_max``.
    Transition maps are restrictions.

    :rtype: SesOfSystems
    '''
    ring = Ring.parse(coeff)
    poset, points = _index_poset(index)
    for x, p in zip(index, points):
        extra = p - modulus.ground
        if extra:
            raise GeneratorOutOfGround(p, extra)
    full = [[(y, k) for y in ordered(p) for k in range(rank)] for p in points]
    inside = [[c for c in coords if c[0] in modulus.j_max] for coords in full]
    outside = [[c for c in coords if c[0] not in modulus.j_max] for coords in full]

    def system(coordinates):
        maps = {}
        for a in range(len(index)):
            for b in poset.strictly_above(a):
                maps[(index[a], index[b])] = _restriction(coordinates[a], coordinates[b]).reduce(ring)
        return build_system(poset, [len(c) for c in coordinates], maps, ring)

    sub, mid, quot = system(inside), system(full), system(outside)
    inclusions = {x: _restriction(inside[a], full[a]).T.reduce(ring) for a, x in enumerate(index)}
    projections = {x: _restriction(outside[a], full[a]).reduce(ring) for a, x in enumerate(index)}
    logger.debug('Built ideal systems over %d sets', len(index))
    return build_ses(sub, mid, quot, inclusions, projections)


def build_X_system(index, modulus, rank=1, coeff=ZZ):
    '''
    The system of functions supported in the ideal, over ``index`` ordered
    by inclusion.

    :rtype: InverseSystem
    '''
    return build_ideal_systems(index, modulus, rank, coeff).sub


def build_akl_systems(kappa, lam, rank=1, coeff=ZZ, max_poset=MAX_POSET):
    '''
    ``A -> B -> B/A`` over all functions ``range(kappa) -> P(range(lam))``.
    With finite parameters every graph is finite, so ``A`` and ``B`` agree
    and the quotient vanishes.

    :raises PosetCapExceeded: if the poset would exceed ``max_poset``.
    :raises VerificationError: if the quotient is not zero.
    '''
    index = akl_index(kappa, lam, max_poset)
    ground = product_ground(kappa, lam)
    ses = build_ideal_systems(index, build_ideal(ground, [ground], warn=False), rank, coeff)
    if ses.quot.total_rank:
        raise VerificationError('Quotient of the finite A and B systems is not zero', kappa=kappa, lam=lam)
    return ses


def build_Y_system(kappa, ground, ideal, rank=1, coeff=ZZ):
    '''
    The system with terms ``ring^(rank * kappa * |U|)`` over the union
    closure of the ideal's generators, ordered by inclusion, with
    restriction maps; coordinates run over ``range(kappa) x U``.

    :rtype: InverseSystem
    '''
    ring = Ring.parse(coeff)
    ground = frozenset(ground)
    if not ideal.j_max <= ground:
        raise GeneratorOutOfGround(ideal.j_max, ideal.j_max - ground)
    closure = ideal.union_closure()
    relations = [(a, b) for a in closure for b in closure if a < b]
    poset = build_poset(closure, relations)
    coordinates = [[(i, u, k) for i in range(kappa) for u in ordered(U) for k in range(rank)] for U in closure]
    maps = {}
    for a, U in enumerate(closure):
        for b in poset.strictly_above(a):
            maps[(U, closure[b])] = _restriction(coordinates[a], coordinates[b]).reduce(ring)
    return build_system(poset, [len(c) for c in coordinates], maps, ring)


##############################################################################
# Families and Cocycles


def family_to_cocycle(family, complex_=None):
    '''
    Reads a family off along the chains of its index poset, giving a Roos
    cochain of degree ``n - 1`` of the quotient system. Coherent families
    give cocycles.

    :rtype: tuple
    '''
    fc = complex_ or FamilyComplex(family.index, family.modulus, family.rank, family.ring)
    return fc.restriction_to_chains(family.n).apply(fc.vector(family))


def cocycle_to_family(complex_, cocycle, n):
    '''
    A coherent family of dimension ``n`` whose chain restriction is
    cohomologous to ``cocycle`` (a Roos cocycle of degree ``n - 1`` of the
    quotient system).

    Solved as one block system in the family and a correcting cochain ``w``:
    ``delta phi = 0`` and ``R phi + d w = cocycle``.

    :type complex_: FamilyComplex
    :raises NotACocycle: if ``cocycle`` is not closed.
    :raises NotRepresentable: if no coherent family represents its class.
    :rtype: CoherentFamily
    '''
    fc = complex_
    if n < 1:
        raise DimensionMismatch('Families have dimension at least 1.')
    roos = roos_complex(fc.quotient_system(), n)
    cocycle = tuple(fc.ring.reduce(int(v)) for v in cocycle)
    if len(cocycle) != roos.rank_at(n - 1):
        raise DimensionMismatch('Cocycle has the wrong length.', expected=roos.rank_at(n - 1), actual=len(cocycle))
    if any(roos.differential_at(n - 1).apply(cocycle)):
        raise NotACocycle(n - 1)
    delta = fc.delta(n)
    restriction = fc.restriction_to_chains(n)
    d = roos.differential_at(n - 2)
    top = delta.hstack(IntegerMatrix.zeros(delta.rows, d.cols, fc.ring))
    block = top.vstack(restriction.hstack(d))
    solution = solve_integer_system(block, (0,) * delta.rows + cocycle)
    if solution is None:
        raise NotRepresentable(n - 1)
    family = fc.family(n, solution[:delta.cols])
    difference = [a - b for a, b in zip(restriction.apply(solution[:delta.cols]), cocycle)]
    if solve_integer_system(d, difference) is None:
        raise VerificationError('Family does not represent the cocycle class', n=n)
    return family


def extend_family(family, mu, nu):
    '''
    Extends a family over all functions ``range(kappa) -> P(range(lam))`` to
    one over ``range(mu) -> P(range(nu))``: ``psi`` at a tuple of functions
    is ``phi`` at their restrictions on the old graphs and zero elsewhere.

    :raises ParameterNotLarger: if ``mu < kappa`` or ``nu < lam``.
    :rtype: CoherentFamily
    '''
    if not family.index or not all(isinstance(f, IndexedFunction) for f in family.index):
        raise DimensionMismatch('Extension needs a family indexed by functions.')
    kappa, lam = family.index[0].kappa, family.index[0].width
    if list(family.index) != akl_index(kappa, lam):
        raise DimensionMismatch(f'Extension needs the full index of functions for kappa={kappa}, lambda={lam}')
    if mu < kappa:
        raise ParameterNotLarger('mu', kappa, mu)
    if nu < lam:
        raise ParameterNotLarger('nu', lam, nu)
    positions = {f: t for t, f in enumerate(family.index)}
    index = akl_index(mu, nu)
    modulus = SetIdeal(product_ground(mu, nu), family.modulus.generators)
    restricted = [positions[f.restrict(kappa, lam)] for f in index]
    values = {}
    for key in increasing_tuples(len(index), family.n):
        old = tuple(restricted[t] for t in key)
        sign, _ = permutation_sign(old)
        if not sign:
            continue
        domain = family.domain(old)
        entries = {p: family.lookup(old, p) for p in domain}
        entries = {p: v for p, v in entries.items() if any(v)}
        if entries:
            values[key] = entries
    return CoherentFamily(family.n, index, modulus, values, family.rank, family.ring)


##############################################################################
# Enumeration Oracle


def enumerate_families(complex_, n, start=0, stop=None, max_families=MAX_FAMILIES):
    '''
    Yields ``(position, vector)`` for every family of dimension ``n`` over a
    prime field, in the order of their base-``p`` positions.

    :raises FamilyCapExceeded: if there are more than ``max_families``.
    '''
    ring = complex_.ring
    if not ring.is_field:
        raise ValueError('Families can only be enumerated over a prime field.')
    size = complex_.size(n)
    total = ring.modulus ** size
    if total > max_families:
        raise FamilyCapExceeded(max_families, total)
    for position in range(start, total if stop is None else min(stop, total)):
        yield position, vector_from_index(position, ring.modulus, size)


def coboundary_image(complex_, n, max_families=MAX_FAMILIES):
    '''
    The set of all coboundaries of dimension ``n`` over a prime field, by
    applying ``delta`` to every family of dimension ``n - 1``.
    '''
    return {complex_.delta(n - 1).apply(v) for _, v in enumerate_families(complex_, n - 1, max_families=max_families)}


def _count_shard(complex_, n, window, image, max_families):
    coherent = trivial = 0
    for _, vector in enumerate_families(complex_, n, *window, max_families=max_families):
        if not complex_.is_coherent_vector(n, vector):
            continue
        coherent += 1
        found = find_trivialization(complex_.family(n, vector), complex_) is not None
        if image is not None and found != (vector in image):
            raise VerificationError('Trivialization search disagrees with enumeration', n=n, family=vector)
        trivial += found
    return coherent, trivial


def all_coherent_families_trivial(index, modulus, n, p, workers=1, shard=1024, max_families=MAX_FAMILIES):
    '''
    Enumerates every family of dimension ``n`` over ``Z/p`` and tries to
    trivialize each coherent one.

    When the families of dimension ``n - 1`` are few enough, every answer
    of the solver is checked against the enumerated set of coboundaries.
    The candidate space is split into windows of ``shard`` positions which
    may run on ``workers`` threads; the counts do not depend on the split.

    :raises FamilyCapExceeded: if there are more than ``max_families`` candidates.
    :raises VerificationError: if the solver and the enumeration disagree.
    :rtype: dict
    '''
    if n < 1:
        raise DimensionMismatch('Families have dimension at least 1.')
    fc = FamilyComplex(index, modulus, 1, Ring.parse(p))
    total = fc.ring.modulus ** fc.size(n)
    if total > max_families:
        raise FamilyCapExceeded(max_families, total)
    # Fill the shared caches before any thread reads them.
    fc.delta(n)
    fc.form(n - 1)
    image = None
    if fc.ring.modulus ** fc.size(n - 1) <= max_families:
        image = coboundary_image(fc, n, max_families)
    windows = list(batch(0, total, shard))
    if workers > 1 and len(windows) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            counts = list(executor.map(lambda w: _count_shard(fc, n, w, image, max_families), windows))
    else:
        counts = [_count_shard(fc, n, w, image, max_families) for w in windows]
    coherent = sum(c for c, _ in counts)
    trivial = sum(t for _, t in counts)
    logger.debug('Enumerated %d families of dimension %d', total, n)
    return {'families': total, 'coherent': coherent, 'trivial': trivial, 'all_trivial': coherent == trivial,
            'cross_checked': image is not None}


def lemma_instances(max_ground):
    '''
    Every ``(size, index, j_max, n)`` with ``index`` a list of at most three
    distinct nonempty subsets of ``range(size)``, ``j_max`` a proper subset
    and ``n`` in ``{1, 2}``, over grounds of size ``1 .. max_ground``.
    '''
    for size in range(1, max_ground + 1):
        ground = tuple(range(size))
        subsets = [frozenset(c) for r in range(1, size + 1) for c in itertools.combinations(ground, r)]
        for count in (1, 2, 3):
            for index in itertools.combinations(subsets, count):
                for r in range(size):
                    for j_max in itertools.combinations(ground, r):
                        for n in (1, 2):
                            yield size, index, frozenset(j_max), n


def lemma_equivalence(index, modulus, n, p, workers=1, max_families=MAX_FAMILIES):
    '''
    Compares ``lim^n X = 0`` with "every ``n``-coherent family is trivial"
    for one ideal system over ``Z/p``.

    :rtype: dict
    '''
    limit = derived_limit(build_X_system(index, modulus, 1, Ring.parse(p)), n)
    families = all_coherent_families_trivial(index, modulus, n, p, workers=workers, max_families=max_families)
    return dict(families, n=n, lim=str(limit), vanishes=limit.is_trivial,
                holds=limit.is_trivial == families['all_trivial'])


def random_coherent_family(rng, complex_, n, noise=True, trivial=True):
    '''
    A random ``n``-coherent family, plus random values on ``J_max`` when
    ``noise``.

    With ``trivial`` the family is the coboundary of a random family of
    dimension ``n - 1``, so it is always trivial. Otherwise it is a random
    combination of a kernel basis of ``delta(n)``, which samples every
    coherent family without solving for a trivialization.

    Over a finite ground set the complex is acyclic point by point, so both
    modes give trivial families; nontrivial coherent families need an
    infinite ground and are out of reach here.
    '''
    fc = complex_
    ring = fc.ring
    low, high = (0, ring.modulus) if ring.is_field else (-2, 3)
    if trivial:
        psi = [int(v) for v in rng.integers(low, high, size=fc.size(n - 1))] if fc.size(n - 1) else []
        phi = fc.coboundary(fc.family(n - 1, psi))
    else:
        kernel, _ = group_from_map(fc.delta(n))
        weights = [int(v) for v in rng.integers(low, high, size=kernel.cols)]
        phi = fc.family(n, kernel.apply(weights))
    if not noise or not fc.modulus.j_max:
        return phi
    values = {key: {p: list(v) for p, v in mapping.items()} for key, mapping in phi.values.items()}
    for key in increasing_tuples(len(fc.index), n):
        for point in ordered(fc.domain(key) & fc.modulus.j_max):
            vector = [int(v) for v in rng.integers(low, high, size=fc.rank)]
            if any(vector):
                values.setdefault(key, {})[point] = vector
    return CoherentFamily(n, fc.index, fc.modulus, values, fc.rank, ring)
