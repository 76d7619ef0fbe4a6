'''
Derived Limits: Inverse Systems

Finite posets, inverse systems of free modules over them, the Roos complex
and the derived limits it computes, flasqueness, cofinal restriction and the
long exact sequence of a short exact sequence of systems.
'''

import logging

from derivedlimits.complex import build_complex, cohomology_at
from derivedlimits.config import MAX_CHAINS, MAX_SUBSETS
from derivedlimits.errors import (
    ChainCapExceeded,
    DimensionMismatch,
    MissingTransitionMap,
    NotExactInput,
    NotFunctorial,
    PosetError,
    SubsetCapExceeded,
    VerificationError,
)
from derivedlimits.iterext import mask_members
from derivedlimits.zmodule import (
    FinAbGroup,
    IntegerMatrix,
    Ring,
    ZZ,
    group_from_map,
    invariant_factors,
    normal_form,
    rank,
    solve_integer_system,
)

logger = logging.getLogger(name=__name__)

__all__ = [
    'Poset', 'InverseSystem', 'SesOfSystems', 'FlasqueResult', 'LesReport',
    'build_poset', 'build_system', 'build_ses', 'roos_complex', 'derived_limit', 'derived_limits',
    'restrict_cofinal', 'is_flasque', 'les_of_ses', 'chain_map',
    'random_poset', 'random_system', 'random_flasque_system', 'random_directed_system',
]


##############################################################################
# Classes


class Poset:
    '''
    A finite partial order.

    Elements keep the order they were given in; that order fixes chain
    enumeration and hence every matrix layout downstream. The relation is
    stored as bitmasks: bit ``j`` of ``up_masks[i]`` is set when
    ``elements[i] <= elements[j]``.
    '''

    __slots__ = ['elements', 'index', 'up_masks', 'down_masks']

    def __init__(self, elements, up_masks):
        size = len(elements)
        down = [0] * size
        for i, mask in enumerate(up_masks):
            for j in range(size):
                if mask >> j & 1:
                    down[j] |= 1 << i
        object.__setattr__(self, 'elements', tuple(elements))
        object.__setattr__(self, 'index', {x: i for i, x in enumerate(elements)})
        object.__setattr__(self, 'up_masks', tuple(up_masks))
        object.__setattr__(self, 'down_masks', tuple(down))

    def __setattr__(self, key, value):
        raise TypeError('Poset objects are immutable.')

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self.index

    def __eq__(self, other):
        if not isinstance(other, Poset):
            return NotImplemented
        return self.elements == other.elements and self.up_masks == other.up_masks

    def __hash__(self):
        return hash((self.elements, self.up_masks))

    def __repr__(self):
        return f'{self.__class__.__qualname__}({list(self.elements)!r})'

    def _i(self, x):
        try:
            return self.index[x]
        except KeyError:
            raise PosetError(f'Unknown poset element: {x!r}', (x,)) from None

    def leq(self, x, y):
        return bool(self.up_masks[self._i(x)] >> self._i(y) & 1)

    def lt(self, x, y):
        return x != y and self.leq(x, y)

    def up(self, x):
        return mask_members(self.up_masks[self._i(x)], self.elements)

    def down(self, x):
        return mask_members(self.down_masks[self._i(x)], self.elements)

    def strictly_above(self, i):
        '''
        Indices strictly above index ``i``, ascending.
        '''
        mask = self.up_masks[i] & ~(1 << i)
        return [j for j in range(len(self.elements)) if mask >> j & 1]

    def covering_pairs(self):
        '''
        Index pairs ``(i, j)`` with ``i < j`` and nothing strictly between.
        '''
        pairs = []
        for i in range(len(self.elements)):
            above = self.strictly_above(i)
            for j in above:
                if not any(self.up_masks[k] >> j & 1 for k in above if k != j):
                    pairs.append((i, j))
        return pairs

    @property
    def maximum(self):
        '''
        The greatest element, or None.
        '''
        full = (1 << len(self.elements)) - 1
        for j, x in enumerate(self.elements):
            if self.down_masks[j] == full:
                return x
        return None

    def is_directed(self):
        '''
        Every pair has an upper bound. A finite poset is directed exactly when
        it is nonempty and has a maximum.
        '''
        return bool(self.elements) and self.maximum is not None

    def is_down_set(self, subset):
        mask = self.mask(subset)
        return all(self.down_masks[i] & ~mask == 0 for i in range(len(self.elements)) if mask >> i & 1)

    def is_cofinal(self, subset):
        mask = self.mask(subset)
        return all(up & mask for up in self.up_masks)

    def mask(self, subset):
        mask = 0
        for x in subset:
            mask |= 1 << self._i(x)
        return mask

    def subposet(self, subset):
        '''
        The induced order on ``subset``, in poset order.
        '''
        mask = self.mask(subset)
        keep = [i for i in range(len(self.elements)) if mask >> i & 1]
        masks = []
        for i in keep:
            masks.append(sum(1 << a for a, j in enumerate(keep) if self.up_masks[i] >> j & 1))
        return Poset([self.elements[i] for i in keep], masks)

    def index_chains(self, length, weak=False):
        '''
        All chains of ``length`` indices, strictly increasing (or weakly when
        ``weak``), in lexicographic order.
        '''
        if length <= 0:
            return [()]
        if weak:
            nexts = [[j for j in range(len(self.elements)) if self.up_masks[i] >> j & 1]
                     for i in range(len(self.elements))]
        else:
            nexts = [self.strictly_above(i) for i in range(len(self.elements))]
        chains = [(i,) for i in range(len(self.elements))]
        for _ in range(length - 1):
            chains = [c + (j,) for c in chains for j in nexts[c[-1]]]
        return chains

    def chains(self, n):
        '''
        Strictly increasing chains ``x0 < ... < xn`` as element tuples.
        '''
        return [tuple(self.elements[i] for i in c) for c in self.index_chains(n + 1)]

    def chain_counts(self, top, weak=False):
        '''
        The number of chains with ``n + 1`` elements for ``n = 0 .. top``,
        weighted by nothing; counted without enumerating.
        '''
        return [sum(w) for w in self._chain_weights(top, [1] * len(self.elements), weak)]

    def _chain_weights(self, top, weights, weak):
        # weights[i] summed over chains starting at i, per chain length.
        size = len(self.elements)
        if weak:
            nexts = [[j for j in range(size) if self.up_masks[i] >> j & 1] for i in range(size)]
        else:
            nexts = [self.strictly_above(i) for i in range(size)]
        counts = [1] * size
        result = [[weights[i] * counts[i] for i in range(size)]]
        for _ in range(top):
            counts = [sum(counts[j] for j in nexts[i]) for i in range(size)]
            result.append([weights[i] * counts[i] for i in range(size)])
        return result

    @property
    def height(self):
        '''
        The number of elements of a longest chain.
        '''
        size = len(self.elements)
        longest = [1] * size
        # Elements may be listed in any order, so relax until stable.
        changed = True
        while changed:
            changed = False
            for i in range(size):
                best = max([longest[j] + 1 for j in self.strictly_above(i)], default=1)
                if best > longest[i]:
                    longest[i], changed = best, True
        return max(longest, default=0)

    def down_sets(self, max_subsets=MAX_SUBSETS):
        '''
        Yields every downward closed subset as an element tuple, in ascending
        bitmask order (the empty set first).

        :raises SubsetCapExceeded: if ``2 ** len(self)`` exceeds ``max_subsets``.
        '''
        needed = 1 << len(self.elements)
        if needed > max_subsets:
            raise SubsetCapExceeded(max_subsets, needed)
        size = len(self.elements)
        for mask in range(needed):
            if all(self.down_masks[i] & ~mask == 0 for i in range(size) if mask >> i & 1):
                yield mask_members(mask, self.elements)


class InverseSystem:
    '''
    A contravariant functor from a finite poset to free modules.

    ``ranks[i]`` is the rank of the term at ``poset.elements[i]`` and
    ``maps[(i, j)]`` for ``i < j`` is the transition map from the term at
    ``j`` to the term at ``i``. Reflexive pairs are identities; pairs with a
    zero-rank end are implicit zero maps.
    '''

    __slots__ = ['poset', 'ranks', 'maps', 'ring']

    def __init__(self, poset, ranks, maps, ring=ZZ):
        object.__setattr__(self, 'poset', poset)
        object.__setattr__(self, 'ranks', tuple(ranks))
        object.__setattr__(self, 'maps', dict(maps))
        object.__setattr__(self, 'ring', ring)

    def __setattr__(self, key, value):
        raise TypeError('InverseSystem objects are immutable.')

    def __repr__(self):
        name = self.__class__.__qualname__
        return f'{name}({len(self.poset)} elements, ranks={self.ranks!r}, ring={str(self.ring)!r})'

    @property
    def term_labels(self):
        return [str(x) for x in self.poset.elements]

    def term_rank(self, x):
        return self.ranks[self.poset._i(x)]

    def map_for(self, x, y):
        '''
        The transition map ``term(y) -> term(x)`` for ``x <= y``.
        '''
        i, j = self.poset._i(x), self.poset._i(y)
        if not self.poset.up_masks[i] >> j & 1:
            raise PosetError(f'{x!r} is not below {y!r}', (x, y))
        return self._map(i, j)

    def _map(self, i, j):
        if i == j:
            return IntegerMatrix.identity(self.ranks[i], self.ring)
        found = self.maps.get((i, j))
        if found is None:
            return IntegerMatrix.zeros(self.ranks[i], self.ranks[j], self.ring)
        return found

    @property
    def total_rank(self):
        return sum(self.ranks)

    def total_roos_rank(self, nmax):
        '''
        Sum of the Roos complex ranks in degrees ``0 .. nmax + 1``, the size
        of the complex needed for ``lim^0 .. lim^nmax``.
        '''
        weights = self.poset._chain_weights(nmax + 1, list(self.ranks), weak=False)
        return sum(sum(w) for w in weights)

    def offsets(self):
        offsets, total = [], 0
        for r in self.ranks:
            offsets.append(total)
            total += r
        return offsets

    def compatibility_matrix(self):
        '''
        The map ``s -> (p_xy s_y - s_x)`` over covering pairs, whose kernel is
        the module of compatible families.
        '''
        offsets = self.offsets()
        entries, row = [], 0
        for i, j in self.poset.covering_pairs():
            if not self.ranks[i]:
                continue
            p = self._map(i, j)
            for a in range(self.ranks[i]):
                entries.append(((row + a, offsets[i] + a), -1))
                for b in range(self.ranks[j]):
                    if p[a, b]:
                        entries.append(((row + a, offsets[j] + b), p[a, b]))
            row += self.ranks[i]
        return IntegerMatrix.from_entries(row, self.total_rank, entries, self.ring)

    def limit_kernel(self):
        '''
        A basis (as columns) of ``lim`` inside the product of all terms.
        '''
        return group_from_map(self.compatibility_matrix())[0]

    def restrict(self, subset):
        '''
        The system over the induced subposet on ``subset``.
        '''
        sub = self.poset.subposet(subset)
        keep = [self.poset.index[x] for x in sub.elements]
        maps = {}
        for a, i in enumerate(keep):
            for b, j in enumerate(keep):
                if (i, j) in self.maps:
                    maps[(a, b)] = self.maps[(i, j)]
        return InverseSystem(sub, [self.ranks[i] for i in keep], maps, self.ring)

    def reduce(self, ring):
        '''
        The system tensored with Z/p.
        '''
        ring = Ring.parse(ring)
        return InverseSystem(self.poset, self.ranks, {k: m.reduce(ring) for k, m in self.maps.items()}, ring)


class SesOfSystems:
    '''
    ``0 -> sub -> mid -> quot -> 0`` over one poset, with the per-element
    inclusion and projection matrices indexed like the poset elements.
    '''

    __slots__ = ['sub', 'mid', 'quot', 'inclusions', 'projections']

    def __init__(self, sub, mid, quot, inclusions, projections):
        for key, value in (('sub', sub), ('mid', mid), ('quot', quot),
                           ('inclusions', tuple(inclusions)), ('projections', tuple(projections))):
            object.__setattr__(self, key, value)

    def __setattr__(self, key, value):
        raise TypeError('SesOfSystems objects are immutable.')

    @property
    def poset(self):
        return self.mid.poset

    @property
    def ring(self):
        return self.mid.ring


class FlasqueResult:
    '''
    Outcome of a flasqueness check. ``witness`` is a down-set on which the
    restriction of limits fails to be surjective.
    '''

    __slots__ = ['flasque', 'witness', 'checked']

    def __init__(self, flasque, witness=None, checked=0):
        object.__setattr__(self, 'flasque', flasque)
        object.__setattr__(self, 'witness', witness)
        object.__setattr__(self, 'checked', checked)

    def __setattr__(self, key, value):
        raise TypeError('FlasqueResult objects are immutable.')

    def __bool__(self):
        return self.flasque

    def __repr__(self):
        return f'{self.__class__.__qualname__}({self.flasque}, witness={self.witness!r}, checked={self.checked})'


class LesReport(dict):
    '''
    The long exact sequence of derived limits as a plain dictionary:
    ``groups``, ``connecting``, ``exactness`` and ``flasque_middle``.
    '''

    @property
    def exact(self):
        return all(node['exact'] for node in self['exactness'])


##############################################################################
# Poset and System Builders


def build_poset(elements, relations=()):
    '''
    Builds a poset from elements and generating pairs ``(x, y)`` meaning
    ``x <= y``; the reflexive transitive closure is taken.

    :raises PosetError: for duplicate or unknown elements and for cycles.
    :rtype: Poset
    '''
    elements = list(elements)
    index = {}
    for i, x in enumerate(elements):
        if x in index:
            raise PosetError(f'Duplicate poset element: {x!r}', (x,))
        index[x] = i
    size = len(elements)
    up = [1 << i for i in range(size)]
    for pair in relations:
        try:
            x, y = pair
        except (TypeError, ValueError):
            raise PosetError(f'Relations must be pairs, got {pair!r}') from None
        for z in (x, y):
            if z not in index:
                raise PosetError(f'Relation mentions unknown element {z!r}', (z,))
        up[index[x]] |= 1 << index[y]
    # Warshall's closure on bitmasks.
    for k in range(size):
        for i in range(size):
            if up[i] >> k & 1:
                up[i] |= up[k]
    for i in range(size):
        for j in range(i + 1, size):
            if up[i] >> j & 1 and up[j] >> i & 1:
                raise PosetError(f'Relations contain a cycle through {elements[i]!r} and {elements[j]!r}',
                                 (elements[i], elements[j]))
    logger.debug('Built poset with %d elements', size)
    return Poset(elements, up)


def _as_matrix(value, rows, cols, ring, where):
    if not isinstance(value, IntegerMatrix):
        value = IntegerMatrix.from_rows(value, ring, cols=cols) if value else IntegerMatrix.zeros(rows, cols, ring)
    elif value.ring != ring:
        value = value.reduce(ring)
    if value.shape != (rows, cols):
        raise DimensionMismatch(f'Map {where} has shape {value.shape}, expected {(rows, cols)}',
                                expected=(rows, cols), actual=value.shape)
    return value


def build_system(poset, ranks, maps=None, coeff=ZZ):
    '''
    Validates and builds an inverse system.

    Maps not given are derived by composing along a chain through an
    intermediate element; maps touching a zero-rank term are zero.

    :param poset: the index poset.
    :type poset: Poset
    :param ranks: the free rank of each term, keyed by element (or a
        sequence in poset order).
    :param maps: ``(x, y) -> matrix`` for ``x < y``, each a
        ``rank(x) x rank(y)`` matrix (``IntegerMatrix`` or row-major lists).
    :type maps: dict
    :param coeff: coefficient ring.
    :raises MissingTransitionMap: if a covering pair between nonzero terms has no map.
    :raises NotFunctorial: naming the first triple ``x <= y <= z`` that does not compose.
    :raises DimensionMismatch: if a map does not fit its terms.
    :rtype: InverseSystem
    '''
    ring = Ring.parse(coeff)
    elements = poset.elements
    if hasattr(ranks, 'items'):
        missing = [x for x in elements if x not in ranks]
        if missing:
            raise DimensionMismatch(f'No rank given for {missing[0]!r}')
        ranks = [int(ranks[x]) for x in elements]
    else:
        ranks = [int(r) for r in ranks]
        if len(ranks) != len(elements):
            raise DimensionMismatch('One rank per poset element is required.',
                                    expected=len(elements), actual=len(ranks))
    if any(r < 0 for r in ranks):
        raise DimensionMismatch(f'Ranks must be non-negative: {ranks}')

    given = {}
    for (x, y), value in (maps or {}).items():
        i, j = poset._i(x), poset._i(y)
        if i == j or not poset.up_masks[i] >> j & 1:
            raise PosetError(f'Map given for {x!r}, {y!r} which is not a strict relation', (x, y))
        given[(i, j)] = _as_matrix(value, ranks[i], ranks[j], ring, f'{x}<={y}')

    size = len(elements)
    between = {}
    pairs = []
    for i in range(size):
        for j in poset.strictly_above(i):
            mid = [k for k in poset.strictly_above(i) if k != j and poset.up_masks[k] >> j & 1]
            between[(i, j)] = mid
            pairs.append((len(mid), i, j))
    derived = dict(given)
    for _, i, j in sorted(pairs):
        if (i, j) in derived or not ranks[i] or not ranks[j]:
            continue
        mid = [k for k in between[(i, j)] if (i, k) in derived and (k, j) in derived]
        if not between[(i, j)]:
            raise MissingTransitionMap(elements[i], elements[j])
        if mid:
            derived[(i, j)] = derived[(i, mid[0])] @ derived[(mid[0], j)]
        else:
            # Every intermediate path crosses a zero-rank term.
            derived[(i, j)] = IntegerMatrix.zeros(ranks[i], ranks[j], ring)
    maps = {k: m for k, m in derived.items() if ranks[k[0]] and ranks[k[1]]}
    system = InverseSystem(poset, ranks, maps, ring)

    for i in range(size):
        for j in poset.strictly_above(i):
            for k in poset.strictly_above(j):
                if system._map(i, j) @ system._map(j, k) != system._map(i, k):
                    raise NotFunctorial(elements[i], elements[j], elements[k])
    logger.debug('Built system over %d elements with total rank %d', size, sum(ranks))
    return system


##############################################################################
# Roos Complex and Derived Limits


def roos_complex(s, nmax=None, normalized=True, max_chains=MAX_CHAINS):
    '''
    The Roos complex of an inverse system.

    Degree ``n`` is the product of ``term(x0)`` over chains
    ``x0 < ... < xn`` and the differential is
    ``(ds)_{x0..x(n+1)} = p_{x0 x1} s_{x1..} + sum_{i>=1} (-1)^i s_{..^xi..}``.
    The unnormalised complex runs over weakly increasing tuples instead.

    :param nmax: build degrees ``0 .. nmax + 1`` only, which suffices for
        ``lim^0 .. lim^nmax``; by default the whole (normalised) complex.
    :type nmax: int
    :param normalized: strictly increasing chains when True.
    :param max_chains: the chain count cap.
    :raises ChainCapExceeded: if more chains than ``max_chains`` are needed.
    :rtype: CochainComplex
    '''
    poset = s.poset
    if nmax is None:
        if not normalized:
            raise ValueError('The unnormalised Roos complex is infinite; give nmax.')
        top = max(poset.height - 1, 0)
    else:
        top = nmax + 1
    counts = poset.chain_counts(top, weak=not normalized)
    needed = sum(counts)
    if needed > max_chains:
        raise ChainCapExceeded(max_chains, needed)

    chains = [poset.index_chains(n + 1, weak=not normalized) for n in range(top + 1)]
    ranks, layouts = [], []
    for level in chains:
        layout, total = {}, 0
        for c in level:
            layout[c] = total
            total += s.ranks[c[0]]
        layouts.append(layout)
        ranks.append(total)

    differentials = []
    for n in range(top):
        entries = []
        source = layouts[n]
        for c, row in layouts[n + 1].items():
            r0 = s.ranks[c[0]]
            if not r0:
                continue
            face = c[1:]
            if s.ranks[face[0]]:
                p = s._map(c[0], c[1])
                col = source[face]
                for a in range(r0):
                    for b in range(s.ranks[face[0]]):
                        if p[a, b]:
                            entries.append(((row + a, col + b), p[a, b]))
            for i in range(1, len(c)):
                col = source[c[:i] + c[i + 1:]]
                sign = -1 if i % 2 else 1
                for a in range(r0):
                    entries.append(((row + a, col + a), sign))
        differentials.append(IntegerMatrix.from_entries(ranks[n + 1], ranks[n], entries, s.ring))
    logger.debug('Built Roos complex', extra={'chains': needed, 'ranks': ranks})
    return build_complex(ranks, differentials, s.ring)


def _check_directed(s):
    if not s.poset.is_directed():
        logger.warning('Poset with %d elements is not directed; results are outside the directed setting',
                       len(s.poset))
        return False
    return True


def derived_limits(s, nmax, max_chains=MAX_CHAINS):
    '''
    ``lim^0 .. lim^nmax`` from one Roos complex.

    ``lim^0`` is cross-checked against the module of compatible families.

    :rtype: dict
    :raises VerificationError: if the two computations of ``lim^0`` disagree.
    '''
    _check_directed(s)
    c = roos_complex(s, nmax, max_chains=max_chains)
    groups = {n: cohomology_at(c, n) for n in range(nmax + 1)}
    kernel = s.limit_kernel()
    direct = FinAbGroup(kernel.cols, ring=s.ring)
    if groups[0] != direct:
        raise VerificationError('lim^0 disagrees with the compatible families',
                                roos=str(groups[0]), direct=str(direct))
    return groups


def derived_limit(s, n, max_chains=MAX_CHAINS):
    '''
    ``lim^n`` of an inverse system as the ``n``-th cohomology of its Roos complex.

    :type s: InverseSystem
    :type n: int
    :rtype: FinAbGroup
    '''
    return derived_limits(s, n, max_chains=max_chains)[n]


def restrict_cofinal(s, subset):
    '''
    Restricts a system to ``subset``. When the poset is directed and the
    subset cofinal, derived limits are unchanged.
    '''
    subset = list(subset)
    for x in subset:
        s.poset._i(x)
    if not s.poset.is_cofinal(subset):
        logger.warning('Restricting to a subset that is not cofinal')
    return s.restrict(subset)


def _coordinates(basis, vectors, what):
    # Writes each vector in the given column basis.
    form = normal_form(basis)
    columns = []
    for v in vectors:
        y = solve_integer_system(basis, v, form=form)
        if y is None:
            raise VerificationError(f'{what} is not in the span of the basis')
        columns.append(y)
    return IntegerMatrix.from_columns(columns, basis.cols, basis.ring)


def _restriction_surjective(s, kernel, down_set):
    sub = s.restrict(down_set)
    local = sub.limit_kernel()
    if not local.cols:
        return True
    offsets = s.offsets()
    keep = []
    for x in sub.poset.elements:
        i = s.poset.index[x]
        keep.extend(range(offsets[i], offsets[i] + s.ranks[i]))
    restricted = kernel.submatrix(keep, None)
    coordinates = _coordinates(local, [restricted.column(j) for j in range(restricted.cols)],
                               'Restricted compatible family')
    return group_from_map(coordinates)[1].is_trivial


def is_flasque(s, max_subsets=MAX_SUBSETS, down_sets=None):
    '''
    Whether ``lim s -> lim s|D`` is onto for every down-set ``D``.

    Surjectivity is decided exactly: the global compatible families are
    written in a basis of the local ones and the cokernel must vanish.

    :param down_sets: an explicit family of down-sets to check instead of
        all of them, for posets too large to enumerate.
    :raises SubsetCapExceeded: when enumerating all subsets would exceed
        ``max_subsets``.
    :rtype: FlasqueResult
    '''
    if down_sets is None:
        candidates = s.poset.down_sets(max_subsets)
    else:
        candidates = [tuple(d) for d in down_sets]
        for d in candidates:
            if not s.poset.is_down_set(d):
                raise PosetError(f'{list(d)!r} is not a down-set', d)
    kernel = s.limit_kernel()
    checked = 0
    for d in candidates:
        if not d:
            continue
        checked += 1
        if not _restriction_surjective(s, kernel, d):
            logger.debug('Restriction to %s is not onto', list(map(str, d)))
            return FlasqueResult(False, d, checked)
    return FlasqueResult(True, None, checked)


##############################################################################
# Short Exact Sequences


def _is_onto(m):
    if m.ring.is_field:
        return rank(m) == m.rows
    factors = invariant_factors(m)
    return sum(1 for x in factors if x) == m.rows and all(x in (0, 1) for x in factors)


def build_ses(sub, mid, quot, inclusions, projections):
    '''
    Validates ``0 -> sub -> mid -> quot -> 0``.

    :param inclusions: element -> matrix ``term_sub(x) -> term_mid(x)``.
    :param projections: element -> matrix ``term_mid(x) -> term_quot(x)``.
    :raises NotExactInput: naming the element where exactness or a
        commuting square fails.
    :rtype: SesOfSystems
    '''
    poset = mid.poset
    if sub.poset != poset or quot.poset != poset:
        raise NotExactInput(None, 'the three systems must share one poset')
    if len({sub.ring, mid.ring, quot.ring}) != 1:
        raise NotExactInput(None, 'the three systems must share one ring')
    ring = mid.ring
    incl, proj = [], []
    for i, x in enumerate(poset.elements):
        f = _as_matrix(inclusions.get(x, []), mid.ranks[i], sub.ranks[i], ring, f'inclusion at {x}')
        g = _as_matrix(projections.get(x, []), quot.ranks[i], mid.ranks[i], ring, f'projection at {x}')
        if rank(f) != f.cols:
            raise NotExactInput(x, 'inclusion is not injective')
        if not _is_onto(g):
            raise NotExactInput(x, 'projection is not surjective')
        if not (g @ f).is_zero():
            raise NotExactInput(x, 'projection does not vanish on the image of the inclusion')
        kernel = group_from_map(g)[0]
        form = normal_form(f)
        for j in range(kernel.cols):
            if solve_integer_system(f, kernel.column(j), form=form) is None:
                raise NotExactInput(x, 'kernel of the projection is larger than the image of the inclusion')
        incl.append(f)
        proj.append(g)
    for i in range(len(poset)):
        for j in poset.strictly_above(i):
            x = poset.elements[i]
            if incl[i] @ sub._map(i, j) != mid._map(i, j) @ incl[j]:
                raise NotExactInput(x, f'inclusion square with {poset.elements[j]} does not commute')
            if proj[i] @ mid._map(i, j) != quot._map(i, j) @ proj[j]:
                raise NotExactInput(x, f'projection square with {poset.elements[j]} does not commute')
    return SesOfSystems(sub, mid, quot, incl, proj)


def chain_map(s, t, blocks, n, normalized=True):
    '''
    The degree ``n`` cochain map between Roos complexes induced by
    per-element maps ``term_s(x) -> term_t(x)``: block diagonal over chains,
    using the block at the chain's least element.
    '''
    chains = s.poset.index_chains(n + 1, weak=not normalized)
    entries, row, col = [], 0, 0
    for c in chains:
        m = blocks[c[0]]
        for a in range(m.rows):
            for b in range(m.cols):
                if m[a, b]:
                    entries.append(((row + a, col + b), m[a, b]))
        row += t.ranks[c[0]]
        col += s.ranks[c[0]]
    return IntegerMatrix.from_entries(row, col, entries, s.ring)


class _Node:
    # One group H^n(C) in the sequence: cocycle basis and incoming coboundaries.

    def __init__(self, name, n, c):
        self.name = name
        self.degree = n
        self.cocycles = group_from_map(c.differential_at(n))[0]
        self.coboundaries = c.differential_at(n - 1)
        self.group = cohomology_at(c, n)
        self.incoming = None
        self.outgoing = None


def _is_coboundary(node, v):
    return solve_integer_system(node.coboundaries, v) is not None


def _check_exact(node, after):
    '''
    ``ker(outgoing) == im(incoming)`` at ``node``; ``after`` is the node the
    outgoing map lands in.
    '''
    ring = node.cocycles.ring
    incoming = node.incoming
    if incoming is None:
        incoming = IntegerMatrix.zeros(node.cocycles.rows, 0, ring)
    form = normal_form(node.cocycles)
    # im in ker
    for j in range(incoming.cols):
        y = solve_integer_system(node.cocycles, incoming.column(j), form=form)
        if y is None:
            raise VerificationError(f'Incoming map at {node.name}^{node.degree} misses the cocycles')
        if not _is_coboundary(after, node.outgoing.apply(y)):
            return False
    # ker in im
    block = node.outgoing.hstack(-after.coboundaries)
    kernel = group_from_map(block)[0]
    kernel_coordinates = kernel.submatrix(range(node.cocycles.cols), None)
    target = incoming.hstack(node.coboundaries)
    target_form = normal_form(target)
    for j in range(kernel_coordinates.cols):
        v = node.cocycles.apply(kernel_coordinates.column(j))
        if solve_integer_system(target, v, form=target_form) is None:
            return False
    return True


def les_of_ses(x, nmax, max_chains=MAX_CHAINS, max_subsets=MAX_SUBSETS):
    '''
    The long exact sequence of derived limits of a short exact sequence of
    systems, verified exactly at every node up to ``lim^nmax``.

    Connecting maps follow the zig-zag: lift a cocycle of ``quot`` through the
    projection, apply the differential of ``mid`` and pull back through the
    inclusion. When ``mid`` is flasque the report also checks
    ``lim^1 sub = coker(lim mid -> lim quot)`` and
    ``lim^n sub = lim^(n-1) quot`` for ``n >= 2``.

    :type x: SesOfSystems
    :rtype: LesReport
    :raises VerificationError: if exactness fails anywhere.
    '''
    _check_directed(x.mid)
    complexes = {name: roos_complex(getattr(x, name), nmax, max_chains=max_chains) for name in ('sub', 'mid', 'quot')}
    sequence = []
    for n in range(nmax + 1):
        for name in ('sub', 'mid', 'quot'):
            sequence.append(_Node(name, n, complexes[name]))
    blocks_f = dict(enumerate(x.inclusions))
    blocks_g = dict(enumerate(x.projections))

    connecting = []
    for n in range(nmax + 1):
        sub, mid, quot = sequence[3 * n:3 * n + 3]
        f_n = chain_map(x.sub, x.mid, blocks_f, n)
        g_n = chain_map(x.mid, x.quot, blocks_g, n)
        sub.outgoing = f_n @ sub.cocycles
        mid.incoming = sub.outgoing
        mid.outgoing = g_n @ mid.cocycles
        quot.incoming = mid.outgoing
        # Connecting map on the cocycle basis of quot^n.
        f_next = chain_map(x.sub, x.mid, blocks_f, n + 1)
        d_mid = complexes['mid'].differential_at(n)
        g_form, f_form = normal_form(g_n), normal_form(f_next)
        columns = []
        for j in range(quot.cocycles.cols):
            lift = solve_integer_system(g_n, quot.cocycles.column(j), form=g_form)
            if lift is None:
                raise VerificationError('Projection of cochains is not onto', degree=n)
            pulled = solve_integer_system(f_next, d_mid.apply(lift), form=f_form)
            if pulled is None:
                raise VerificationError('Connecting map does not land in sub', degree=n)
            columns.append(pulled)
        delta = IntegerMatrix.from_columns(columns, f_next.cols, x.ring)
        quot.outgoing = delta
        if 3 * n + 3 < len(sequence):
            sequence[3 * n + 3].incoming = delta
        connecting.append({
            'degree': n,
            'matrix': delta.to_list(),
            'zero': all(solve_integer_system(complexes['sub'].differential_at(n), delta.column(j)) is not None
                        for j in range(delta.cols)),
        })

    exactness = []
    for k, node in enumerate(sequence):
        after = sequence[k + 1] if k + 1 < len(sequence) else None
        if after is None:
            # quot^nmax: the connecting map lands in degree nmax + 1 of sub.
            after = _Node('sub', nmax + 1, roos_complex(x.sub, nmax + 1, max_chains=max_chains))
        exact = _check_exact(node, after)
        exactness.append({'node': f'{node.name}^{node.degree}', 'exact': exact})
        if not exact:
            raise VerificationError(f'Long exact sequence fails at {node.name}^{node.degree}')

    groups = {n: {name: sequence[3 * n + k].group for k, name in enumerate(('sub', 'mid', 'quot'))}
              for n in range(nmax + 1)}
    report = LesReport(groups=groups, connecting=connecting, exactness=exactness,
                       flasque_middle=_flasque_middle(x, sequence, nmax, max_subsets))
    logger.debug('Long exact sequence verified at %d nodes', len(exactness))
    return report


def _flasque_middle(x, sequence, nmax, max_subsets):
    try:
        flasque = bool(is_flasque(x.mid, max_subsets=max_subsets))
    except SubsetCapExceeded:
        logger.warning('Middle system too large to test flasqueness')
        return {'flasque': None, 'identities': []}
    if not flasque:
        return {'flasque': False, 'identities': []}
    identities = []
    if nmax >= 1:
        mid0, quot0 = sequence[1], sequence[2]
        images = (mid0.outgoing.column(j) for j in range(mid0.outgoing.cols))
        coordinates = _coordinates(quot0.cocycles, images, 'Image of lim mid')
        cokernel = group_from_map(coordinates)[1]
        sub1 = sequence[3].group
        identities.append({'identity': 'lim^1 sub = coker(lim mid -> lim quot)',
                           'left': str(sub1), 'right': str(cokernel), 'holds': sub1 == cokernel})
    for n in range(2, nmax + 1):
        left, right = sequence[3 * n].group, sequence[3 * (n - 1) + 2].group
        identities.append({'identity': f'lim^{n} sub = lim^{n - 1} quot',
                           'left': str(left), 'right': str(right), 'holds': left == right})
    for identity in identities:
        if not identity['holds']:
            raise VerificationError(f'Flasque middle identity fails: {identity["identity"]}',
                                    left=identity['left'], right=identity['right'])
    return {'flasque': True, 'identities': identities}


##############################################################################
# Random Systems


def random_poset(rng, size, density=0.4, prefix='x'):
    '''
    A random poset on ``size`` elements whose relations respect index order.
    '''
    elements = [f'{prefix}{i}' for i in range(size)]
    relations = [(elements[i], elements[j]) for i in range(size) for j in range(i + 1, size) if rng.random() < density]
    return build_poset(elements, relations)


def _unimodular(rng, size, steps=None):
    # A random product of elementary matrices and its exact inverse.
    m = IntegerMatrix.identity(size).array()
    inverse = IntegerMatrix.identity(size).array()
    for _ in range(steps if steps is not None else 2 * size):
        if size < 2:
            break
        i, j = (int(v) for v in rng.choice(size, 2, replace=False))
        k = int(rng.integers(-2, 3))
        m[:, j] += k * m[:, i]
        inverse[i, :] -= k * inverse[j, :]
    return IntegerMatrix(m), IntegerMatrix(inverse)


def _summand_system(poset, summands, ring, rng=None):
    '''
    A direct sum of rank-one systems, each supported on an up-set with
    transition maps ``x <- y`` multiplying by ``weight(y) / weight(x)``,
    optionally twisted by random unimodular base changes per element.
    '''
    size = len(poset)
    ranks = [sum(1 for up, _ in summands if up >> i & 1) for i in range(size)]
    positions = [{} for _ in range(size)]
    for i in range(size):
        for k, (up, _) in enumerate(summands):
            if up >> i & 1:
                positions[i][k] = len(positions[i])
    maps = {}
    for i in range(size):
        for j in poset.strictly_above(i):
            if not ranks[i] or not ranks[j]:
                continue
            entries = {}
            for k, (up, weights) in enumerate(summands):
                if up >> i & 1:
                    entries[(positions[i][k], positions[j][k])] = weights[j] // weights[i]
            maps[(i, j)] = IntegerMatrix.from_entries(ranks[i], ranks[j], entries, ring)
    if rng is not None:
        changes = [_unimodular(rng, r) for r in ranks]
        maps = {(i, j): (changes[i][0].reduce(ring) @ m @ changes[j][1].reduce(ring)) for (i, j), m in maps.items()}
    system = InverseSystem(poset, ranks, maps, ring)
    return build_system(poset, ranks, {(poset.elements[i], poset.elements[j]): m for (i, j), m in system.maps.items()},
                        ring)


def _weights(rng, poset, factors):
    # weight(x) = product of factors over the elements below x, so
    # x <= y implies weight(x) divides weight(y).
    base = [int(rng.choice(factors)) for _ in range(len(poset))]
    weights = []
    for j in range(len(poset)):
        w = 1
        for i in range(len(poset)):
            if poset.down_masks[j] >> i & 1:
                w *= base[i]
        weights.append(w)
    return weights


def random_system(rng, poset=None, size=4, summands=3, coeff=ZZ, torsion=True, twist=True):
    '''
    A random inverse system: a sum of rank-one pieces on random up-sets.

    With ``torsion`` the transition maps carry divisibility weights, which
    produces torsion in the derived limits. With ``twist`` every term gets a
    random unimodular change of basis.

    :param rng: a numpy random generator.
    :type rng: numpy.random.Generator
    :rtype: InverseSystem
    '''
    ring = Ring.parse(coeff)
    poset = poset or random_poset(rng, size)
    pieces = []
    for _ in range(summands):
        up = 0
        for i in range(len(poset)):
            if rng.random() < 0.5:
                up |= poset.up_masks[i]
        if up:
            weights = _weights(rng, poset, (1, 1, 2, 3) if torsion else (1,))
            pieces.append((up, weights))
    return _summand_system(poset, pieces, ring, rng if twist else None)


def random_flasque_system(rng, poset=None, size=4, max_multiplicity=2, coeff=ZZ, twist=True):
    '''
    A random Godement-type system: ``term(x)`` is the sum over ``z <= x`` of
    ``g_z`` copies of the ring and transition maps are projections. Such
    systems are flasque.
    '''
    ring = Ring.parse(coeff)
    poset = poset or random_poset(rng, size)
    pieces = []
    for i in range(len(poset)):
        for _ in range(int(rng.integers(0, max_multiplicity + 1))):
            pieces.append((poset.up_masks[i], [1] * len(poset)))
    return _summand_system(poset, pieces, ring, rng if twist else None)


def random_directed_system(rng, size=4, summands=3, coeff=ZZ, torsion=True):
    '''
    A random system over a poset with a maximum, hence directed.
    '''
    base = random_poset(rng, size - 1)
    top = f'x{size - 1}'
    relations = [(x, top) for x in base.elements]
    relations += [(base.elements[i], base.elements[j]) for i in range(len(base))
                  for j in base.strictly_above(i)]
    poset = build_poset(list(base.elements) + [top], relations)
    return random_system(rng, poset, summands=summands, coeff=coeff, torsion=torsion)


