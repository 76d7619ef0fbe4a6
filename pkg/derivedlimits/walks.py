'''
Derived Limits: Walks on Ordinals

Canonical ladders on the ordinals below w^w, the maximal-weight walk function
rho1 and its fiber maps ``e_beta = rho1(., beta)``, the characteristic
families built from them and the recursive construction of a coherent family
of functions one stage at a time.
'''

import itertools
import logging

from derivedlimits.cache import MemoTable
from derivedlimits.coherence import CoherentFamily, build_ideal, find_trivialization, ordered
from derivedlimits.errors import BoundExceeded, DimensionMismatch, RingError, TrivializationNotFound, VerificationError
from derivedlimits.iterext import vector_from_index
from derivedlimits.ordinals import Ordinal, ZERO
from derivedlimits.zmodule import Ring

logger = logging.getLogger(name=__name__)

__all__ = [
    'LadderSystem', 'WalkFamily', 'Stage',
    'canonical_term', 'ordinal_grid', 'shift_rows', 'build_tau_phi', 'recursive_base_family', 'walk_statistics',
]

DEFAULT_BOUND = Ordinal.omega(8)


##############################################################################
# Ladders


def canonical_term(gamma, n):
    '''
    The ``n``-th element of the canonical ladder of a limit ordinal: for
    ``gamma = delta + w^k`` it is ``delta + w^(k-1) * n``.
    '''
    exponent, coefficient = gamma.terms[-1]
    head = gamma.terms[:-1] + (((exponent, coefficient - 1),) if coefficient > 1 else ())
    return Ordinal(head) + Ordinal.omega(exponent - 1, n)


class LadderSystem:
    '''
    A choice of cofinal sequence ``C_gamma`` of order type w for every limit
    ``gamma``; successors ``alpha + 1`` have ``C = {alpha}``.

    :param rule: ``rule(gamma, n)`` giving the ``n``-th ladder element.
        Must be strictly increasing in ``n`` with supremum ``gamma``.
    :param name: names the rule in memo tables and reports.
    '''

    def __init__(self, rule=None, name=None):
        self.rule = rule or canonical_term
        self.name = name or ('canonical' if rule is None else getattr(rule, '__name__', 'custom'))
        self._canonical = rule is None

    def __repr__(self):
        return f'{self.__class__.__qualname__}({self.name!r})'

    def term(self, gamma, n):
        if not gamma.is_limit:
            raise ValueError(f'{gamma} is not a limit ordinal')
        return self.rule(gamma, n)

    def count_below(self, gamma, xi):
        '''
        ``|C_gamma & xi|``: the number of ladder elements below ``xi < gamma``.
        '''
        if not xi < gamma:
            raise ValueError(f'{xi} is not below {gamma}')
        if not self._canonical:
            n = 0
            while self.term(gamma, n) < xi:
                n += 1
            return n
        base = self.term(gamma, 0)
        if xi <= base:
            return 0
        rest = xi.minus(base)
        exponent = gamma.terms[-1][0] - 1
        lead = rest.terms[0][1] if rest.terms[0][0] == exponent else 0
        return lead + (1 if len(rest.terms) > (1 if lead else 0) else 0)

    def contains(self, gamma, xi):
        '''
        Whether ``xi`` is on the ladder of the limit ``gamma``.
        '''
        return xi < gamma and self.term(gamma, self.count_below(gamma, xi)) == xi


##############################################################################
# Walks


class WalkFamily:
    '''
    The fiber maps ``e_beta(xi) = rho1(xi, beta)`` of one ladder system below
    a fixed bound.

    Values are kept in a fill-once ``MemoTable`` so concurrent walkers see
    exactly what a sequential run computes.
    '''

    def __init__(self, ladders=None, bound=DEFAULT_BOUND, table=None):
        self.ladders = ladders or LadderSystem()
        self.bound = Ordinal(bound)
        self.table = table if table is not None else MemoTable(f'rho1-{self.ladders.name}')

    def __repr__(self):
        return f'{self.__class__.__qualname__}({self.ladders.name!r}, bound={str(self.bound)!r})'

    def _check(self, *ordinals):
        for o in ordinals:
            if not o < self.bound:
                raise BoundExceeded(str(self.bound), str(o))

    def _pair(self, xi, beta):
        xi, beta = Ordinal(xi), Ordinal(beta)
        self._check(xi, beta)
        if beta < xi:
            raise ValueError(f'Walks go down: {xi} exceeds {beta}')
        return xi, beta

    def rho1(self, xi, beta):
        '''
        The maximal weight ``|C_node & xi|`` met on the walk from ``beta``
        down to ``xi``; ``rho1(xi, xi) == 0``.

        :raises BoundExceeded: if either ordinal reaches the bound.
        '''
        xi, beta = self._pair(xi, beta)
        key = (xi, beta)
        if key in self.table:
            return self.table[key]
        weight, node = 0, beta
        while node > xi:
            if node.is_successor:
                limit, _ = node.split_finite()
                if xi >= limit:
                    # Only successor steps of weight 0 remain.
                    break
                node = limit
                continue
            k = self.ladders.count_below(node, xi)
            weight = max(weight, k)
            node = self.ladders.term(node, k)
        return self.table.fill(key, weight)

    __call__ = rho1

    def walk(self, xi, beta):
        '''
        The steps of the walk from ``beta`` to ``xi`` as ``(node, weight)``
        pairs, one per node left.
        '''
        xi, beta = self._pair(xi, beta)
        steps, node = [], beta
        while node > xi:
            if node.is_successor:
                steps.append((node, 0))
                node = node.predecessor()
                continue
            k = self.ladders.count_below(node, xi)
            steps.append((node, k))
            node = self.ladders.term(node, k)
        return steps

    def rho2(self, xi, beta):
        '''
        The number of steps of the walk from ``beta`` to ``xi``.
        '''
        return len(self.walk(xi, beta))

    def fiber_upto(self, beta, m, lo=ZERO):
        '''
        ``{xi : lo <= xi < beta, rho1(xi, beta) <= m}``, a finite set, in
        increasing order.
        '''
        beta, lo = Ordinal(beta), Ordinal(lo)
        self._check(beta)
        found = set()
        pending = [(beta, lo)]
        while pending:
            node, low = pending.pop()
            if node <= low:
                continue
            if node.is_successor:
                limit, count = node.split_finite()
                for j in range(count):
                    if limit + j >= low:
                        found.add(limit + j)
                pending.append((limit, low))
                continue
            previous = None
            for k in range(m + 1):
                point = self.ladders.term(node, k)
                start = low if previous is None else max(low, previous + 1)
                if point >= low:
                    found.add(point)
                pending.append((point, start))
                previous = point
        return sorted(found)

    def fiber(self, beta, k, lo=ZERO):
        '''
        ``e_beta^-1(k)`` above ``lo``.
        '''
        upto = self.fiber_upto(beta, k, lo)
        below = set(self.fiber_upto(beta, k - 1, lo)) if k else set()
        return [xi for xi in upto if xi not in below]

    def coherence_defect(self, alpha, beta):
        '''
        ``D(alpha, beta) = {xi < alpha : e_alpha(xi) != e_beta(xi)}`` computed
        exactly.

        Both walks are unfolded over matching intervals of ``alpha`` until
        they reach a common node, where the remaining difference is a finite
        fiber, or an interval with finitely many points.

        :raises BoundExceeded: if either ordinal reaches the bound.
        :rtype: list
        '''
        alpha, beta = self._pair(alpha, beta)
        found = set()
        pending = [(0, alpha, 0, beta, ZERO, alpha)]
        while pending:
            a, left, b, right, lo, hi = pending.pop()
            if lo >= hi:
                continue
            limit, _ = hi.split_finite()
            if lo >= limit:
                found.update(self._compare_points(a, left, b, right, lo, hi))
                continue
            if left == right:
                if a != b:
                    cut = max(a, b) - 1
                    found.update(xi for xi in self.fiber_upto(left, cut, lo) if xi < hi)
                continue
            swap = left > right
            if swap:
                a, left, b, right = b, right, a, left
            # Unfold the larger node one step over [lo, hi).
            if right.is_successor:
                base, _ = right.split_finite()
                pieces = [(b, base, lo, min(hi, base))]
                found.update(self._compare_points(a, left, b, right, max(lo, base), hi))
            else:
                pieces = []
                first = self.ladders.count_below(right, lo)
                last = self.ladders.count_below(right, hi)
                previous = self.ladders.term(right, first - 1) if first else None
                for k in range(first, last + 1):
                    point = self.ladders.term(right, k)
                    start = lo if previous is None else max(lo, previous + 1)
                    pieces.append((max(b, k), point, start, min(hi, point)))
                    if lo <= point < hi:
                        found.update(self._compare_points(a, left, b, right, point, point + 1))
                    previous = point
            for weight, node, start, stop in pieces:
                if swap:
                    pending.append((weight, node, a, left, start, stop))
                else:
                    pending.append((a, left, weight, node, start, stop))
        return sorted(found)

    def _compare_points(self, a, left, b, right, lo, hi):
        # Direct evaluation over the finite interval [lo, hi).
        if lo >= hi:
            return []
        base, top = hi.split_finite()
        if lo < base:
            raise VerificationError('Interval is not finite', lo=str(lo), hi=str(hi))
        points = [base + j for j in range(int(lo.minus(base)), top)]
        return [xi for xi in points if max(a, self.rho1(xi, left)) != max(b, self.rho1(xi, right))]


##############################################################################
# Families


def ordinal_grid(bound, width):
    '''
    The ordinals below ``bound`` whose Cantor normal form coefficients are
    all below ``width``, in increasing order. Stages, rows and columns of
    the recursive construction range over this window.
    '''
    bound = Ordinal(bound)
    if width < 2:
        raise DimensionMismatch(f'Grid width must be at least 2, got {width}')
    digits = bound.degree + 1
    grid = []
    for position in range(width ** digits):
        vector = vector_from_index(position, width, digits)
        o = Ordinal([(e, c) for e, c in reversed(list(enumerate(vector))) if c])
        if o < bound:
            grid.append(o)
    return sorted(grid)


def shift_rows(psi, gamma):
    '''
    ``psi^(gamma)(gamma + eta, xi) = psi(eta, xi)`` and zero elsewhere; functions
    are ``{(row, column): value}`` mappings.
    '''
    return {(gamma + eta, xi): v for (eta, xi), v in psi.items()}


def _span(f):
    columns = [xi for row in f.rows for xi in row]
    return (max(columns) + 1) if columns else ZERO


def build_tau_phi(f, walks):
    '''
    ``tau_gamma`` on the graph of ``f`` and ``phi_f`` for ``gamma = sp(f)``,
    the successor of the largest ordinal in the range of ``f``.

    ``tau_gamma(i, xi) = 1`` exactly when ``e_gamma(xi) = i``. ``phi_f`` is
    read off the fibers of ``e_gamma`` independently and must equal
    ``tau_gamma`` restricted to ``X(f)``.

    :type f: IndexedFunction
    :type walks: WalkFamily
    :returns: ``(gamma, tau, phi)`` with ``tau`` the column function
        ``xi -> e_gamma(xi)`` on the columns of ``f`` and ``phi`` the set of
        cells of ``X(f)`` where ``phi_f`` is 1.
    :raises VerificationError: if the two computations disagree.
    '''
    gamma = _span(f)
    columns = sorted({xi for _, xi in f.support})
    tau = {xi: walks.rho1(xi, gamma) for xi in columns}
    from_tau = {(i, xi) for i, xi in f.support if tau[xi] == i}
    phi = set()
    for i in range(f.kappa):
        if f.rows[i]:
            fiber = set(walks.fiber(gamma, i))
            phi.update((i, xi) for xi in f.rows[i] if xi in fiber)
    if phi != from_tau:
        raise VerificationError('phi_f differs from tau restricted to X(f)', gamma=str(gamma))
    return gamma, tau, phi


class Stage:
    '''
    One stage of the recursive construction: the function ``phi_beta`` on
    ``rows x beta`` with the trivialization and ladder insertion used to
    build it at limit stages.
    '''

    __slots__ = ['ordinal', 'kind', 'values', 'trivialization', 'insertion']

    def __init__(self, ordinal, kind, values, trivialization=None, insertion=None):
        self.ordinal = ordinal
        self.kind = kind
        self.values = values
        self.trivialization = trivialization
        self.insertion = insertion

    def __repr__(self):
        return f'{self.__class__.__qualname__}({str(self.ordinal)!r}, {self.kind}, {len(self.values)} cells)'

    @property
    def rows(self):
        return sorted({eta for eta, _ in self.values})

    def to_dict(self):
        def cells(mapping):
            return [[str(eta), str(xi), v] for (eta, xi), v in sorted(mapping.items())]
        return {
            'stage': str(self.ordinal),
            'kind': self.kind,
            'values': cells(self.values),
            'trivialization': None if self.trivialization is None else cells(self.trivialization),
            'insertion': None if self.insertion is None else cells(self.insertion),
        }


def _check_support(stages, beta):
    for stage in stages:
        rows = [eta for (eta, _), v in stage.values.items() if v and not eta < beta]
        if rows:
            raise VerificationError('Support invariant failed', stage=str(beta), earlier=str(stage.ordinal),
                                    row=str(rows[0]))


def _trivialize(stages, beta, columns, ring):
    # The family of earlier stages on rows below beta, modulo the cells where
    # two stages disagree.
    rows = [eta for eta in columns]
    ground = {(eta, xi) for eta in rows for xi in columns}
    earlier = [s for s in stages if s.ordinal > ZERO]
    index = [frozenset((eta, xi) for eta in rows for xi in columns if xi < s.ordinal) for s in earlier]
    defects = set()
    for (i, s), (j, t) in itertools.combinations(enumerate(earlier), 2):
        for cell in index[i]:
            if ring.reduce(t.values.get(cell, 0) - s.values.get(cell, 0)):
                defects.add(cell)
    modulus = build_ideal(ground, [defects] if defects else [], warn=False)
    values = {(t,): {cell: v for cell, v in s.values.items() if v} for t, s in enumerate(earlier)}
    family = CoherentFamily(1, index, modulus, values, 1, ring)
    psi = find_trivialization(family)
    if psi is None:
        raise TrivializationNotFound(str(beta))
    logger.debug('Stage %s: trivialized %d earlier stages modulo %d cells', beta, len(earlier), len(defects))
    return {cell: v[0] for cell, v in psi.values.get((), {}).items()}


def recursive_base_family(bound, width=3, coeff='Z/2', ladders=None):
    '''
    Builds ``phi_beta : rows x beta -> K`` for every stage ``beta`` of
    ``ordinal_grid(bound, width)``, rows and columns ranging over the grid.

    * ``0``: the empty function.
    * ``alpha + 1``: ``phi_alpha`` on columns below ``alpha``, zero on column ``alpha``.
    * limit ``beta``: a trivialization ``psi`` of the earlier stages with
      support in the rows below ``beta``, plus the characteristic function
      of the ladder ``C_beta`` shifted to row ``beta``.

    Before every stage the earlier stages must have all nonzero rows below
    it, and after the last stage every row is at most that stage; after a
    limit stage row ``beta`` must be exactly the ladder.

    :raises TrivializationNotFound: if a limit stage has no trivialization.
    :raises VerificationError: if the support invariant or the insertion check fails.
    :rtype: list of Stage
    '''
    ring = Ring.parse(coeff)
    if not ring.is_field:
        raise RingError(str(coeff))
    ladders = ladders or LadderSystem()
    grid = ordinal_grid(bound, width)
    stages = []
    for position, beta in enumerate(grid):
        _check_support(stages, beta)
        columns = grid[:position]
        if beta.is_zero:
            stage = Stage(beta, 'zero', {})
        elif beta.is_successor:
            alpha = beta.predecessor()
            previous = stages[-1]
            if previous.ordinal != alpha:
                raise VerificationError('Grid is missing a predecessor', stage=str(beta))
            stage = Stage(beta, 'successor', {(eta, xi): v for (eta, xi), v in previous.values.items() if xi < alpha})
        else:
            psi = _trivialize(stages, beta, columns, ring)
            chi = {(ZERO, xi): 1 for xi in columns if ladders.contains(beta, xi)}
            insertion = shift_rows(chi, beta)
            values = dict(psi)
            for cell, v in insertion.items():
                values[cell] = ring.reduce(values.get(cell, 0) + v)
            values = {cell: v for cell, v in values.items() if v}
            row = {xi for (eta, xi), v in values.items() if eta == beta}
            if row != {xi for _, xi in chi}:
                raise VerificationError('Ladder insertion check failed', stage=str(beta))
            stage = Stage(beta, 'limit', values, psi, insertion)
        stages.append(stage)
    if grid:
        _check_support(stages, grid[-1] + 1)
    logger.info('Built %d stages below %s', len(stages), bound)
    return stages


##############################################################################
# Statistics


def walk_statistics(walks, ordinals, depth=3):
    '''
    Reported, not asserted: defect sizes over pairs, fiber sizes of each
    ``e_beta`` up to ``depth``, walk lengths and the subadditivity counts of
    rho1 over triples ``alpha < beta < gamma``.

    :rtype: dict
    '''
    ordinals = ordered({Ordinal(o) for o in ordinals})
    defects, fibers, lengths = {}, {}, []
    for alpha, beta in itertools.combinations(ordinals, 2):
        size = len(walks.coherence_defect(alpha, beta))
        defects[size] = defects.get(size, 0) + 1
        lengths.append(walks.rho2(alpha, beta))
    for beta in ordinals:
        for k in range(depth + 1):
            fibers[k] = max(fibers.get(k, 0), len(walks.fiber(beta, k)))
    first = second = 0
    triples = 0
    for alpha, beta, gamma in itertools.combinations(ordinals, 3):
        triples += 1
        ab, ag, bg = walks.rho1(alpha, beta), walks.rho1(alpha, gamma), walks.rho1(beta, gamma)
        first += ag > max(ab, bg)
        second += ab > max(ag, bg)
    return {
        'ordinals': len(ordinals),
        'pairs': sum(defects.values()),
        'defect_sizes': dict(sorted(defects.items())),
        'max_fiber': dict(sorted(fibers.items())),
        'max_rho2': max(lengths, default=0),
        'triples': triples,
        'subadditivity_failures': {'upper': first, 'lower': second},
    }
