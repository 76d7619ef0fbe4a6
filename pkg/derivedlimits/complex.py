'''
Derived Limits: Cochain Complexes

Bounded cochain complexes of finite rank free modules, graded upwards, and
their cohomology.
'''

import logging

from derivedlimits.errors import DimensionMismatch, NotAComplex, VerificationError
from derivedlimits.zmodule import (
    FinAbGroup,
    IntegerMatrix,
    Ring,
    ZZ,
    field_rank_oracle,
    group_from_map,
    normal_form,
    rank,
    solve_integer_system,
)

logger = logging.getLogger(name=__name__)

__all__ = [
    'CochainComplex', 'build_complex', 'cohomology_at', 'coboundary_preimage', 'field_dimension_oracle',
    'is_cocycle', 'universal_coefficient_dimension',
]


##############################################################################
# Classes


class CochainComplex:
    '''
    ``0 -> C^s -> C^(s+1) -> ... -> C^t -> 0`` with ``C^n`` free of rank
    ``rank_at(n)``. Degrees outside ``[s, t]`` hold the zero module.
    '''

    __slots__ = ['start', 'ranks', 'differentials', 'ring']

    def __init__(self, start, ranks, differentials, ring):
        object.__setattr__(self, 'start', start)
        object.__setattr__(self, 'ranks', tuple(ranks))
        object.__setattr__(self, 'differentials', tuple(differentials))
        object.__setattr__(self, 'ring', ring)

    def __setattr__(self, key, value):
        raise TypeError('CochainComplex objects are immutable.')

    def __repr__(self):
        return f'{self.__class__.__qualname__}(start={self.start}, ranks={self.ranks!r}, ring={str(self.ring)!r})'

    @property
    def degrees(self):
        return range(self.start, self.start + len(self.ranks))

    @property
    def total_rank(self):
        return sum(self.ranks)

    def rank_at(self, n):
        return self.ranks[n - self.start] if n in self.degrees else 0

    def differential_at(self, n):
        '''
        The map ``C^n -> C^(n+1)``; a zero matrix when not stored.
        '''
        index = n - self.start
        if 0 <= index < len(self.differentials):
            return self.differentials[index]
        return IntegerMatrix.zeros(self.rank_at(n + 1), self.rank_at(n), self.ring)

    def euler_characteristic(self):
        return sum((-1) ** n * self.rank_at(n) for n in self.degrees)

    def reduce(self, ring):
        '''
        The complex tensored with Z/p.
        '''
        ring = Ring.parse(ring)
        return CochainComplex(self.start, self.ranks, [d.reduce(ring) for d in self.differentials], ring)

    def cohomology(self):
        return {n: cohomology_at(self, n) for n in self.degrees}


##############################################################################
# Functions


def build_complex(ranks, differentials=(), coeff=ZZ, start=0):
    '''
    Validates and builds a cochain complex.

    :param ranks: free ranks for degrees ``start, start + 1, ...``.
    :type ranks: sequence of int
    :param differentials: one map per consecutive pair of degrees, as
        ``IntegerMatrix`` or row-major lists. Missing trailing maps are zero.
    :type differentials: sequence
    :param coeff: coefficient ring.
    :raises DimensionMismatch: if a map does not fit its degrees.
    :raises NotAComplex: if some ``d^(n+1) d^n`` is not zero.
    :rtype: CochainComplex
    '''
    ring = Ring.parse(coeff)
    ranks = [int(r) for r in ranks]
    if any(r < 0 for r in ranks):
        raise DimensionMismatch(f'Ranks must be non-negative: {ranks}')
    differentials = list(differentials)
    if len(differentials) > max(len(ranks) - 1, 0):
        raise DimensionMismatch('More differentials than degree pairs.',
                                expected=max(len(ranks) - 1, 0), actual=len(differentials))
    maps = []
    for k in range(max(len(ranks) - 1, 0)):
        shape = (ranks[k + 1], ranks[k])
        if k >= len(differentials):
            maps.append(IntegerMatrix.zeros(*shape, ring))
            continue
        d = differentials[k]
        if not isinstance(d, IntegerMatrix):
            d = IntegerMatrix.from_rows(d, ring, cols=ranks[k])
        elif d.ring != ring:
            d = d.reduce(ring)
        if d.shape != shape:
            raise DimensionMismatch(f'd^{start + k} has shape {d.shape}, expected {shape}',
                                    expected=shape, actual=d.shape)
        maps.append(d)
    for k in range(len(maps) - 1):
        witness = (maps[k + 1] @ maps[k]).first_nonzero()
        if witness is not None:
            raise NotAComplex(start + k, witness)
    logger.debug('Built complex with ranks %s over %s', ranks, ring)
    return CochainComplex(start, ranks, maps, ring)


def cohomology_at(c, n):
    '''
    ``H^n = ker d^n / im d^(n-1)`` in invariant-factor form.

    Over Z the kernel is presented by a basis and the image is written in
    that basis by exact solves; over Z/p the dimension is counted from ranks.

    :type c: CochainComplex
    :type n: int
    :rtype: FinAbGroup
    '''
    size = c.rank_at(n)
    if not size:
        return FinAbGroup.trivial(c.ring)
    d_out = c.differential_at(n)
    d_in = c.differential_at(n - 1)
    if c.ring.is_field:
        return FinAbGroup(size - rank(d_out) - rank(d_in), ring=c.ring)
    kernel, _ = group_from_map(d_out)
    form = normal_form(kernel)
    coordinates = []
    for j in range(d_in.cols):
        y = solve_integer_system(kernel, d_in.column(j), form=form)
        if y is None:
            raise VerificationError(f'Image of d^{n - 1} escapes the kernel of d^{n}', degree=n)
        coordinates.append(y)
    relations = IntegerMatrix.from_columns(coordinates, kernel.cols, c.ring)
    return group_from_map(relations)[1]


def is_cocycle(c, n, z):
    return not any(c.differential_at(n).apply(z))


def coboundary_preimage(c, n, z):
    '''
    Some ``x`` with ``d^(n-1) x = z``, or None if ``z`` is not a coboundary.
    '''
    return solve_integer_system(c.differential_at(n - 1), z)


def field_dimension_oracle(c, n, p):
    '''
    ``dim H^n(C (x) F_p)`` by sympy's Gaussian elimination alone.
    '''
    ring = Ring.parse(p)
    size = c.rank_at(n)
    if not size:
        return 0
    d_out = c.differential_at(n).reduce(ring)
    d_in = c.differential_at(n - 1).reduce(ring)
    return size - field_rank_oracle(d_out, ring.modulus) - field_rank_oracle(d_in, ring.modulus)


def universal_coefficient_dimension(c, n, p):
    '''
    ``dim H^n(C (x) F_p)`` predicted from the integral groups ``H^n`` and
    ``H^(n+1)``.
    '''
    if c.ring.is_field:
        raise ValueError('Universal coefficients apply to complexes over Z.')
    here, above = cohomology_at(c, n), cohomology_at(c, n + 1)
    return (here.free_rank
            + sum(1 for t in here.torsion if t % p == 0)
            + sum(1 for t in above.torsion if t % p == 0))
