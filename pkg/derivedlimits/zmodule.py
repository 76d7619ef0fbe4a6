'''
Derived Limits: Exact Linear Algebra

Matrices over the integers or a prime field, Smith normal form with
transforms, exact system solving and finitely generated abelian groups in
invariant-factor form.

All entries are Python integers held in numpy object arrays, so nothing here
ever overflows.
'''

import functools
import logging
import re

import numpy as np
import sympy

from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors as sympy_invariant_factors

from derivedlimits.cache import memoize
from derivedlimits.errors import DimensionMismatch, RingError, VerificationError

logger = logging.getLogger(name=__name__)

__all__ = [
    'Ring', 'ZZ', 'IntegerMatrix', 'ModuleMap', 'SmithForm', 'FinAbGroup',
    'smith_normal_form', 'field_normal_form', 'normal_form', 'invariant_factors', 'rank', 'rational_rank',
    'field_rank_oracle', 'determinant_oracle', 'invariant_factors_oracle', 'solve_integer_system', 'group_from_map',
]

RING_PATTERN = re.compile(r'^\s*(?:Z|ZZ|ℤ)\s*(?:/\s*(\d+)(?:\s*Z)?)?\s*$')


##############################################################################
# Classes


class Ring:
    '''
    Coefficient ring tag: the integers (modulus 0) or the prime field Z/p.
    '''

    __slots__ = ['modulus']

    def __init__(self, modulus=0):
        if isinstance(modulus, bool) or not isinstance(modulus, int) or modulus < 0:
            raise RingError(modulus)
        if modulus and not sympy.isprime(modulus):
            raise RingError(f'Z/{modulus}')
        super().__setattr__('modulus', modulus)

    @classmethod
    def parse(cls, value):
        '''
        Parses a ring tag such as ``'Z'``, ``'Z/2'`` or an existing ring.

        :raises RingError: for unknown tags and composite moduli.
        '''
        if isinstance(value, cls):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            return cls(value)
        if not isinstance(value, str):
            raise RingError(value)
        match = RING_PATTERN.match(value)
        if not match:
            raise RingError(value)
        modulus = int(match.group(1) or 0)
        if match.group(1) is not None and modulus < 2:
            raise RingError(value)
        try:
            return cls(modulus)
        except RingError:
            raise RingError(value) from None

    @property
    def is_field(self):
        return self.modulus != 0

    def reduce(self, value):
        return value % self.modulus if self.modulus else value

    def inverse(self, value):
        if not self.modulus:
            if value in (1, -1):
                return value
            raise ZeroDivisionError(f'{value} is not a unit in Z')
        return pow(value % self.modulus, -1, self.modulus)

    def __setattr__(self, key, value):
        raise TypeError('Ring objects are immutable.')

    def __reduce__(self):
        return (self.__class__, (self.modulus,))

    def __eq__(self, other):
        if not isinstance(other, Ring):
            return NotImplemented
        return self.modulus == other.modulus

    def __hash__(self):
        return hash(('Ring', self.modulus))

    def __repr__(self):
        return f'{self.__class__.__qualname__}({self.modulus})'

    def __str__(self):
        return f'Z/{self.modulus}' if self.modulus else 'Z'


ZZ = Ring(0)


def _empty(rows, cols):
    return np.zeros((rows, cols), dtype=object)


class IntegerMatrix:
    '''
    An immutable dense matrix over a coefficient ring.

    Entries are reduced into ``[0, p)`` when the ring is Z/p. Matrices with
    zero rows or zero columns are legal and represent maps to or from the
    zero module.
    '''

    __slots__ = ['_data', 'ring', '_hash']

    def __init__(self, data, ring=ZZ):
        ring = Ring.parse(ring)
        array = np.asarray(data, dtype=object)
        if array.ndim != 2:
            raise DimensionMismatch(f'Matrix data must be two dimensional, got {array.ndim} dimensions.')
        array = array.copy()
        for index, value in np.ndenumerate(array):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f'Matrix entries must be integers: {value!r}')
            array[index] = ring.reduce(int(value))
        array.flags.writeable = False
        super().__setattr__('_data', array)
        super().__setattr__('ring', ring)
        super().__setattr__('_hash', None)

    @classmethod
    def _wrap(cls, array, ring):
        # Trusted constructor for arrays of Python ints that are already reduced.
        obj = cls.__new__(cls)
        array.flags.writeable = False
        object.__setattr__(obj, '_data', array)
        object.__setattr__(obj, 'ring', ring)
        object.__setattr__(obj, '_hash', None)
        return obj

    @classmethod
    def zeros(cls, rows, cols, ring=ZZ):
        return cls._wrap(_empty(rows, cols), Ring.parse(ring))

    @classmethod
    def identity(cls, size, ring=ZZ):
        array = _empty(size, size)
        for i in range(size):
            array[i, i] = 1
        return cls._wrap(array, Ring.parse(ring))

    @classmethod
    def from_rows(cls, rows, ring=ZZ, cols=None):
        '''
        Builds a matrix from a row-major list of lists.

        :param cols: the column count, required when ``rows`` is empty.
        :type cols: int
        '''
        rows = [list(row) for row in rows]
        if not rows:
            return cls.zeros(0, cols or 0, ring)
        widths = {len(row) for row in rows}
        if len(widths) != 1 or (cols is not None and widths != {cols}):
            raise DimensionMismatch('Matrix rows have inconsistent lengths.', expected=cols, actual=sorted(widths))
        width = widths.pop()
        array = _empty(len(rows), width)
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                array[i, j] = value
        return cls(array, ring)

    @classmethod
    def from_columns(cls, columns, rows, ring=ZZ):
        columns = [list(column) for column in columns]
        array = _empty(rows, len(columns))
        for j, column in enumerate(columns):
            if len(column) != rows:
                raise DimensionMismatch('Column has the wrong length.', expected=rows, actual=len(column))
            for i, value in enumerate(column):
                array[i, j] = value
        return cls(array, ring)

    @classmethod
    def from_entries(cls, rows, cols, entries, ring=ZZ):
        '''
        Builds a matrix from a mapping of ``(row, col)`` to values.

        Repeated keys are not possible in a mapping; an iterable of
        ``((row, col), value)`` pairs is also accepted and accumulates.
        '''
        ring = Ring.parse(ring)
        array = _empty(rows, cols)
        items = entries.items() if hasattr(entries, 'items') else entries
        for (i, j), value in items:
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f'Entry ({i}, {j}) outside a {rows}x{cols} matrix')
            array[i, j] += int(value)
        if ring.is_field:
            array %= ring.modulus
        return cls._wrap(array, ring)

    @property
    def rows(self):
        return self._data.shape[0]

    @property
    def cols(self):
        return self._data.shape[1]

    @property
    def shape(self):
        return self._data.shape

    @property
    def T(self):
        return self._wrap(self._data.T.copy(), self.ring)

    def __getitem__(self, key):
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f'Entry ({i}, {j}) outside a {self.rows}x{self.cols} matrix')
        return self._data[i, j]

    def __setattr__(self, key, value):
        raise TypeError('IntegerMatrix objects are immutable.')

    def __reduce__(self):
        return (self.__class__.from_rows, (self.to_list(), self.ring, self.cols))

    def array(self):
        '''
        Returns a writable copy of the underlying object array.
        '''
        return self._data.copy()

    def to_list(self):
        return [[int(x) for x in row] for row in self._data]

    def row(self, i):
        return tuple(self[i, j] for j in range(self.cols))

    def column(self, j):
        return tuple(self[i, j] for i in range(self.rows))

    def submatrix(self, rows=None, cols=None):
        rows = range(self.rows) if rows is None else list(rows)
        cols = range(self.cols) if cols is None else list(cols)
        array = _empty(len(rows), len(cols))
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                array[a, b] = self[i, j]
        return self._wrap(array, self.ring)

    def reduce(self, ring):
        '''
        Reduces an integer matrix modulo the prime of ``ring``.
        '''
        ring = Ring.parse(ring)
        if self.ring.is_field and ring != self.ring:
            raise RingError(f'cannot change {self.ring} to {ring}')
        array = self._data.copy()
        if ring.is_field:
            array %= ring.modulus
        return self._wrap(array, ring)

    def apply(self, vector):
        '''
        Multiplies a column vector and returns a tuple.
        '''
        vector = list(vector)
        if len(vector) != self.cols:
            raise DimensionMismatch('Vector length does not match column count.',
                                    expected=self.cols, actual=len(vector))
        if not self.rows:
            return ()
        if not self.cols:
            return (0,) * self.rows
        result = self._data.dot(np.array(vector, dtype=object))
        return tuple(self.ring.reduce(int(x)) for x in result)

    def _check_ring(self, other):
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        if other.ring != self.ring:
            raise RingError(f'{self.ring} and {other.ring} matrices cannot be combined')
        return None

    def __matmul__(self, other):
        if self._check_ring(other) is NotImplemented:
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f'Cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}.',
                                    expected=self.cols, actual=other.rows)
        if not (self.rows and self.cols and other.cols):
            return self.zeros(self.rows, other.cols, self.ring)
        array = self._data.dot(other._data)
        if self.ring.is_field:
            array %= self.ring.modulus
        return self._wrap(array, self.ring)

    def __add__(self, other):
        if self._check_ring(other) is NotImplemented:
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionMismatch('Cannot add matrices of different shapes.',
                                    expected=self.shape, actual=other.shape)
        array = self._data + other._data
        if self.ring.is_field:
            array %= self.ring.modulus
        return self._wrap(array, self.ring)

    def __neg__(self):
        array = -self._data
        if self.ring.is_field:
            array %= self.ring.modulus
        return self._wrap(array, self.ring)

    def __sub__(self, other):
        if self._check_ring(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def scale(self, factor):
        array = self._data * factor
        if self.ring.is_field:
            array %= self.ring.modulus
        return self._wrap(array, self.ring)

    def hstack(self, *others):
        blocks = (self,) + others
        if len({b.rows for b in blocks}) != 1:
            raise DimensionMismatch('Blocks must have the same number of rows.')
        if len({b.ring for b in blocks}) != 1:
            raise RingError('mixed rings')
        array = _empty(self.rows, sum(b.cols for b in blocks))
        offset = 0
        for block in blocks:
            array[:, offset:offset + block.cols] = block._data
            offset += block.cols
        return self._wrap(array, self.ring)

    def vstack(self, *others):
        return self.T.hstack(*(other.T for other in others)).T

    def is_zero(self):
        return not any(x != 0 for x in self._data.flat)

    def first_nonzero(self):
        '''
        Returns ``(row, col, value)`` of the first nonzero entry in row-major
        order, or None.
        '''
        for (i, j), value in np.ndenumerate(self._data):
            if value != 0:
                return (i, j, int(value))
        return None

    def __eq__(self, other):
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        return (self.ring == other.ring and self.shape == other.shape
                and all(a == b for a, b in zip(self._data.flat, other._data.flat)))

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, '_hash', hash((self.ring, self.shape, tuple(self._data.flat))))
        return self._hash

    def __repr__(self):
        return f'{self.__class__.__qualname__}({self.to_list()!r}, ring={str(self.ring)!r})'


# Every homomorphism between free modules is carried by a matrix.
ModuleMap = IntegerMatrix


class SmithForm:
    '''
    Diagonal form ``u . a . v = D`` of a matrix ``a``.

    Over Z the diagonal ``d`` is the invariant factor chain; over a prime
    field it is a run of ones followed by zeros. ``u`` and ``v`` are
    invertible over the ring.
    '''

    __slots__ = ['d', 'u', 'v', 'shape', 'ring']

    def __init__(self, d, u, v, shape, ring):
        for key, value in (('d', tuple(d)), ('u', u), ('v', v), ('shape', tuple(shape)), ('ring', ring)):
            object.__setattr__(self, key, value)

    def __setattr__(self, key, value):
        raise TypeError('SmithForm objects are immutable.')

    @property
    def rank(self):
        return sum(1 for x in self.d if x)

    def diagonal(self):
        rows, cols = self.shape
        return IntegerMatrix.from_entries(rows, cols, {(i, i): x for i, x in enumerate(self.d) if x}, self.ring)

    def __repr__(self):
        return f'{self.__class__.__qualname__}(d={self.d!r}, shape={self.shape!r}, ring={str(self.ring)!r})'


@functools.total_ordering
class FinAbGroup:
    '''
    A finitely generated abelian group ``Z^r + Z/t1 + ... + Z/tk`` with
    ``t1 | t2 | ... | tk`` and every ``ti >= 2``.

    Over a prime field the group is a vector space and only ``free_rank``
    (its dimension) is used. Equal objects are exactly the isomorphic groups.
    '''

    __slots__ = ['free_rank', 'torsion', 'ring']

    def __init__(self, free_rank=0, torsion=(), ring=ZZ):
        ring = Ring.parse(ring)
        torsion = tuple(int(t) for t in torsion)
        if free_rank < 0:
            raise ValueError(f'Invalid free rank: {free_rank!r}')
        if ring.is_field and torsion:
            raise ValueError('Vector spaces have no torsion.')
        if any(t < 2 for t in torsion):
            raise ValueError(f'Invariant factors must be at least 2: {torsion!r}')
        if any(b % a for a, b in zip(torsion, torsion[1:])):
            raise ValueError(f'Invariant factors must form a divisibility chain: {torsion!r}')
        object.__setattr__(self, 'free_rank', int(free_rank))
        object.__setattr__(self, 'torsion', torsion)
        object.__setattr__(self, 'ring', ring)

    @classmethod
    def from_factors(cls, factors, free_rank=0, ring=ZZ):
        '''
        Canonicalises an arbitrary list of cyclic orders.

        Zeros become free summands, units are dropped and the rest is
        regrouped by prime powers into a divisibility chain.
        '''
        ring = Ring.parse(ring)
        factors = [abs(int(f)) for f in factors]
        free_rank += factors.count(0)
        if ring.is_field:
            return cls(free_rank, (), ring)
        powers = {}
        for f in factors:
            if f > 1:
                for prime, exponent in sympy.factorint(f).items():
                    powers.setdefault(prime, []).append(exponent)
        length = max((len(v) for v in powers.values()), default=0)
        chain = [1] * length
        for prime, exponents in powers.items():
            exponents.sort(reverse=True)
            for i, exponent in enumerate(exponents):
                chain[i] *= prime ** exponent
        return cls(free_rank, tuple(reversed(chain)), ring)

    @classmethod
    def trivial(cls, ring=ZZ):
        return cls(0, (), ring)

    @property
    def is_trivial(self):
        return not self.free_rank and not self.torsion

    @property
    def order(self):
        '''
        The order of the group, or None when it is infinite.
        '''
        if self.free_rank:
            return None
        result = 1
        for t in self.torsion:
            result *= t
        return result

    def __setattr__(self, key, value):
        raise TypeError('FinAbGroup objects are immutable.')

    def __reduce__(self):
        return (self.__class__, (self.free_rank, self.torsion, self.ring))

    def _key(self):
        return (self.ring.modulus, self.free_rank, len(self.torsion), self.torsion)

    def __eq__(self, other):
        if not isinstance(other, FinAbGroup):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        if not isinstance(other, FinAbGroup):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f'{self.__class__.__qualname__}({self.free_rank}, {self.torsion!r}, ring={str(self.ring)!r})'

    def __str__(self):
        if self.is_trivial:
            return '0'
        if self.ring.is_field:
            base = str(self.ring)
            return base if self.free_rank == 1 else f'({base})^{self.free_rank}'
        parts = [f'Z/{t}' for t in self.torsion]
        if self.free_rank:
            parts.append('Z' if self.free_rank == 1 else f'Z^{self.free_rank}')
        return ' + '.join(parts)


##############################################################################
# Reduction Engine


def _bezout(a, b):
    '''
    Returns ``(s, t, u, v)`` with ``s*a + t*b = g``, ``u*a + v*b = 0`` and
    ``s*v - t*u = 1``. When ``a`` divides ``b`` the pivot ``a`` is kept.
    '''
    if b == 0:
        return 1, 0, 0, 1
    if a != 0 and b % a == 0:
        return 1, 0, -(b // a), 1
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    g = old_r
    return old_s, old_t, -(b // g), a // g


class _Reducer:
    '''
    Diagonalises a matrix by unimodular row and column operations.

    ``u`` and ``v`` accumulate the operations so that ``u . a . v == d``.
    '''

    def __init__(self, matrix, track=True):
        self.ring = matrix.ring
        self.d = matrix.array()
        self.rows, self.cols = matrix.shape
        self.track = track
        self.u = IntegerMatrix.identity(self.rows).array() if track else None
        self.v = IntegerMatrix.identity(self.cols).array() if track else None

    def _rows(self, i, j, s, t, u, v):
        for m in (self.d, self.u) if self.track else (self.d,):
            ri, rj = m[i].copy(), m[j].copy()
            m[i] = s * ri + t * rj
            m[j] = u * ri + v * rj

    def _cols(self, i, j, s, t, u, v):
        for m in (self.d, self.v) if self.track else (self.d,):
            ci, cj = m[:, i].copy(), m[:, j].copy()
            m[:, i] = s * ci + t * cj
            m[:, j] = u * ci + v * cj

    def _swap_rows(self, i, j):
        if i != j:
            for m in (self.d, self.u) if self.track else (self.d,):
                m[[i, j]] = m[[j, i]]

    def _swap_cols(self, i, j):
        if i != j:
            for m in (self.d, self.v) if self.track else (self.d,):
                m[:, [i, j]] = m[:, [j, i]]

    def _pivot(self, t):
        best = None
        for i in range(t, self.rows):
            for j in range(t, self.cols):
                value = self.d[i, j]
                if value and (best is None or abs(value) < best[0]):
                    best = (abs(value), i, j)
                    if best[0] == 1:
                        return best
        return best

    def _clear(self, t):
        while True:
            for i in range(t + 1, self.rows):
                if self.d[i, t]:
                    self._rows(t, i, *_bezout(self.d[t, t], self.d[i, t]))
            changed = False
            for j in range(t + 1, self.cols):
                if self.d[t, j]:
                    self._cols(t, j, *_bezout(self.d[t, t], self.d[t, j]))
                    changed = True
            if not changed or not any(self.d[i, t] for i in range(t + 1, self.rows)):
                return

    def integral(self):
        size = min(self.rows, self.cols)
        rank = 0
        for t in range(size):
            pivot = self._pivot(t)
            if pivot is None:
                break
            _, i, j = pivot
            self._swap_rows(t, i)
            self._swap_cols(t, j)
            self._clear(t)
            rank += 1
        # Enforce the divisibility chain on the diagonal.
        for i in range(rank):
            for j in range(i + 1, rank):
                if self.d[j, j] % self.d[i, i]:
                    self._cols(i, j, 1, 1, 0, 1)
                    self._clear(i)
        for i in range(rank):
            if self.d[i, i] < 0:
                self.d[i] = -self.d[i]
                if self.track:
                    self.u[i] = -self.u[i]
        return [int(self.d[i, i]) for i in range(rank)] + [0] * (size - rank)

    def field(self):
        p = self.ring.modulus
        size = min(self.rows, self.cols)
        rank = 0
        for t in range(size):
            found = next(((i, j) for i in range(t, self.rows) for j in range(t, self.cols) if self.d[i, j]), None)
            if found is None:
                break
            i, j = found
            self._swap_rows(t, i)
            self._swap_cols(t, j)
            scale = pow(int(self.d[t, t]), -1, p)
            self._scale_row(t, scale)
            for i in range(t + 1, self.rows):
                if self.d[i, t]:
                    self._rows(t, i, 1, 0, -self.d[i, t], 1)
            for j in range(t + 1, self.cols):
                if self.d[t, j]:
                    self._cols(t, j, 1, 0, -self.d[t, j], 1)
            self._reduce_mod(p)
            rank += 1
        self._reduce_mod(p)
        return [1] * rank + [0] * (size - rank)

    def _scale_row(self, t, scale):
        for m in (self.d, self.u) if self.track else (self.d,):
            m[t] = m[t] * scale

    def _reduce_mod(self, p):
        for m in (self.d, self.u, self.v) if self.track else (self.d,):
            m %= p


##############################################################################
# Functions


def _check_reconstruction(a, form):
    if form.u @ a @ form.v != form.diagonal():
        raise VerificationError('Normal form reconstruction failed', shape=a.shape, ring=str(a.ring))


@memoize
def smith_normal_form(a):
    '''
    Computes the Smith normal form of an integer matrix with transforms.

    :param a: the matrix to reduce.
    :type a: IntegerMatrix
    :returns: ``SmithForm`` with ``u . a . v`` diagonal.
    :rtype: SmithForm
    :raises VerificationError: if the reconstruction check fails.
    '''
    if a.ring.is_field:
        raise ValueError('Smith normal form is computed over Z; use field_normal_form for Z/p.')
    reducer = _Reducer(a)
    d = reducer.integral()
    u, v = IntegerMatrix._wrap(reducer.u, a.ring), IntegerMatrix._wrap(reducer.v, a.ring)
    form = SmithForm(d, u, v, a.shape, a.ring)
    _check_reconstruction(a, form)
    logger.debug('Smith normal form of a %dx%d matrix has rank %d', a.rows, a.cols, form.rank)
    return form


@memoize
def field_normal_form(a):
    '''
    Gaussian elimination over Z/p with transforms, as a ``SmithForm`` whose
    diagonal is all ones then zeros.
    '''
    if not a.ring.is_field:
        raise ValueError('field_normal_form requires a Z/p matrix.')
    reducer = _Reducer(a)
    d = reducer.field()
    u, v = IntegerMatrix._wrap(reducer.u, a.ring), IntegerMatrix._wrap(reducer.v, a.ring)
    form = SmithForm(d, u, v, a.shape, a.ring)
    _check_reconstruction(a, form)
    return form


def normal_form(a):
    return field_normal_form(a) if a.ring.is_field else smith_normal_form(a)


@memoize
def invariant_factors(a):
    '''
    The diagonal of the normal form, computed without transforms.

    :rtype: tuple
    '''
    reducer = _Reducer(a, track=False)
    return tuple(reducer.field() if a.ring.is_field else reducer.integral())


def rank(a):
    '''
    Rank of a matrix over its own ring.
    '''
    return sum(1 for x in invariant_factors(a) if x)


def _domain_matrix(a, domain):
    return DomainMatrix.from_list(a.to_list(), domain)


def rational_rank(a):
    '''
    Rank over the rationals by sympy's fraction-free elimination.
    '''
    if not a.rows or not a.cols:
        return 0
    return _domain_matrix(a, sympy.ZZ).rank()


def field_rank_oracle(a, p):
    '''
    Rank over GF(p) by sympy's Gaussian elimination.

    This shares no code with the reduction engine above and serves as the
    independent oracle for every field computation.
    '''
    if not a.rows or not a.cols:
        return 0
    return _domain_matrix(a, sympy.FF(p)).rank()


def determinant_oracle(a):
    '''
    Determinant of a square integer matrix by sympy's fraction-free
    elimination.
    '''
    if a.rows != a.cols:
        raise DimensionMismatch('Determinant needs a square matrix.', expected=a.rows, actual=a.cols)
    if not a.rows:
        return 1
    return int(_domain_matrix(a, sympy.ZZ).det())


def invariant_factors_oracle(a):
    '''
    The nonzero invariant factors of an integer matrix as sympy computes
    them, in increasing order.
    '''
    if not a.rows or not a.cols:
        return ()
    factors = sympy_invariant_factors(_domain_matrix(a, sympy.ZZ))
    return tuple(sorted(abs(int(f)) for f in factors if f))


def solve_integer_system(a, b, form=None):
    '''
    Finds some x with ``a . x = b`` exactly over the ring of ``a``.

    :param a: the coefficient matrix.
    :type a: IntegerMatrix
    :param b: the right hand side.
    :type b: sequence of int
    :param form: a precomputed normal form of ``a``.
    :type form: SmithForm
    :returns: a solution tuple, or None if there is none.
    :rtype: tuple or None
    :raises DimensionMismatch: if ``len(b) != a.rows``.
    '''
    b = [a.ring.reduce(int(x)) for x in b]
    if len(b) != a.rows:
        raise DimensionMismatch('Right hand side length does not match row count.', expected=a.rows, actual=len(b))
    form = form or normal_form(a)
    ring = a.ring
    c = form.u.apply(b)
    y = [0] * a.cols
    for i, value in enumerate(c):
        d = form.d[i] if i < len(form.d) else 0
        if d:
            if ring.is_field:
                y[i] = ring.reduce(value * ring.inverse(d))
            elif value % d:
                return None
            else:
                y[i] = value // d
        elif ring.reduce(value):
            return None
    x = form.v.apply(y)
    if a.apply(x) != tuple(b):
        raise VerificationError('Solution failed substitution check', shape=a.shape)
    return x


def group_from_map(a):
    '''
    Presents the kernel and cokernel of a module map.

    :param a: a map from ``Z^cols`` to ``Z^rows`` (or over Z/p).
    :type a: IntegerMatrix
    :returns: ``(kernel_basis, cokernel)``; the columns of ``kernel_basis``
        form a basis of the kernel.
    :rtype: tuple
    '''
    form = normal_form(a)
    r = form.rank
    kernel = form.v.submatrix(None, range(r, a.cols))
    cokernel = FinAbGroup.from_factors(form.d[:r], free_rank=a.rows - r, ring=a.ring)
    return kernel, cokernel
