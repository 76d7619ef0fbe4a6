'''
Derived Limits: Ordinals

Ordinals below w^w in Cantor normal form.
'''

import functools
import re

__all__ = ['Ordinal', 'OMEGA', 'ZERO']

TERM_PATTERN = re.compile(r'^(?:(\d+)|w(?:\^(\d+))?(?:\*(\d+))?)$')


@functools.total_ordering
class Ordinal:
    '''
    ``w^e1*c1 + ... + w^ek*ck`` with ``e1 > ... > ek >= 0`` and every
    ``ci >= 1``; the empty sum is zero.

    Accepts a natural number, a string such as ``'w^2*3 + w + 4'`` (``ω``
    and ``·`` are also understood), a list of ``[exponent, coefficient]``
    pairs or another ordinal.
    '''

    __slots__ = ['terms']

    def __init__(self, value=0):
        if isinstance(value, Ordinal):
            terms = value.terms
        elif isinstance(value, bool):
            raise TypeError(f'Invalid ordinal: {value!r}')
        elif isinstance(value, int):
            if value < 0:
                raise ValueError(f'Invalid ordinal: {value!r}')
            terms = ((0, value),) if value else ()
        elif isinstance(value, str):
            terms = self._parse(value)
        elif isinstance(value, (list, tuple)):
            terms = self._validate(value)
        else:
            raise TypeError(f'Invalid ordinal: {value!r}')
        super().__setattr__('terms', terms)

    @classmethod
    def _validate(cls, value):
        terms = []
        for term in value:
            try:
                exponent, coefficient = (int(x) for x in term)
            except (TypeError, ValueError):
                raise ValueError(f'Invalid ordinal: {value!r}') from None
            if exponent < 0 or coefficient < 1:
                raise ValueError(f'Invalid ordinal: {value!r}')
            terms.append((exponent, coefficient))
        if any(a[0] <= b[0] for a, b in zip(terms, terms[1:])):
            raise ValueError(f'Invalid ordinal: {value!r}')
        return tuple(terms)

    @classmethod
    def _parse(cls, value):
        text = value.replace('ω', 'w').replace('·', '*').replace(' ', '')
        if not text:
            raise ValueError(f'Invalid ordinal: {value!r}')
        total = cls()
        for part in text.split('+'):
            match = TERM_PATTERN.match(part)
            if not match:
                raise ValueError(f'Invalid ordinal: {value!r}')
            natural, exponent, coefficient = match.groups()
            if natural is not None:
                total = total + int(natural)
            else:
                total = total + cls.omega(int(exponent or 1), int(coefficient or 1))
        return total.terms

    @classmethod
    def omega(cls, exponent=1, coefficient=1):
        '''
        ``w^exponent * coefficient``.
        '''
        return cls(((exponent, coefficient),) if coefficient else ())

    @property
    def is_zero(self):
        return not self.terms

    @property
    def is_successor(self):
        return bool(self.terms) and self.terms[-1][0] == 0

    @property
    def is_limit(self):
        return bool(self.terms) and self.terms[-1][0] > 0

    @property
    def degree(self):
        '''
        The leading exponent; zero for finite ordinals.
        '''
        return self.terms[0][0] if self.terms else 0

    @property
    def finite(self):
        return not self.terms or self.terms == ((0, self.terms[0][1]),)

    def __int__(self):
        if not self.finite:
            raise ValueError(f'{self} is not finite')
        return self.terms[0][1] if self.terms else 0

    def split_finite(self):
        '''
        Returns ``(limit, n)`` with ``self = limit + n`` and ``limit`` zero or a limit.
        '''
        if self.is_successor:
            return Ordinal(self.terms[:-1]), self.terms[-1][1]
        return self, 0

    def successor(self):
        return self + 1

    def predecessor(self):
        if not self.is_successor:
            raise ValueError(f'{self} has no predecessor')
        limit, n = self.split_finite()
        return limit + (n - 1)

    def minus(self, other):
        '''
        The unique ``x`` with ``other + x == self``; requires ``other <= self``.
        '''
        other = Ordinal(other)
        if other > self:
            raise ValueError(f'{other} exceeds {self}')
        mine, theirs = self.terms, other.terms
        for i, term in enumerate(theirs):
            if mine[i] != term:
                if mine[i][0] == term[0]:
                    return Ordinal(((term[0], mine[i][1] - term[1]),) + mine[i + 1:])
                return Ordinal(mine[i:])
        return Ordinal(mine[len(theirs):])

    def __add__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        if other.is_zero:
            return self
        lead, coefficient = other.terms[0]
        head = [t for t in self.terms if t[0] > lead]
        same = [t for t in self.terms if t[0] == lead]
        if same:
            coefficient += same[0][1]
        return Ordinal(tuple(head) + ((lead, coefficient),) + other.terms[1:])

    def __radd__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return Ordinal(other) + self
        return NotImplemented

    def __mul__(self, other):
        if not isinstance(other, int) or isinstance(other, bool) or other < 0:
            return NotImplemented
        if not other or self.is_zero:
            return Ordinal()
        (lead, coefficient), rest = self.terms[0], self.terms[1:]
        return Ordinal(((lead, coefficient * other),) + rest)

    def __setattr__(self, key, value):
        raise TypeError('Ordinal objects are immutable.')

    def __reduce__(self):
        return (self.__class__, (self.terms,))

    def __hash__(self):
        return hash(('Ordinal', self.terms))

    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool) and other >= 0:
            other = Ordinal(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __lt__(self, other):
        if isinstance(other, int) and not isinstance(other, bool) and other >= 0:
            other = Ordinal(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms < other.terms

    def to_list(self):
        return [list(t) for t in self.terms]

    def __repr__(self):
        return f'{self.__class__.__qualname__}({str(self)!r})'

    def __str__(self):
        if not self.terms:
            return '0'
        parts = []
        for exponent, coefficient in self.terms:
            if exponent == 0:
                parts.append(str(coefficient))
                continue
            base = 'w' if exponent == 1 else f'w^{exponent}'
            parts.append(base if coefficient == 1 else f'{base}*{coefficient}')
        return '+'.join(parts)


ZERO = Ordinal()
OMEGA = Ordinal.omega()
