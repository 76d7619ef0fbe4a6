'''
Derived Limits: Iteration Helpers

Small combinatorial generators shared by the chain, family and enumeration
code.
'''

import itertools

__all__ = ['batch', 'faces', 'increasing_tuples', 'mask_members', 'permutation_sign', 'vector_from_index']


##############################################################################
# Functions


def batch(start, stop, step):
    '''
    A generator that yields ``(start, stop)`` windows covering a range.

    Used to shard enumerations; concatenating the windows in order gives the
    original range back.

    :param start: a start index
    :type start: int
    :param stop: a stop index
    :type stop: int
    :param step: an integer step
    :type step: int
    '''
    if step <= 0:
        raise ValueError(f'Invalid batch step: {step!r}')
    if stop - start <= step:
        yield (start, stop)
        return
    for lower in range(start, stop, step):
        yield (lower, min(lower + step, stop))


def increasing_tuples(size, length):
    '''
    All strictly increasing tuples of ``length`` indices below ``size``, in
    lexicographic order. ``length == 0`` yields the empty tuple once.
    '''
    return itertools.combinations(range(size), length)


def faces(indices):
    '''
    Yields ``(i, face)`` where ``face`` omits position ``i``.
    '''
    for i in range(len(indices)):
        yield i, indices[:i] + indices[i + 1:]


def permutation_sign(indices):
    '''
    Sorts ``indices`` and returns ``(sign, sorted_tuple)``.

    The sign is that of the sorting permutation; repeated entries give
    ``(0, None)`` since alternating data vanish there.

    :param indices: the entries to sort.
    :type indices: sequence
    :rtype: tuple
    '''
    indices = tuple(indices)
    if len(set(indices)) != len(indices):
        return 0, None
    inversions = sum(1 for a, b in itertools.combinations(indices, 2) if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


def mask_members(mask, items):
    '''
    The items selected by the set bits of ``mask``.
    '''
    return tuple(item for bit, item in enumerate(items) if mask >> bit & 1)


def vector_from_index(index, base, length):
    '''
    The base-``base`` digits of ``index`` as a vector of ``length`` entries,
    least significant first.
    '''
    digits = []
    for _ in range(length):
        index, digit = divmod(index, base)
        digits.append(digit)
    return tuple(digits)
