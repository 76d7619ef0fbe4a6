'''
Derived Limits: Dictionary Helpers
'''

__all__ = ['dcompact', 'dmerge']


def dcompact(d):
    '''
    Removes unset values (``None``) from a dictionary, recursively.

    Falsy values such as ``0``, ``False`` and empty tuples are kept: a zero
    group or an empty witness is a result, not a missing value.

    :param d: The dictionary to compact.
    :type d: dict
    :returns: A new dictionary without ``None`` values.
    :rtype: dict
    '''
    o = d.__class__()
    for k, v in d.items():
        if isinstance(v, dict):
            v = dcompact(v)
        if v is not None:
            o[k] = v
    return o


def dmerge(x, y, overwrite=()):
    '''
    Deep merges dictionary ``y`` into dictionary ``x`` and returns ``x``.

    Used to layer configuration: defaults, then a config file, then
    command-line flags. Values of ``None`` in ``y`` do not override.

    :param x: The dictionary to recursively merge into.
    :type x: dict
    :param y: The dictionary to be merged in.
    :type y: dict
    :param overwrite: Keys whose values replace rather than merge.
    :type overwrite: list or tuple
    :raises TypeError: unless both arguments are dictionaries.
    '''
    if not isinstance(x, dict) or not isinstance(y, dict):
        raise TypeError('Arguments must be dictionaries.')
    for k, v in y.items():
        if v is None:
            continue
        if isinstance(v, dict) and isinstance(x.get(k), dict) and k not in overwrite:
            dmerge(x[k], v, overwrite=overwrite)
        else:
            x[k] = v.copy() if isinstance(v, dict) else v
    return x
