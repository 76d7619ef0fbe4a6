'''
Derived Limits: Cache
'''

import logging
import os
import pickle
import threading

from decorator import decorator

logger = logging.getLogger(name=__name__)

__all__ = ['CACHE_DIR_VARIABLE', 'MemoTable', 'memoize']

CACHE_DIR_VARIABLE = 'DERIVEDLIMITS_CACHE_DIR'


###############################################################################
# Classes


class MemoTable(dict):
    '''
    A fill-once table of computed values.

    Entries are never overwritten, so concurrent fillers that compute the same
    value leave the table exactly as a sequential run would. When the
    ``DERIVEDLIMITS_CACHE_DIR`` environment variable names a directory the
    table is loaded from and saved to ``<name>.pickle`` inside it.
    '''

    def __init__(self, name=None, directory=None):
        super().__init__()
        self.name = name
        self.directory = directory if directory is not None else os.environ.get(CACHE_DIR_VARIABLE)
        if self.path and os.path.exists(self.path):
            try:
                with open(self.path, 'rb') as f:
                    self.update(pickle.load(f))
            except (OSError, pickle.UnpicklingError, EOFError):
                logger.warning('Ignoring unreadable memo table: %s', self.path)
            else:
                logger.debug('Loaded %d memo entries from %s', len(self), self.path)

    @property
    def path(self):
        if not self.name or not self.directory:
            return None
        return os.path.join(self.directory, f'{self.name}.pickle')

    def fill(self, key, value):
        '''
        Stores ``value`` unless ``key`` is already present; returns the stored value.
        '''
        return self.setdefault(key, value)

    def save(self):
        '''
        Writes the table to the cache directory, if one is configured.
        '''
        if not self.path:
            return False
        os.makedirs(self.directory, exist_ok=True)
        with open(self.path, 'wb') as f:
            pickle.dump(dict(self), f, protocol=pickle.HIGHEST_PROTOCOL)
        logger.debug('Saved %d memo entries to %s', len(self), self.path)
        return True


###############################################################################
# Functions


def memoize(*args, **kwargs):
    '''
    Memoizes a pure function on its arguments.

    May be used bare (``@memoize``) or with options (``@memoize(maxsize=64)``).
    Unhashable arguments are keyed by their pickle. The table is exposed as
    ``function.memo`` and every read, eviction and fill holds
    ``function.memo_lock``, so threads may share the table.
    '''
    # Check whether the decorator has been invoked:
    invoked = bool(not args or kwargs)
    if not invoked:
        obj = args[0]

    maxsize = kwargs.get('maxsize', 512)

    def memoizer(obj):
        obj.memo = MemoTable()
        obj.memo_lock = threading.Lock()

        def wrapper(obj, *args, **kwargs):
            key = (args, tuple(sorted(kwargs.items())))
            try:
                hash(key)
            except TypeError:
                key = pickle.dumps(key)
            with obj.memo_lock:
                if key in obj.memo:
                    return obj.memo[key]
            # Computed outside the lock; nested memoized calls must not block.
            value = obj(*args, **kwargs)
            with obj.memo_lock:
                if maxsize and key not in obj.memo and len(obj.memo) >= maxsize:
                    # Evict the oldest entry; insertion order is preserved.
                    obj.memo.pop(next(iter(obj.memo)), None)
                return obj.memo.fill(key, value)

        return decorator(wrapper)(obj)

    # Return the decorated function (invoking if required):
    return memoizer if invoked else memoizer(obj)
