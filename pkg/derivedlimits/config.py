'''
Derived Limits: Configuration

Resource caps and run settings. A run is configured by layering the
defaults below, an optional YAML config file and command-line flags.
'''

import copy
import logging

import yaml

from derivedlimits.dict_helpers import dcompact, dmerge
from derivedlimits.errors import SchemaError
from derivedlimits.zmodule import Ring

logger = logging.getLogger(name=__name__)

__all__ = ['DEFAULTS', 'ExperimentConfig', 'FORMATS', 'MAX_CHAINS', 'MAX_FAMILIES', 'MAX_POSET', 'MAX_SUBSETS']


#############################################################################
# Constants


MAX_CHAINS = 10 ** 6
MAX_SUBSETS = 10 ** 6
MAX_POSET = 4096
MAX_FAMILIES = 2 ** 16

FORMATS = ('text', 'csv', 'json')

# Commands whose inputs are drawn at random and therefore need a seed.
RANDOMIZED_COMMANDS = {'suite oracle', 'suite random'}

DEFAULTS = {
    'command': None,
    'input': None,
    'coeff': None,
    'nmax': 2,
    'seed': None,
    'format': 'text',
    'out': None,
    'workers': 1,
    'timings': False,
    'caps': {
        'max_chains': MAX_CHAINS,
        'max_subsets': MAX_SUBSETS,
        'max_poset': MAX_POSET,
        'max_families': MAX_FAMILIES,
        'max_rank': 64,
        'max_ground': 3,
    },
    'params': {},
    'walks': {
        'bound': 'w^8',
        'width': 3,
        'stage_bound': 'w^2',
    },
}


##############################################################################
# Classes


class ExperimentConfig:
    '''
    A validated run configuration.

    :ivar command: the command name, e.g. ``'limn'`` or ``'coh check'``.
    :ivar ring: the coefficient ring.
    :ivar settings: the merged settings tree.
    '''

    def __init__(self, settings):
        self.settings = settings
        self.command = settings['command']
        try:
            self.ring = Ring.parse(settings['coeff'] or 'Z')
        except Exception as e:
            raise SchemaError(str(e), path='coeff') from None
        for name, value in settings['caps'].items():
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise SchemaError(f'Cap {name} must be a positive integer, got {value!r}', path=f'caps.{name}')
        if settings['format'] not in FORMATS:
            raise SchemaError(f'Unknown output format {settings["format"]!r}', path='format')
        if not isinstance(settings['nmax'], int) or settings['nmax'] < 0:
            raise SchemaError(f'nmax must be a non-negative integer, got {settings["nmax"]!r}', path='nmax')
        if self.command in RANDOMIZED_COMMANDS and settings['seed'] is None:
            raise SchemaError(f'A seed is required for {self.command!r}', path='seed')
        if not isinstance(settings['workers'], int) or settings['workers'] < 1:
            raise SchemaError('workers must be a positive integer', path='workers')

    @classmethod
    def build(cls, flags=None, path=None):
        '''
        Layers defaults, the YAML file at ``path`` and ``flags``.

        :param flags: settings given on the command line; ``None`` values are
            treated as unset.
        :type flags: dict
        :param path: optional configuration file.
        :type path: str
        :rtype: ExperimentConfig
        '''
        settings = copy.deepcopy(DEFAULTS)
        if path:
            logger.debug('Loading configuration from %s', path)
            with open(path, 'r') as f:
                loaded = yaml.safe_load(f) or {}
            if not isinstance(loaded, dict):
                raise SchemaError('Configuration file must contain a mapping', path=path)
            unknown = set(loaded) - set(DEFAULTS)
            if unknown:
                raise SchemaError(f'Unknown configuration keys: {sorted(unknown)}', path=path)
            dmerge(settings, loaded)
        dmerge(settings, dcompact(flags or {}))
        return cls(settings)

    @property
    def caps(self):
        return self.settings['caps']

    @property
    def nmax(self):
        return self.settings['nmax']

    @property
    def seed(self):
        return self.settings['seed']

    @property
    def format(self):
        return self.settings['format']

    @property
    def workers(self):
        return self.settings['workers']

    @property
    def params(self):
        return self.settings['params']

    def echo(self):
        '''
        The settings as echoed into reports.
        '''
        echo = copy.deepcopy(self.settings)
        echo['coeff'] = str(self.ring)
        echo.pop('out', None)
        return echo
