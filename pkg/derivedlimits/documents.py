'''
Derived Limits: Input Documents

One YAML (or JSON) document describes what a command works on. Its top level
holds any of ``poset``, ``system``, ``ses``, ``ideal``, ``family``, ``akl``,
``xsys``, ``ysys`` and ``walks`` plus the optional ``coeff``, ``name`` and
``description`` keys. Matrices are row-major lists of integers; list-valued
elements and points become tuples.

Everything is built through the validating builders. Schema problems raise
``SchemaError`` with the path and line of the offending entry; a builder's
own error is re-raised unchanged with ``path`` and ``line`` attached.
'''

import contextlib
import logging
import os

import yaml

from derivedlimits.coherence import (
    CoherentFamily,
    IndexedFunction,
    akl_index,
    build_akl_systems,
    build_ideal,
    build_ideal_systems,
    build_Y_system,
    points_of,
)
from derivedlimits.config import MAX_POSET
from derivedlimits.errors import InputError, SchemaError
from derivedlimits.ordinals import Ordinal
from derivedlimits.prosys import build_poset, build_ses, build_system
from derivedlimits.zmodule import Ring

logger = logging.getLogger(name=__name__)

__all__ = ['CORPUS_DIR', 'Document', 'corpus_files', 'load_document', 'parse_input']

CORPUS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'corpus')

OBJECT_KEYS = ('poset', 'system', 'ses', 'ideal', 'family', 'akl', 'xsys', 'ysys', 'walks')
META_KEYS = ('coeff', 'name', 'description')
SYSTEM_SOURCES = ('system', 'akl', 'xsys', 'ysys')
PARTS = ('sub', 'mid', 'quot')


##############################################################################
# Classes


class Document(dict):
    '''
    The objects built from one input document, keyed by kind: ``poset``,
    ``system``, ``ses``, ``ideal``, ``family``, ``index`` and ``walks``.

    :ivar ring: the coefficient ring everything was built over.
    :ivar lines: ``{path: line}`` for every entry of the source text.
    :ivar name: the document's ``name`` entry, if any.
    '''

    def __init__(self, ring, lines=None, name=None):
        super().__init__()
        self.ring = ring
        self.lines = lines or {}
        self.name = name

    def require(self, key, command):
        '''
        :raises SchemaError: if the document holds no ``key`` object.
        '''
        if key not in self:
            raise SchemaError(f'Command {command!r} needs a {key!r} entry', path=key)
        return self[key]


class _Reader:
    # Shape checks that fail with the location of the offending entry.

    def __init__(self, lines):
        self.lines = lines

    def fail(self, message, path):
        raise SchemaError(message, path=path, line=self.lines.get(path))

    def mapping(self, value, path, required=(), optional=()):
        if not isinstance(value, dict):
            self.fail(f'Expected a mapping, got {type(value).__name__}', path)
        for key in required:
            if key not in value:
                self.fail(f'Missing key {key!r}', path)
        unknown = sorted((k for k in value if k not in required and k not in optional), key=str)
        if unknown:
            self.fail(f'Unknown key {unknown[0]!r}', _join(path, unknown[0]))
        return value

    def sequence(self, value, path):
        if not isinstance(value, list):
            self.fail(f'Expected a list, got {type(value).__name__}', path)
        return value

    def integer(self, value, path, minimum=0):
        if not isinstance(value, int) or isinstance(value, bool) or (minimum is not None and value < minimum):
            wanted = 'an integer' if minimum is None else f'an integer >= {minimum}'
            self.fail(f'Expected {wanted}, got {value!r}', path)
        return value

    def element(self, value, path):
        if isinstance(value, dict) or value is None:
            self.fail(f'Elements and points must be scalars or lists, got {value!r}', path)
        if isinstance(value, list):
            return tuple(self.element(v, f'{path}[{i}]') for i, v in enumerate(value))
        return value

    def elements(self, value, path):
        return [self.element(v, f'{path}[{i}]') for i, v in enumerate(self.sequence(value, path))]

    def matrix(self, value, path):
        rows = self.sequence(value, path)
        for i, row in enumerate(rows):
            for j, x in enumerate(self.sequence(row, f'{path}[{i}]')):
                self.integer(x, f'{path}[{i}][{j}]', minimum=None)
        return rows

    def vector(self, value, path):
        if isinstance(value, list):
            return [self.integer(x, f'{path}[{i}]', minimum=None) for i, x in enumerate(value)]
        return [self.integer(value, path, minimum=None)]

    def ordinal(self, value, path):
        try:
            return Ordinal(value)
        except (TypeError, ValueError) as e:
            self.fail(str(e), path)

    @contextlib.contextmanager
    def building(self, path):
        try:
            yield
        except SchemaError:
            raise
        except InputError as e:
            e.path = path
            e.line = self.lines.get(path)
            raise


##############################################################################
# Loading


def _join(path, key):
    return f'{path}.{key}' if path else str(key)


def _line_map(node, path='', lines=None):
    lines = {} if lines is None else lines
    lines.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            _line_map(value, _join(path, key.value), lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, value in enumerate(node.value):
            _line_map(value, f'{path}[{i}]', lines)
    return lines


def load_document(source):
    '''
    Reads a document from a mapping, a file path, an open file or YAML text.

    :returns: ``(tree, lines)`` with ``lines`` mapping entry paths to line
        numbers (empty for mappings).
    :raises SchemaError: if the text is not valid YAML.
    '''
    if isinstance(source, dict):
        return source, {}
    if hasattr(source, 'read'):
        text = source.read()
    elif '\n' not in source and os.path.isfile(source):
        logger.debug('Reading document %s', source)
        with open(source, 'r') as f:
            text = f.read()
    else:
        text = source
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        tree = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise SchemaError(f'Invalid YAML: {getattr(e, "problem", None) or e}',
                          line=None if mark is None else mark.line + 1) from None
    return tree, (_line_map(node) if node is not None else {})


def corpus_files():
    '''
    The bundled regression documents, sorted by name.
    '''
    return sorted(os.path.join(CORPUS_DIR, f) for f in os.listdir(CORPUS_DIR) if f.endswith(('.yaml', '.yml')))


##############################################################################
# Builders


def _poset(reader, tree, path):
    reader.mapping(tree, path, ('elements',), ('relations',))
    elements = reader.elements(tree['elements'], _join(path, 'elements'))
    relations = []
    for i, pair in enumerate(reader.sequence(tree.get('relations', []), _join(path, 'relations'))):
        where = f'{path}.relations[{i}]'
        if not isinstance(pair, list) or len(pair) != 2:
            reader.fail('A relation is a pair [lower, upper]', where)
        relations.append(tuple(reader.element(x, where) for x in pair))
    with reader.building(path):
        return build_poset(elements, relations)


def _system(reader, tree, path, ring, poset=None):
    reader.mapping(tree, path, ('ranks',), ('poset', 'maps'))
    if 'poset' in tree:
        poset = _poset(reader, tree['poset'], _join(path, 'poset'))
    elif poset is None:
        reader.fail("Missing key 'poset'", path)
    ranks = tree['ranks']
    if isinstance(ranks, dict):
        ranks = {reader.element(k, _join(path, 'ranks')): reader.integer(v, f'{path}.ranks.{k}')
                 for k, v in ranks.items()}
    else:
        ranks = [reader.integer(r, f'{path}.ranks[{i}]')
                 for i, r in enumerate(reader.sequence(ranks, _join(path, 'ranks')))]
    maps = {}
    for i, entry in enumerate(reader.sequence(tree.get('maps', []), _join(path, 'maps'))):
        where = f'{path}.maps[{i}]'
        reader.mapping(entry, where, ('lower', 'upper', 'matrix'))
        key = tuple(reader.element(entry[k], _join(where, k)) for k in ('lower', 'upper'))
        maps[key] = reader.matrix(entry['matrix'], _join(where, 'matrix'))
    with reader.building(_join(path, 'maps') if maps else path):
        return build_system(poset, ranks, maps, ring)


def _blocks(reader, value, path):
    blocks = {}
    for i, entry in enumerate(reader.sequence(value, path)):
        where = f'{path}[{i}]'
        reader.mapping(entry, where, ('element', 'matrix'))
        blocks[reader.element(entry['element'], _join(where, 'element'))] = \
            reader.matrix(entry['matrix'], _join(where, 'matrix'))
    return blocks


def _ses(reader, tree, path, ring):
    reader.mapping(tree, path, PARTS + ('poset',), ('inclusions', 'projections'))
    poset = _poset(reader, tree['poset'], _join(path, 'poset'))
    systems = [_system(reader, tree[part], _join(path, part), ring, poset) for part in PARTS]
    inclusions = _blocks(reader, tree.get('inclusions', []), _join(path, 'inclusions'))
    projections = _blocks(reader, tree.get('projections', []), _join(path, 'projections'))
    with reader.building(path):
        return build_ses(*systems, inclusions, projections)


def _ideal(reader, tree, path, ground=None):
    reader.mapping(tree, path, ('generators',) if ground is not None else ('ground', 'generators'), ('ground',))
    if 'ground' in tree:
        ground = reader.elements(tree['ground'], _join(path, 'ground'))
    generators = [reader.elements(g, f'{path}.generators[{i}]')
                  for i, g in enumerate(reader.sequence(tree['generators'], _join(path, 'generators')))]
    with reader.building(_join(path, 'generators')):
        return build_ideal(ground, generators)


def _akl(reader, tree, path):
    reader.mapping(tree, path, ('kappa', 'lambda'))
    return reader.integer(tree['kappa'], _join(path, 'kappa')), reader.integer(tree['lambda'], _join(path, 'lambda'))


def _family(reader, tree, path, ring, caps):
    reader.mapping(tree, path, ('n', 'generators'), ('index', 'akl', 'ground', 'rank', 'values'))
    n = reader.integer(tree['n'], _join(path, 'n'), minimum=1)
    rank = reader.integer(tree.get('rank', 1), _join(path, 'rank'), minimum=1)
    if ('index' in tree) == ('akl' in tree):
        reader.fail("Exactly one of 'index' and 'akl' is required", path)
    if 'akl' in tree:
        kappa, lam = _akl(reader, tree['akl'], _join(path, 'akl'))
        with reader.building(_join(path, 'akl')):
            index = akl_index(kappa, lam, caps.get('max_poset', MAX_POSET))
    else:
        index = [frozenset(reader.elements(s, f'{path}.index[{i}]'))
                 for i, s in enumerate(reader.sequence(tree['index'], _join(path, 'index')))]
    ground = set()
    for element in index:
        ground.update(points_of(element))
    modulus = _ideal(reader, {k: tree[k] for k in ('ground', 'generators') if k in tree}, path, ground)
    values = {}
    for i, entry in enumerate(reader.sequence(tree.get('values', []), _join(path, 'values'))):
        where = f'{path}.values[{i}]'
        reader.mapping(entry, where, ('tuple', 'points'))
        key = tuple(reader.integer(t, f'{where}.tuple[{j}]')
                    for j, t in enumerate(reader.sequence(entry['tuple'], _join(where, 'tuple'))))
        points = {}
        for j, pair in enumerate(reader.sequence(entry['points'], _join(where, 'points'))):
            spot = f'{where}.points[{j}]'
            if not isinstance(pair, list) or len(pair) != 2:
                reader.fail('A point entry is a pair [point, value]', spot)
            points[reader.element(pair[0], f'{spot}[0]')] = reader.vector(pair[1], f'{spot}[1]')
        values[key] = points
    with reader.building(path):
        family = CoherentFamily(n, index, modulus, values, rank, ring)
    return family


def _walks(reader, tree, path):
    reader.mapping(tree, path, (), ('bound', 'width', 'stage_bound', 'pairs', 'function', 'ordinals'))
    walks = {k: reader.ordinal(tree[k], _join(path, k)) for k in ('bound', 'stage_bound') if k in tree}
    if 'width' in tree:
        walks['width'] = reader.integer(tree['width'], _join(path, 'width'), minimum=2)
    if 'pairs' in tree:
        pairs = []
        for i, pair in enumerate(reader.sequence(tree['pairs'], _join(path, 'pairs'))):
            where = f'{path}.pairs[{i}]'
            if not isinstance(pair, list) or len(pair) != 2:
                reader.fail('A pair is [xi, beta]', where)
            xi, beta = (reader.ordinal(x, f'{where}[{j}]') for j, x in enumerate(pair))
            if beta < xi:
                reader.fail(f'Walks go down: {xi} exceeds {beta}', where)
            pairs.append((xi, beta))
        walks['pairs'] = pairs
    if 'function' in tree:
        rows = [[reader.ordinal(x, f'{path}.function[{i}][{j}]')
                 for j, x in enumerate(reader.sequence(row, f'{path}.function[{i}]'))]
                for i, row in enumerate(reader.sequence(tree['function'], _join(path, 'function')))]
        with reader.building(_join(path, 'function')):
            walks['function'] = IndexedFunction(rows, None)
    if 'ordinals' in tree:
        walks['ordinals'] = [reader.ordinal(x, f'{path}.ordinals[{i}]')
                             for i, x in enumerate(reader.sequence(tree['ordinals'], _join(path, 'ordinals')))]
    return walks


def _derived_system(reader, tree, key, ring, caps):
    # The akl, xsys and ysys shorthands; returns (ses or None, system).
    path = key
    if key == 'ysys':
        reader.mapping(tree, path, ('kappa', 'ground', 'generators'), ('rank',))
        kappa = reader.integer(tree['kappa'], _join(path, 'kappa'), minimum=1)
        rank = reader.integer(tree.get('rank', 1), _join(path, 'rank'), minimum=1)
        ideal = _ideal(reader, {'ground': tree['ground'], 'generators': tree['generators']}, path)
        with reader.building(path):
            return None, build_Y_system(kappa, ideal.ground, ideal, rank, ring)
    if key == 'akl':
        reader.mapping(tree, path, ('kappa', 'lambda'), ('rank', 'part'))
        kappa, lam = _akl(reader, {'kappa': tree['kappa'], 'lambda': tree['lambda']}, path)
    else:
        reader.mapping(tree, path, ('ground', 'index', 'generators'), ('rank', 'part'))
    rank = reader.integer(tree.get('rank', 1), _join(path, 'rank'), minimum=1)
    part = tree.get('part', 'sub')
    if part not in PARTS:
        reader.fail(f'part must be one of {list(PARTS)}, got {part!r}', _join(path, 'part'))
    with reader.building(path):
        if key == 'akl':
            ses = build_akl_systems(kappa, lam, rank, ring, caps.get('max_poset', MAX_POSET))
        else:
            modulus = _ideal(reader, {'ground': tree['ground'], 'generators': tree['generators']}, path)
            index = [frozenset(reader.elements(s, f'{path}.index[{i}]'))
                     for i, s in enumerate(reader.sequence(tree['index'], _join(path, 'index')))]
            ses = build_ideal_systems(index, modulus, rank, ring)
    return ses, getattr(ses, part)


def parse_input(document, coeff=None, caps=None):
    '''
    Validates a document and builds its objects.

    :param document: a mapping, a path, an open file or YAML text.
    :param coeff: the coefficient ring; defaults to the document's ``coeff``
        entry, then ``Z``.
    :param caps: resource caps (``max_poset`` is honoured by the ``akl``
        shorthands).
    :raises SchemaError: for malformed documents, with path and line.
    :raises InputError: a builder's validation error, with ``path`` and
        ``line`` attached.
    :rtype: Document
    '''
    caps = caps or {}
    tree, lines = load_document(document)
    reader = _Reader(lines)
    reader.mapping(tree, '', (), OBJECT_KEYS + META_KEYS)
    try:
        ring = Ring.parse(coeff if coeff is not None else tree.get('coeff', 'Z'))
    except InputError as e:
        raise SchemaError(str(e), path='coeff', line=lines.get('coeff')) from None
    sources = [k for k in SYSTEM_SOURCES if k in tree]
    if len(sources) > 1:
        reader.fail(f'At most one of {list(SYSTEM_SOURCES)} may be given, got {sources}', sources[1])

    doc = Document(ring, lines, tree.get('name'))
    if 'poset' in tree:
        doc['poset'] = _poset(reader, tree['poset'], 'poset')
    if 'system' in tree:
        doc['system'] = _system(reader, tree['system'], 'system', ring, doc.get('poset'))
    for key in ('akl', 'xsys', 'ysys'):
        if key in tree:
            ses, doc['system'] = _derived_system(reader, tree[key], key, ring, caps)
            if ses is not None:
                doc['ses'] = ses
    if 'ses' in tree:
        doc['ses'] = _ses(reader, tree['ses'], 'ses', ring)
    if 'ideal' in tree:
        doc['ideal'] = _ideal(reader, tree['ideal'], 'ideal')
    if 'family' in tree:
        doc['family'] = _family(reader, tree['family'], 'family', ring, caps)
        doc['index'] = doc['family'].index
    if 'walks' in tree:
        doc['walks'] = _walks(reader, tree['walks'], 'walks')
    logger.debug('Parsed document with %s', sorted(doc))
    return doc
