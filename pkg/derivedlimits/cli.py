'''
Derived Limits: Command Line

``derivedlimits <command> [input] [options]``. Every command turns an
``ExperimentConfig`` into a ``Report``; suites fan their items out over a
thread pool and report them in item order, so output does not depend on
scheduling. Exit codes: 0 success, 1 invalid input, 2 cap exceeded,
3 verification failure.
'''

import argparse
import concurrent.futures
import itertools
import logging
import os
import sys
import time

import numpy as np

from derivedlimits.coherence import (
    FamilyComplex,
    akl_index,
    build_akl_systems,
    build_ideal,
    extend_family,
    find_trivialization,
    is_n_coherent,
    label,
    lemma_equivalence,
    lemma_instances,
    product_ground,
    random_coherent_family,
)
from derivedlimits.complex import cohomology_at, field_dimension_oracle, universal_coefficient_dimension
from derivedlimits.config import ExperimentConfig
from derivedlimits.documents import CORPUS_DIR, PARTS, corpus_files, load_document, parse_input
from derivedlimits.errors import DerivedLimitsError, SchemaError, VerificationError
from derivedlimits.logging import configure_logging
from derivedlimits.prosys import (
    derived_limits,
    is_flasque,
    les_of_ses,
    random_directed_system,
    random_flasque_system,
    roos_complex,
)
from derivedlimits.report import Report, render
from derivedlimits.walks import WalkFamily, build_tau_phi, recursive_base_family, walk_statistics
from derivedlimits.zmodule import FinAbGroup, Ring, ZZ

logger = logging.getLogger(name=__name__)

__all__ = ['COMMANDS', 'create_parser', 'main', 'run']

COMMANDS = {}

GOBLOT_TRIALS = 50
FLASQUE_TRIALS = 50
EXTENSION_TRIALS = 20
LEMMA_SAMPLES = 20


##############################################################################
# Helpers


def command(name, needs=None):
    '''
    Registers a command. ``needs`` names the document entry the command
    works on; such commands require an input document.
    '''
    def register(func):
        func.needs = needs
        COMMANDS[name] = func
        return func
    return register


def _map_items(func, items, workers):
    # Results come back in item order whatever the completion order.
    if workers > 1 and len(items) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(func, items))
    return [func(item) for item in items]


def _rng(seed, *stream):
    return np.random.default_rng([seed, *stream])


def _field(config):
    # Suites enumerate over a prime field; Z falls back to Z/2.
    ring = config.ring
    return ring if ring.is_field else Ring.parse('Z/2')


def _resolve_input(value):
    # A bundled corpus name may stand in for a path.
    if value and not os.path.exists(value):
        for candidate in (os.path.join(CORPUS_DIR, value), os.path.join(CORPUS_DIR, f'{value}.yaml')):
            if os.path.isfile(candidate):
                return candidate
    return value


def _walk_settings(config, document):
    settings = dict(config.settings['walks'])
    if document is not None and 'walks' in document:
        settings.update({k: document['walks'][k] for k in ('bound', 'width', 'stage_bound') if k in document['walks']})
    return settings


##############################################################################
# Systems


@command('limn', needs='system')
def limn(config, document):
    s = document['system']
    groups = derived_limits(s, config.nmax, max_chains=config.caps['max_chains'])
    details = {'elements': len(s.poset), 'total_rank': s.total_rank, 'directed': s.poset.is_directed()}
    return Report('limn', ('n', 'lim^n'), [(n, g) for n, g in sorted(groups.items())], details)


@command('roos', needs='system')
def roos(config, document):
    s = document['system']
    c = roos_complex(s, config.nmax, max_chains=config.caps['max_chains'])
    report = Report('roos', ('degree', 'chains', 'rank', 'H^n'))
    for n in range(config.nmax + 1):
        report.add_row(n, len(s.poset.chains(n)), c.rank_at(n), cohomology_at(c, n))
    details = {'total_rank': c.total_rank}
    if len(s.poset) <= 4:
        # The unnormalised complex over weakly increasing tuples must agree.
        full = roos_complex(s, config.nmax, normalized=False, max_chains=config.caps['max_chains'])
        agrees = all(cohomology_at(full, n) == cohomology_at(c, n) for n in range(config.nmax + 1))
        details['unnormalized_agrees'] = agrees
        if not agrees:
            report.failures.append({'check': 'normalized and unnormalized Roos complexes agree'})
    report.details = details
    return report


@command('flasque', needs='system')
def flasque(config, document):
    s = document['system']
    result = is_flasque(s, max_subsets=config.caps['max_subsets'])
    witness = None if result.witness is None else [label(x) for x in result.witness]
    report = Report('flasque', ('flasque', 'down_sets_checked', 'witness'),
                    [(result.flasque, result.checked, witness)])
    if result.flasque and config.nmax >= 1:
        groups = derived_limits(s, config.nmax, max_chains=config.caps['max_chains'])
        report.details = {'higher_limits': {n: str(g) for n, g in groups.items() if n}}
        bad = [n for n, g in groups.items() if n and not g.is_trivial]
        if bad:
            report.failures.append({'check': 'flasque systems have no higher limits', 'degrees': bad})
    return report


@command('les', needs='ses')
def les(config, document):
    result = les_of_ses(document['ses'], config.nmax, max_chains=config.caps['max_chains'],
                        max_subsets=config.caps['max_subsets'])
    rows = [(n, g['sub'], g['mid'], g['quot']) for n, g in sorted(result['groups'].items())]
    details = {
        'exact': result.exact,
        'connecting': result['connecting'],
        'flasque_middle': result['flasque_middle'],
    }
    return Report('les', ('n', 'lim^n sub', 'lim^n mid', 'lim^n quot'), rows, details)


##############################################################################
# Coherent Families


@command('coh check', needs='family')
def coh_check(config, document):
    family = document['family']
    coherent, witness = is_n_coherent(family)
    if witness is not None:
        elements, point = witness
        witness = {'tuple': [label(x) for x in elements], 'point': str(point)}
    return Report('coh check', ('n', 'coherent'), [(family.n, coherent)],
                  {'index': len(family.index), 'witness': witness})


@command('coh trivialize', needs='family')
def coh_trivialize(config, document):
    family = document['family']
    psi = find_trivialization(family)
    details = {'trivialization': None if psi is None else psi.to_dict()}
    return Report('coh trivialize', ('n', 'trivial'), [(family.n, psi is not None)], details)


def _status(family):
    coherent, _ = is_n_coherent(family)
    return coherent, (find_trivialization(family) is not None) if coherent else None


@command('coh extend', needs='family')
def coh_extend(config, document):
    family = document['family']
    params = config.params
    if params.get('mu') is None or params.get('nu') is None:
        raise SchemaError('coh extend needs --mu and --nu', path='params')
    extended = extend_family(family, params['mu'], params['nu'])
    before, after = _status(family), _status(extended)
    report = Report('coh extend', ('family', 'index', 'coherent', 'trivial'),
                    [('given', len(family.index), *before), ('extended', len(extended.index), *after)],
                    {'extended': extended.to_dict()})
    if before != after:
        report.failures.append({'check': 'extension preserves coherence and triviality',
                                'before': list(before), 'after': list(after)})
    return report


##############################################################################
# Walks


def _walk_family(config, document):
    return WalkFamily(bound=_walk_settings(config, document)['bound'])


@command('walks rho1', needs='walks')
def walks_rho1(config, document):
    pairs = document['walks'].get('pairs')
    if not pairs:
        raise SchemaError("walks rho1 needs a 'pairs' list", path='walks')
    walks = _walk_family(config, document)
    report = Report('walks rho1', ('xi', 'beta', 'rho1', 'rho2', 'walk'))
    for xi, beta in pairs:
        steps = ' > '.join(f'{node}:{weight}' for node, weight in walks.walk(xi, beta))
        report.add_row(xi, beta, walks.rho1(xi, beta), walks.rho2(xi, beta), steps or '-')
    walks.table.save()
    return report


@command('walks defect', needs='walks')
def walks_defect(config, document):
    spec = document['walks']
    walks = _walk_family(config, document)
    report = Report('walks defect', ('alpha', 'beta', 'size', 'defect'))
    for alpha, beta in spec.get('pairs', []):
        defect = walks.coherence_defect(alpha, beta)
        report.add_row(alpha, beta, len(defect), ' '.join(map(str, defect)) or '-')
    if 'ordinals' in spec:
        report.details = {'statistics': walk_statistics(walks, spec['ordinals'])}
    if not report.rows and not report.details:
        raise SchemaError("walks defect needs 'pairs' or 'ordinals'", path='walks')
    walks.table.save()
    return report


@command('walks family', needs='walks')
def walks_family(config, document):
    f = document['walks'].get('function')
    if f is None:
        raise SchemaError("walks family needs a 'function'", path='walks')
    walks = _walk_family(config, document)
    gamma, tau, phi = build_tau_phi(f, walks)
    report = Report('walks family', ('row', 'xi', 'tau', 'phi'))
    for i, xi in sorted(f.support):
        report.add_row(i, xi, tau[xi], int((i, xi) in phi))
    report.details = {'sp': str(gamma), 'cells': len(f.support), 'ones': len(phi)}
    walks.table.save()
    return report


@command('walks recurse')
def walks_recurse(config, document):
    settings = _walk_settings(config, document)
    stages = recursive_base_family(settings['stage_bound'], settings['width'], config.settings['coeff'] or 'Z/2')
    report = Report('walks recurse', ('stage', 'kind', 'cells', 'trivialization', 'insertion'))
    for stage in stages:
        report.add_row(stage.ordinal, stage.kind, len(stage.values),
                       '-' if stage.trivialization is None else len(stage.trivialization),
                       '-' if stage.insertion is None else len(stage.insertion))
    report.details = {'bound': str(settings['stage_bound']), 'width': settings['width'],
                      'support_invariant': 'verified'}
    return report


##############################################################################
# Suites


def _akl_item(item, nmax, ring, caps):
    kappa, lam = item
    ses = build_akl_systems(kappa, lam, 1, ring, caps['max_poset'])
    a = derived_limits(ses.sub, nmax, max_chains=caps['max_chains'])
    b = derived_limits(ses.mid, nmax, max_chains=caps['max_chains'])
    flasque = bool(is_flasque(ses.mid, max_subsets=caps['max_subsets']))
    return kappa, lam, a, b, flasque


@command('suite akl')
def suite_akl(config, document):
    kappas = config.params.get('kappa') or [1, 2]
    lambdas = config.params.get('lambda') or [1, 2]
    items = sorted(itertools.product(kappas, lambdas))
    results = _map_items(lambda item: _akl_item(item, config.nmax, config.ring, config.caps), items, config.workers)
    report = Report('suite akl', ('kappa', 'lambda', 'n', 'lim^n A', 'lim^n B', 'B flasque'))
    for kappa, lam, a, b, flasque in results:
        logger.info('A and B systems for kappa=%d, lambda=%d done', kappa, lam)
        for n in range(config.nmax + 1):
            report.add_row(kappa, lam, n, a[n], b[n], flasque)
            expected = FinAbGroup(kappa * lam, ring=config.ring) if n == 0 else FinAbGroup.trivial(config.ring)
            if a[n] != expected or b[n] != expected:
                report.failures.append({'check': 'finite A and B limits', 'kappa': kappa, 'lambda': lam, 'n': n})
        if not flasque:
            report.failures.append({'check': 'B is flasque', 'kappa': kappa, 'lambda': lam})
    return report


def _corpus_systems(caps):
    systems = []
    for path in corpus_files():
        document = parse_input(path, 'Z', caps)
        name = os.path.splitext(os.path.basename(path))[0]
        parts = [(f'{name}.{part}', getattr(document['ses'], part)) for part in PARTS] if 'ses' in document else []
        if 'system' in document and not any(document['system'] is s for _, s in parts):
            systems.append((name, document['system']))
        systems.extend(parts)
    return systems


def _crosscheck_item(item, nmax, ring, caps):
    name, s = item
    size = s.total_roos_rank(nmax)
    if size > caps['max_rank']:
        return {'system': name, 'rank': size, 'skipped': True}
    c = roos_complex(s, nmax, max_chains=caps['max_chains'])
    reduced = roos_complex(s.reduce(ring), nmax, max_chains=caps['max_chains'])
    snf = [cohomology_at(reduced, n).free_rank for n in range(nmax + 1)]
    gauss = [field_dimension_oracle(c, n, ring.modulus) for n in range(nmax + 1)]
    result = {'system': name, 'rank': size, 'skipped': False, 'snf': snf, 'gauss': gauss}
    if c.ring == ZZ:
        result['universal'] = [universal_coefficient_dimension(c, n, ring.modulus) for n in range(nmax + 1)]
    result['agree'] = snf == gauss and result.get('universal', snf) == snf
    return result


def _crosscheck(config, report):
    ring = _field(config)
    items = _corpus_systems(config.caps)
    results = _map_items(lambda item: _crosscheck_item(item, config.nmax, ring, config.caps), items, config.workers)
    checked = [r for r in results if not r['skipped']]
    for r in results:
        if not r['skipped'] and not r['agree']:
            report.failures.append(dict(r, check='SNF and Gaussian elimination dimensions agree'))
    logger.info('Cross-checked %d corpus systems over %s', len(checked), ring)
    return {'systems': len(results), 'checked': len(checked), 'agree': sum(r['agree'] for r in checked),
            'results': results}


@command('oracle crosscheck')
def oracle_crosscheck(config, document):
    report = Report('oracle crosscheck', ('system', 'roos rank', 'dimensions', 'agree'))
    summary = _crosscheck(config, report)
    for r in summary['results']:
        if r['skipped']:
            report.add_row(r['system'], r['rank'], '-', 'skipped')
        else:
            report.add_row(r['system'], r['rank'], r['snf'], r['agree'])
    report.details = {'ring': str(_field(config)), 'checked': summary['checked'], 'agree': summary['agree']}
    return report


def _sample_instances(seed, size, count):
    rng = _rng(seed, 3)
    ground = tuple(range(size))
    subsets = [frozenset(c) for r in range(1, size + 1) for c in itertools.combinations(ground, r)]
    instances = []
    for _ in range(count):
        chosen = rng.choice(len(subsets), size=int(rng.integers(1, 4)), replace=False)
        index = tuple(subsets[i] for i in sorted(chosen))
        j_max = frozenset(x for x in ground if rng.random() < 0.4)
        if j_max == frozenset(ground):
            j_max = frozenset()
        instances.append((size, index, j_max, int(rng.integers(1, 3))))
    return instances


def _lemma_item(item, ring, max_families):
    size, index, j_max, n = item
    modulus = build_ideal(range(size), [j_max] if j_max else [], warn=False)
    result = lemma_equivalence(list(index), modulus, n, ring, max_families=max_families)
    return dict(result, ground=size, index=[label(s) for s in index], j_max=label(j_max))


@command('suite oracle')
def suite_oracle(config, document):
    ring = _field(config)
    report = Report('suite oracle', ('step', 'items', 'passed'))
    summary = _crosscheck(config, report)
    report.add_row('corpus crosscheck', summary['checked'], summary['agree'])

    max_families = config.caps['max_families']
    steps = [
        (f'lemma |Y|<={config.caps["max_ground"]}', list(lemma_instances(config.caps['max_ground']))),
        ('lemma |Y|=4 sample', _sample_instances(config.seed, 4, LEMMA_SAMPLES)),
    ]
    details = {'ring': str(ring), 'lemma': {}}
    for name, instances in steps:
        results = _map_items(lambda item: _lemma_item(item, ring, max_families), instances, config.workers)
        held = sum(r['holds'] for r in results)
        report.add_row(name, len(results), held)
        details['lemma'][name] = {'nonvanishing': sum(not r['vanishes'] for r in results),
                                  'cross_checked': sum(r['cross_checked'] for r in results)}
        for r in results:
            if not r['holds']:
                report.failures.append(dict(r, check='lim^n = 0 iff every coherent family is trivial'))
        logger.info('%s: %d of %d instances hold', name, held, len(results))
    report.details = details
    return report


def _goblot_item(k, seed, nmax, ring, caps):
    rng = _rng(seed, 0, k)
    s = random_directed_system(rng, size=int(rng.integers(2, 6)), coeff=ring)
    groups = derived_limits(s, nmax, max_chains=caps['max_chains'])
    top = FinAbGroup(s.term_rank(s.poset.maximum), ring=s.ring)
    return groups[0] == top and all(g.is_trivial for n, g in groups.items() if n)


def _flasque_item(k, seed, ring, caps):
    rng = _rng(seed, 1, k)
    s = random_flasque_system(rng, size=int(rng.integers(1, 7)), coeff=ring)
    groups = derived_limits(s, 2, max_chains=caps['max_chains'])
    return bool(is_flasque(s, max_subsets=caps['max_subsets'])) and groups[1].is_trivial and groups[2].is_trivial


def _extension_item(k, seed, caps):
    rng = _rng(seed, 2, k)
    kappa, lam = ((1, 1), (1, 2))[k % 2]
    n = 1 + (k // 2) % 2
    ring = Ring.parse('Z/2')
    ground = product_ground(kappa, lam)
    generators = [[x for x in sorted(ground) if rng.random() < 0.3]]
    fc = FamilyComplex(akl_index(kappa, lam, caps['max_poset']), build_ideal(ground, generators, warn=False), 1, ring)
    if rng.random() < 0.5:
        family = random_coherent_family(rng, fc, n)
    else:
        family = fc.family(n, [int(v) for v in rng.integers(0, 2, size=fc.size(n))])
    return _status(family) == _status(extend_family(family, 2, 2))


@command('suite random')
def suite_random(config, document):
    seed, caps = config.seed, config.caps
    checks = [
        ('directed systems: lim^n = 0 for n >= 1, lim^0 = top term',
         lambda k: _goblot_item(k, seed, config.nmax, config.ring, caps), GOBLOT_TRIALS),
        ('flasque systems: lim^1 = lim^2 = 0', lambda k: _flasque_item(k, seed, config.ring, caps), FLASQUE_TRIALS),
        ('extension to (2, 2) preserves coherence and triviality',
         lambda k: _extension_item(k, seed, caps), EXTENSION_TRIALS),
    ]
    report = Report('suite random', ('check', 'trials', 'passed'))
    for name, func, trials in checks:
        results = _map_items(func, list(range(trials)), config.workers)
        report.add_row(name, trials, sum(results))
        failed = [k for k, ok in enumerate(results) if not ok]
        if failed:
            report.failures.append({'check': name, 'trials': failed})
        logger.info('%s: %d of %d passed', name, sum(results), trials)
    return report


##############################################################################
# Corpus


@command('corpus list')
def corpus_list(config, document):
    report = Report('corpus list', ('name', 'objects', 'description'))
    for path in corpus_files():
        tree, _ = load_document(path)
        objects = ','.join(k for k in tree if k not in ('coeff', 'name', 'description'))
        report.add_row(os.path.splitext(os.path.basename(path))[0], objects, tree.get('description', ''))
    return report


##############################################################################
# Entry Points


def run(config):
    '''
    Executes the configured command.

    :type config: ExperimentConfig
    :rtype: Report
    :raises DerivedLimitsError: with the exit code on the exception.
    '''
    handler = COMMANDS.get(config.command)
    if handler is None:
        raise SchemaError(f'Unknown command {config.command!r}', path='command')
    timings = {}
    document = None
    source = _resolve_input(config.settings['input'])
    if handler.needs or source:
        if not source:
            raise SchemaError(f'Command {config.command!r} needs an input document', path='input')
        started = time.perf_counter()
        document = parse_input(source, config.settings['coeff'], config.caps)
        timings['parse'] = time.perf_counter() - started
        if handler.needs:
            document.require(handler.needs, config.command)
    started = time.perf_counter()
    report = handler(config, document)
    timings['compute'] = time.perf_counter() - started
    report.config = config.echo()
    if document is not None:
        report.config['coeff'] = str(document.ring)
    report.timings.update(timings)
    logger.debug('Command %s finished', config.command, extra={'seconds': round(sum(timings.values()), 3)})
    return report


def _add_common(parser):
    parser.add_argument('--coeff', help='Coefficient ring: Z or Z/p with p prime.')
    parser.add_argument('--nmax', type=int, help='Highest degree to compute.')
    parser.add_argument('--seed', type=int, help='Seed for randomized suites.')
    parser.add_argument('--format', choices=('text', 'csv', 'json'), help='Report format.')
    parser.add_argument('--out', help='Write the report to this file instead of stdout.')
    parser.add_argument('--config', help='YAML file of settings, overridden by flags.')
    parser.add_argument('--workers', type=int, help='Threads for suite items.')
    parser.add_argument('--timings', action='store_true', default=None, help='Include timings in the report.')
    parser.add_argument('--max-chains', type=int)
    parser.add_argument('--max-subsets', type=int)
    parser.add_argument('--max-poset', type=int)
    parser.add_argument('--max-families', type=int)
    parser.add_argument('--max-rank', type=int, help='Largest total Roos rank the oracle cross-checks.')
    parser.add_argument('--max-ground', type=int, help='Largest ground set of the exhaustive lemma check.')
    parser.add_argument('--bound', help='Ordinal bound for walks, e.g. w^3.')
    parser.add_argument('--stage-bound', help='Stages of the recursive construction stay below this ordinal.')
    parser.add_argument('--width', type=int, help='Coefficient width of the ordinal grid.')
    parser.add_argument('--kappa', type=int, nargs='+')
    parser.add_argument('--lambda', dest='lam', type=int, nargs='+')
    parser.add_argument('--mu', type=int)
    parser.add_argument('--nu', type=int)
    parser.add_argument('-v', '--verbose', action='count', default=0)
    parser.add_argument('-q', '--quiet', action='count', default=0)


def create_parser():
    parser = argparse.ArgumentParser(prog='derivedlimits', description='Derived limits of inverse systems, '
                                     'coherent families of functions and walks on ordinals.')
    commands = parser.add_subparsers(dest='group')
    groups = {}
    for name in COMMANDS:
        group, _, sub = name.partition(' ')
        if not sub:
            leaf = commands.add_parser(group)
        else:
            if group not in groups:
                groups[group] = commands.add_parser(group).add_subparsers(dest='sub')
            leaf = groups[group].add_parser(sub)
        leaf.set_defaults(command=name)
        leaf.add_argument('input', nargs='?' if COMMANDS[name].needs is None else None,
                          help='Input document: a path or a bundled corpus name.')
        _add_common(leaf)
    return parser


def _flags(args):
    return {
        'command': args.command,
        'input': args.input,
        'coeff': args.coeff,
        'nmax': args.nmax,
        'seed': args.seed,
        'format': args.format,
        'out': args.out,
        'workers': args.workers,
        'timings': args.timings,
        'caps': {
            'max_chains': args.max_chains,
            'max_subsets': args.max_subsets,
            'max_poset': args.max_poset,
            'max_families': args.max_families,
            'max_rank': args.max_rank,
            'max_ground': args.max_ground,
        },
        'params': {'kappa': args.kappa, 'lambda': args.lam, 'mu': args.mu, 'nu': args.nu},
        'walks': {'bound': args.bound, 'width': args.width, 'stage_bound': args.stage_bound},
    }


def main(argv=None):
    '''
    Runs one command and returns its exit code.
    '''
    parser = create_parser()
    args = parser.parse_args(argv)
    if not getattr(args, 'command', None):
        parser.print_help()
        return 1
    configure_logging(args.verbose - args.quiet)
    try:
        config = ExperimentConfig.build(_flags(args), args.config)
        report = run(config)
        text = render(report, config.format, config.settings['timings'])
    except DerivedLimitsError as e:
        extra = {}
        if getattr(e, 'path', None) and not isinstance(e, SchemaError):
            extra = {'path': e.path, 'line': getattr(e, 'line', None)}
        logger.error('%s', e, extra=extra)
        return e.exit_code
    except OSError as e:
        logger.error('%s', e)
        return 1
    if config.settings['out']:
        with open(config.settings['out'], 'w') as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return VerificationError.exit_code if report.failures else 0


if __name__ == '__main__':
    sys.exit(main())
