'''
Derived Limits: Command Line: Unit Tests
'''

import contextlib
import io
import json
import logging
import os
import shutil
import tempfile
import unittest

from derivedlimits.cli import main, run
from derivedlimits.config import ExperimentConfig
from derivedlimits.documents import corpus_files
from derivedlimits.errors import SchemaError


##############################################################################
# Module Setup


def setUpModule():
    logging.disable(logging.CRITICAL)


def execute(*argv):
    output = io.StringIO()
    with contextlib.redirect_stdout(output):
        code = main(list(argv))
    return code, output.getvalue()


def report_for(command, **flags):
    return run(ExperimentConfig.build(dict(flags, command=command)))


##############################################################################
# Test Cases


class TestMain(unittest.TestCase):

    def test_limn_json(self):
        code, text = execute('limn', 'akl_2_2', '--format', 'json')
        self.assertEqual(code, 0)
        tree = json.loads(text)
        self.assertEqual(tree['command'], 'limn')
        self.assertEqual(tree['rows'], [[0, 'Z^4'], [1, '0'], [2, '0']])
        self.assertEqual(tree['config']['coeff'], 'Z')
        self.assertNotIn('timings', tree)

    def test_coefficients(self):
        code, text = execute('limn', 'vposet', '--coeff', 'Z/2', '--nmax', '1', '--format', 'json')
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(text)['rows'], [[0, '0'], [1, 'Z/2']])

    def test_text_output(self):
        code, text = execute('limn', 'vposet', '--nmax', '1')
        self.assertEqual(code, 0)
        self.assertTrue(text.startswith('derivedlimits limn\n'))
        self.assertIn('lim^n', text)

    def test_exit_codes(self):
        tests = [
            (('limn', 'no-such-document.yaml'), 1),
            (('limn', 'akl_2_2', '--max-poset', '4'), 2),
            (('suite', 'random'), 1),
            (('limn', 'vposet', '--coeff', 'Z/4'), 1),
            (('les', 'vposet'), 1),
            (('coh', 'extend', 'family_zero'), 1),
        ]
        for argv, expected in tests:
            with self.subTest(argv=argv):
                self.assertEqual(execute(*argv)[0], expected)

    def test_no_command(self):
        self.assertEqual(execute()[0], 1)

    def test_deterministic(self):
        first = execute('les', 'vposet_ses', '--format', 'json')
        second = execute('les', 'vposet_ses', '--format', 'json')
        self.assertEqual(first, second)
        self.assertEqual(first[0], 0)

    def test_timings(self):
        code, text = execute('limn', 'one_point', '--format', 'json', '--timings')
        self.assertEqual(code, 0)
        self.assertEqual(sorted(json.loads(text)['timings']), ['compute', 'parse'])

    def test_out_file(self):
        directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, directory)
        path = os.path.join(directory, 'report.csv')
        code, text = execute('limn', 'chain', '--format', 'csv', '--out', path)
        self.assertEqual((code, text), (0, ''))
        with open(path) as f:
            self.assertEqual(f.read().splitlines(), ['n,lim^n', '0,Z', '1,0', '2,0'])

    def test_config_file(self):
        directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, directory)
        path = os.path.join(directory, 'config.yaml')
        with open(path, 'w') as f:
            f.write('nmax: 1\nformat: json\ncaps: {max_chains: 6}\n')
        self.assertEqual(execute('limn', 'chain', '--config', path)[0], 2)
        code, text = execute('limn', 'vposet', '--config', path)
        self.assertEqual(code, 0)
        self.assertEqual(len(json.loads(text)['rows']), 2)


class TestCommands(unittest.TestCase):

    def test_roos(self):
        report = report_for('roos', input='vposet', nmax=1)
        self.assertEqual([row[:3] for row in report.rows], [[0, 3, 1], [1, 2, 2]])
        self.assertTrue(report.details['unnormalized_agrees'])
        self.assertEqual(report.failures, [])

    def test_flasque(self):
        report = report_for('flasque', input='akl_b_2_2', nmax=1)
        self.assertTrue(report.rows[0][0])
        self.assertEqual(report.details['higher_limits'], {1: '0'})
        report = report_for('flasque', input='vposet')
        self.assertEqual(report.rows[0], [False, report.rows[0][1], ['c']])

    def test_les(self):
        report = report_for('les', input='vposet_ses', nmax=1)
        self.assertTrue(report.details['exact'])
        self.assertIs(report.details['flasque_middle']['flasque'], True)
        self.assertEqual([str(g) for g in report.rows[1][1:]], ['Z', '0', '0'])

    def test_coherent_families(self):
        report = report_for('coh check', input='family_incoherent')
        self.assertEqual(report.rows, [[1, False]])
        self.assertEqual(report.details['witness']['tuple'], ['{0,1}', '{1,2}'])
        report = report_for('coh trivialize', input='family_coherent')
        self.assertEqual(report.rows, [[1, True]])
        self.assertIsNotNone(report.details['trivialization'])

    def test_coh_extend(self):
        report = report_for('coh extend', input='family_zero', params={'mu': 2, 'nu': 2})
        self.assertEqual(report.rows, [['given', 2, True, True], ['extended', 16, True, True]])
        self.assertEqual(report.failures, [])

    def test_walks(self):
        report = report_for('walks rho1', input='walks')
        self.assertEqual([str(c) for c in report.rows[0]], ['3', 'w', '3', '1', 'w:3'])
        report = report_for('walks family', input='walks')
        self.assertEqual(report.details['sp'], 'w+2')
        self.assertEqual(report.details['ones'], 2)
        report = report_for('walks defect', input='walks')
        self.assertEqual(len(report.rows), 4)
        self.assertIn('statistics', report.details)

    def test_walks_recurse(self):
        report = report_for('walks recurse', walks={'stage_bound': 'w^2', 'width': 3})
        self.assertEqual(len(report.rows), 9)
        self.assertEqual([row[1] for row in report.rows].count('limit'), 2)

    def test_suite_akl(self):
        report = report_for('suite akl', params={'kappa': [1], 'lambda': [1, 2]}, workers=2)
        self.assertEqual(len(report.rows), 6)
        self.assertEqual(report.failures, [])
        self.assertEqual([row[:3] for row in report.rows[:3]], [[1, 1, 0], [1, 1, 1], [1, 1, 2]])

    def test_suite_random(self):
        report = report_for('suite random', seed=7, workers=3)
        self.assertEqual(report.failures, [])
        self.assertEqual([row[1] for row in report.rows], [row[2] for row in report.rows])
        again = report_for('suite random', seed=7)
        self.assertEqual(report.rows, again.rows)

    def test_oracle_crosscheck(self):
        report = report_for('oracle crosscheck', coeff='Z/2', caps={'max_rank': 64})
        self.assertEqual(report.failures, [])
        self.assertGreater(report.details['checked'], 0)
        self.assertEqual(report.details['checked'], report.details['agree'])
        self.assertIn('two_chain', [row[0] for row in report.rows])
        rows = {row[0]: row for row in report.rows}
        self.assertEqual(rows['vposet_torsion'][2:], [[4, 2, 0], True])

    def test_suite_oracle(self):
        report = report_for('suite oracle', seed=0)
        self.assertEqual(report.failures, [])
        rows = {row[0]: row for row in report.rows}
        self.assertEqual(rows['lemma |Y|<=3'][1:], [882 + 42 + 2, 882 + 42 + 2])
        self.assertEqual(rows['lemma |Y|=4 sample'][1:], [20, 20])
        code, text = execute('suite', 'oracle', '--seed', '0', '--max-ground', '2', '--format', 'json')
        self.assertEqual(code, 0)
        self.assertNotIn('failures', json.loads(text))

    def test_worked_examples(self):
        report = report_for('limn', input='vposet_torsion', nmax=1)
        self.assertEqual([[n, str(g)] for n, g in report.rows], [[0, 'Z^2'], [1, 'Z/2 + Z/4']])
        report = report_for('roos', input='two_chain', nmax=1)
        self.assertEqual([row[:3] for row in report.rows], [[0, 2, 2], [1, 1, 1]])
        self.assertEqual([str(row[3]) for row in report.rows], ['Z', '0'])
        report = report_for('limn', input='ysys_principal', nmax=1)
        self.assertEqual([[n, str(g)] for n, g in report.rows], [[0, 'Z^2'], [1, '0']])
        report = report_for('walks rho1', input='walks_small')
        self.assertEqual([row[2] for row in report.rows], [0, 3, 0, 0, 2])

    def test_corpus_list(self):
        report = report_for('corpus list')
        self.assertEqual(len(report.rows), len(corpus_files()))
        rows = {row[0]: row for row in report.rows}
        self.assertEqual(rows['vposet'][1], 'system')
        self.assertEqual(rows['vposet_ses'][1], 'ses')
        self.assertEqual(rows['walks'][2], 'Walks along the canonical ladders below w^3.')

    def test_unknown_command(self):
        with self.assertRaisesRegex(SchemaError, 'Unknown command'):
            report_for('colour')
        with self.assertRaisesRegex(SchemaError, 'needs an input document'):
            report_for('limn')
