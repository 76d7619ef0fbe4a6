'''
Derived Limits: Reports

Results of a command as a table plus details, rendered as aligned text, CSV
or a JSON tree. Rendering is deterministic: identical results give
byte-identical output.
'''

import csv
import io
import itertools
import json

from derivedlimits.config import FORMATS

__all__ = ['Report', 'indent', 'render']


##############################################################################
# Classes


class Report:
    '''
    One command's output.

    :ivar command: the command name.
    :ivar columns: table column names.
    :ivar rows: table rows; cells are converted with ``str``.
    :ivar details: further results as a JSON-compatible tree.
    :ivar config: the echoed run settings.
    :ivar timings: ``{step: seconds}``; rendered only when requested.
    :ivar failures: checks that did not hold; a report with failures makes
        the command exit with the verification exit code.
    '''

    def __init__(self, command, columns=(), rows=(), details=None, config=None):
        self.command = command
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.details = details or {}
        self.config = config or {}
        self.timings = {}
        self.failures = []

    def __repr__(self):
        return f'{self.__class__.__qualname__}({self.command!r}, {len(self.rows)} rows)'

    def add_row(self, *cells):
        self.rows.append(list(cells))

    def to_dict(self, timings=False):
        tree = {
            'command': self.command,
            'config': self.config,
            'columns': self.columns,
            'rows': [[_plain(c) for c in row] for row in self.rows],
            'details': _plain(self.details),
        }
        if self.failures:
            tree['failures'] = _plain(self.failures)
        if timings:
            tree['timings'] = {k: round(v, 3) for k, v in sorted(self.timings.items())}
        return tree


##############################################################################
# Functions


def _plain(value):
    # JSON-compatible copy; groups, ordinals and other values become strings.
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [_plain(v) for v in value]
        return sorted(items, key=repr) if isinstance(value, (set, frozenset)) else items
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def indent(rows, has_header=False, header_char='-', delim=' | ', justify='left', prefix='', postfix=''):
    '''
    Lays out a table by column.

    :param rows: a sequence of sequences of cells, one per row.
    :param has_header: whether the first row holds the column names.
    :param header_char: the character used for the separator line below
        the header.
    :param delim: the column delimiter.
    :param justify: ``'left'``, ``'right'`` or ``'center'``.
    :param prefix: a string prepended to each row.
    :param postfix: a string appended to each row.
    :rtype: str
    '''
    # Cells may span several physical lines.
    logical = [[str(cell).split('\n') for cell in row] for row in rows]
    physical = [[list(line) for line in itertools.zip_longest(*row, fillvalue='')] for row in logical]
    widths = [max(len(cell) for cell in column)
              for column in itertools.zip_longest(*itertools.chain.from_iterable(physical), fillvalue='')]
    separator = header_char * (len(prefix) + len(postfix) + sum(widths) + len(delim) * (len(widths) - 1))
    justify = {'center': str.center, 'right': str.rjust, 'left': str.ljust}[justify.lower()]
    output = io.StringIO()
    for lines in physical:
        for line in lines:
            cells = list(line) + [''] * (len(widths) - len(line))
            text = delim.join(justify(cell, width) for cell, width in zip(cells, widths))
            output.write(prefix + text.rstrip() + postfix + '\n')
        if has_header:
            output.write(separator + '\n')
            has_header = False
    return output.getvalue()


def _details_lines(details, depth=0):
    lines = []
    for key, value in details.items():
        if isinstance(value, dict) and value:
            lines.append(f'{"  " * depth}{key}:')
            lines.extend(_details_lines(value, depth + 1))
        else:
            lines.append(f'{"  " * depth}{key}: {json.dumps(value) if isinstance(value, (list, bool)) else value}')
    return lines


def render(report, fmt='text', timings=False):
    '''
    Renders a report in one of ``FORMATS``.

    :type report: Report
    :rtype: str
    '''
    if fmt not in FORMATS:
        raise ValueError(f'Unknown output format: {fmt!r}')
    tree = report.to_dict(timings=timings)
    if fmt == 'json':
        return json.dumps(tree, indent=2, sort_keys=True, ensure_ascii=False) + '\n'
    if fmt == 'csv':
        output = io.StringIO()
        writer = csv.writer(output, lineterminator='\n')
        writer.writerow(tree['columns'])
        writer.writerows(tree['rows'])
        return output.getvalue()
    parts = [f'derivedlimits {report.command}\n']
    if tree['columns']:
        parts.append(indent([tree['columns']] + tree['rows'], has_header=True))
    if tree['details']:
        parts.append('\n'.join(_details_lines(tree['details'])) + '\n')
    for failure in tree.get('failures', []):
        parts.append(f'FAILED: {json.dumps(failure, sort_keys=True)}\n')
    if timings and tree.get('timings'):
        parts.append('\n'.join(f'time {k}: {v:.3f}s' for k, v in tree['timings'].items()) + '\n')
    return ''.join(parts)
