'''
Derived Limits: Logging

Console output for the command line tool. Library modules only create
loggers; handlers are installed here, by the CLI.
'''

import logging
import os
import sys

__all__ = ['ConsoleFormatter', 'configure_logging']

VERBOSITY_LEVELS = {
    -1: logging.WARNING,
    0: logging.INFO,
    1: logging.DEBUG,
}


##############################################################################
# Classes


class ConsoleFormatter(logging.Formatter):
    '''
    Colours records by level when writing to a terminal and appends any
    ``extra`` fields (chain counts, matrix shapes, item ids) to the message.
    '''
    _color_map = {
        logging.CRITICAL: '1;31',
        logging.ERROR: '31',
        logging.WARNING: '33',
        logging.INFO: '97',
        logging.DEBUG: '37',
    }

    def __init__(self, *args, stream=None, **kwargs):
        color = kwargs.pop('color', None)
        stream = stream or sys.stderr
        if color is None:
            supported = sys.platform != 'win32' or 'ANSICON' in os.environ
            color = supported and hasattr(stream, 'isatty') and stream.isatty()
        self._color = color
        self._exclude = {'asctime', 'message', 'color_message'} | logging.makeLogRecord({}).__dict__.keys()
        super().__init__(*args, **kwargs)

    def extra_fields(self, record):
        return {k: v for k, v in sorted(record.__dict__.items()) if k not in self._exclude}

    def format(self, record):
        value = super().format(record)
        color = self._color and self._color_map.get(record.levelno)
        return f'\x1b[{color}m{value}\x1b[0m' if color else value

    def formatMessage(self, record):
        value = super().formatMessage(record)
        extra = self.extra_fields(record)
        if not extra:
            return value
        text = ' '.join(f'{k}={v}' for k, v in extra.items())
        return f'{value} [{text}]'


##############################################################################
# Functions


def configure_logging(verbosity=0, stream=None, color=None):
    '''
    Installs a console handler on the package logger.

    :param verbosity: -1 for warnings only, 0 for progress, 1 for debugging.
    :type verbosity: int
    :returns: the installed handler.
    :rtype: logging.Handler
    '''
    level = VERBOSITY_LEVELS[max(-1, min(1, verbosity))]
    stream = stream or sys.stderr
    handler = logging.StreamHandler(stream)
    handler.setFormatter(ConsoleFormatter('%(levelname)s %(name)s: %(message)s', stream=stream, color=color))
    root = logging.getLogger('derivedlimits')
    for existing in list(root.handlers):
        if getattr(existing, '_derivedlimits_console', False):
            root.removeHandler(existing)
    handler._derivedlimits_console = True
    root.addHandler(handler)
    root.setLevel(level)
    return handler
