'''
Derived Limits: Exceptions
'''

__all__ = [
    'DerivedLimitsError', 'InputError', 'CapExceeded', 'VerificationError',
    'SchemaError', 'RingError', 'DimensionMismatch', 'NotAComplex', 'PosetError', 'NotFunctorial',
    'MissingTransitionMap', 'NotExactInput', 'GeneratorOutOfGround', 'NotCoherent', 'NotACocycle',
    'NotRepresentable', 'ParameterNotLarger',
    'ChainCapExceeded', 'SubsetCapExceeded', 'PosetCapExceeded', 'FamilyCapExceeded', 'BoundExceeded',
    'TrivializationNotFound',
]


##############################################################################
# Exceptions


class DerivedLimitsError(Exception):
    '''
    Base class for every error raised by this package.
    '''
    exit_code = 1


class InputError(DerivedLimitsError):
    '''
    The data handed to a builder or operation is invalid.
    '''
    exit_code = 1


class CapExceeded(DerivedLimitsError):
    '''
    A configured resource cap would be exceeded.

    Computations never truncate silently; they raise this instead.
    '''
    exit_code = 2
    resource = 'resource'

    def __init__(self, cap, needed, message=None):
        super().__init__(message or f'{self.resource} cap exceeded: needed {needed}, cap is {cap}')
        self.cap = cap
        self.needed = needed


class VerificationError(DerivedLimitsError):
    '''
    An internal consistency check failed.
    '''
    exit_code = 3

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class SchemaError(InputError):

    def __init__(self, message, path=None, line=None):
        location = ''
        if path:
            location += f' at {path}'
        if line is not None:
            location += f' (line {line})'
        super().__init__(f'{message}{location}')
        self.path = path
        self.line = line


class RingError(InputError):

    def __init__(self, coeff):
        super().__init__(f'Invalid coefficient ring: {coeff!r}')
        self.coeff = coeff


class DimensionMismatch(InputError):

    def __init__(self, message, expected=None, actual=None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class NotAComplex(InputError):

    def __init__(self, degree, entry):
        row, col, value = entry
        super().__init__(f'd^{degree + 1} o d^{degree} is not zero: entry ({row}, {col}) is {value}')
        self.degree = degree
        self.entry = entry


class PosetError(InputError):

    def __init__(self, message, elements=()):
        super().__init__(message)
        self.elements = tuple(elements)


class NotFunctorial(InputError):

    def __init__(self, x, y, z):
        super().__init__(f'Transition maps do not compose: p[{x},{z}] != p[{x},{y}] p[{y},{z}]')
        self.triple = (x, y, z)


class MissingTransitionMap(InputError):

    def __init__(self, x, y):
        super().__init__(f'No transition map given for the covering pair {x} <= {y}')
        self.pair = (x, y)


class NotExactInput(InputError):

    def __init__(self, element, reason):
        super().__init__(f'Sequence is not exact at {element}: {reason}')
        self.element = element
        self.reason = reason


class GeneratorOutOfGround(InputError):

    def __init__(self, generator, extra):
        super().__init__(f'Generator {sorted(generator, key=repr)} has points outside the ground set: '
                         f'{sorted(extra, key=repr)}')
        self.generator = generator
        self.extra = extra


class NotCoherent(InputError):

    def __init__(self, tuple_, coordinate):
        super().__init__(f'Family is not coherent: tuple {tuple_} fails at coordinate {coordinate!r}')
        self.tuple = tuple_
        self.coordinate = coordinate


class NotACocycle(InputError):

    def __init__(self, degree):
        super().__init__(f'Cochain of degree {degree} is not a cocycle')
        self.degree = degree


class NotRepresentable(InputError):

    def __init__(self, degree):
        super().__init__(f'Cohomology class in degree {degree} is not represented by a coherent family')
        self.degree = degree


class ParameterNotLarger(InputError):

    def __init__(self, name, old, new):
        super().__init__(f'Parameter {name} must not shrink: {new} < {old}')
        self.name = name
        self.old = old
        self.new = new


class ChainCapExceeded(CapExceeded):
    resource = 'Chain count'


class SubsetCapExceeded(CapExceeded):
    resource = 'Subset enumeration'


class PosetCapExceeded(CapExceeded):
    resource = 'Poset size'


class FamilyCapExceeded(CapExceeded):
    resource = 'Family enumeration'


class BoundExceeded(CapExceeded):
    resource = 'Ordinal bound'

    def __init__(self, cap, needed):
        super().__init__(cap, needed, f'Ordinal {needed} is not below the configured bound {cap}')


class TrivializationNotFound(VerificationError):

    def __init__(self, stage):
        super().__init__(f'No trivialization found at stage {stage}', stage=stage)
        self.stage = stage
