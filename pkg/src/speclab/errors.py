"""Exception types raised across the package.

Each class name doubles as the error enum name printed by the command-line
front end, so keep them stable.
"""


class SpeclabError(Exception):
    """Base class for all package errors."""


class InvalidParameter(SpeclabError, ValueError):
    pass


class DegenerateBoundary(SpeclabError):
    pass


class MeshMismatch(SpeclabError):
    pass


class NonzeroTrace(SpeclabError):
    pass


class UnsupportedDegree(SpeclabError):
    pass


class DegreeOutOfRange(SpeclabError, ValueError):
    pass


class FactorizationFailure(SpeclabError):
    pass


class NoConvergence(SpeclabError):
    pass


class NonFlatMetric(SpeclabError):
    pass


class CornerDomain(SpeclabError):
    pass
