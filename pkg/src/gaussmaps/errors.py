"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`GaussMapError`.  Subclasses that signal a violated mathematical
precondition also derive from :class:`MathError`, which the CLI maps to
exit code 3.
"""

from __future__ import annotations


class GaussMapError(Exception):
    """Base class for all package errors."""


class MathError(GaussMapError):
    """A mathematical precondition does not hold for the given data."""


class ParseError(GaussMapError, ValueError):
    """An expression or point string could not be parsed."""


# cplx-mero
class RootFindingFailed(MathError):
    pass


class NonUnitVector(MathError, ValueError):
    pass


class SingularMatrix(MathError, ValueError):
    pass


class DegreeCapExceeded(MathError, ValueError):
    pass


# conformal-metric
class InvalidMetric(MathError, ValueError):
    """The conformal factor is not finite and positive on the domain."""


class EvaluatedAtPuncture(MathError, ValueError):
    pass


class ConstantFunction(MathError, ValueError):
    pass


class PunctureNotIsolated(MathError, ValueError):
    pass


class InfiniteDistance(MathError):
    pass


class PreconditionViolated(MathError, ValueError):
    pass


class QOutOfRange(MathError, ValueError):
    pass


# domain-mesh
class DegenerateRegion(MathError, ValueError):
    pass


class NoBoundary(MathError):
    pass


class PoleOnPath(MathError):
    pass


# surface-builders
class PeriodObstruction(MathError):
    pass


class NotSimplyConnected(MathError):
    pass


class StepSizeUnderflow(MathError):
    pass


class ConstantHyperbolicGaussMap(MathError):
    pass


class DegenerateGauss(MathError):
    pass


class ExactnessObstruction(MathError):
    pass


class DegenerateData(MathError, ValueError):
    pass


class UnsupportedChart(GaussMapError, ValueError):
    pass


class EmptyMesh(GaussMapError, ValueError):
    pass


# gaussmap-analysis
class EpsTooLarge(MathError, ValueError):
    pass


class UnresolvedComponent(MathError):
    """An island boundary is too coarsely resolved; refine the mesh."""


class InvalidAlphas(MathError, ValueError):
    pass


# cli
class UnknownEntry(GaussMapError, KeyError):
    pass
