"""Exception hierarchy.

Every error raised for a violated mathematical precondition derives from
:class:`QSpectraError`; the CLI maps those to exit status 1.
"""


class QSpectraError(Exception):
    """Base class for domain errors."""


class InvalidArgument(QSpectraError, ValueError):
    """An argument is outside the documented domain (e.g. ``alpha == 0``)."""


class SingularOperator(QSpectraError):
    """A linear solve hit a matrix whose smallest singular value is below tolerance."""


class OnSpectrum(SingularOperator):
    """A point expected in the S-resolvent set lies on the S-spectrum."""


class EigenFailure(QSpectraError):
    """The dense eigenvalue iteration did not converge."""


class DependentInput(QSpectraError):
    """Vectors handed to Gram-Schmidt are right-linearly dependent."""


class NotIsolated(QSpectraError):
    """The requested set of spheres is not an isolated part of the spectrum."""


class NotInSpectrum(QSpectraError):
    """A requested sphere does not match any computed spectral sphere."""


class RankMismatch(QSpectraError):
    """Projector rank disagrees with the summed multiplicities."""


class SpectraNotDisjoint(QSpectraError):
    """Restricted spectra overlap at tolerance."""


class ZeroImage(QSpectraError):
    """``A x`` vanishes, so the rank-one construction has nothing to work with."""


class DegenerateCase(QSpectraError):
    """``A x == x``; the rank-one construction degenerates."""


class DivergentSeed(QSpectraError):
    """Geometric seed ``q**i`` does not decay (``|q| >= 1``)."""


class ParseError(QSpectraError):
    """Input file does not match the expected schema."""
