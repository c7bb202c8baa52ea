"""Exception types shared across the package.

Numerical failures (NoConvergence, DegenerateFixedPoint) map to CLI
exit code 3; everything else that reaches the CLI is either a usage
error (2) or an I/O error (4).
"""


class GramlabError(Exception):
    """Base class for all library errors."""


# -- linear algebra ---------------------------------------------------------

class NonSquare(GramlabError):
    pass


class NonFinite(GramlabError):
    pass


class NotPositiveDefinite(GramlabError):
    pass


class Singular(GramlabError):
    pass


# -- randomness -------------------------------------------------------------

class NonPositiveVariance(GramlabError):
    pass


# -- chain ------------------------------------------------------------------

class ZeroVarianceRow(GramlabError):
    """A row fed to a normalizer has zero norm / zero variance.

    Carries the offending row index; under Gaussian weights this has
    probability zero, so it is a hard error rather than an epsilon patch.
    """

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(message or f"degenerate row {row}")


class RankDeficientInput(GramlabError):
    pass


# -- mean field -------------------------------------------------------------

class NumericalFailure(GramlabError):
    """Parent of failures that map to CLI exit code 3."""


class NoConvergence(NumericalFailure):
    """Fixed-point iteration hit max_iter; carries the last iterate."""

    def __init__(self, message: str, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class DegenerateFixedPoint(NumericalFailure):
    """Iteration collapsed toward the fully-correlated (rank-one) point."""


class NotOddActivation(GramlabError):
    pass


# -- spectra ----------------------------------------------------------------

class BadRatio(GramlabError):
    pass


class TooFewEigenvalues(GramlabError):
    pass


class LengthMismatch(GramlabError):
    pass


class NonPositiveReference(GramlabError):
    pass


class BadParameter(GramlabError):
    pass


# -- random products --------------------------------------------------------

class BadShape(GramlabError):
    pass


class ZeroRow(GramlabError):
    pass


# -- experiments ------------------------------------------------------------

class NoTransient(GramlabError):
    """Series starts at its plateau; no decaying segment to fit."""
