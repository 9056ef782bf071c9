"""Exception and warning types shared across the package."""


class NumericalError(RuntimeError):
    """A computation ran but did not meet its accuracy contract."""


class UnitarityLoss(NumericalError):
    """Propagator failed the unitarity bound even after re-orthogonalization."""


class NoConvergence(NumericalError):
    """Step-doubling refinement exhausted its budget without converging."""


class NotConverged(NumericalError):
    """Truncated-matrix eigenvalues still move when the truncation is doubled."""


class NoSplitDetected(NumericalError):
    """A candidate near-degenerate pair does not resolve into two roots
    at the working precision."""


class PrecisionBudgetExceeded(NumericalError):
    """The requested digits cannot resolve the predicted spacing."""


class RegionOverlap(ValueError):
    """|eps| >= |a|, so the three-region phase-space split does not exist."""


class OddDimension(ValueError):
    """An even-n identity was requested for odd n."""


class EvenDimension(ValueError):
    """An odd-n identity was requested for even n."""


class PrecisionWarning(UserWarning):
    """A result is within a few digits of the working precision floor."""
