"""Exception types raised by the numerical routines."""


class HeisenbergWaveError(Exception):
    """Base class; ``claim_id`` is filled in by the verifier when known."""

    claim_id: str | None = None


class GridTooCoarse(HeisenbergWaveError):
    pass


class UnboundedSupport(HeisenbergWaveError):
    pass


class ZeroDenominator(HeisenbergWaveError):
    pass


class WindowUnstable(HeisenbergWaveError):
    pass


class FitUnstable(HeisenbergWaveError):
    pass


class TolNotMet(HeisenbergWaveError):
    pass


class HypothesisFail(HeisenbergWaveError):
    pass


class DegenerateCritical(HeisenbergWaveError):
    pass


class OutOfSupport(HeisenbergWaveError):
    pass


class TailUnstable(HeisenbergWaveError):
    pass


class BudgetExceeded(HeisenbergWaveError):
    pass


class ThresholdNotReached(HeisenbergWaveError):
    pass


class NotAdmissible(HeisenbergWaveError):
    pass
