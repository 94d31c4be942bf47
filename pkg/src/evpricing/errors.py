"""Exception hierarchy shared across the package."""


class EvPricingError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EvPricingError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DivergenceError(EvPricingError, ArithmeticError):
    """A requested moment or integral is infinite for the given model."""


class ConvergenceError(EvPricingError, ArithmeticError):
    """An iterative routine exhausted its budget before reaching tolerance.

    The best estimate computed so far is attached so callers can decide
    whether it is still usable.
    """

    def __init__(self, message: str, best_estimate: float, estimated_error: float):
        super().__init__(f"{message} (best estimate {best_estimate!r}, "
                         f"estimated error {estimated_error:.3e})")
        self.best_estimate = best_estimate
        self.estimated_error = estimated_error


class FlatObjectiveError(EvPricingError, ArithmeticError):
    """The objective is flat across the bracketing scan; no maximum found."""


class BracketError(EvPricingError, ValueError):
    """A root finder was called without a sign change on the bracket."""


class SpecStringError(EvPricingError, ValueError):
    """A distribution specification string could not be parsed."""


class IngestError(EvPricingError, ValueError):
    """Input bid data is malformed; the message names the offending line."""
