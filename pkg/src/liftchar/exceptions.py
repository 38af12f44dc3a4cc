"""Exception hierarchy shared by all liftchar modules."""


class LiftCharError(Exception):
    """Base class for every error raised by liftchar."""


class InvalidConfigurationError(LiftCharError, ValueError):
    """A size, depth, letter or tolerance is outside its admissible range."""


class DimensionMismatchError(LiftCharError, ValueError):
    """Matrix shapes are not conformable."""


class NotContractiveError(LiftCharError, ValueError):
    """A tuple (or a gamma) violates the contraction condition beyond tolerance.

    ``lambda_max`` carries the offending eigenvalue or norm when known.
    """

    def __init__(self, message, lambda_max=None):
        super().__init__(message)
        self.lambda_max = lambda_max


class ConvergenceError(LiftCharError, RuntimeError):
    """An iteration did not settle within ``max_iter`` steps."""

    def __init__(self, message, last_difference=None, iterations=None):
        super().__init__(message)
        self.last_difference = last_difference
        self.iterations = iterations


class MalformedLiftingError(LiftCharError, ValueError):
    """Block data that cannot come from a contractive lifting."""


class NotReducedError(LiftCharError, ValueError):
    """An operation that needs a reduced lifting received one that is not."""


class NotFixedError(LiftCharError, ValueError):
    """A matrix that should be a fixed point of a CP map is not."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FileFormatError(LiftCharError, ValueError):
    """A matrix file does not follow the JSON layout."""
