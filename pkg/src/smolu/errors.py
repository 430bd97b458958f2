"""Exception types raised by the toolkit."""


class AliasingError(ValueError):
    """Grid too coarse for the requested truncation."""


class StepFailure(RuntimeError):
    """Time step produced non-finite values."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t


class EntropyDomainError(ValueError):
    """Density is negative beyond roundoff, so f log f is undefined."""


class BracketError(RuntimeError):
    pass


class NotInRangeError(ValueError):
    """Right-hand side fails the range compatibility condition."""


class SingularSystemError(RuntimeError):
    pass
