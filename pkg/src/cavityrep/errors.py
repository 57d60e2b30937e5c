"""Exception types shared across the package."""


class RepeaterError(Exception):
    """Base class for all errors raised by cavityrep."""


class ParameterError(RepeaterError, ValueError):
    """A physical or numerical parameter is outside its allowed range."""


class InvalidStateError(RepeaterError, ValueError):
    """A density matrix is not Hermitian, not normalized or not positive."""


class DegeneratePurificationError(RepeaterError):
    """Purification heralds success with zero probability."""


class DivergenceError(RepeaterError):
    """An expected waiting time is infinite (a success probability is zero)."""


class ConsistencyError(RepeaterError):
    """An internal normalization or bookkeeping check failed."""
