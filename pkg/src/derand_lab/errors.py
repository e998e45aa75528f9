"""Exception hierarchy shared by all modules."""


class DerandError(Exception):
    """Base class for every error raised by derand_lab."""


class ConfigError(DerandError, ValueError):
    """Malformed input file or inconsistent command-line configuration."""


# channel_core
class NonStochasticRow(DerandError, ValueError):
    pass


class NegativeEntry(DerandError, ValueError):
    pass


class DimensionMismatch(DerandError, ValueError):
    pass


class SymbolOutOfRange(DerandError, ValueError):
    pass


# codebook
class RateTooLarge(DerandError, ValueError):
    pass


class EmptyAlphabet(DerandError, ValueError):
    pass


# lll
class Timeout(DerandError):
    """Resampling budget exhausted before every bad event was avoided."""

    def __init__(self, message, resamples=0):
        super().__init__(message)
        self.resamples = resamples


# problems
class DegreeTooSmall(DerandError, ValueError):
    pass


class InfeasibleDegreeSequence(DerandError, ValueError):
    pass


class RejectionBudgetExhausted(DerandError):
    pass


class ComponentCountMismatch(DerandError, ValueError):
    pass


class InfeasibleOccurrenceBound(DerandError, ValueError):
    pass


class LengthMismatch(DerandError, ValueError):
    pass


# elsearch
class OutputTooLong(DerandError, ValueError):
    pass


class NotFound(DerandError):
    """No seed within the length/budget limits passed the verifier."""


# hitting
class RetriesExhausted(DerandError):
    pass


class FamilyTooLarge(DerandError, ValueError):
    pass


class IndexOutOfRange(DerandError, IndexError):
    pass
