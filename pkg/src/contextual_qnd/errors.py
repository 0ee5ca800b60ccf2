"""Exception hierarchy shared by all modules."""


class ContextualQNDError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(ContextualQNDError, ValueError):
    pass


class Singular(ContextualQNDError, ValueError):
    pass


class InvalidInterval(ContextualQNDError, ValueError):
    pass


class DimensionTooLarge(ContextualQNDError, ValueError):
    pass


class SpaceMismatch(ContextualQNDError, ValueError):
    pass


class UnknownOutcome(ContextualQNDError, KeyError):
    pass


class NoNonnegativeDual(ContextualQNDError, ValueError):
    pass


class InfeasibleAlpha(ContextualQNDError, ValueError):
    pass


class InfeasiblePostStates(ContextualQNDError, ValueError):
    """Requested post-measurement states admit no nonnegative failure branch."""


class UnsupportedPriors(ContextualQNDError, ValueError):
    pass


class UnsupportedCombination(ContextualQNDError, ValueError):
    """No quantum formula is available for the requested task/priors."""


class SingularAverage(ContextualQNDError, ValueError):
    pass


class DegenerateBasis(ContextualQNDError, ValueError):
    pass


class NoFeasibleConfig(ContextualQNDError, RuntimeError):
    pass


class DepthExceeded(ContextualQNDError, ValueError):
    pass
