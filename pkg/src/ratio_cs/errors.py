"""Exception hierarchy shared by every module."""


class RatioCSError(Exception):
    """Base class for domain errors (CLI maps these to exit code 1)."""


class RankDeficient(RatioCSError):
    pass


class InvalidSparsity(RatioCSError):
    pass


class ZeroVector(RatioCSError):
    pass


class ZeroIterate(RatioCSError):
    pass


class SingularWeightSystem(RatioCSError):
    pass


class EmptyKernel(RatioCSError):
    pass


class KernelTooLarge(RatioCSError):
    pass


class TrivialSignal(RatioCSError):
    pass


class BetaOutOfRange(RatioCSError):
    pass


class BudgetExceeded(RatioCSError):
    pass
