"""Error hierarchy. Each error carries the exit code the CLI maps it to."""


class PlanarPercError(Exception):
    exit_code = 3

    @property
    def name(self) -> str:
        return type(self).__name__


class ConfigError(PlanarPercError):
    exit_code = 2


class InvalidWeights(ConfigError):
    pass


class DomainError(ConfigError):
    pass


class NumericError(PlanarPercError):
    exit_code = 3


class NotAdmissible(NumericError):
    pass


class Degenerate(NumericError):
    pass


class RootFailure(NumericError):
    pass


class BracketFailure(NumericError):
    pass


class TuningFailure(NumericError):
    pass


class TailTruncationTooCoarse(NumericError):
    pass


class Inconclusive(NumericError):
    pass


class WindowOverflow(NumericError):
    pass


class TableExhausted(NumericError):
    pass


class InsufficientTailSamples(NumericError):
    pass


class WindowTooSmall(NumericError):
    pass


class BudgetExceeded(NumericError):
    pass


class NonconvergentTail(NumericError):
    pass


class VerificationFailure(PlanarPercError):
    exit_code = 4
