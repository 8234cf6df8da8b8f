class CnrqError(Exception):
    """Base class for every error raised by cnrq_lab."""


class ZeroMarginal(CnrqError, ValueError):
    pass


class DimensionMismatch(CnrqError, ValueError):
    pass


class InertiaTooSmall(CnrqError, ValueError):
    pass


class MalformedTables(CnrqError, ValueError):
    pass


class TooLarge(CnrqError, ValueError):
    pass


class Reducible(CnrqError, ValueError):
    pass


class MismatchedConfigs(CnrqError, ValueError):
    pass


class UnknownQuantity(CnrqError, ValueError):
    pass


class SingularSystem(CnrqError, RuntimeError):
    pass


class Infeasible(CnrqError, RuntimeError):
    pass


class Unbounded(CnrqError, RuntimeError):
    pass


class ConfigError(CnrqError, ValueError):
    """Invalid experiment configuration; collects one message per offending field."""

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
