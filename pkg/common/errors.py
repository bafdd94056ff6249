class WorkbenchError(Exception):
    """Base class for every error the workbench raises on purpose."""
    exit_code = 1


class PrecisionInsufficient(WorkbenchError):
    """Requested accuracy cannot be certified at the configured precision."""
    exit_code = 2

    def __init__(self, message: str, achieved: float = None):
        super().__init__(message)
        self.achieved = achieved


class PrecisionExhausted(PrecisionInsufficient):
    """Continued-fraction expansion ran out of certified digits."""

    def __init__(self, message: str, certified: int):
        super().__init__(message)
        self.certified = certified


class CacheCorrupt(WorkbenchError):
    exit_code = 3


class BadConfig(WorkbenchError):
    exit_code = 4


class ResourceExhausted(WorkbenchError):
    pass


class InsufficientTail(WorkbenchError):
    """The requested quantity depends on a partial quotient we do not have."""


class InsufficientQuotients(WorkbenchError):
    pass


class IndexOutOfRange(WorkbenchError):
    pass


class QuadratureNotConverged(WorkbenchError):
    pass


class DegenerateFit(WorkbenchError):
    pass
