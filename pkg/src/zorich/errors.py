class ZorichError(Exception):
    pass


class InvalidInput(ZorichError, ValueError):
    pass


class NotAReduction(ZorichError):
    """Deleting the letter leaves a reducible permutation."""


class ResourceLimit(ZorichError):
    pass


class KeaneViolation(ZorichError):
    """The two competing lengths tie, so induction is undefined."""


class RunCapExceeded(ZorichError):
    pass


class ConeViolation(ZorichError):
    pass


class DegenerateInput(ZorichError):
    pass


class GapTooSmall(ZorichError):
    pass


class ModeMismatch(ZorichError):
    pass


class NotFound(ZorichError):
    """A witness search exhausted its budget. Not a refutation."""

    def __init__(self, message: str, trials: int = 0):
        super().__init__(message)
        self.trials = trials
