"""Exception types raised across the package."""


class LgolError(ValueError):
    """Base class for data errors (the CLI maps these to exit code 1)."""


class NoZonedStops(LgolError):
    pass


class FormatError(LgolError):
    def __init__(self, message, file=None, route_id=None, field=None):
        self.file = file
        self.route_id = route_id
        self.field = field
        where = ", ".join(
            f"{k}={v}" for k, v in (("file", file), ("route", route_id), ("field", field)) if v is not None
        )
        super().__init__(f"{message} ({where})" if where else message)


class EmptyCorpus(LgolError):
    pass


class EmptyInput(LgolError):
    pass


class MissingActualSequence(LgolError):
    pass


class StationMismatch(LgolError):
    pass


class IndexMismatch(LgolError):
    pass


class InfeasibleAnchors(LgolError):
    pass


class EmptyZone(LgolError):
    pass


class ZoneMismatch(LgolError):
    pass


class NotPermutation(LgolError):
    pass


class InsufficientData(LgolError):
    pass


class InvalidConfig(LgolError):
    pass
