"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`PedfError`,
so the CLI can report ``<ClassName>: message`` as a single parseable line.
"""


class PedfError(Exception):
    """Base class for all package errors."""

    @property
    def category(self) -> str:
        return type(self).__name__


# event log
class LogError(PedfError):
    pass


class EmptyLog(LogError):
    pass


class MissingColumn(LogError):
    pass


class BadTimestamp(LogError):
    def __init__(self, row: int, value: str):
        super().__init__(f"row {row}: cannot parse timestamp {value!r}")
        self.row = row
        self.value = value


class EmptyLabel(LogError):
    pass


class AlreadyAugmented(LogError):
    pass


class DegenerateCase(LogError):
    pass


class UnreachableEnd(LogError):
    pass


# fitting
class NoPoints(PedfError):
    pass


class BadClusterId(PedfError):
    pass


class NoRows(PedfError):
    pass


class ArityMismatch(PedfError):
    pass


# network
class EmptyTraining(PedfError):
    pass


class FitError(PedfError):
    """A link or node failed to fit; the message names which one."""


class UnknownEvent(PedfError):
    def __init__(self, labels):
        labels = sorted(set(labels))
        super().__init__("unknown event label(s): " + ", ".join(map(repr, labels)))
        self.labels = labels


class DeadEnd(PedfError):
    pass


class NotTrained(PedfError):
    pass


class VersionMismatch(PedfError):
    pass


class CorruptModel(PedfError):
    pass


class ConfigError(PedfError):
    pass
