"""Exception hierarchy shared by every breakwatch module."""

from __future__ import annotations


class BreakwatchError(Exception):
    """Base class for all library errors."""


class EmptySeries(BreakwatchError, ValueError):
    def __init__(self) -> None:
        super().__init__("series is empty")


class NonFiniteValue(BreakwatchError, ValueError):
    def __init__(self, index: int, value: float) -> None:
        self.index = index
        self.value = value
        super().__init__(f"non-finite value {value!r} at index {index}")


class InvalidSeries(BreakwatchError, ValueError):
    """Labels or timestamps violate the series invariants."""


class InvalidConfig(BreakwatchError, ValueError):
    pass


class SeriesTooShort(BreakwatchError, ValueError):
    def __init__(self, n: int, required: int) -> None:
        self.n = n
        self.required = required
        super().__init__(f"series has n={n} observations; at least 2*delta={required} required")


class SampleTooSmall(BreakwatchError, ValueError):
    pass


class InvalidAlpha(BreakwatchError, ValueError):
    def __init__(self, alpha: float) -> None:
        self.alpha = alpha
        super().__init__(f"alpha must lie in (0, 2], got {alpha!r}")


class SegmentTooShort(BreakwatchError, ValueError):
    pass


class OutOfRange(BreakwatchError, ValueError):
    pass


class Underflow(BreakwatchError, RuntimeError):
    pass


class EmptyTree(BreakwatchError, LookupError):
    pass


class EmptyHeap(BreakwatchError, LookupError):
    pass


class WindowTooLarge(BreakwatchError, ValueError):
    pass


class InvalidSpec(BreakwatchError, ValueError):
    pass


class ParseError(BreakwatchError, ValueError):
    def __init__(self, row: int, message: str, path: str | None = None) -> None:
        self.row = row
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(f"{where}row {row}: {message}")


class MalformedLabels(BreakwatchError, ValueError):
    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")
