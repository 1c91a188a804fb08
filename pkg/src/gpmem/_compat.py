"""Backports of standard-library names missing on older interpreters."""

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):  # type: ignore[no-redef]
        """Backport of :class:`enum.StrEnum` (str() and format() give the value)."""

        __str__ = str.__str__
        __format__ = str.__format__

__all__ = ["StrEnum"]
