"""Partial calendar dates: a year with optional month and day."""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass

_LEXICAL = re.compile(r"^(\d{1,4})(?:-(\d{2})(?:-(\d{2}))?)?$")


@dataclass(frozen=True, order=True)
class PartialDate:
    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self):
        if self.day is not None and self.month is None:
            raise ValueError("day requires month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")
        if self.day is not None:
            last = calendar.monthrange(self.year, self.month)[1]
            if not 1 <= self.day <= last:
                raise ValueError(
                    f"day {self.day} invalid for {self.year}-{self.month:02d}"
                )

    def lexical(self) -> str:
        """Render as YYYY, YYYY-MM or YYYY-MM-DD."""
        s = f"{self.year:04d}"
        if self.month is not None:
            s += f"-{self.month:02d}"
            if self.day is not None:
                s += f"-{self.day:02d}"
        return s

    @classmethod
    def parse(cls, text: str) -> "PartialDate":
        m = _LEXICAL.match(text.strip())
        if m is None:
            raise ValueError(f"not a partial date: {text!r}")
        year, month, day = m.groups()
        return cls(
            int(year),
            int(month) if month else None,
            int(day) if day else None,
        )

    def compatible(self, other: "PartialDate") -> bool:
        """True when all mutually present components agree."""
        if self.year != other.year:
            return False
        if self.month is not None and other.month is not None:
            if self.month != other.month:
                return False
            if self.day is not None and other.day is not None and self.day != other.day:
                return False
        return True

    def sort_key(self) -> tuple[int, int, int]:
        return (self.year, self.month or 0, self.day or 0)

    @property
    def century(self) -> int:
        """Century by the year-1500-is-the-15th convention."""
        return (self.year - 1) // 100 + 1
