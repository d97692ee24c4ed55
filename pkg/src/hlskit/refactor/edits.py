"""Ordered, non-overlapping byte-range replacements over a source text."""

from __future__ import annotations

import difflib
from dataclasses import dataclass
from typing import Iterable

__all__ = ["Edit", "EditSet", "RefactorError"]


class RefactorError(ValueError):
    """A transform could not be applied; carries per-site details."""

    def __init__(self, message: str, sites: list[str] | None = None) -> None:
        details = "".join(f"\n  - {s}" for s in sites or [])
        super().__init__(message + details)
        self.sites = sites or []


@dataclass(frozen=True)
class Edit:
    start: int
    end: int
    replacement: str

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"bad edit span [{self.start}, {self.end})")


class EditSet:
    """Replacements sorted by position, rejected if any two overlap."""

    def __init__(self, edits: Iterable[Edit] = ()) -> None:
        self.edits = sorted(edits, key=lambda e: (e.start, e.end))
        for a, b in zip(self.edits, self.edits[1:]):
            if b.start < a.end:
                raise ValueError(f"overlapping edits at [{a.start},{a.end}) and [{b.start},{b.end})")

    def __len__(self) -> int:
        return len(self.edits)

    def __bool__(self) -> bool:
        return bool(self.edits)

    @property
    def is_empty(self) -> bool:
        return not self.edits

    def apply(self, text: str) -> str:
        if self.edits and self.edits[-1].end > len(text):
            raise ValueError("edit extends past end of text")
        out = []
        cursor = 0
        for e in self.edits:
            out.append(text[cursor : e.start])
            out.append(e.replacement)
            cursor = e.end
        out.append(text[cursor:])
        return "".join(out)

    def unified_diff(self, text: str, fromfile: str = "before", tofile: str = "after") -> str:
        new = self.apply(text)
        return "".join(
            difflib.unified_diff(
                text.splitlines(keepends=True),
                new.splitlines(keepends=True),
                fromfile=fromfile,
                tofile=tofile,
            )
        )
