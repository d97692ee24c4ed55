"""Static array capacities for pointer-to-array conversion.

Capacities come from observed runtime sizes, over-provisioned for
production workloads; entries in the map always win over the heuristic.
An entry may name a constant (e.g. NMAX) to be emitted as a #define and
used in the array brackets instead of the raw number.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

__all__ = ["Capacity", "SizeMap", "suggest_capacity"]


@dataclass(frozen=True)
class Capacity:
    value: int
    alias: str | None = None

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValueError("capacity must be >= 1")

    def render(self) -> str:
        return self.alias if self.alias else str(self.value)


class SizeMap:
    """symbol -> per-dimension capacities."""

    def __init__(self, entries: Mapping[str, Sequence[Capacity]]) -> None:
        self.entries: dict[str, tuple[Capacity, ...]] = {}
        for symbol, dims in entries.items():
            dims = tuple(dims)
            if not dims:
                raise ValueError(f"{symbol}: at least one dimension required")
            self.entries[symbol] = dims

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.entries

    def __getitem__(self, symbol: str) -> tuple[Capacity, ...]:
        return self.entries[symbol]

    def aliases(self) -> dict[str, int]:
        """Named constants used anywhere in the map, name -> value."""
        out: dict[str, int] = {}
        for dims in self.entries.values():
            for c in dims:
                if c.alias:
                    if c.alias in out and out[c.alias] != c.value:
                        raise ValueError(f"alias {c.alias} bound to both {out[c.alias]} and {c.value}")
                    out[c.alias] = c.value
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "SizeMap":
        """JSON form: {symbol: [capacity, ...]} where each capacity is an
        int or {"name": ..., "value": ...}."""
        entries: dict[str, list[Capacity]] = {}
        for symbol, dims in data.items():
            if not isinstance(dims, list):
                raise ValueError(f"{symbol}: expected a list of capacities")
            caps = []
            for d in dims:
                if isinstance(d, dict):
                    caps.append(Capacity(value=int(d["value"]), alias=str(d["name"])))
                else:
                    caps.append(Capacity(value=int(d)))
            entries[symbol] = caps
        return cls(entries)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SizeMap":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def suggest_capacity(observed: int, factor: float = 10.0) -> int:
    """Next power of two at or above factor * observed."""
    if observed < 1:
        raise ValueError("observed size must be >= 1")
    if factor <= 0:
        raise ValueError("factor must be positive")
    need = observed * factor
    if need > 2.0**63:
        raise OverflowError(f"capacity for {observed} at factor {factor} exceeds 2^63")
    cap = 1
    while cap < need:
        cap *= 2
    return cap
