"""Fixed-point formats, quantization, and minimal bit-width search.

A format is W total bits with I integer bits (sign bit counted inside I
when signed), so F = W - I fractional bits and a quantization step of
2^-F. Quantization is exact: values are rounded half-to-even on the
fixed-point grid using rational arithmetic, then saturated to the
representable range, never wrapped. This keeps idempotence and the
reference saturation values exact even where float64 cannot represent
them (e.g. 2^19 - 2^-44).

The width search reduces one typedef at a time in declaration order,
holding the others at their committed widths, with a verification oracle
consulted at every probe. Accumulator-role typedefs are never reduced;
coupled typedefs are reported, not searched.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Protocol, Sequence

__all__ = [
    "FixedPointFormat",
    "quantize",
    "min_integer_bits",
    "TypeBudget",
    "ROLE_ACCUMULATOR",
    "ROLE_CANDIDATE",
    "ROLE_COUPLED",
    "load_budgets",
    "OracleResult",
    "VerificationOracle",
    "TraceQuantizationOracle",
    "CommandOracle",
    "OracleError",
    "BaselineFailure",
    "SearchEntry",
    "SearchReport",
    "search_widths",
    "precision_first_probe",
]

MAX_TOTAL_BITS = 64


class OracleError(RuntimeError):
    """Verification oracle misbehaved (nondeterminism or non-monotone)."""


class BaselineFailure(RuntimeError):
    """The all-64-bit assignment does not pass verification."""


@dataclass(frozen=True)
class FixedPointFormat:
    """W total bits, I integer bits (sign inside I when signed)."""

    total_bits: int
    integer_bits: int
    signed: bool = True

    def __post_init__(self) -> None:
        if not 1 <= self.integer_bits <= self.total_bits <= MAX_TOTAL_BITS:
            raise ValueError(
                f"need 1 <= I <= W <= {MAX_TOTAL_BITS}, got W={self.total_bits}, I={self.integer_bits}"
            )

    @property
    def fractional_bits(self) -> int:
        return self.total_bits - self.integer_bits

    @property
    def step(self) -> Fraction:
        return Fraction(1, 1 << self.fractional_bits)

    @property
    def min_value(self) -> Fraction:
        if self.signed:
            return Fraction(-(1 << (self.integer_bits - 1)))
        return Fraction(0)

    @property
    def max_value(self) -> Fraction:
        """Largest representable value: one step below the open upper bound."""
        if self.signed:
            upper = Fraction(1 << (self.integer_bits - 1))
        else:
            upper = Fraction(1 << self.integer_bits)
        return upper - self.step

    def to_json(self) -> dict:
        return {"total_bits": self.total_bits, "integer_bits": self.integer_bits, "signed": self.signed}

    @classmethod
    def from_json(cls, d: dict) -> "FixedPointFormat":
        return cls(int(d["total_bits"]), int(d["integer_bits"]), bool(d["signed"]))


def quantize(value, fmt: FixedPointFormat) -> Fraction:
    """Round value to the nearest grid multiple of 2^-F (ties to even),
    then saturate to the representable range."""
    v = Fraction(value)
    raw = round(v / fmt.step)  # Fraction.__round__ is exact half-to-even
    lo = fmt.min_value / fmt.step
    hi = fmt.max_value / fmt.step
    raw = max(lo, min(hi, raw))
    return raw * fmt.step


def min_integer_bits(observed_min, observed_max, signed: bool) -> int:
    """Smallest I whose range covers both observed bounds.

    Signed range is [-2^(I-1), 2^(I-1)); unsigned is [0, 2^I). Bounds with
    magnitude at or beyond 2^63 cannot fit any supported format.
    """
    lo = Fraction(observed_min)
    hi = Fraction(observed_max)
    if lo > hi:
        raise ValueError(f"observed_min {observed_min} exceeds observed_max {observed_max}")
    if not signed and lo < 0:
        raise ValueError("unsigned format cannot represent negative observations")
    for bits in range(1, MAX_TOTAL_BITS + 1):
        if signed:
            range_lo = Fraction(-(1 << (bits - 1)))
            range_hi = Fraction(1 << (bits - 1))
        else:
            range_lo = Fraction(0)
            range_hi = Fraction(1 << bits)
        if lo >= range_lo and hi < range_hi:
            return bits
    raise ValueError(f"observed range [{observed_min}, {observed_max}] exceeds the 2^63 magnitude limit")


# ---------------------------------------------------------------------------
# Budgets
# ---------------------------------------------------------------------------

ROLE_ACCUMULATOR = "accumulator"
ROLE_CANDIDATE = "candidate"
ROLE_COUPLED = "coupled"
_ROLES = (ROLE_ACCUMULATOR, ROLE_CANDIDATE, ROLE_COUPLED)

ACCUMULATOR_MIN_BITS = 64  # scalability exception: accumulators stay at full width


@dataclass(frozen=True)
class TypeBudget:
    """Observed value range and search policy for one typedef."""

    typedef_name: str
    role: str
    observed_min: float
    observed_max: float
    coupling: str = ""

    def __post_init__(self) -> None:
        if self.role not in _ROLES:
            raise ValueError(f"role must be one of {_ROLES}, got {self.role!r}")
        if self.observed_min > self.observed_max:
            raise ValueError(f"{self.typedef_name}: observed_min exceeds observed_max")

    @property
    def signed(self) -> bool:
        return self.observed_min < 0

    def fixed_integer_bits(self) -> int:
        return min_integer_bits(self.observed_min, self.observed_max, self.signed)


def load_budgets(path: str | os.PathLike) -> list[TypeBudget]:
    """Budget file: JSON list of {typedef_name, role, observed_min,
    observed_max[, coupling]}."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("budget file must hold a JSON list")
    return [
        TypeBudget(
            typedef_name=d["typedef_name"],
            role=str(d["role"]).lower(),
            observed_min=float(d["observed_min"]),
            observed_max=float(d["observed_max"]),
            coupling=d.get("coupling", ""),
        )
        for d in data
    ]


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    passed: bool
    relative_error: float


class VerificationOracle(Protocol):
    def evaluate(self, assignment: Mapping[str, FixedPointFormat]) -> OracleResult:
        """Deterministically verify a per-typedef format assignment."""


class TraceQuantizationOracle:
    """Oracle that quantizes recorded value traces per typedef.

    The relative error of an assignment is the worst per-value error
    |q - v| / max(|v|, floor) over every type's trace; the assignment
    passes when that error is within tolerance. Error is non-increasing
    in W at fixed I (finer nested grids), which makes this oracle safe
    for binary search.
    """

    def __init__(
        self,
        traces: Mapping[str, Sequence[float]],
        tolerance: float = 1e-6,
        magnitude_floor: float = 1e-300,
    ) -> None:
        self.traces = {k: tuple(v) for k, v in traces.items()}
        self.tolerance = tolerance
        self.magnitude_floor = magnitude_floor

    def evaluate(self, assignment: Mapping[str, FixedPointFormat]) -> OracleResult:
        worst = 0.0
        for name, fmt in assignment.items():
            for v in self.traces.get(name, ()):
                q = quantize(v, fmt)
                err = abs(float(q) - v) / max(abs(v), self.magnitude_floor)
                worst = max(worst, err)
        return OracleResult(passed=worst <= self.tolerance, relative_error=worst)


class CommandOracle:
    """Oracle backed by an external command.

    The command receives the assignment as JSON on stdin
    ({typedef: {total_bits, integer_bits, signed}}) and must print a line
    containing PASS or FAIL plus a REL_ERR=<num> line.
    """

    def __init__(self, command: Sequence[str] | str) -> None:
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ValueError("oracle command is empty")

    def evaluate(self, assignment: Mapping[str, FixedPointFormat]) -> OracleResult:
        payload = json.dumps({name: fmt.to_json() for name, fmt in assignment.items()})
        proc = subprocess.run(self.argv, input=payload, capture_output=True, text=True)
        out = proc.stdout or ""
        verdict = None
        rel_err = None
        for line in out.splitlines():
            token = line.strip()
            if token == "PASS":
                verdict = True
            elif token == "FAIL":
                verdict = False
            elif token.startswith("REL_ERR="):
                rel_err = float(token.split("=", 1)[1])
        if verdict is None or rel_err is None:
            raise OracleError(f"oracle output missing PASS/FAIL or REL_ERR (stdout: {out!r})")
        return OracleResult(passed=verdict, relative_error=rel_err)


class _CheckedOracle:
    """Wraps an oracle, re-checking repeated assignments for determinism."""

    def __init__(self, oracle: VerificationOracle) -> None:
        self.oracle = oracle
        self.history: dict[tuple, bool] = {}

    def evaluate(self, assignment: Mapping[str, FixedPointFormat]) -> OracleResult:
        key = tuple(sorted((n, f.total_bits, f.integer_bits, f.signed) for n, f in assignment.items()))
        result = self.oracle.evaluate(assignment)
        if key in self.history and self.history[key] != result.passed:
            raise OracleError("oracle nondeterminism: same assignment produced different verdicts")
        self.history[key] = result.passed
        return result


# ---------------------------------------------------------------------------
# Width search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchEntry:
    typedef_name: str
    role: str
    integer_bits: int
    before_bits: int
    after_bits: int
    note: str = ""

    @property
    def reduction_percent(self) -> float:
        return 100.0 * (self.before_bits - self.after_bits) / self.before_bits

    def to_json(self) -> dict:
        return {
            "typedef_name": self.typedef_name,
            "role": self.role,
            "integer_bits": self.integer_bits,
            "before_bits": self.before_bits,
            "after_bits": self.after_bits,
            "reduction_percent": self.reduction_percent,
            "note": self.note,
        }


@dataclass(frozen=True)
class SearchReport:
    entries: tuple[SearchEntry, ...]
    formats: Mapping[str, FixedPointFormat]

    def entry(self, typedef_name: str) -> SearchEntry:
        for e in self.entries:
            if e.typedef_name == typedef_name:
                return e
        raise KeyError(typedef_name)

    def to_json(self) -> dict:
        return {
            "entries": [e.to_json() for e in self.entries],
            "formats": {n: f.to_json() for n, f in self.formats.items()},
        }

    def render_text(self) -> str:
        header = f"{'typedef':<16} {'role':<12} {'I':>3} {'before':>7} {'after':>6} {'reduction':>10}  note"
        lines = [header, "-" * len(header)]
        for e in self.entries:
            lines.append(
                f"{e.typedef_name:<16} {e.role:<12} {e.integer_bits:>3} {e.before_bits:>7} "
                f"{e.after_bits:>6} {e.reduction_percent:>9.1f}%  {e.note}"
            )
        return "\n".join(lines) + "\n"


def search_widths(
    budgets: Sequence[TypeBudget],
    oracle: VerificationOracle,
    floor_bits: int = 2,
) -> SearchReport:
    """Minimize each candidate typedef's width under verification.

    Integer bits are fixed per type from the observed range. Types are
    processed in declaration order; for each candidate, the smallest
    passing W in [max(I, floor_bits), 64] is found by binary search with
    the other types held at their current (committed) formats, then
    committed before moving on. Accumulators are held at 64 bits, coupled
    types are reported untouched.
    """
    if not budgets:
        raise ValueError("no budgets given")
    names = [b.typedef_name for b in budgets]
    if len(set(names)) != len(names):
        raise ValueError("duplicate typedef names in budgets")
    checked = _CheckedOracle(oracle)

    formats: dict[str, FixedPointFormat] = {}
    int_bits: dict[str, int] = {}
    for b in budgets:
        bits = b.fixed_integer_bits()
        int_bits[b.typedef_name] = bits
        formats[b.typedef_name] = FixedPointFormat(MAX_TOTAL_BITS, bits, b.signed)

    baseline = checked.evaluate(formats)
    if not baseline.passed:
        raise BaselineFailure(
            f"all-64-bit baseline fails verification (relative error {baseline.relative_error:g})"
        )

    entries: list[SearchEntry] = []
    for b in budgets:
        name = b.typedef_name
        if b.role == ROLE_ACCUMULATOR:
            entries.append(
                SearchEntry(name, b.role, int_bits[name], MAX_TOTAL_BITS, MAX_TOTAL_BITS,
                            note=f"accumulator: held at {ACCUMULATOR_MIN_BITS} bits")
            )
            continue
        if b.role == ROLE_COUPLED:
            note = b.coupling or "coupled: not searched"
            entries.append(
                SearchEntry(name, b.role, int_bits[name], MAX_TOTAL_BITS, MAX_TOTAL_BITS, note=note)
            )
            continue

        def passes(width: int) -> bool:
            trial = dict(formats)
            trial[name] = FixedPointFormat(width, int_bits[name], b.signed)
            return checked.evaluate(trial).passed

        lo = max(int_bits[name], floor_bits)
        hi = MAX_TOTAL_BITS
        while lo < hi:
            mid = (lo + hi) // 2
            if passes(mid):
                hi = mid
            else:
                lo = mid + 1
        if not passes(lo):  # final verification of the committed width
            raise OracleError(
                f"oracle is not monotone in width for {name}: W={lo} failed after the search accepted it"
            )
        formats[name] = FixedPointFormat(lo, int_bits[name], b.signed)
        entries.append(SearchEntry(name, b.role, int_bits[name], MAX_TOTAL_BITS, lo))

    return SearchReport(entries=tuple(entries), formats=formats)


def precision_first_probe(
    typedef_name: str,
    initial: FixedPointFormat,
    oracle: VerificationOracle,
    min_int_bits: int = 1,
) -> FixedPointFormat:
    """At fixed total width, find the smallest integer width that passes.

    Shrinking I grows F, trading range for precision; the scan starts at
    the smallest I that still covers the observed range. Raises with the
    best relative error seen when no I passes.
    """
    width = initial.total_bits
    if min_int_bits > width:
        raise ValueError("min_int_bits exceeds the total width")
    best_err: float | None = None
    for bits in range(min_int_bits, width + 1):
        fmt = FixedPointFormat(width, bits, initial.signed)
        result = oracle.evaluate({typedef_name: fmt})
        if result.passed:
            return fmt
        if best_err is None or result.relative_error < best_err:
            best_err = result.relative_error
    raise OracleError(
        f"no integer width in [{min_int_bits}, {width}] passes at W={width}; "
        f"best relative error {best_err:g}"
    )
