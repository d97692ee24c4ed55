"""Design-space specifications for HLS directive sweeps.

A spec declares optimization dimensions (directive type, optional target
resource path, candidate values). Expansion enumerates the full cross
product of dimension values; emission renders one Tcl directive script per
design point on top of a baseline script and records everything in a CSV
manifest. Parsing keeps each value's source text verbatim so emitted
scripts and manifests are byte-stable across runs.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import yaml

__all__ = [
    "DesignSpaceError",
    "DimensionValue",
    "Dimension",
    "DesignSpaceSpec",
    "DesignPoint",
    "DirectiveTemplates",
    "ManifestRow",
    "Manifest",
    "parse_spec",
    "serialize_spec",
    "expand",
    "emit_directives",
    "compute_interleave_requirement",
    "DIRECTIVE_TYPES",
    "RESULT_COLUMNS",
]


class DesignSpaceError(ValueError):
    """Invalid design-space specification or template."""


DIRECTIVE_TYPES = ("DESIGN_GOAL", "CLOCK_PERIOD", "UNROLL", "PIPELINE_II", "INTERLEAVE")
_PATH_REQUIRED = frozenset({"UNROLL", "PIPELINE_II", "INTERLEAVE"})
_KEYWORDS = frozenset({"no", "none", "area", "latency"})
_INT_RE = re.compile(r"^[+-]?\d+$")
_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class DimensionValue:
    """One candidate value, keeping the exact source text.

    A value is a keyword (no/none/area/latency), an integer, or a decimal
    number; ``text`` round-trips through serialization unchanged.
    """

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise DesignSpaceError("empty dimension value")
        if not (self.is_keyword or self.is_int or self.is_decimal):
            raise DesignSpaceError(f"value {self.text!r} is not a keyword, integer, or decimal")

    @property
    def is_keyword(self) -> bool:
        return self.text in _KEYWORDS

    @property
    def is_int(self) -> bool:
        return bool(_INT_RE.match(self.text))

    @property
    def is_decimal(self) -> bool:
        return not self.is_keyword and bool(_DECIMAL_RE.match(self.text))

    @property
    def is_skip(self) -> bool:
        """True for the no-directive forms ("no" unroll, "none" pipeline)."""
        return self.text in ("no", "none")

    def as_int(self) -> int:
        return int(self.text)

    def as_float(self) -> float:
        return float(self.text)

    def __str__(self) -> str:
        return self.text


def _check_value(dim_id: str, directive_type: str, value: DimensionValue) -> None:
    t = value.text
    if directive_type == "DESIGN_GOAL":
        if t not in ("area", "latency"):
            raise DesignSpaceError(f"dimension {dim_id!r}: DESIGN_GOAL value must be area or latency, got {t!r}")
    elif directive_type == "CLOCK_PERIOD":
        if value.is_keyword or value.as_float() <= 0:
            raise DesignSpaceError(f"dimension {dim_id!r}: CLOCK_PERIOD value must be a positive number, got {t!r}")
    elif directive_type == "UNROLL":
        if not (t == "no" or (value.is_int and value.as_int() >= 2)):
            raise DesignSpaceError(f"dimension {dim_id!r}: UNROLL value must be 'no' or an integer >= 2, got {t!r}")
    elif directive_type == "PIPELINE_II":
        if not (t == "none" or (value.is_int and value.as_int() >= 1)):
            raise DesignSpaceError(f"dimension {dim_id!r}: PIPELINE_II value must be 'none' or an integer >= 1, got {t!r}")
    elif directive_type == "INTERLEAVE":
        if not (value.is_int and value.as_int() >= 1):
            raise DesignSpaceError(f"dimension {dim_id!r}: INTERLEAVE value must be an integer >= 1, got {t!r}")
    else:
        raise DesignSpaceError(f"dimension {dim_id!r}: unknown directive type {directive_type!r}")


@dataclass(frozen=True)
class Dimension:
    """One optimization dimension: a directive type, an optional target
    resource path, and the values to sweep."""

    id: str
    directive_type: str
    values: tuple[DimensionValue, ...]
    target_path: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise DesignSpaceError("dimension id must be non-empty")
        if self.directive_type not in DIRECTIVE_TYPES:
            raise DesignSpaceError(f"dimension {self.id!r}: unknown directive type {self.directive_type!r}")
        if not self.values:
            raise DesignSpaceError(f"dimension {self.id!r}: values list is empty")
        if self.directive_type in _PATH_REQUIRED:
            if not self.target_path:
                raise DesignSpaceError(f"dimension {self.id!r}: {self.directive_type} requires target_hls_path")
        elif self.target_path is not None:
            raise DesignSpaceError(f"dimension {self.id!r}: {self.directive_type} does not take target_hls_path")
        for v in self.values:
            _check_value(self.id, self.directive_type, v)


@dataclass(frozen=True)
class DesignSpaceSpec:
    """Validated design space: kernel name, baseline script, dimensions."""

    kernel_name: str
    base_directive_file: str
    dimensions: tuple[Dimension, ...]

    def __post_init__(self) -> None:
        if not self.kernel_name:
            raise DesignSpaceError("kernel_name must be non-empty")
        if not self.dimensions:
            raise DesignSpaceError("at least one dimension is required")
        seen = set()
        for d in self.dimensions:
            if d.id in seen:
                raise DesignSpaceError(f"duplicate dimension id {d.id!r}")
            if d.id in ("index", "path") or d.id in RESULT_COLUMNS:
                raise DesignSpaceError(f"dimension id {d.id!r} collides with a reserved manifest column")
            seen.add(d.id)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(len(d.values) for d in self.dimensions)

    def dimension(self, dim_id: str) -> Dimension:
        for d in self.dimensions:
            if d.id == dim_id:
                return d
        raise KeyError(dim_id)


@dataclass(frozen=True)
class DesignPoint:
    """One concrete assignment of a value to every dimension."""

    index: int
    assignment: Mapping[str, DimensionValue]

    def value_texts(self) -> dict[str, str]:
        return {k: v.text for k, v in self.assignment.items()}


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------


def _as_string(node, what: str) -> str:
    if not isinstance(node, str):
        raise DesignSpaceError(f"{what} must be a string, got {type(node).__name__}")
    return node


def parse_spec(text: str) -> DesignSpaceSpec:
    """Parse and validate a YAML design-space specification.

    Scalars are read verbatim (no YAML implicit typing), so `no` stays the
    keyword "no" and decimal values keep their source digits.
    """
    try:
        doc = yaml.load(text, Loader=yaml.BaseLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" at line {mark.line + 1}" if mark is not None else ""
        raise DesignSpaceError(f"YAML syntax error{line}: {exc}") from exc
    if not isinstance(doc, dict):
        raise DesignSpaceError("spec document must be a mapping")
    try:
        kernel_name = _as_string(doc["kernel_name"], "kernel_name")
        base_file = _as_string(doc["base_hls_tcl_file"], "base_hls_tcl_file")
        dims_node = doc["dimensions"]
    except KeyError as exc:
        raise DesignSpaceError(f"missing required key {exc.args[0]!r}") from exc
    if not isinstance(dims_node, list):
        raise DesignSpaceError("dimensions must be a list")
    dims = []
    for i, dn in enumerate(dims_node):
        if not isinstance(dn, dict):
            raise DesignSpaceError(f"dimension #{i} must be a mapping")
        unknown = set(dn) - {"id", "type", "target_hls_path", "values"}
        if unknown:
            raise DesignSpaceError(f"dimension #{i}: unknown keys {sorted(unknown)}")
        try:
            dim_id = _as_string(dn["id"], f"dimension #{i} id")
            dim_type = _as_string(dn["type"], f"dimension {dn.get('id', i)!r} type")
            values_node = dn["values"]
        except KeyError as exc:
            raise DesignSpaceError(f"dimension #{i}: missing key {exc.args[0]!r}") from exc
        if not isinstance(values_node, list):
            raise DesignSpaceError(f"dimension {dim_id!r}: values must be a list")
        values = tuple(DimensionValue(_as_string(v, f"dimension {dim_id!r} value")) for v in values_node)
        target = dn.get("target_hls_path")
        dims.append(Dimension(id=dim_id, directive_type=dim_type, values=values, target_path=target))
    return DesignSpaceSpec(kernel_name=kernel_name, base_directive_file=base_file, dimensions=tuple(dims))


def parse_spec_file(path: str | os.PathLike) -> DesignSpaceSpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def serialize_spec(spec: DesignSpaceSpec) -> str:
    """Render a spec back to YAML; parse_spec(serialize_spec(s)) == s."""
    lines = [
        f'kernel_name: "{spec.kernel_name}"',
        f'base_hls_tcl_file: "{spec.base_directive_file}"',
        "dimensions:",
    ]
    for d in spec.dimensions:
        lines.append(f'  - id: "{d.id}"')
        lines.append(f'    type: "{d.directive_type}"')
        if d.target_path is not None:
            lines.append(f'    target_hls_path: "{d.target_path}"')
        lines.append(f"    values: [{', '.join(v.text for v in d.values)}]")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------


def expand(spec: DesignSpaceSpec) -> list[DesignPoint]:
    """Enumerate the full cross product of dimension values.

    Points come out in lexicographic order of per-dimension value indices
    with the last dimension varying fastest; indices run 0..N-1.
    """
    total = math.prod(spec.cardinalities)
    if total > sys.maxsize:
        raise DesignSpaceError(
            f"design space of {total} points exceeds the platform integer width ({sys.maxsize})"
        )
    dim_ids = [d.id for d in spec.dimensions]
    return [
        DesignPoint(index=index, assignment=dict(zip(dim_ids, combo)))
        for index, combo in enumerate(itertools.product(*(d.values for d in spec.dimensions)))
    ]


# ---------------------------------------------------------------------------
# Directive templates and emission
# ---------------------------------------------------------------------------

_DEFAULT_TEMPLATES = {
    "DESIGN_GOAL": "directive set -DESIGN_GOAL {value}",
    "CLOCK_PERIOD": "directive set -CLOCK_PERIOD {value}",
    "UNROLL": "directive set {path} -UNROLL {value}",
    "PIPELINE_II": "directive set {path} -PIPELINE_INIT_INTERVAL {value}",
    "INTERLEAVE": "directive set {path} -INTERLEAVE {value}",
}


@dataclass(frozen=True)
class DirectiveTemplates:
    """Per-directive-type line templates with {path} and {value} slots."""

    templates: Mapping[str, str] = field(default_factory=lambda: dict(_DEFAULT_TEMPLATES))

    def __post_init__(self) -> None:
        for dtype in DIRECTIVE_TYPES:
            tpl = self.templates.get(dtype)
            if tpl is None:
                raise DesignSpaceError(f"no template for directive type {dtype}")
            if "{value}" not in tpl:
                raise DesignSpaceError(f"template for {dtype} is missing the {{value}} placeholder")
            if dtype in _PATH_REQUIRED and "{path}" not in tpl:
                raise DesignSpaceError(f"template for {dtype} is missing the {{path}} placeholder")

    @classmethod
    def default(cls) -> "DirectiveTemplates":
        return cls()

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "DirectiveTemplates":
        """Load overrides from a file of `TYPE: template` lines; types not
        mentioned keep their defaults."""
        merged = dict(_DEFAULT_TEMPLATES)
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise DesignSpaceError(f"{path}:{lineno}: expected 'TYPE: template'")
            dtype, tpl = line.split(":", 1)
            dtype = dtype.strip()
            if dtype not in DIRECTIVE_TYPES:
                raise DesignSpaceError(f"{path}:{lineno}: unknown directive type {dtype!r}")
            merged[dtype] = tpl.strip()
        return cls(templates=merged)

    def render(self, dim: Dimension, value: DimensionValue) -> str | None:
        """Directive line for (dimension, value); None for skip values."""
        if value.is_skip:
            return None
        line = self.templates[dim.directive_type]
        line = line.replace("{path}", dim.target_path or "")
        return line.replace("{value}", value.text)


RESULT_COLUMNS = ("status", "latency_ms", "area", "synth_seconds")

SCRIPT_NAME_FORMAT = "dp_{index:06d}.tcl"
MANIFEST_NAME = "manifest.csv"


@dataclass
class ManifestRow:
    """One design point: script path, dimension values, optional results."""

    index: int
    path: str
    values: dict[str, str]
    status: str | None = None
    latency_ms: float | None = None
    area: float | None = None
    synth_seconds: float | None = None

    @property
    def has_result(self) -> bool:
        return self.status is not None

    @property
    def is_baseline(self) -> bool:
        return not self.values


@dataclass
class Manifest:
    """Tabular record mapping design points to scripts and results.

    Column order is deterministic: index, path, dimensions in spec order,
    then result columns once any row carries results.
    """

    dimension_ids: list[str]
    rows: list[ManifestRow]

    @property
    def has_results(self) -> bool:
        return any(r.has_result for r in self.rows)

    def row_for(self, index: int) -> ManifestRow:
        for r in self.rows:
            if r.index == index:
                return r
        raise KeyError(index)

    def write_csv(self, path: str | os.PathLike) -> None:
        columns = ["index", "path", *self.dimension_ids]
        if self.has_results:
            columns += list(RESULT_COLUMNS)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for r in sorted(self.rows, key=lambda r: r.index):
                cells = [str(r.index), r.path]
                cells += [r.values.get(d, "") for d in self.dimension_ids]
                if self.has_results:
                    cells.append(r.status or "")
                    for v in (r.latency_ms, r.area, r.synth_seconds):
                        cells.append("" if v is None else str(v))
                writer.writerow(cells)

    @classmethod
    def read_csv(cls, path: str | os.PathLike) -> "Manifest":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DesignSpaceError(f"{path}: empty manifest") from None
            if header[:2] != ["index", "path"]:
                raise DesignSpaceError(f"{path}: malformed manifest header")
            tail = header[2:]
            if tail[-len(RESULT_COLUMNS):] == list(RESULT_COLUMNS):
                dim_ids = tail[: -len(RESULT_COLUMNS)]
                with_results = True
            else:
                dim_ids = tail
                with_results = False
            rows = []
            for cells in reader:
                values = {
                    d: cells[2 + j] for j, d in enumerate(dim_ids) if cells[2 + j] != ""
                }
                row = ManifestRow(index=int(cells[0]), path=cells[1], values=values)
                if with_results:
                    base = 2 + len(dim_ids)
                    status, lat, area, synth = cells[base : base + 4]
                    if status:
                        row.status = status
                        row.latency_ms = float(lat) if lat else None
                        row.area = float(area) if area else None
                        row.synth_seconds = float(synth) if synth else None
                rows.append(row)
        return cls(dimension_ids=list(dim_ids), rows=rows)

    def to_points(self, spec: DesignSpaceSpec) -> list[DesignPoint]:
        """Reconstruct design points (baseline rows excluded)."""
        points = []
        for r in sorted(self.rows, key=lambda r: r.index):
            if r.is_baseline:
                continue
            assignment = {d: DimensionValue(r.values[d]) for d in self.dimension_ids}
            for dim_id, v in assignment.items():
                _check_value(dim_id, spec.dimension(dim_id).directive_type, v)
            points.append(DesignPoint(index=r.index, assignment=assignment))
        return points


def emit_directives(
    spec: DesignSpaceSpec,
    points: Iterable[DesignPoint],
    out_dir: str | os.PathLike,
    templates: DirectiveTemplates | None = None,
    include_baseline: bool = False,
    base_dir: str | os.PathLike | None = None,
) -> Manifest:
    """Write one directive script per point plus manifest.csv.

    Each script is the baseline file's contents followed by one rendered
    template line per (dimension, value) in spec order; skip values emit no
    line. With include_baseline, one extra script holding only the baseline
    contents is appended after the expanded points.
    """
    templates = templates or DirectiveTemplates.default()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base_path = Path(base_dir or ".") / spec.base_directive_file
    baseline = base_path.read_text(encoding="utf-8")
    if baseline and not baseline.endswith("\n"):
        baseline += "\n"

    rows = []
    last_index = -1
    for point in points:
        lines = []
        for dim in spec.dimensions:
            rendered = templates.render(dim, point.assignment[dim.id])
            if rendered is not None:
                lines.append(rendered + "\n")
        name = SCRIPT_NAME_FORMAT.format(index=point.index)
        (out / name).write_text(baseline + "".join(lines), encoding="utf-8")
        rows.append(ManifestRow(index=point.index, path=name, values=point.value_texts()))
        last_index = max(last_index, point.index)
    if include_baseline:
        name = SCRIPT_NAME_FORMAT.format(index=last_index + 1)
        (out / name).write_text(baseline, encoding="utf-8")
        rows.append(ManifestRow(index=last_index + 1, path=name, values={}))

    manifest = Manifest(dimension_ids=[d.id for d in spec.dimensions], rows=rows)
    manifest.write_csv(out / MANIFEST_NAME)
    return manifest


# ---------------------------------------------------------------------------
# Interleave sizing
# ---------------------------------------------------------------------------


def compute_interleave_requirement(
    accesses_per_iteration: int, unroll: int, initiation_interval: int | None = None
) -> int:
    """Memory banks needed to feed K accesses/iteration at unroll U.

    With pipelining the effective initiation interval is the pipeline II;
    without it, successive iterations start U apart, so II_eff = U. The
    requirement is ceil(K*U / II_eff).
    """
    if accesses_per_iteration < 1:
        raise ValueError("accesses_per_iteration must be >= 1")
    if unroll < 1:
        raise ValueError("unroll must be >= 1")
    ii_eff = initiation_interval if initiation_interval is not None else unroll
    if ii_eff < 1:
        raise ValueError("initiation_interval must be >= 1")
    return -(-accesses_per_iteration * unroll // ii_eff)
