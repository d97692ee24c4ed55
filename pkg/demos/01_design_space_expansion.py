"""Design-space specs: parse, expand, and emit directive scripts.

A YAML spec declares the optimization dimensions for one kernel. The
toolkit expands the cross product into enumerated design points and emits
one Tcl directive script per point plus a CSV manifest.
"""

from pathlib import Path

from hlskit.designspace import (
    compute_interleave_requirement,
    emit_directives,
    expand,
    parse_spec,
)

OUT = Path(__file__).parent / "_out" / "design_space"
OUT.mkdir(parents=True, exist_ok=True)

SPEC = """\
kernel_name: "Torsion_Angles"
base_hls_tcl_file: "baseline.tcl"
dimensions:
  - id: "design_goal"
    type: "DESIGN_GOAL"
    values: [area, latency]

  - id: "clock_period"
    type: "CLOCK_PERIOD"
    values: [1.0, 2.0, 3.0, 5.0, 7.0, 10.0]

  - id: "innermost_loop_unroll"
    type: "UNROLL"
    target_hls_path: "/k/core/LOOP_TORSION_ANGLES_D"
    values: [no, 2, 4]

  - id: "position_interleave"
    type: "INTERLEAVE"
    target_hls_path: "/k/core/atom_positions"
    values: [1, 4, 8]
"""

(OUT / "baseline.tcl").write_text("solution new -state initial\ngo compile\n")

spec = parse_spec(SPEC)
points = expand(spec)
print(f"kernel: {spec.kernel_name}")
print(f"dimensions: {[d.id for d in spec.dimensions]}")
print(f"cardinalities: {spec.cardinalities} -> {len(points)} design points")

manifest = emit_directives(spec, points, OUT / "scripts", base_dir=OUT)
print(f"\nemitted {len(manifest.rows)} scripts under {OUT / 'scripts'}")

# The scripts are the baseline plus one directive line per dimension; skip
# values (no/none) emit nothing, leaving the baseline behavior in place.
sample = (OUT / "scripts" / "dp_000037.tcl").read_text()
print("\n--- dp_000037.tcl ---")
print(sample, end="")

# How much memory interleaving does a windowed access pattern need?  The
# atom position array is read K=4 times per iteration, so at unroll 2 with
# a pipeline II of 1 it needs 8 banks.
for unroll, ii in [(1, 1), (2, 1), (4, 1), (4, None)]:
    banks = compute_interleave_requirement(4, unroll, ii)
    print(f"K=4, unroll={unroll}, II={ii}: requires interleave >= {banks}")
