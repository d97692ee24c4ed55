"""A full desk-scale DSE run: generate, synthesize in parallel against the
deterministic mock backend, and extract the Pareto front.

The mock backend prices each design point with a closed-form cycle/area
model and fails points whose array interleaving cannot feed the requested
parallelism, which reproduces the characteristic feasibility boundary of
real synthesis sweeps.
"""

from pathlib import Path

from hlskit.designspace import emit_directives, expand, parse_spec
from hlskit.pareto import emit_report, pareto_front, records_from_manifest, summarize
from hlskit.synthrunner import ExecutionPlan, MockBackend, MockKernelProfile, run_all

OUT = Path(__file__).parent / "_out" / "mock_dse"
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
    values: [2.0, 3.0, 5.0, 10.0]
  - id: "unroll"
    type: "UNROLL"
    target_hls_path: "/k/LOOP_D"
    values: [no, 2, 4]
  - id: "pipeline"
    type: "PIPELINE_II"
    target_hls_path: "/k/LOOP_D"
    values: [none, 1, 2]
  - id: "il_pos"
    type: "INTERLEAVE"
    target_hls_path: "/k/atom_positions"
    values: [1, 4, 8, 16]
"""

PROFILE = MockKernelProfile.from_json(
    {
        "iterations": 20000,
        "ops_per_iteration": 200,
        "arrays": [
            {"name": "atom_positions", "path": "/k/atom_positions",
             "accesses_per_iteration": 4, "area_per_port": 25000.0}
        ],
        "base_area": 1200000.0,
        "min_clock_ns": 2.0,
    }
)

(OUT / "baseline.tcl").write_text("solution new\n")
spec = parse_spec(SPEC)
points = expand(spec)
manifest = emit_directives(spec, points, OUT / "scripts", base_dir=OUT)

plan = ExecutionPlan(pool_size=8)
manifest, summary = run_all(manifest, plan, MockBackend(PROFILE, spec), run_dir=OUT / "run")
print(f"ran {summary.total_jobs} points in {summary.wall_seconds:.2f}s wall:")
for state, count in sorted(summary.counts.items()):
    print(f"  {state}: {count}")

records = records_from_manifest(manifest)
front = pareto_front(records)
stats = summarize(records)
print(f"\nsuccess rate {stats.success_rate_display}%, front size {stats.pareto_count}")
print(f"front spans {stats.latency_span_ratio:.1f}x latency, {stats.area_span_ratio:.1f}x area\n")
print(emit_report(records, front, "text-table"))

(OUT / "plot.tsv").write_text(emit_report(records, front, "plot-data"))
print(f"plot data written to {OUT / 'plot.tsv'}")

# latency-area scatter with the front highlighted
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ok = [r for r in records if r.success]
    on_front = set(front.indices)
    xs = [r.outcome.latency_ms for r in ok]
    ys = [r.outcome.area for r in ok]
    sizes = [8 + r.outcome.synth_seconds / 30 for r in ok]
    colors = ["tab:green" if r.point_index in on_front else "lightgray" for r in ok]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(xs, ys, s=sizes, c=colors, edgecolors="gray", alpha=0.8)
    fx = sorted((r.outcome.latency_ms, r.outcome.area) for r in ok if r.point_index in on_front)
    ax.plot([p[0] for p in fx], [p[1] for p in fx], "g--", linewidth=1)
    ax.set_xlabel("latency (ms)")
    ax.set_ylabel("area")
    ax.set_title("mock DSE: latency-area space with Pareto front")
    fig.tight_layout()
    fig.savefig(OUT / "dse_front.png", dpi=120)
    print(f"scatter plot written to {OUT / 'dse_front.png'}")
except ImportError:
    print("matplotlib not available; skipping the scatter plot")
