"""Command-line interface: one executable, one subcommand per capability.

Subcommands are thin adapters over the library modules; behavior is
defined by the module contracts. A YAML config file can preset defaults
for execution, retrieval, and stopping parameters; explicit flags always
win. Exit codes: 0 success, 1 operational failure, 2 usage error, plus
`trials run` mapping futility to 3 and the trial cap to 4.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from . import __version__
from .agentloop import (
    CommandSpecialist,
    CommandVerifier,
    TaskSpec,
    compute_metrics,
    load_trace,
    run_pipeline,
)
from .betatrials import (
    STOP_FUTILITY,
    STOP_MAX_TRIALS,
    StoppingConfig,
    TrialLedger,
    TrialStages,
    cost_report,
    posterior_report,
    render_cost_table,
    render_posterior_table,
    run_adaptive,
)
from .bitwidth import CommandOracle, load_budgets, search_widths
from .designspace import (
    DesignSpaceError,
    DirectiveTemplates,
    Manifest,
    emit_directives,
    expand,
    parse_spec_file,
)
from .pareto import emit_report, pareto_front, records_from_manifest, summarize
from .ragkit import (
    CosineReranker,
    HashedTokenEmbedder,
    RetrievalConfig,
    TokenOverlapReranker,
    VectorIndex,
    chunk_document,
    two_stage_query,
)
from .refactor import SizeMap, emit_ioquery, label_loops, literal_typecast, parse_subset, static_mem
from .synthrunner import CommandBackend, ExecutionPlan, ExecutionTarget, MockBackend, MockKernelProfile, run_all

__all__ = ["main", "GlobalConfig"]


@dataclass
class GlobalConfig:
    """Defaults shared across subcommands; every field has a documented
    default and unknown config keys are rejected."""

    run_root: str = "run"  # parent directory for run artifacts
    index_path: str = "index.ndjson"  # retrieval index location
    pool_size: int = 4  # synthesis worker pool
    per_job_timeout_seconds: float = 3600.0
    max_retries: int = 2  # transport retries per job
    targets: tuple[str, ...] = ("local",)  # execution targets, name[=prefix]
    k: int = 20  # first-stage retrieval count
    m: int = 5  # final retrieval count
    window_bytes: int = 2048
    stride_bytes: int = 1024
    embed_dimension: int = 256
    ci_level: float = 0.95
    precision_halfwidth: float = 0.125
    success_theta: float = 0.90
    success_prob: float = 0.90
    futility_theta: float = 0.10
    futility_prob: float = 0.33
    min_trials: int = 30
    max_trials: int = 100
    templates_file: str | None = None  # directive template overrides

    @classmethod
    def load(cls, path: str) -> "GlobalConfig":
        doc = yaml.load(Path(path).read_text(encoding="utf-8"), Loader=yaml.BaseLoader) or {}
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: config must be a mapping")
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(doc) - set(known)
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        kwargs = {}
        for f in fields(cls):
            if f.name not in doc:
                continue
            raw = doc[f.name]
            if f.name == "targets":
                kwargs[f.name] = tuple(raw) if isinstance(raw, list) else (str(raw),)
            elif f.name in ("templates_file", "run_root", "index_path"):
                kwargs[f.name] = str(raw)
            elif f.name in ("pool_size", "max_retries", "k", "m", "window_bytes",
                            "stride_bytes", "embed_dimension", "min_trials", "max_trials"):
                kwargs[f.name] = int(raw)
            else:
                kwargs[f.name] = float(raw)
        return cls(**kwargs)

    def stopping(self) -> StoppingConfig:
        return StoppingConfig(
            ci_level=self.ci_level,
            precision_halfwidth=self.precision_halfwidth,
            success_theta=self.success_theta,
            success_prob=self.success_prob,
            futility_theta=self.futility_theta,
            futility_prob=self.futility_prob,
            min_trials=self.min_trials,
            max_trials=self.max_trials,
        )


def _parse_targets(specs) -> tuple[ExecutionTarget, ...]:
    targets = []
    for spec in specs:
        if "=" in spec:
            name, prefix = spec.split("=", 1)
            targets.append(ExecutionTarget(name=name, command_prefix=tuple(shlex.split(prefix))))
        else:
            targets.append(ExecutionTarget(name=spec))
    return tuple(targets)


def _cfg(args) -> GlobalConfig:
    return GlobalConfig.load(args.config) if args.config else GlobalConfig()


def _pick(flag_value, config_value):
    return config_value if flag_value is None else flag_value


def _plan(args, cfg: GlobalConfig) -> ExecutionPlan:
    return ExecutionPlan(
        pool_size=_pick(args.pool, cfg.pool_size),
        targets=_parse_targets(args.target or cfg.targets),
        per_job_timeout_seconds=_pick(args.timeout, cfg.per_job_timeout_seconds),
        max_retries=_pick(args.retries, cfg.max_retries),
    )


def _backend(args, spec):
    if args.backend == "mock":
        if not args.profile:
            raise SystemExit("--profile is required with the mock backend")
        return MockBackend(MockKernelProfile.load(args.profile), spec)
    if args.backend.startswith("command:"):
        return CommandBackend(tuple(shlex.split(args.backend.split(":", 1)[1])))
    raise SystemExit(f"unknown backend {args.backend!r}; use mock or command:<cmd>")


# ---------------------------------------------------------------------------
# dse
# ---------------------------------------------------------------------------


def cmd_dse_gen(args) -> int:
    cfg = _cfg(args)
    spec = parse_spec_file(args.spec)
    templates_file = args.templates or cfg.templates_file
    templates = DirectiveTemplates.from_file(templates_file) if templates_file else None
    points = expand(spec)
    manifest = emit_directives(
        spec,
        points,
        args.out,
        templates=templates,
        include_baseline=args.include_baseline,
        base_dir=Path(args.spec).parent,
    )
    print(f"emitted {len(manifest.rows)} directive scripts + manifest.csv under {args.out}")
    return 0


def cmd_dse_run(args) -> int:
    cfg = _cfg(args)
    spec = parse_spec_file(args.spec)
    manifest = Manifest.read_csv(Path(args.out) / "manifest.csv")
    backend = _backend(args, spec)
    plan = _plan(args, cfg)
    manifest, summary = run_all(manifest, plan, backend, run_dir=args.run_dir, run_root=cfg.run_root)
    manifest.write_csv(Path(args.out) / "manifest.csv")
    print(json.dumps(summary.to_json(), indent=2))
    return 0


def cmd_dse_pareto(args) -> int:
    manifest = Manifest.read_csv(args.manifest)
    records = records_from_manifest(manifest)
    front = pareto_front(records)
    stats = summarize(records)
    print(f"pareto-optimal designs: {len(front)} of {stats.succeeded} successful "
          f"({stats.total_points} total, {stats.success_rate_display}% success rate)")
    for idx in front.indices:
        r = next(rec for rec in records if rec.point_index == idx)
        print(f"  dp {idx:6d}  latency_ms={r.outcome.latency_ms:g}  area={r.outcome.area:g}")
    return 0


def cmd_dse_report(args) -> int:
    manifest = Manifest.read_csv(args.manifest)
    records = records_from_manifest(manifest)
    doc = emit_report(records, pareto_front(records), args.format)
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(doc, end="")
    return 0


# ---------------------------------------------------------------------------
# numerics / trials / loop
# ---------------------------------------------------------------------------


def cmd_numerics_search(args) -> int:
    budgets = load_budgets(args.budgets)
    oracle = CommandOracle(args.oracle_cmd)
    report = search_widths(budgets, oracle, floor_bits=args.floor_bits)
    print(report.render_text(), end="")
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_trials_run(args) -> int:
    cfg = _cfg(args)
    stopping = cfg.stopping()
    overrides = {
        name: getattr(args, name)
        for name in ("min_trials", "max_trials", "precision_halfwidth")
        if getattr(args, name) is not None
    }
    if overrides:
        stopping = StoppingConfig(
            **{**{f.name: getattr(stopping, f.name) for f in fields(StoppingConfig)}, **overrides}
        )
    stages = TrialStages(args.compile_cmd, args.execute_cmd, args.synthesize_cmd)
    ledger, reason = run_adaptive(stages, stopping, workdir=args.workdir, ledger_path=args.ledger)
    post = posterior_report(ledger, stopping)
    print(f"stopped after {ledger.n} trials ({ledger.k} passed): {reason}")
    print(json.dumps(post, indent=2))
    if reason == STOP_FUTILITY:
        return 3
    if reason == STOP_MAX_TRIALS:
        return 4
    return 0


def cmd_trials_analyze(args) -> int:
    ledger = TrialLedger.load(args.ledger)
    cfg = _cfg(args)
    post = posterior_report(ledger, cfg.stopping())
    cost = cost_report(ledger)
    label = args.label or Path(args.ledger).stem
    print(render_posterior_table([(label, post)]), end="")
    print()
    print(render_cost_table([(label, cost)]), end="")
    if args.out:
        Path(args.out).write_text(
            json.dumps({"posterior": post, "cost": cost}, indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote {args.out}")
    return 0


def cmd_loop_run(args) -> int:
    tasks_doc = json.loads(Path(args.tasks).read_text(encoding="utf-8"))
    tasks = [
        TaskSpec(phase_id=int(t["phase_id"]), description=t.get("description", ""))
        for t in tasks_doc
    ]
    episodes = run_pipeline(
        tasks,
        CommandSpecialist(args.specialist_cmd),
        CommandVerifier(args.verifier_cmd),
        max_rounds=args.max_rounds,
        continue_on_failure=args.continue_on_failure,
        trace_path=args.trace,
    )
    for e in episodes:
        status = "accepted" if e.accepted else (f"error: {e.error}" if e.error else "rejected")
        print(f"phase {e.phase_id}: rounds={e.rounds} {status}")
    if args.trace:
        print(f"trace written to {args.trace}")
    return 0 if all(e.accepted for e in episodes) else 1


def cmd_loop_metrics(args) -> int:
    episodes = load_trace(args.trace)
    metrics = compute_metrics(episodes)
    print(metrics.render_text(), end="")
    return 0


# ---------------------------------------------------------------------------
# refactor / codeql
# ---------------------------------------------------------------------------


def _apply_refactor(args, edits, source: str) -> int:
    if edits.is_empty:
        print("no changes")
        return 0
    if args.write:
        Path(args.file).write_text(edits.apply(source), encoding="utf-8")
        print(f"rewrote {args.file} ({len(edits)} edits)")
    else:
        print(edits.unified_diff(source, fromfile=args.file, tofile=f"{args.file} (refactored)"), end="")
    return 0


def cmd_refactor_static_mem(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    unit = parse_subset(source)
    sizes = SizeMap.load(args.sizes)
    edits = static_mem(unit, sizes, emit_defines=args.emit_defines)
    return _apply_refactor(args, edits, source)


def cmd_refactor_literal_cast(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    edits = literal_typecast(parse_subset(source), args.type, scope=args.scope)
    return _apply_refactor(args, edits, source)


def cmd_refactor_label_loops(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    edits = label_loops(parse_subset(source), args.kernel)
    return _apply_refactor(args, edits, source)


def cmd_codeql_emit(args) -> int:
    print(emit_ioquery(args.function, args.file_name), end="")
    return 0


# ---------------------------------------------------------------------------
# rag
# ---------------------------------------------------------------------------


def cmd_rag_index(args) -> int:
    cfg = _cfg(args)
    window = _pick(args.window, cfg.window_bytes)
    stride = _pick(args.stride, cfg.stride_bytes)
    dimension = _pick(args.dim, cfg.embed_dimension)
    embedder = HashedTokenEmbedder(dimension)
    index = VectorIndex(dimension)
    root = Path(args.dir)
    files = sorted(p for p in root.rglob("*") if p.is_file())
    for path in files:
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            continue
        index.add(chunk_document(str(path.relative_to(root)), text, window, stride), embedder)
    out = _pick(args.index, cfg.index_path)
    index.save(out)
    print(f"indexed {len(index)} chunks from {len(files)} files into {out}")
    return 0


def cmd_rag_query(args) -> int:
    cfg = _cfg(args)
    index = VectorIndex.load(_pick(args.index, cfg.index_path))
    embedder = HashedTokenEmbedder(index.dimension)
    reranker = TokenOverlapReranker() if args.reranker == "overlap" else CosineReranker()
    config = RetrievalConfig(
        k=_pick(args.k, cfg.k),
        m=_pick(args.m, cfg.m),
        window_bytes=cfg.window_bytes,
        stride_bytes=cfg.stride_bytes,
    )
    results = two_stage_query(index, args.text, embedder, reranker, config)
    for chunk, score in results:
        snippet = chunk.text.replace("\n", " ")[:80]
        print(f"{score:.4f}\t{chunk.doc_id}\t{chunk.chunk_index}\t{snippet}")
    return 0


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def cmd_pipeline_run(args) -> int:
    cfg = _cfg(args)
    spec = parse_spec_file(args.spec)
    out_dir = Path(args.out)
    templates_file = args.templates or cfg.templates_file
    templates = DirectiveTemplates.from_file(templates_file) if templates_file else None

    points = expand(spec)
    manifest = emit_directives(
        spec, points, out_dir, templates=templates,
        include_baseline=args.include_baseline, base_dir=Path(args.spec).parent,
    )
    backend = _backend(args, spec)
    plan = _plan(args, cfg)
    run_dir = args.run_dir or (out_dir / "run")
    manifest, summary = run_all(manifest, plan, backend, run_dir=run_dir)
    manifest.write_csv(out_dir / "manifest.csv")

    records = records_from_manifest(manifest)
    front = pareto_front(records)
    stats = summarize(records)
    (out_dir / "report.txt").write_text(emit_report(records, front, "text-table"), encoding="utf-8")
    (out_dir / "plot.tsv").write_text(emit_report(records, front, "plot-data"), encoding="utf-8")

    report = {
        "spec": str(args.spec),
        "kernel_name": spec.kernel_name,
        "out_dir": str(out_dir),
        "manifest": str(out_dir / "manifest.csv"),
        "run_dir": str(run_dir),
        "run_summary": summary.to_json(),
        "total_points": stats.total_points,
        "succeeded": stats.succeeded,
        "success_rate_pct": stats.success_rate,
        "pareto_count": stats.pareto_count,
        "pareto_indices": list(front.indices),
        "artifacts": {"report": str(out_dir / "report.txt"), "plot_data": str(out_dir / "plot.tsv")},
    }
    (out_dir / "pipeline_report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"pipeline complete: {stats.succeeded}/{stats.total_points} succeeded "
          f"({stats.success_rate_display}%), {stats.pareto_count} pareto-optimal")
    print(f"report: {out_dir / 'pipeline_report.json'}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hlskit",
        description="Deterministic toolkit for HLS accelerator design flows.",
    )
    parser.add_argument("--version", action="version", version=f"hlskit {__version__}")
    parser.add_argument("--config", help="YAML config file with default settings (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    # dse
    dse = sub.add_parser("dse", help="design-space generation, execution, reporting")
    dse_sub = dse.add_subparsers(dest="subcommand", required=True)

    p = dse_sub.add_parser("gen", help="expand a design-space spec into directive scripts")
    p.add_argument("spec", help="YAML design-space specification")
    p.add_argument("-o", "--out", required=True, help="output directory for scripts + manifest")
    p.add_argument("--templates", help="directive template override file")
    p.add_argument("--include-baseline", action="store_true",
                   help="emit one extra script holding only the baseline directives")
    p.set_defaults(func=cmd_dse_gen)

    p = dse_sub.add_parser("run", help="run all points in a manifest against a backend")
    p.add_argument("out", help="directory holding the emitted scripts + manifest.csv")
    p.add_argument("--spec", required=True, help="the design-space spec used for gen")
    p.add_argument("--backend", default="mock", help="mock or command:<cmd> (default: mock)")
    p.add_argument("--profile", help="mock kernel profile JSON (required for mock)")
    p.add_argument("--pool", type=int, default=None, help="worker pool size (default 4)")
    p.add_argument("--timeout", type=float, default=None, help="per-job timeout seconds (default 3600)")
    p.add_argument("--retries", type=int, default=None, help="transport retries per job (default 2)")
    p.add_argument("--target", action="append", help="execution target name[=command prefix]; repeatable")
    p.add_argument("--run-dir", default=None, help="run directory (default: <run_root>/<timestamp>)")
    p.set_defaults(func=cmd_dse_run)

    p = dse_sub.add_parser("pareto", help="extract the Pareto front from a completed manifest")
    p.add_argument("manifest", help="manifest.csv with results")
    p.set_defaults(func=cmd_dse_pareto)

    p = dse_sub.add_parser("report", help="render a completed manifest as a report")
    p.add_argument("manifest", help="manifest.csv with results")
    p.add_argument("--format", default="text-table", choices=["text-table", "csv", "plot-data"])
    p.add_argument("-o", "--out", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_dse_report)

    # numerics
    numerics = sub.add_parser("numerics", help="fixed-point bit-width search")
    num_sub = numerics.add_subparsers(dest="subcommand", required=True)
    p = num_sub.add_parser("search", help="minimize per-typedef widths under a verification oracle")
    p.add_argument("--budgets", required=True, help="JSON list of type budgets")
    p.add_argument("--oracle-cmd", required=True,
                   help="verification command: JSON assignment on stdin, prints PASS/FAIL and REL_ERR=")
    p.add_argument("--floor-bits", type=int, default=2, help="minimum total bits (default 2)")
    p.add_argument("-o", "--out", help="also write the report as JSON")
    p.set_defaults(func=cmd_numerics_search)

    # trials
    trials = sub.add_parser("trials", help="Beta-Binomial trial harness")
    trials_sub = trials.add_subparsers(dest="subcommand", required=True)
    p = trials_sub.add_parser("run", help="run staged trials with adaptive stopping")
    p.add_argument("--compile-cmd", required=True)
    p.add_argument("--execute-cmd", required=True)
    p.add_argument("--synthesize-cmd", required=True)
    p.add_argument("--workdir", default=None, help="trial working directory")
    p.add_argument("--ledger", default=None, help="append outcomes to this NDJSON ledger")
    p.add_argument("--min-trials", type=int, default=None, dest="min_trials")
    p.add_argument("--max-trials", type=int, default=None, dest="max_trials")
    p.add_argument("--precision-halfwidth", type=float, default=None, dest="precision_halfwidth")
    p.set_defaults(func=cmd_trials_run)

    p = trials_sub.add_parser("analyze", help="posterior + cost analysis of a ledger")
    p.add_argument("--ledger", required=True)
    p.add_argument("--label", help="row label (default: ledger file stem)")
    p.add_argument("-o", "--out", help="also write the analysis as JSON")
    p.set_defaults(func=cmd_trials_analyze)

    # loop
    loop = sub.add_parser("loop", help="specialist-verifier loop engine")
    loop_sub = loop.add_subparsers(dest="subcommand", required=True)
    p = loop_sub.add_parser("run", help="run a task pipeline with command backends")
    p.add_argument("--tasks", required=True, help="JSON list of {phase_id, description}")
    p.add_argument("--specialist-cmd", required=True)
    p.add_argument("--verifier-cmd", required=True)
    p.add_argument("--max-rounds", type=int, default=5)
    p.add_argument("--continue-on-failure", action="store_true")
    p.add_argument("--trace", help="write an NDJSON episode trace here")
    p.set_defaults(func=cmd_loop_run)

    p = loop_sub.add_parser("metrics", help="per-phase metrics from a trace file")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_loop_metrics)

    # refactor
    refactor = sub.add_parser("refactor", help="HLS-compatibility source rewrites")
    ref_sub = refactor.add_subparsers(dest="subcommand", required=True)
    p = ref_sub.add_parser("static-mem", help="convert mapped pointers to static arrays")
    p.add_argument("file")
    p.add_argument("--sizes", required=True, help="JSON size map {symbol: [capacities]}")
    p.add_argument("--emit-defines", action="store_true", help="emit #define lines for named capacities")
    p.add_argument("--write", action="store_true", help="rewrite in place (default: print a diff)")
    p.set_defaults(func=cmd_refactor_static_mem)

    p = ref_sub.add_parser("literal-cast", help="wrap numeric literals in a typedef cast")
    p.add_argument("file")
    p.add_argument("--type", required=True, help="target type name, e.g. Calc_t")
    p.add_argument("--scope", default="floating-literals-only",
                   choices=["floating-literals-only", "all-numeric"])
    p.add_argument("--write", action="store_true", help="rewrite in place (default: print a diff)")
    p.set_defaults(func=cmd_refactor_literal_cast)

    p = ref_sub.add_parser("label-loops", help="label unlabeled loops for directive targeting")
    p.add_argument("file")
    p.add_argument("--kernel", required=True, help="kernel name used in the label prefix")
    p.add_argument("--write", action="store_true", help="rewrite in place (default: print a diff)")
    p.set_defaults(func=cmd_refactor_label_loops)

    # codeql
    codeql = sub.add_parser("codeql", help="static-analysis query emission")
    codeql_sub = codeql.add_subparsers(dest="subcommand", required=True)
    p = codeql_sub.add_parser("emit", help="emit the I/O-footprint query for a kernel")
    p.add_argument("--function", required=True)
    p.add_argument("--file-name", required=True, dest="file_name")
    p.set_defaults(func=cmd_codeql_emit)

    # rag
    rag = sub.add_parser("rag", help="two-stage retrieval over a document tree")
    rag_sub = rag.add_subparsers(dest="subcommand", required=True)
    p = rag_sub.add_parser("index", help="chunk and embed every file under a directory")
    p.add_argument("dir")
    p.add_argument("--index", default=None, help="index file to write (default index.ndjson)")
    p.add_argument("--dim", type=int, default=None, help="embedding dimension (default 256)")
    p.add_argument("--window", type=int, default=None, help="chunk window bytes (default 2048)")
    p.add_argument("--stride", type=int, default=None, help="chunk stride bytes (default 1024)")
    p.set_defaults(func=cmd_rag_index)

    p = rag_sub.add_parser("query", help="retrieve top-m chunks for a query")
    p.add_argument("text")
    p.add_argument("--index", default=None, help="index file to read (default index.ndjson)")
    p.add_argument("-k", type=int, default=None, help="first-stage candidates (default 20)")
    p.add_argument("-m", type=int, default=None, help="final results (default 5)")
    p.add_argument("--reranker", default="overlap", choices=["overlap", "cosine"])
    p.set_defaults(func=cmd_rag_query)

    # pipeline
    pipeline = sub.add_parser("pipeline", help="gen + run + pareto report in one invocation")
    pipe_sub = pipeline.add_subparsers(dest="subcommand", required=True)
    p = pipe_sub.add_parser("run", help="full DSE pipeline over one spec")
    p.add_argument("spec")
    p.add_argument("-o", "--out", required=True, help="working directory for all artifacts")
    p.add_argument("--backend", default="mock", help="mock or command:<cmd> (default: mock)")
    p.add_argument("--profile", help="mock kernel profile JSON")
    p.add_argument("--templates", help="directive template override file")
    p.add_argument("--include-baseline", action="store_true")
    p.add_argument("--pool", type=int, default=None)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--retries", type=int, default=None)
    p.add_argument("--target", action="append")
    p.add_argument("--run-dir", default=None)
    p.set_defaults(func=cmd_pipeline_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DesignSpaceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
