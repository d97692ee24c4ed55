"""Parallel execution of design points against a synthesis backend.

The runner drains a manifest through a bounded worker pool, assigning jobs
round-robin over execution targets (local, or remote via a command
prefix). Synthesis failures are terminal; transport failures are retried
up to a cap; every attempt is bounded by a per-job timeout. Terminal
results land in an append-only journal (which doubles as crash-recovery
state), per-job log files, and the manifest, which is finalized sorted by
point index so output bytes do not depend on pool size or completion
order.

A deterministic mock backend stands in for the HLS tool at desk scale: it
prices a design point with a closed-form cycle/area model and fails points
whose array interleaving cannot feed the configured parallelism.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
import threading
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .designspace import DesignPoint, DesignSpaceSpec, DimensionValue, Manifest

__all__ = [
    "TransportError",
    "JobTimeout",
    "MockModelError",
    "ExecutionTarget",
    "ExecutionPlan",
    "SynthesisOutcome",
    "JobRequest",
    "Job",
    "MockArray",
    "MockKernelProfile",
    "MockBackend",
    "CommandBackend",
    "TransientFaultBackend",
    "mock_synthesize",
    "run_all",
    "collect_logs",
    "CollectedLogs",
    "RunSummary",
    "PENDING",
    "RUNNING",
    "SUCCEEDED",
    "SYNTHESIS_FAILED",
    "TIMED_OUT",
    "TRANSPORT_FAILED",
    "TERMINAL_STATES",
]


class TransportError(RuntimeError):
    """Execution transport failed; the attempt may be retried."""


class JobTimeout(RuntimeError):
    """An attempt exceeded the per-job timeout."""


class MockModelError(ValueError):
    """Design point does not match the mock kernel profile."""


PENDING = "pending"
RUNNING = "running"
SUCCEEDED = "succeeded"
SYNTHESIS_FAILED = "synthesis_failed"
TIMED_OUT = "timed_out"
TRANSPORT_FAILED = "transport_failed"
TERMINAL_STATES = frozenset({SUCCEEDED, SYNTHESIS_FAILED, TIMED_OUT, TRANSPORT_FAILED})


@dataclass(frozen=True)
class ExecutionTarget:
    """Where an attempt runs: a name plus a command prefix (empty = local)."""

    name: str = "local"
    command_prefix: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExecutionPlan:
    pool_size: int = 1
    targets: tuple[ExecutionTarget, ...] = (ExecutionTarget(),)
    per_job_timeout_seconds: float = 3600.0
    max_retries: int = 2  # transport failures only

    def __post_init__(self) -> None:
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if self.per_job_timeout_seconds <= 0:
            raise ValueError("per_job_timeout_seconds must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if not self.targets:
            raise ValueError("at least one execution target is required")


@dataclass(frozen=True)
class SynthesisOutcome:
    """Result of one synthesis: metrics on success, a reason on failure."""

    success: bool
    latency_ms: float | None = None
    area: float | None = None
    synth_seconds: float = 0.0
    log_text: str = ""

    def __post_init__(self) -> None:
        if self.success and (self.latency_ms is None or self.area is None):
            raise ValueError("successful outcome must carry latency_ms and area")
        if not self.success and not self.log_text.strip():
            raise ValueError("failed outcome must carry a reason in log_text")
        if self.latency_ms is not None and self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")
        if self.area is not None and self.area < 0:
            raise ValueError("area must be non-negative")
        if self.synth_seconds < 0:
            raise ValueError("synth_seconds must be non-negative")


@dataclass(frozen=True)
class JobRequest:
    """What a backend needs to run one design point."""

    point_index: int
    directive_path: str
    assignment: Mapping[str, str]


@dataclass
class Job:
    point_index: int
    directive_path: str
    assignment: dict[str, str]
    state: str = PENDING
    attempts: int = 0
    worker_id: str | None = None
    log_path: str | None = None
    reason: str = ""
    outcome: SynthesisOutcome | None = None


class SynthesisBackend(Protocol):
    def synthesize(
        self, request: JobRequest, target: ExecutionTarget, timeout_seconds: float
    ) -> SynthesisOutcome:
        """Run one design point. Raise TransportError for retryable
        transport failures and JobTimeout when the attempt timed out;
        return a failed outcome for synthesis failures."""


# ---------------------------------------------------------------------------
# Deterministic mock backend
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MockArray:
    name: str
    path: str
    accesses_per_iteration: int
    area_per_port: float

    def __post_init__(self) -> None:
        if self.accesses_per_iteration < 1 or self.area_per_port <= 0:
            raise ValueError(f"array {self.name!r}: K and area_per_port must be positive")


@dataclass(frozen=True)
class MockKernelProfile:
    """Closed-form kernel model: loop trip count, per-iteration work, and
    the arrays whose banking limits feasible parallelism."""

    iterations: int
    ops_per_iteration: int
    arrays: tuple[MockArray, ...]
    base_area: float
    min_clock_ns: float

    def __post_init__(self) -> None:
        if self.iterations < 1 or self.ops_per_iteration < 1:
            raise ValueError("iterations and ops_per_iteration must be positive")
        if self.base_area <= 0 or self.min_clock_ns <= 0:
            raise ValueError("base_area and min_clock_ns must be positive")
        paths = [a.path for a in self.arrays]
        if len(set(paths)) != len(paths):
            raise ValueError("array paths must be unique")

    @classmethod
    def from_json(cls, d: dict) -> "MockKernelProfile":
        return cls(
            iterations=int(d["iterations"]),
            ops_per_iteration=int(d["ops_per_iteration"]),
            arrays=tuple(
                MockArray(
                    name=a["name"],
                    path=a["path"],
                    accesses_per_iteration=int(a["accesses_per_iteration"]),
                    area_per_port=float(a["area_per_port"]),
                )
                for a in d.get("arrays", ())
            ),
            base_area=float(d["base_area"]),
            min_clock_ns=float(d["min_clock_ns"]),
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> "MockKernelProfile":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


_GOAL_AREA_MULT = 1.15
_GOAL_CYCLE_MULT = 0.9
_AREA_UNROLL_SLOPE = 0.8
_SYNTH_BASE_SECONDS = 60.0


def _resolve_knobs(spec: DesignSpaceSpec, point: DesignPoint) -> tuple[str, float, int, int | None, dict[str, int]]:
    """Extract (goal, clock, unroll, pipeline II, interleave-by-path) from a
    point using the spec's directive types."""
    goal = None
    clock = None
    unroll = 1
    ii: int | None = None
    seen_unroll = seen_ii = False
    interleave: dict[str, int] = {}
    for dim in spec.dimensions:
        value = point.assignment.get(dim.id)
        if value is None:
            raise MockModelError(f"point {point.index} missing assignment for dimension {dim.id!r}")
        if dim.directive_type == "DESIGN_GOAL":
            goal = value.text
        elif dim.directive_type == "CLOCK_PERIOD":
            clock = value.as_float()
        elif dim.directive_type == "UNROLL":
            if seen_unroll:
                raise MockModelError("mock model supports a single unroll knob")
            seen_unroll = True
            unroll = 1 if value.is_skip else value.as_int()
        elif dim.directive_type == "PIPELINE_II":
            if seen_ii:
                raise MockModelError("mock model supports a single pipeline knob")
            seen_ii = True
            ii = None if value.is_skip else value.as_int()
        elif dim.directive_type == "INTERLEAVE":
            interleave[dim.target_path or ""] = value.as_int()
    if goal is None or clock is None:
        raise MockModelError("point must assign design_goal and clock_period")
    return goal, clock, unroll, ii, interleave


def mock_synthesize(
    profile: MockKernelProfile, point: DesignPoint, spec: DesignSpaceSpec
) -> SynthesisOutcome:
    """Deterministic stand-in for the HLS tool.

    Feasibility: the clock must be no faster than the profile's minimum,
    and every array must be interleaved at least ceil(K*U / II_eff) ways
    (II_eff = pipeline II when pipelined, else U). On success a closed-form
    model prices cycles, latency, area, and synthesis time.
    """
    goal, clock, unroll, ii, interleave = _resolve_knobs(spec, point)
    known_paths = {a.path for a in profile.arrays}
    for path in interleave:
        if path not in known_paths:
            raise MockModelError(f"interleave target {path!r} not in profile arrays")

    ii_eff = ii if ii is not None else unroll
    if clock < profile.min_clock_ns:
        return SynthesisOutcome(
            success=False,
            synth_seconds=_mock_synth_seconds(unroll, ii),
            log_text=f"clock infeasible: period {clock:g} ns < minimum {profile.min_clock_ns:g} ns",
        )
    for arr in profile.arrays:
        required = -(-arr.accesses_per_iteration * unroll // ii_eff)
        banks = interleave.get(arr.path, 1)
        if banks < required:
            return SynthesisOutcome(
                success=False,
                synth_seconds=_mock_synth_seconds(unroll, ii),
                log_text=f"interleave {banks} < required {required} for {arr.name}",
            )

    cycles = (profile.iterations / unroll) * ii_eff + math.ceil(profile.ops_per_iteration / unroll)
    if goal == "latency":
        cycles *= _GOAL_CYCLE_MULT
    goal_mult = _GOAL_AREA_MULT if goal == "latency" else 1.0
    ports_area = sum(a.area_per_port * interleave.get(a.path, 1) for a in profile.arrays)
    area = goal_mult * (profile.base_area * (1.0 + _AREA_UNROLL_SLOPE * (unroll - 1)) + ports_area)
    latency_ms = cycles * clock * 1e-6
    return SynthesisOutcome(
        success=True,
        latency_ms=latency_ms,
        area=area,
        synth_seconds=_mock_synth_seconds(unroll, ii),
        log_text=f"ok: cycles={cycles:g} latency_ms={latency_ms:g} area={area:g}",
    )


def _mock_synth_seconds(unroll: int, ii: int | None) -> float:
    return _SYNTH_BASE_SECONDS * unroll * (2.0 if ii is not None else 1.0)


class MockBackend:
    """Backend adapter around mock_synthesize; pure and concurrency-safe."""

    def __init__(self, profile: MockKernelProfile, spec: DesignSpaceSpec) -> None:
        self.profile = profile
        self.spec = spec

    def synthesize(
        self, request: JobRequest, target: ExecutionTarget, timeout_seconds: float
    ) -> SynthesisOutcome:
        point = DesignPoint(
            index=request.point_index,
            assignment={
                d.id: _dimension_value(request.assignment, d.id) for d in self.spec.dimensions
            },
        )
        return mock_synthesize(self.profile, point, self.spec)


def _dimension_value(assignment: Mapping[str, str], dim_id: str) -> DimensionValue:
    try:
        return DimensionValue(assignment[dim_id])
    except KeyError:
        raise MockModelError(f"assignment missing dimension {dim_id!r}") from None


# ---------------------------------------------------------------------------
# External command backend
# ---------------------------------------------------------------------------


class CommandBackend:
    """Invokes `<cmd> <directive_path>` (optionally behind a target's
    command prefix). Exit 0 means success and the process must print
    LATENCY_MS=<num>, AREA=<num>, and SYNTH_S=<num> lines."""

    def __init__(
        self,
        argv: Sequence[str],
        transport_exit_codes: frozenset[int] = frozenset({255}),
    ) -> None:
        if not argv:
            raise ValueError("backend command is empty")
        self.argv = tuple(argv)
        self.transport_exit_codes = transport_exit_codes

    def synthesize(
        self, request: JobRequest, target: ExecutionTarget, timeout_seconds: float
    ) -> SynthesisOutcome:
        argv = [*target.command_prefix, *self.argv, request.directive_path]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout_seconds)
        except subprocess.TimeoutExpired as exc:
            raise JobTimeout(f"backend exceeded {timeout_seconds}s") from exc
        except OSError as exc:
            raise TransportError(f"spawn failure on {target.name}: {exc}") from exc
        log = (proc.stdout or "") + (proc.stderr or "")
        if proc.returncode in self.transport_exit_codes:
            raise TransportError(f"transport exit code {proc.returncode} on {target.name}")
        if proc.returncode != 0:
            return SynthesisOutcome(
                success=False, log_text=log.strip() or f"exit {proc.returncode}"
            )
        metrics = {}
        for line in log.splitlines():
            for key in ("LATENCY_MS", "AREA", "SYNTH_S"):
                if line.startswith(key + "="):
                    metrics[key] = float(line.split("=", 1)[1].strip())
        missing = {"LATENCY_MS", "AREA", "SYNTH_S"} - set(metrics)
        if missing:
            return SynthesisOutcome(
                success=False, log_text=f"backend exited 0 but omitted {sorted(missing)}\n{log}"
            )
        return SynthesisOutcome(
            success=True,
            latency_ms=metrics["LATENCY_MS"],
            area=metrics["AREA"],
            synth_seconds=metrics["SYNTH_S"],
            log_text=log,
        )


class TransientFaultBackend:
    """Test/demo wrapper injecting transport failures on scripted attempts.

    Fails the first `failures` attempts of every point index in
    `fault_indices` with TransportError, then delegates to the inner
    backend. Thread-safe.
    """

    def __init__(self, inner: SynthesisBackend, fault_indices: set[int], failures: int = 1) -> None:
        self.inner = inner
        self.fault_indices = set(fault_indices)
        self.failures = failures
        self._attempts: dict[int, int] = {}
        self._lock = threading.Lock()

    def synthesize(
        self, request: JobRequest, target: ExecutionTarget, timeout_seconds: float
    ) -> SynthesisOutcome:
        with self._lock:
            seen = self._attempts.get(request.point_index, 0) + 1
            self._attempts[request.point_index] = seen
        if request.point_index in self.fault_indices and seen <= self.failures:
            raise TransportError(f"injected transport fault (attempt {seen})")
        return self.inner.synthesize(request, target, timeout_seconds)


# ---------------------------------------------------------------------------
# The runner
# ---------------------------------------------------------------------------


@dataclass
class RunSummary:
    total_jobs: int
    counts: dict[str, int]
    wall_seconds: float
    run_dir: str

    def to_json(self) -> dict:
        return {
            "total_jobs": self.total_jobs,
            "counts": self.counts,
            "wall_seconds": self.wall_seconds,
            "run_dir": self.run_dir,
        }


def _call_with_watchdog(fn, timeout_seconds: float):
    """Run fn() on a daemon thread; raise JobTimeout if it outlives the
    timeout (the stray thread is abandoned, its result discarded)."""
    box: dict[str, object] = {}

    def runner():
        try:
            box["value"] = fn()
        except BaseException as exc:  # propagated to the caller below
            box["error"] = exc

    t = threading.Thread(target=runner, daemon=True)
    t.start()
    t.join(timeout_seconds)
    if t.is_alive():
        raise JobTimeout(f"attempt exceeded {timeout_seconds}s")
    if "error" in box:
        raise box["error"]  # type: ignore[misc]
    return box["value"]


def _load_journal(path: Path) -> dict[int, dict]:
    records: dict[int, dict] = {}
    if path.exists():
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rec = json.loads(line)
                    records[int(rec["index"])] = rec
    return records


def run_all(
    manifest: Manifest,
    plan: ExecutionPlan,
    backend: SynthesisBackend,
    run_dir: str | os.PathLike | None = None,
    run_root: str | os.PathLike = "run",
) -> tuple[Manifest, RunSummary]:
    """Drive every manifest row to exactly one terminal state.

    Results are merged into the manifest sorted by point index and written
    back to journal/log files under the run directory. If the run directory
    already holds a journal, jobs recorded there are not re-run (crash
    recovery). Individual job failures never abort the run.
    """
    if run_dir is None:
        run_dir = Path(run_root) / time.strftime("%Y%m%d-%H%M%S")
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    journal_path = run_dir / "journal.ndjson"
    prior = _load_journal(journal_path)

    jobs = [
        Job(point_index=r.index, directive_path=r.path, assignment=dict(r.values))
        for r in sorted(manifest.rows, key=lambda r: r.index)
    ]
    journal_lock = threading.Lock()
    started = time.monotonic()

    def record_terminal(job: Job, state: str, outcome: SynthesisOutcome | None, reason: str) -> None:
        job.state = state
        job.reason = reason
        job.outcome = outcome
        job_dir = run_dir / f"dp_{job.point_index:06d}"
        job_dir.mkdir(exist_ok=True)
        log_path = job_dir / "log.txt"
        log_lines = [f"point {job.point_index} state={state} attempts={job.attempts}"]
        if reason:
            log_lines.append(reason)
        if outcome is not None and outcome.log_text:
            log_lines.append(outcome.log_text)
        log_path.write_text("\n".join(log_lines) + "\n", encoding="utf-8")
        job.log_path = str(log_path)
        rec = {
            "index": job.point_index,
            "state": state,
            "latency_ms": outcome.latency_ms if outcome else None,
            "area": outcome.area if outcome else None,
            "synth_seconds": outcome.synth_seconds if outcome else None,
            "attempts": job.attempts,
        }
        with journal_lock:
            with open(journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec) + "\n")

    def attempt(job: Job) -> str:
        """Run one attempt; returns 'retry' or a terminal state."""
        job.state = RUNNING
        job.attempts += 1
        job.worker_id = threading.current_thread().name
        target = plan.targets[job.point_index % len(plan.targets)]
        request = JobRequest(
            point_index=job.point_index,
            directive_path=job.directive_path,
            assignment=job.assignment,
        )
        try:
            outcome = _call_with_watchdog(
                lambda: backend.synthesize(request, target, plan.per_job_timeout_seconds),
                plan.per_job_timeout_seconds,
            )
        except JobTimeout as exc:
            record_terminal(job, TIMED_OUT, None, str(exc))
            return TIMED_OUT
        except TransportError as exc:
            if job.attempts <= plan.max_retries:
                job.state = PENDING
                return "retry"
            record_terminal(job, TRANSPORT_FAILED, None, f"retries exhausted: {exc}")
            return TRANSPORT_FAILED
        except Exception as exc:  # backend bug or profile mismatch: job fails, run continues
            record_terminal(
                job,
                SYNTHESIS_FAILED,
                SynthesisOutcome(success=False, log_text=f"backend error: {exc}"),
                f"backend error: {exc}",
            )
            return SYNTHESIS_FAILED
        if outcome.success:
            record_terminal(job, SUCCEEDED, outcome, "")
            return SUCCEEDED
        record_terminal(job, SYNTHESIS_FAILED, outcome, outcome.log_text)
        return SYNTHESIS_FAILED

    todo = []
    for job in jobs:
        rec = prior.get(job.point_index)
        if rec is not None and rec["state"] in TERMINAL_STATES:
            job.state = rec["state"]
            job.attempts = int(rec.get("attempts", 1))
            if rec["state"] == SUCCEEDED:
                job.outcome = SynthesisOutcome(
                    success=True,
                    latency_ms=rec["latency_ms"],
                    area=rec["area"],
                    synth_seconds=rec["synth_seconds"] or 0.0,
                )
            elif rec.get("synth_seconds") is not None:
                job.outcome = SynthesisOutcome(
                    success=False,
                    synth_seconds=rec["synth_seconds"],
                    log_text="recovered from journal",
                )
        else:
            todo.append(job)

    if todo:
        with ThreadPoolExecutor(max_workers=plan.pool_size, thread_name_prefix="synth") as pool:
            pending = {pool.submit(attempt, job): job for job in todo}
            while pending:
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    job = pending.pop(fut)
                    if fut.result() == "retry":
                        pending[pool.submit(attempt, job)] = job

    for job in jobs:
        row = manifest.row_for(job.point_index)
        row.status = job.state
        if job.outcome is not None:
            row.latency_ms = job.outcome.latency_ms
            row.area = job.outcome.area
            row.synth_seconds = job.outcome.synth_seconds

    counts: dict[str, int] = {}
    for job in jobs:
        counts[job.state] = counts.get(job.state, 0) + 1
    summary = RunSummary(
        total_jobs=len(jobs),
        counts=counts,
        wall_seconds=time.monotonic() - started,
        run_dir=str(run_dir),
    )
    (run_dir / "summary.json").write_text(json.dumps(summary.to_json(), indent=2) + "\n", encoding="utf-8")
    return manifest, summary


@dataclass
class CollectedLogs:
    logs: list[tuple[int, str]]
    missing: list[int]


def collect_logs(run_dir: str | os.PathLike) -> CollectedLogs:
    """Gather per-point logs; journal entries without a log file are
    reported as missing, never fabricated."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory {run_dir} does not exist")
    logs: list[tuple[int, str]] = []
    found = set()
    for job_dir in sorted(run_dir.glob("dp_*")):
        log_path = job_dir / "log.txt"
        if log_path.is_file():
            index = int(job_dir.name.split("_", 1)[1])
            logs.append((index, log_path.read_text(encoding="utf-8")))
            found.add(index)
    expected = set(_load_journal(run_dir / "journal.ndjson"))
    missing = sorted(expected - found)
    return CollectedLogs(logs=logs, missing=missing)
