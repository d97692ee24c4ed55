"""Specialist-verifier loop engine with episode tracing and metrics.

A specialist backend produces a deliverable for a task; a verifier backend
either accepts it or rejects it with feedback that seeds the specialist's
next attempt. One episode runs until acceptance or a round cap. Episodes
serialize to an NDJSON trace from which the per-phase metrics (mean
verifier rounds, max rounds, single-pass rate) are recomputable offline.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence

__all__ = [
    "TaskSpec",
    "Verdict",
    "Transition",
    "Episode",
    "SpecialistBackend",
    "VerifierBackend",
    "CommandSpecialist",
    "CommandVerifier",
    "run_episode",
    "run_pipeline",
    "PhaseMetrics",
    "EpisodeMetrics",
    "compute_metrics",
    "write_trace",
    "load_trace",
    "DEFAULT_MAX_ROUNDS",
]

DEFAULT_MAX_ROUNDS = 5

SPECIALIST = "specialist"
VERIFIER = "verifier"


@dataclass(frozen=True)
class TaskSpec:
    """One pipeline sub-task handled by a specialist."""

    phase_id: int
    description: str
    deliverable_contract: str = ""


@dataclass(frozen=True)
class Verdict:
    """Verifier decision: accept, or reject with non-empty feedback."""

    accepted: bool
    feedback: str = ""

    def __post_init__(self) -> None:
        if not self.accepted and not self.feedback.strip():
            raise ValueError("a rejection must carry feedback")

    @classmethod
    def accept(cls) -> "Verdict":
        return cls(accepted=True)

    @classmethod
    def reject(cls, feedback: str) -> "Verdict":
        return cls(accepted=False, feedback=feedback)


@dataclass(frozen=True)
class Transition:
    actor: str  # specialist | verifier
    round: int
    timestamp: float


@dataclass(frozen=True)
class Episode:
    """Trace of one specialist-verifier interaction.

    rounds counts verifier invocations; for episodes cut short by a
    backend error it counts the round that was in progress, so it is
    always >= 1.
    """

    phase_id: int
    rounds: int
    transitions: tuple[Transition, ...]
    accepted: bool
    final_feedback: str | None = None
    error: str | None = None

    @property
    def single_pass(self) -> bool:
        return self.accepted and self.rounds == 1


class SpecialistBackend(Protocol):
    def produce(self, task: TaskSpec, feedback: str | None) -> str:
        """Produce a deliverable, revising per the verifier's feedback."""


class VerifierBackend(Protocol):
    def verify(self, task: TaskSpec, deliverable: str) -> Verdict:
        """Adversarially check a deliverable."""


def run_episode(
    task: TaskSpec,
    specialist: SpecialistBackend,
    verifier: VerifierBackend,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    clock: Callable[[], float] = time.time,
) -> Episode:
    """Alternate produce/verify until acceptance or the round cap.

    A backend exception terminates the episode as not-accepted with the
    error recorded; it is never raised to the caller.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    transitions: list[Transition] = []
    feedback: str | None = None
    for round_no in range(1, max_rounds + 1):
        transitions.append(Transition(SPECIALIST, round_no, clock()))
        try:
            deliverable = specialist.produce(task, feedback)
        except Exception as exc:
            return Episode(
                phase_id=task.phase_id,
                rounds=round_no,
                transitions=tuple(transitions),
                accepted=False,
                error=f"specialist error: {exc}",
            )
        transitions.append(Transition(VERIFIER, round_no, clock()))
        try:
            verdict = verifier.verify(task, deliverable)
        except Exception as exc:
            return Episode(
                phase_id=task.phase_id,
                rounds=round_no,
                transitions=tuple(transitions),
                accepted=False,
                error=f"verifier error: {exc}",
            )
        if verdict.accepted:
            return Episode(
                phase_id=task.phase_id,
                rounds=round_no,
                transitions=tuple(transitions),
                accepted=True,
            )
        feedback = verdict.feedback
    return Episode(
        phase_id=task.phase_id,
        rounds=max_rounds,
        transitions=tuple(transitions),
        accepted=False,
        final_feedback=feedback,
    )


def run_pipeline(
    tasks: Sequence[TaskSpec],
    specialist: SpecialistBackend,
    verifier: VerifierBackend,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    continue_on_failure: bool = False,
    trace_path: str | os.PathLike | None = None,
    clock: Callable[[], float] = time.time,
) -> list[Episode]:
    """Run episodes in task order; a rejected episode aborts the remaining
    tasks unless continue_on_failure is set. Optionally emits a trace."""
    episodes: list[Episode] = []
    for task in tasks:
        episode = run_episode(task, specialist, verifier, max_rounds=max_rounds, clock=clock)
        episodes.append(episode)
        if not episode.accepted and not continue_on_failure:
            break
    if trace_path is not None:
        write_trace(episodes, trace_path)
    return episodes


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseMetrics:
    phase_id: int
    episode_count: int
    mean_rounds: float
    max_rounds_observed: int
    single_pass_rate: float  # percentage

    @property
    def mean_rounds_display(self) -> str:
        return f"{self.mean_rounds:.2f}"

    @property
    def single_pass_display(self) -> str:
        return f"{self.single_pass_rate:.1f}%"


@dataclass(frozen=True)
class EpisodeMetrics:
    phases: dict[int, PhaseMetrics]

    def render_text(self) -> str:
        header = f"{'Phase':>6} {'Episodes':>9} {'Mean Rounds':>12} {'Max Rounds':>11} {'Single-Pass':>12}"
        lines = [header, "-" * len(header)]
        for phase_id in sorted(self.phases):
            m = self.phases[phase_id]
            lines.append(
                f"{phase_id:>6} {m.episode_count:>9} {m.mean_rounds_display:>12} "
                f"{m.max_rounds_observed:>11} {m.single_pass_display:>12}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            str(pid): {
                "episode_count": m.episode_count,
                "mean_rounds": m.mean_rounds,
                "max_rounds_observed": m.max_rounds_observed,
                "single_pass_rate": m.single_pass_rate,
            }
            for pid, m in self.phases.items()
        }


def compute_metrics(episodes: Iterable[Episode]) -> EpisodeMetrics:
    """Per-phase mean rounds, observed max, and single-pass rate."""
    by_phase: dict[int, list[Episode]] = {}
    for e in episodes:
        by_phase.setdefault(e.phase_id, []).append(e)
    if not by_phase:
        raise ValueError("no episodes to aggregate")
    phases = {}
    for phase_id, eps in by_phase.items():
        n = len(eps)
        phases[phase_id] = PhaseMetrics(
            phase_id=phase_id,
            episode_count=n,
            mean_rounds=sum(e.rounds for e in eps) / n,
            max_rounds_observed=max(e.rounds for e in eps),
            single_pass_rate=100.0 * sum(1 for e in eps if e.single_pass) / n,
        )
    return EpisodeMetrics(phases=phases)


# ---------------------------------------------------------------------------
# Trace serialization
# ---------------------------------------------------------------------------


def write_trace(episodes: Sequence[Episode], path: str | os.PathLike) -> None:
    """NDJSON trace: one record per transition, with the verdict and any
    feedback attached to verifier records."""
    with open(path, "w", encoding="utf-8") as fh:
        for episode_id, episode in enumerate(episodes):
            last = episode.transitions[-1] if episode.transitions else None
            error_in_verifier = episode.error is not None and last is not None and last.actor == VERIFIER
            last_verifier_round = max(
                (t.round for t in episode.transitions if t.actor == VERIFIER), default=0
            )
            for t in episode.transitions:
                rec = {
                    "episode_id": episode_id,
                    "phase_id": episode.phase_id,
                    "actor": t.actor,
                    "round": t.round,
                    "timestamp": t.timestamp,
                }
                if t.actor == VERIFIER and t.round == last_verifier_round:
                    if error_in_verifier:
                        rec["verdict"] = "error"
                        rec["feedback"] = episode.error
                    elif episode.accepted:
                        rec["verdict"] = "accept"
                    else:
                        rec["verdict"] = "reject"
                        if episode.final_feedback:
                            rec["feedback"] = episode.final_feedback
                elif t.actor == VERIFIER:
                    rec["verdict"] = "reject"
                fh.write(json.dumps(rec) + "\n")
            if episode.error is not None and not error_in_verifier:
                # error fired inside the specialist: append an explicit record
                # so the verdict and round count survive a round trip
                fh.write(
                    json.dumps(
                        {
                            "episode_id": episode_id,
                            "phase_id": episode.phase_id,
                            "actor": SPECIALIST,
                            "round": episode.rounds,
                            "timestamp": last.timestamp if last else 0.0,
                            "verdict": "error",
                            "feedback": episode.error,
                        }
                    )
                    + "\n"
                )


def load_trace(path: str | os.PathLike) -> list[Episode]:
    """Rebuild episodes from a trace; metrics over the result equal
    metrics over the in-memory episodes that produced it."""
    by_episode: dict[int, list[dict]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                by_episode.setdefault(int(rec["episode_id"]), []).append(rec)
    episodes = []
    for episode_id in sorted(by_episode):
        recs = by_episode[episode_id]
        phase_id = int(recs[0]["phase_id"])
        rounds = max(int(r["round"]) for r in recs)
        verdicts = [r for r in recs if "verdict" in r]
        final = verdicts[-1] if verdicts else None
        accepted = final is not None and final["verdict"] == "accept"
        error = None
        final_feedback = None
        if final is not None and final["verdict"] == "error":
            error = final.get("feedback")
        elif final is not None and final["verdict"] == "reject":
            final_feedback = final.get("feedback")
        transitions = tuple(
            Transition(r["actor"], int(r["round"]), float(r["timestamp"]))
            for r in recs
            if r.get("verdict") != "error" or r["actor"] == VERIFIER
        )
        episodes.append(
            Episode(
                phase_id=phase_id,
                rounds=rounds,
                transitions=transitions,
                accepted=accepted,
                final_feedback=final_feedback,
                error=error,
            )
        )
    return episodes


# ---------------------------------------------------------------------------
# Command backends
# ---------------------------------------------------------------------------


class CommandSpecialist:
    """Specialist as a subprocess: task and feedback arrive as JSON on
    stdin, the deliverable is stdout. A nonzero exit raises."""

    def __init__(self, command: Sequence[str] | str) -> None:
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)

    def produce(self, task: TaskSpec, feedback: str | None) -> str:
        payload = json.dumps(
            {"phase_id": task.phase_id, "description": task.description, "feedback": feedback}
        )
        proc = subprocess.run(self.argv, input=payload, capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(f"specialist command exited {proc.returncode}: {proc.stderr.strip()}")
        return proc.stdout


class CommandVerifier:
    """Verifier as a subprocess: deliverable on stdin; exit 0 accepts,
    exit 1 rejects with the output as feedback."""

    def __init__(self, command: Sequence[str] | str) -> None:
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)

    def verify(self, task: TaskSpec, deliverable: str) -> Verdict:
        proc = subprocess.run(self.argv, input=deliverable, capture_output=True, text=True)
        if proc.returncode == 0:
            return Verdict.accept()
        if proc.returncode == 1:
            feedback = (proc.stdout or proc.stderr or "").strip() or "rejected"
            return Verdict.reject(feedback)
        raise RuntimeError(f"verifier command exited {proc.returncode}: {proc.stderr.strip()}")
