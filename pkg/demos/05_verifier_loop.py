"""The specialist-verifier loop engine on scripted backends.

A preparation pipeline of six phases runs episode by episode; the
verifier rejects with feedback until the specialist's output satisfies
it, and the per-phase metrics summarize loop behavior.
"""

import random
from pathlib import Path

from hlskit.agentloop import (
    TaskSpec,
    Verdict,
    compute_metrics,
    load_trace,
    run_pipeline,
)

OUT = Path(__file__).parent / "_out"
OUT.mkdir(parents=True, exist_ok=True)

TASKS = [
    TaskSpec(phase_id=0, description="datastructure pruning"),
    TaskSpec(phase_id=1, description="memory interface refactoring"),
    TaskSpec(phase_id=2, description="type conversion"),
    TaskSpec(phase_id=3, description="loop labeling"),
    TaskSpec(phase_id=4, description="math function replacement"),
    TaskSpec(phase_id=5, description="construct verification"),
]

# phases 1 and 2 are the fragile multi-site rewrites; the rest are stable
REJECTION_RATE = {0: 0.0, 1: 0.25, 2: 0.25, 3: 0.0, 4: 0.05, 5: 0.0}
rng = random.Random(7)


class ScriptedSpecialist:
    def produce(self, task, feedback):
        revision = 0 if feedback is None else int(feedback.rsplit(" ", 1)[-1]) + 1
        return f"deliverable for phase {task.phase_id}, revision {revision}"


class ScriptedVerifier:
    def verify(self, task, deliverable):
        if rng.random() < REJECTION_RATE[task.phase_id]:
            revision = int(deliverable.rsplit(" ", 1)[-1])
            return Verdict.reject(f"incomplete transformation, revision {revision}")
        return Verdict.accept()


# 30 independent pipeline runs, all six phases each
episodes = []
for _ in range(30):
    episodes += run_pipeline(TASKS, ScriptedSpecialist(), ScriptedVerifier(),
                             max_rounds=5, continue_on_failure=True)

metrics = compute_metrics(episodes)
print(metrics.render_text())

# traces serialize to NDJSON; metrics recomputed offline match exactly
trace_path = OUT / "verifier_trace.ndjson"
from hlskit.agentloop import write_trace

write_trace(episodes, trace_path)
replayed = compute_metrics(load_trace(trace_path))
assert replayed.to_json() == metrics.to_json()
print(f"trace round-trip OK: {trace_path}")
