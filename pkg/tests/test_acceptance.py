"""Acceptance suite: one test per release criterion, at stated tolerances.

Run with `pytest tests/test_acceptance.py -v`; a per-criterion PASS/FAIL
summary is printed at the end of the session (see conftest.py).
"""

import json
import random
import time
from pathlib import Path

import pytest

from hlskit.agentloop import Episode, Transition, compute_metrics, load_trace, write_trace
from hlskit.betatrials import (
    STOP_FUTILITY,
    STOP_MAX_TRIALS,
    STOP_PRECISION,
    STOP_SUCCESS,
    StoppingConfig,
    TrialLedger,
    TrialOutcome,
    cost_summary,
    posterior,
    should_stop,
)
from hlskit.bitwidth import (
    ROLE_CANDIDATE,
    FixedPointFormat,
    OracleResult,
    TypeBudget,
    min_integer_bits,
    quantize,
    search_widths,
)
from hlskit.designspace import (
    DesignSpaceSpec,
    Dimension,
    DimensionValue,
    emit_directives,
    expand,
)
from hlskit.pareto import pareto_front, summarize
from hlskit.ragkit import Chunk, HashedTokenEmbedder, VectorIndex
from hlskit.refactor import emit_ioquery
from hlskit.synthrunner import (
    SUCCEEDED,
    SYNTHESIS_FAILED,
    ExecutionPlan,
    MockArray,
    MockBackend,
    MockKernelProfile,
    TransientFaultBackend,
    run_all,
)

from test_bitwidth import ThresholdOracle, linear_scan_widths
from test_pareto import oracle_front, random_records, rec
from test_refactor import CASES, GOLDEN, apply_case


def test_c01_bayesian_reproduction():
    """Posterior means/CIs reproduce the published analysis; runtime < 1 s."""
    started = time.monotonic()
    table = [
        (75, 24, 32.5, 22.5, 43.3),
        (73, 42, 57.3, 46.1, 68.2),
        (60, 45, 74.2, 62.7, 84.2),
        (30, 29, 93.8, 83.3, 99.2),
    ]
    for n, k, mean, lo, hi in table:
        post = posterior(n, k)
        assert post.mean * 100 == pytest.approx(mean, abs=0.05), (n, k)
        got_lo, got_hi = post.credible_interval(0.95)
        assert got_lo * 100 == pytest.approx(lo, abs=0.1), (n, k)
        assert got_hi * 100 == pytest.approx(hi, abs=0.1), (n, k)
    assert posterior(30, 29).prob_theta_gt(0.90) == pytest.approx(0.83, abs=0.005)
    assert time.monotonic() - started < 1.0


def test_c02_cost_metric_reproduction():
    """Cost per success via the stated formula; row A's published value is
    inconsistent with that formula and the computed value is 8.28."""

    def ledger_for(n, k, mean_cost):
        outs = [
            TrialOutcome(passed=i < k, failed_stage=None if i < k else "compile", cost_usd=mean_cost)
            for i in range(n)
        ]
        return TrialLedger(outs)

    for n, k, mean_cost, expected in [(73, 42, 3.66, 6.37), (60, 45, 4.07, 5.43), (30, 29, 7.33, 7.58)]:
        got = cost_summary(ledger_for(n, k, mean_cost)).cost_per_success
        assert got == pytest.approx(expected, abs=0.01), (n, k)
    # row A: formula gives 8.28, not the published 9.17
    row_a = cost_summary(ledger_for(75, 24, 2.65)).cost_per_success
    assert row_a == pytest.approx(8.28, abs=0.01)
    assert abs(row_a - 9.17) > 0.5


def test_c03_success_rate_table():
    """All eight published synthesis-success-rate cells to one decimal."""
    cells = [
        (1080, 61, "5.6"),
        (240, 136, "56.7"),
        (180, 61, "33.9"),
        (648, 109, "16.8"),
        (504, 72, "14.3"),
        (486, 295, "60.7"),
        (384, 289, "75.3"),
        (54, 49, "90.7"),
    ]
    for total, succeeded, display in cells:
        records = [rec(i, 1.0 + i, 1.0) for i in range(succeeded)]
        records += [rec(succeeded + i, success=False) for i in range(total - succeeded)]
        assert summarize(records).success_rate_display == display, (total, succeeded)


def test_c04_pareto_oracle_equivalence():
    """100 random record sets (n <= 1000): front equals the O(n^2) oracle
    exactly, and is invariant under positive axis rescaling. < 10 s."""
    started = time.monotonic()
    rng = random.Random(2024)
    for trial in range(100):
        records = random_records(rng, rng.randint(1, 1000))
        base = pareto_front(records).indices
        assert base == oracle_front(records), f"trial {trial}"
        lat_scale = rng.uniform(0.001, 1000.0)
        area_scale = rng.uniform(0.001, 1000.0)
        scaled = [
            rec(r.point_index, r.outcome.latency_ms * lat_scale, r.outcome.area * area_scale)
            if r.success
            else r
            for r in records
        ]
        assert pareto_front(scaled).indices == base, f"trial {trial} (scaling)"
    assert time.monotonic() - started < 10.0


PROFILE = MockKernelProfile(
    iterations=1000,
    ops_per_iteration=8,
    arrays=(
        MockArray(name="x", path="/k/x", accesses_per_iteration=4, area_per_port=10.0),
        MockArray(name="b", path="/k/b", accesses_per_iteration=3, area_per_port=5.0),
    ),
    base_area=100.0,
    min_clock_ns=2.0,
)


def _dse_spec():
    def dim(i, t, p, vals):
        return Dimension(id=i, directive_type=t, target_path=p,
                         values=tuple(DimensionValue(v) for v in vals))

    return DesignSpaceSpec(
        kernel_name="K",
        base_directive_file="base.tcl",
        dimensions=(
            dim("design_goal", "DESIGN_GOAL", None, ["area", "latency"]),
            dim("clock_period", "CLOCK_PERIOD", None, ["2.0", "5.0"]),
            dim("unroll", "UNROLL", "/k/L", ["no", "2", "4"]),
            dim("pipeline", "PIPELINE_II", "/k/L", ["none", "1", "2"]),
            dim("il_x", "INTERLEAVE", "/k/x", ["1", "4", "8", "16"]),
            dim("il_b", "INTERLEAVE", "/k/b", ["3", "12"]),
        ),
    )


def test_c05_dse_determinism_and_feasibility_boundary(tmp_path):
    """>= 200-point mock DSE: pool 1 and pool 8 manifests byte-identical;
    the interleave feasibility boundary is exact. < 30 s."""
    started = time.monotonic()
    spec = _dse_spec()
    points = expand(spec)
    assert len(points) == 288  # >= 200

    manifests = {}
    for pool in (1, 8):
        base = tmp_path / f"pool{pool}"
        base.mkdir()
        (base / "base.tcl").write_text("# base\n")
        manifest = emit_directives(spec, points, base / "out", base_dir=base)
        backend = MockBackend(PROFILE, spec)
        manifest, _ = run_all(manifest, ExecutionPlan(pool_size=pool), backend, run_dir=base / "run")
        manifest.write_csv(base / "final.csv")
        manifests[pool] = (base / "final.csv").read_bytes()
    assert manifests[1] == manifests[8]

    # exhaustive feasibility check against the model formulas
    base = tmp_path / "pool1"
    logs = {
        int(p.parent.name.split("_")[1]): p.read_text()
        for p in (base / "run").glob("dp_*/log.txt")
    }
    from hlskit.designspace import Manifest

    manifest = Manifest.read_csv(base / "final.csv")
    interleave_by_dim = {"il_x": "/k/x", "il_b": "/k/b"}
    k_by_path = {a.path: a.accesses_per_iteration for a in PROFILE.arrays}
    for row in manifest.rows:
        unroll = 1 if row.values["unroll"] == "no" else int(row.values["unroll"])
        ii = None if row.values["pipeline"] == "none" else int(row.values["pipeline"])
        ii_eff = ii if ii is not None else unroll
        short = []
        for dim_id, path in interleave_by_dim.items():
            banks = int(row.values[dim_id])
            required = -(-k_by_path[path] * unroll // ii_eff)
            if banks < required:
                short.append(path)
        if short:
            assert row.status == SYNTHESIS_FAILED, row.index
            assert "interleave" in logs[row.index], row.index
        else:
            assert row.status == SUCCEEDED, row.index
    assert time.monotonic() - started < 30.0


def test_c06_runner_robustness(tmp_path):
    """100 mock jobs, 20% injected transport faults, max_retries 2: every
    job terminal, no duplicate results, retries only on faulted jobs."""
    spec = _dse_spec()
    points = expand(spec)[:100]
    (tmp_path / "base.tcl").write_text("# base\n")
    manifest = emit_directives(spec, points, tmp_path / "out", base_dir=tmp_path)

    rng = random.Random(77)
    fault_indices = set(rng.sample(range(100), 20))  # 20% fault rate
    backend = TransientFaultBackend(MockBackend(PROFILE, spec), fault_indices, failures=1)
    plan = ExecutionPlan(pool_size=8, max_retries=2)
    manifest, summary = run_all(manifest, plan, backend, run_dir=tmp_path / "run")

    assert sum(summary.counts.values()) == 100
    journal = [
        json.loads(line)
        for line in (tmp_path / "run" / "journal.ndjson").read_text().splitlines()
    ]
    assert len(journal) == 100
    assert len({r["index"] for r in journal}) == 100  # zero duplicates
    retried = {r["index"] for r in journal if r["attempts"] > 1}
    assert retried == fault_indices  # retries logged only for transport faults
    assert all(row.status is not None for row in manifest.rows)


def test_c07_bitwidth_arithmetic_and_search():
    """Reduction percentages, the reference integer-bit count, binary vs
    linear search agreement, and the quantization properties."""
    # published reductions
    for after, display in [(17, "73.4"), (21, "67.2"), (22, "65.6"), (45, "29.7")]:
        budgets = [TypeBudget("T", ROLE_CANDIDATE, 0.0, 3.0)]
        report = search_widths(budgets, ThresholdOracle({"T": after}))
        assert f"{report.entry('T').reduction_percent:.1f}" == display

    assert min_integer_bits(-500000, 500000, signed=True) == 20

    # binary search equals the linear-scan oracle on 50 synthetic oracles
    rng = random.Random(4242)
    for trial in range(50):
        budgets = []
        thresholds = {}
        for t in range(rng.randint(1, 4)):
            name = f"T{t}"
            hi = float(rng.randint(1, 10**6))
            lo = -hi if rng.random() < 0.5 else 0.0
            budgets.append(TypeBudget(name, ROLE_CANDIDATE, lo, hi))
            thresholds[name] = rng.randint(2, 64)
        oracle = ThresholdOracle(thresholds)
        expected = linear_scan_widths(budgets, oracle)
        got = {e.typedef_name: e.after_bits for e in search_widths(budgets, oracle).entries}
        assert got == expected, f"trial {trial}"

    # quantize idempotence
    rng = random.Random(31)
    for _ in range(200):
        w = rng.randint(2, 64)
        fmt = FixedPointFormat(w, rng.randint(1, w), signed=rng.random() < 0.5)
        v = rng.uniform(-1e7, 1e7) * 10 ** rng.randint(-8, 2)
        q = quantize(v, fmt)
        assert quantize(q, fmt) == q

    # monotone error in W at fixed I
    trace = [rng.uniform(-7.9, 7.9) for _ in range(40)]
    prev = None
    for w in range(4, 61):
        fmt = FixedPointFormat(w, 4, signed=True)
        err = max(abs(float(quantize(v, fmt)) - v) / abs(v) for v in trace)
        if prev is not None:
            assert err <= prev + 1e-18
        prev = err


def test_c08_verifier_loop_metrics(tmp_path):
    """Constructed episode sets reproduce all six published per-phase rows
    exactly at display precision, in memory and through a trace file."""
    rows = {
        0: ([1] * 30, "1.00", 1, "100.0%"),
        1: ([1] * 23 + [2] * 7, "1.23", 2, "76.7%"),
        2: ([1] * 23 + [2] * 6 + [3], "1.27", 3, "76.7%"),
        3: ([1] * 30, "1.00", 1, "100.0%"),
        4: ([1] * 29 + [2], "1.03", 2, "96.7%"),
        5: ([1] * 30, "1.00", 1, "100.0%"),
    }
    episodes = []
    stamp = 0.0
    for phase_id, (rounds_list, _, _, _) in rows.items():
        for rounds in rounds_list:
            transitions = []
            for r in range(1, rounds + 1):
                transitions.append(Transition("specialist", r, stamp))
                transitions.append(Transition("verifier", r, stamp + 0.5))
                stamp += 1.0
            episodes.append(
                Episode(
                    phase_id=phase_id,
                    rounds=rounds,
                    transitions=tuple(transitions),
                    accepted=True,
                    final_feedback=None,
                )
            )
    for metrics in (
        compute_metrics(episodes),
        compute_metrics(load_trace(_roundtrip(episodes, tmp_path))),
    ):
        for phase_id, (_, mean, max_rounds, single) in rows.items():
            m = metrics.phases[phase_id]
            assert m.mean_rounds_display == mean, phase_id
            assert m.max_rounds_observed == max_rounds, phase_id
            assert m.single_pass_display == single, phase_id


def _roundtrip(episodes, tmp_path):
    path = tmp_path / "trace.ndjson"
    write_trace(episodes, path)
    return path


def test_c09_refactor_golden_corpus():
    """>= 20 golden pairs pass byte-exact, all transforms idempotent, and
    the emitted analysis query matches the reference text byte-for-byte."""
    assert len(CASES) >= 20
    required = {"sm_single_pointer", "sm_double_pointer"}
    assert required <= set(CASES)
    for name in CASES:
        case_dir = GOLDEN / name
        source = (case_dir / "input.c").read_text()
        expected = (case_dir / "expected.c").read_text()
        edits = apply_case(case_dir, source)
        out = edits.apply(source)
        assert out == expected, name
        assert apply_case(case_dir, out).is_empty, name

    # the two named conversions
    assert (GOLDEN / "sm_single_pointer" / "expected.c").read_text() == "double f[2048];\n"
    assert "neighbor[2048][512]" in (GOLDEN / "sm_double_pointer" / "expected.c").read_text()

    from test_refactor import TestEmitIoquery

    query = emit_ioquery("Torsion_Angles", "reaxff_torsion_angles.cpp")
    assert query == TestEmitIoquery.REFERENCE


def test_c10_retrieval_determinism(tmp_path):
    """Exact-duplicate query at cosine 1.0; full-scan argsort oracle on
    10^4 chunks; save/load round-trip preserves rankings."""
    import numpy as np

    emb = HashedTokenEmbedder(64)
    index = VectorIndex(64)
    rng = random.Random(8)
    words = [f"w{i}" for i in range(400)]
    texts = [" ".join(rng.choices(words, k=6)) for _ in range(10_000)]
    chunks = [Chunk(doc_id=f"d{i % 5}", chunk_index=i, byte_offset=0, text=t) for i, t in enumerate(texts)]
    index.add(chunks, emb)

    results = index.retrieve(texts[1234], emb, k=5)
    assert results[0][1] == pytest.approx(1.0, abs=1e-6)
    assert texts[results[0][0].chunk_index] == texts[1234]

    query = " ".join(rng.choices(words, k=6))
    got = index.retrieve(query, emb, k=40)
    q = emb.embed(query)
    scores = np.vstack([emb.embed(t) for t in texts]) @ q
    expected = sorted(
        range(len(texts)), key=lambda i: (-scores[i], chunks[i].doc_id, chunks[i].chunk_index)
    )[:40]
    assert expected == [c.chunk_index for c, _ in got]

    path = tmp_path / "index.ndjson"
    index.save(path)
    loaded = VectorIndex.load(path)
    reloaded = loaded.retrieve(query, emb, k=40)
    assert [(c.chunk_index, s) for c, s in got] == [(c.chunk_index, s) for c, s in reloaded]


def test_c11_stopping_rules():
    """Simulated trial streams reach every stop reason under the documented
    thresholds, including the closed-form futility case."""
    cfg = StoppingConfig()  # documented defaults

    def first_stop(outcomes, config=cfg):
        n = k = 0
        for passed in outcomes:
            n += 1
            k += int(passed)
            reason = should_stop(posterior(n, k), config, n)
            if reason is not None:
                return n, reason
        return n, None

    # success: all-pass stream
    n, reason = first_stop([True] * 60)
    assert reason == STOP_SUCCESS and n == 30

    # futility: all-fail stream, with the closed form P(theta < 0.1) = 1 - 0.9^31
    n, reason = first_stop([False] * 60)
    assert reason == STOP_FUTILITY and n == 30
    closed_form = 1.0 - 0.9**31
    assert posterior(30, 0).prob_theta_lt(0.10) == pytest.approx(closed_form, abs=1e-10)
    assert closed_form > 0.33

    # precision: 29-of-30 stream stops right at the floor with a 7.95pp half-width
    stream = [True] * 15 + [False] + [True] * 44
    n, reason = first_stop(stream)
    assert reason == STOP_PRECISION and n == 30
    lo, hi = posterior(30, 29).credible_interval(0.95)
    assert 0.5 * (hi - lo) <= 0.125

    # max_trials: alternating stream stays wide until the cap
    capped = StoppingConfig(max_trials=40)
    alternating = [i % 2 == 0 for i in range(40)]
    n, reason = first_stop(alternating, capped)
    assert reason == STOP_MAX_TRIALS and n == 40
