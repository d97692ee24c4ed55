"""Beta-Binomial trial harness: short-circuit staged trials, posterior
analytics over pass/fail sequences, adaptive stopping, and cost accounting.

The statistical model is a Bernoulli success rate theta with a uniform
Beta(1, 1) prior, so after n trials with k passes the posterior is
Beta(1 + k, 1 + n - k). All posterior queries reduce to the regularized
incomplete beta function, implemented here from scratch (continued
fraction) so results are reproducible to tight tolerances without any
external dependency.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "reg_inc_beta",
    "beta_quantile",
    "BetaPosterior",
    "posterior",
    "StoppingConfig",
    "should_stop",
    "STOP_PRECISION",
    "STOP_SUCCESS",
    "STOP_FUTILITY",
    "STOP_MAX_TRIALS",
    "TrialStages",
    "TrialOutcome",
    "TrialLedger",
    "run_trial",
    "run_adaptive",
    "CostSummary",
    "cost_summary",
    "posterior_report",
    "cost_report",
    "render_posterior_table",
    "render_cost_table",
]


# ---------------------------------------------------------------------------
# Regularized incomplete beta and Beta quantiles
# ---------------------------------------------------------------------------

_MAX_CF_ITER = 300
_CF_EPS = 1e-15
_CF_TINY = 1e-300


def _beta_cf(x: float, a: float, b: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b), the Beta(a, b) CDF at x.

    Accurate to well below 1e-10 absolute error over the supported domain
    (0 <= x <= 1, a > 0, b > 0).
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the continued fraction on whichever side converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(x, a, b) / a
    return 1.0 - front * _beta_cf(1.0 - x, b, a) / b


_QUANTILE_BISECTIONS = 60  # interval width 2^-60, far below the 1e-8 target


def beta_quantile(p: float, a: float, b: float) -> float:
    """Inverse of I_x(a, b) by bisection on [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(_QUANTILE_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if reg_inc_beta(mid, a, b) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Posterior over the latent pass rate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaPosterior:
    """Beta(alpha, beta) posterior over the latent success rate."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("Beta parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def cdf(self, x: float) -> float:
        return reg_inc_beta(x, self.alpha, self.beta)

    def quantile(self, p: float) -> float:
        return beta_quantile(p, self.alpha, self.beta)

    def credible_interval(self, level: float = 0.95) -> tuple[float, float]:
        """Equal-tailed credible interval at the given level."""
        if not 0.0 < level < 1.0:
            raise ValueError(f"level must be in (0, 1), got {level}")
        tail = 0.5 * (1.0 - level)
        return self.quantile(tail), self.quantile(1.0 - tail)

    def prob_theta_gt(self, t: float) -> float:
        """Posterior probability that the success rate exceeds t."""
        return 1.0 - self.cdf(t)

    def prob_theta_lt(self, t: float) -> float:
        return self.cdf(t)


def posterior(n: int, k: int) -> BetaPosterior:
    """Posterior after n trials with k passes under the uniform prior."""
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return BetaPosterior(alpha=1.0 + k, beta=1.0 + n - k)


# ---------------------------------------------------------------------------
# Adaptive stopping
# ---------------------------------------------------------------------------

STOP_PRECISION = "precision"
STOP_SUCCESS = "success"
STOP_FUTILITY = "futility"
STOP_MAX_TRIALS = "max_trials"


@dataclass(frozen=True)
class StoppingConfig:
    """Thresholds for the sequential stopping rule.

    A minimum-trial floor applies before any rule is evaluated. The rules
    are then checked in order: success, futility, precision, trial cap.
    """

    ci_level: float = 0.95
    precision_halfwidth: float = 0.125
    success_theta: float = 0.90
    success_prob: float = 0.90
    futility_theta: float = 0.10
    futility_prob: float = 0.33
    min_trials: int = 30
    max_trials: int = 100

    def __post_init__(self) -> None:
        for name in ("ci_level", "success_theta", "success_prob", "futility_theta", "futility_prob"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if self.precision_halfwidth <= 0:
            raise ValueError("precision_halfwidth must be positive")
        if self.min_trials > self.max_trials:
            raise ValueError("min_trials must not exceed max_trials")


def should_stop(post: BetaPosterior, config: StoppingConfig, n: int) -> str | None:
    """Stopping decision after n completed trials.

    Returns None to continue, or one of the STOP_* reason strings.
    """
    if n < config.min_trials:
        return None
    if post.prob_theta_gt(config.success_theta) > config.success_prob:
        return STOP_SUCCESS
    if post.prob_theta_lt(config.futility_theta) > config.futility_prob:
        return STOP_FUTILITY
    lo, hi = post.credible_interval(config.ci_level)
    if 0.5 * (hi - lo) <= config.precision_halfwidth:
        return STOP_PRECISION
    if n >= config.max_trials:
        return STOP_MAX_TRIALS
    return None


# ---------------------------------------------------------------------------
# Three-stage short-circuit trials
# ---------------------------------------------------------------------------

STAGE_NAMES = ("compile", "execute", "synthesize")

_COST_FIELDS = ("cost_usd", "wall_seconds", "tokens_in", "tokens_out", "api_calls")


@dataclass(frozen=True)
class TrialStages:
    """Commands for the three evaluation stages, run in order."""

    compile_cmd: Sequence[str] | str
    execute_cmd: Sequence[str] | str
    synthesize_cmd: Sequence[str] | str

    def as_list(self) -> list[tuple[str, list[str]]]:
        out = []
        for name, cmd in zip(STAGE_NAMES, (self.compile_cmd, self.execute_cmd, self.synthesize_cmd)):
            argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
            if not argv:
                raise ValueError(f"{name} command is empty")
            out.append((name, argv))
        return out


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one trial: pass/fail, first failing stage, and costs."""

    passed: bool
    failed_stage: str | None = None
    cost_usd: float = 0.0
    wall_seconds: float = 0.0
    tokens_in: float = 0.0
    tokens_out: float = 0.0
    api_calls: float = 0.0
    detail: str = ""

    def __post_init__(self) -> None:
        if self.passed != (self.failed_stage is None):
            raise ValueError("passed must hold exactly when failed_stage is absent")
        if self.failed_stage is not None and self.failed_stage not in STAGE_NAMES:
            raise ValueError(f"unknown stage {self.failed_stage!r}")

    def to_json(self) -> dict:
        d = {"passed": self.passed, "failed_stage": self.failed_stage}
        for f in _COST_FIELDS:
            d[f] = getattr(self, f)
        if self.detail:
            d["detail"] = self.detail
        return d

    @classmethod
    def from_json(cls, d: dict) -> "TrialOutcome":
        return cls(
            passed=bool(d["passed"]),
            failed_stage=d.get("failed_stage"),
            detail=d.get("detail", ""),
            **{f: float(d.get(f, 0.0)) for f in _COST_FIELDS},
        )


class TrialLedger:
    """Ordered trial outcomes with derived counts, persisted as NDJSON."""

    def __init__(self, outcomes: Iterable[TrialOutcome] = ()) -> None:
        self.outcomes: list[TrialOutcome] = list(outcomes)

    @property
    def n(self) -> int:
        return len(self.outcomes)

    @property
    def k(self) -> int:
        return sum(1 for o in self.outcomes if o.passed)

    def append(self, outcome: TrialOutcome, path: str | os.PathLike | None = None) -> None:
        self.outcomes.append(outcome)
        if path is not None:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(outcome.to_json()) + "\n")

    def posterior(self) -> BetaPosterior:
        return posterior(self.n, self.k)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "TrialLedger":
        outcomes = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    outcomes.append(TrialOutcome.from_json(json.loads(line)))
        return cls(outcomes)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for o in self.outcomes:
                fh.write(json.dumps(o.to_json()) + "\n")


def _read_sidecar(workdir: Path) -> dict[str, float]:
    """Read and remove a stage's metrics sidecar; zeros when absent or
    malformed."""
    sidecar = workdir / "metrics.json"
    totals = {f: 0.0 for f in _COST_FIELDS}
    if sidecar.exists():
        try:
            data = json.loads(sidecar.read_text(encoding="utf-8"))
            for f in _COST_FIELDS:
                totals[f] = float(data.get(f, 0.0))
        except (ValueError, TypeError):
            pass
        finally:
            sidecar.unlink()
    return totals


def run_trial(stages: TrialStages, workdir: str | os.PathLike | None = None) -> TrialOutcome:
    """Run the three stages in order, stopping at the first failure.

    Each stage may leave a ``metrics.json`` sidecar in the work directory
    ({cost_usd, wall_seconds, tokens_in, tokens_out, api_calls}); sidecars
    are summed across the stages that actually ran.
    """
    wd = Path(workdir) if workdir is not None else Path.cwd()
    totals = {f: 0.0 for f in _COST_FIELDS}
    for name, argv in stages.as_list():
        try:
            proc = subprocess.run(argv, cwd=wd, capture_output=True, text=True)
        except OSError as exc:
            for f, v in _read_sidecar(wd).items():
                totals[f] += v
            return TrialOutcome(passed=False, failed_stage=name, detail=f"spawn failure: {exc}", **totals)
        for f, v in _read_sidecar(wd).items():
            totals[f] += v
        if proc.returncode != 0:
            detail = (proc.stderr or proc.stdout or "").strip()[:500]
            return TrialOutcome(
                passed=False,
                failed_stage=name,
                detail=f"exit {proc.returncode}" + (f": {detail}" if detail else ""),
                **totals,
            )
    return TrialOutcome(passed=True, **totals)


def run_adaptive(
    stages: TrialStages,
    config: StoppingConfig,
    workdir: str | os.PathLike | None = None,
    ledger_path: str | os.PathLike | None = None,
) -> tuple[TrialLedger, str]:
    """Run trials until the stopping rule fires; returns (ledger, reason)."""
    ledger = TrialLedger()
    while True:
        ledger.append(run_trial(stages, workdir), path=ledger_path)
        reason = should_stop(ledger.posterior(), config, ledger.n)
        if reason is not None:
            return ledger, reason


# ---------------------------------------------------------------------------
# Cost accounting and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostSummary:
    """Per-trial means plus cost per successful outcome (mean cost / pass rate)."""

    n: int
    k: int
    mean_cost: float
    total_cost: float
    mean_time: float
    mean_tokens_in: float
    mean_tokens_out: float
    mean_api_calls: float
    cost_per_success: float | None  # None when k == 0


def cost_summary(ledger: TrialLedger) -> CostSummary:
    n = ledger.n
    if n < 1:
        raise ValueError("ledger is empty")
    k = ledger.k
    total_cost = sum(o.cost_usd for o in ledger.outcomes)
    mean_cost = total_cost / n
    return CostSummary(
        n=n,
        k=k,
        mean_cost=mean_cost,
        total_cost=total_cost,
        mean_time=sum(o.wall_seconds for o in ledger.outcomes) / n,
        mean_tokens_in=sum(o.tokens_in for o in ledger.outcomes) / n,
        mean_tokens_out=sum(o.tokens_out for o in ledger.outcomes) / n,
        mean_api_calls=sum(o.api_calls for o in ledger.outcomes) / n,
        cost_per_success=(mean_cost / (k / n)) if k > 0 else None,
    )


def posterior_report(ledger: TrialLedger, config: StoppingConfig | None = None, theta: float = 0.90) -> dict:
    """Posterior analysis of a ledger: pass rate, mean, CI, P(theta > t)."""
    config = config or StoppingConfig()
    post = ledger.posterior()
    lo, hi = post.credible_interval(config.ci_level)
    return {
        "n": ledger.n,
        "k": ledger.k,
        "pass_rate_pct": 100.0 * ledger.k / ledger.n if ledger.n else None,
        "posterior_mean_pct": 100.0 * post.mean,
        "ci_level": config.ci_level,
        "ci_lo_pct": 100.0 * lo,
        "ci_hi_pct": 100.0 * hi,
        "prob_theta_gt": {f"{theta:g}": post.prob_theta_gt(theta)},
    }


def cost_report(ledger: TrialLedger) -> dict:
    s = cost_summary(ledger)
    return {
        "n": s.n,
        "k": s.k,
        "mean_cost_usd": s.mean_cost,
        "total_cost_usd": s.total_cost,
        "mean_time_s": s.mean_time,
        "mean_tokens_in": s.mean_tokens_in,
        "mean_tokens_out": s.mean_tokens_out,
        "mean_api_calls": s.mean_api_calls,
        "cost_per_success_usd": s.cost_per_success,
    }


def render_posterior_table(rows: list[tuple[str, dict]]) -> str:
    """Text table of posterior reports: one (label, posterior_report) per row."""
    header = f"{'Config':<14} {'n':>4} {'k':>4} {'Pass':>6} {'Mean':>6} {'95% CI':>16} {'P(θ>t)':>8}"
    lines = [header, "-" * len(header)]
    for label, r in rows:
        ci = f"[{r['ci_lo_pct']:.1f}, {r['ci_hi_pct']:.1f}]"
        p_gt = next(iter(r["prob_theta_gt"].values()))
        lines.append(
            f"{label:<14} {r['n']:>4} {r['k']:>4} {r['pass_rate_pct']:>6.1f} "
            f"{r['posterior_mean_pct']:>6.1f} {ci:>16} {p_gt:>8.2f}"
        )
    return "\n".join(lines) + "\n"


def render_cost_table(rows: list[tuple[str, dict]]) -> str:
    """Text table of cost reports: one (label, cost_report) per row."""
    header = (
        f"{'Config':<14} {'n':>4} {'k':>4} {'Mean $':>8} {'Total $':>9} "
        f"{'Time s':>8} {'Tok in':>12} {'Tok out':>9} {'Calls':>6} {'$/succ':>9}"
    )
    lines = [header, "-" * len(header)]
    for label, r in rows:
        cps = "undefined" if r["cost_per_success_usd"] is None else f"{r['cost_per_success_usd']:.2f}"
        lines.append(
            f"{label:<14} {r['n']:>4} {r['k']:>4} {r['mean_cost_usd']:>8.2f} {r['total_cost_usd']:>9.2f} "
            f"{r['mean_time_s']:>8.1f} {r['mean_tokens_in']:>12.0f} {r['mean_tokens_out']:>9.0f} "
            f"{r['mean_api_calls']:>6.0f} {cps:>9}"
        )
    return "\n".join(lines) + "\n"
