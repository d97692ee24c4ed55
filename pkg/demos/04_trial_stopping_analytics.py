"""Beta-Binomial trial analytics with adaptive stopping.

Four agent configurations are simulated with different latent pass rates;
each stream stops by the sequential rule (success / futility / precision /
trial cap) and the final ledgers render as posterior and cost tables.
"""

import random

from hlskit.betatrials import (
    StoppingConfig,
    TrialLedger,
    TrialOutcome,
    cost_report,
    posterior,
    posterior_report,
    render_cost_table,
    render_posterior_table,
    should_stop,
)

CONFIG = StoppingConfig()  # 95% CI, +-12.5pp precision, 30-trial floor
rng = random.Random(20240801)

# latent pass rate and per-trial cost per configuration
SCENARIOS = [
    ("(A) monolithic", 0.32, 2.65),
    ("(B) multi-agent", 0.575, 3.66),
    ("(C) + tools", 0.75, 4.07),
    ("(D) + verifiers", 0.967, 7.33),
]


def run_stream(rate, cost):
    ledger = TrialLedger()
    while True:
        passed = rng.random() < rate
        ledger.append(
            TrialOutcome(
                passed=passed,
                failed_stage=None if passed else rng.choice(["compile", "execute", "synthesize"]),
                cost_usd=cost * rng.uniform(0.8, 1.2),
                wall_seconds=60 * cost * rng.uniform(0.7, 1.3),
                tokens_in=3.2e6 * cost * rng.uniform(0.8, 1.2),
                tokens_out=23000 * cost * rng.uniform(0.8, 1.2),
                api_calls=int(40 * cost),
            )
        )
        reason = should_stop(ledger.posterior(), CONFIG, ledger.n)
        if reason is not None:
            return ledger, reason


posterior_rows = []
cost_rows = []
for label, rate, cost in SCENARIOS:
    ledger, reason = run_stream(rate, cost)
    print(f"{label}: stopped after {ledger.n} trials ({ledger.k} passed), reason={reason}")
    posterior_rows.append((label, posterior_report(ledger, CONFIG)))
    cost_rows.append((label, cost_report(ledger)))

print()
print(render_posterior_table(posterior_rows))
print(render_cost_table(cost_rows))

# The futility rule in closed form: an all-fail run at the 30-trial floor
# has P(theta < 0.1) = 1 - 0.9^31, far above the 0.33 futility threshold.
post = posterior(30, 0)
print(f"all-fail stream at n=30: P(theta < 0.1) = {post.prob_theta_lt(0.1):.4f} "
      f"(closed form {1 - 0.9**31:.4f})")
