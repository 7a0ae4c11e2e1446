"""
Comparing optimizers on a noisy quadratic
=========================================

Six update rules chase a moving quadratic bowl whose center is redrawn
uniformly at every step.  The comparator is the clamped mean center, so the
regret column in each record measures exactly how much cumulative loss each
optimizer gives up against the best fixed point in hindsight.

Run from the repository root:

    python3 demos/01_optimizer_comparison.py [out_dir]
"""

import sys

from coba.bench import RunConfig, run
from coba.plots import emit_plots

OUT = sys.argv[1] if len(sys.argv) > 1 else "demo_out/comparison"

# a diminishing step size alpha / sqrt(t) is what the regret analysis wants;
# the same alpha is shared by every optimizer so the comparison is fair
base = dict(
    problem="quadratic",
    T=2000,
    dim=10,
    seed=0,
    schedule="sqrt",
    alpha=0.1,
)

names = ["sgd", "adagrad", "rmsprop", "adam", "amsgrad", "coba-hz"]

records = []
print(f"{'optimizer':>10} {'final loss':>12} {'avg regret':>12}")
for name in names:
    rec = run(RunConfig(optimizer=name, **base))
    records.append(rec)
    avg_regret = rec.summary["final_regret"] / base["T"]
    print(f"{name:>10} {rec.summary['final_loss']:12.6f} {avg_regret:12.6f}")

paths = emit_plots(records, OUT)
print("\ncharts written:")
for p in paths:
    print(" ", p)
