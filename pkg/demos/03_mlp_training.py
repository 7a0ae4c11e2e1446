"""
Training a tiny network to perfect accuracy
===========================================

A two-layer perceptron separates two Gaussian blobs that are margin-separated
by construction, so 100% training accuracy is reachable.  The interesting
question is how fast each optimizer gets there.  We train with a fixed step
size and report accuracy at every epoch (1000 stochastic steps).

    python3 demos/03_mlp_training.py [out_dir]
"""

import sys

from coba.bench import RunConfig, run
from coba.plots import emit_plots

OUT = sys.argv[1] if len(sys.argv) > 1 else "demo_out/mlp"

names = ["amsgrad", "coba-hs", "coba-fr", "coba-prp", "coba-dy", "coba-hz"]

records = []
for name in names:
    rec = run(RunConfig(
        problem="mlp",
        optimizer=name,
        epochs=3,
        seed=0,
        feasible="full",  # unconstrained weights
        alpha=1e-2,
    ))
    records.append(rec)
    # accuracy is logged at each epoch boundary (t = 1000, 2000, ...)
    accs = [rec.rows[e * 1000 - 1, 5] for e in range(1, 4)]
    shown = "  ".join(f"{a:.3f}" for a in accs)
    print(f"{name:>9}: accuracy per epoch: {shown}")

paths = emit_plots(records, OUT)
print("\ncharts written:")
for p in paths:
    print(" ", p)
