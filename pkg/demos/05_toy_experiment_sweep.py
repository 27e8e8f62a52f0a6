"""The benchmark experiment in miniature: per-class vs global relaxation.

Draws imbalanced Gaussian-mixture pairs under label shift, solves both
relaxations on each draw over a grid of budgets, propagates source labels
through the plans and summarizes the paired accuracy difference.  Sample
sizes here are reduced so the demo runs in seconds; the CLI runs the full
configuration:

    imdot sweep --k 3 --eta 1 --theta 0 --n 300 --draws 50 --out sweep_out
"""

from imdot.datagen import ToyConfig
from imdot.experiments import run_sweep

config = ToyConfig(n_classes=3, n_source=80, n_target=80,
                   eta=1.0, theta_degrees=0.0, seed=1)
result = run_sweep(config, [0.0, 0.25, 0.5, 0.75, 1.0], draws=8, mode="both")

print("accuracy difference (per-class split minus global), 8 draws:")
print(f"{'beta':>6} {'median':>8} {'min':>8} {'max':>8}")
for beta, med, lo, hi in result.summary():
    print(f"{beta:>6.2f} {med:>8.3f} {lo:>8.3f} {hi:>8.3f}")

print("\nthe per-class split wins once the budget covers the deficient "
      "classes; at beta = 0 both collapse to classic transport.")
