"""
Robustness to drift and volatility
==================================

Repeat the A-monotonicity check (B fixed at 5) and the lambda frontier with
positive drift, negative drift and a tenfold volatility.
"""

from algostable.sweep import ROBUSTNESS_VARIANTS, SweepConfig, robustness_battery

base = SweepConfig(n_paths=200, master_seed=0)
for res in robustness_battery(base, ROBUSTNESS_VARIANTS):
    frontier = ", ".join(f"{pt.lam:g}:{pt.B_star:g}" for pt in res.frontier)
    print(f"{res.overrides}: spearman(A, loss) = {res.spearman_a:+.3f}   B* by lambda = {frontier}")

# With sigma = 0.5 the band width barely matters next to 50% moves per step;
# 200 paths cannot resolve its effect and the rank correlation is noisy.
# Twenty thousand paths recover the ordering:
from algostable import GridSpec, LossWeights, MarketParams, sweep_grid
from algostable.sweep import DEFAULT_A_VALUES, monotonicity_in_a

m = MarketParams(sigma=0.5)
s = sweep_grid(m, GridSpec(DEFAULT_A_VALUES, (5.0,)), LossWeights(1.0), 20_000, 0)
print(f"sigma=0.5 with 20000 paths: spearman = {monotonicity_in_a(s, 5.0):+.3f}")
