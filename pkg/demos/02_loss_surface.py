"""
Expected loss over the (A, B) grid
==================================

Every grid cell is evaluated on the same 200 simulated cap paths (common
random numbers), so differences between cells are not sampling noise.
"""

from algostable import GridSpec, LossWeights, MarketParams, optimal_policy, sweep_grid

market = MarketParams(mu=0.0, sigma=0.05, y0=100e6, n=100)
surface = sweep_grid(market, GridSpec(), LossWeights(1.0), n_paths=200, master_seed=0)

grid = surface.grid
shown_b = [1.0, 2.0, 3.0, 5.0, 7.5, 10.0]
print("   A  " + "".join(f"   B={b:<5g}" for b in shown_b))
for a in grid.a_values:
    row = "".join(f"{surface.cells[(a, b)].mean_total:10.4f}" for b in shown_b)
    print(f"{a:5.2f} {row}")

# Down each column the loss grows with A: a wider inactive range costs more.
a_star, b_star, best = optimal_policy(surface)
print(f"\nargmin: A={a_star}, B={b_star}, loss {best.mean_total:.4f} +- {best.std_error:.4f}")

with open("loss_surface.csv", "w") as fh:
    surface.to_csv(fh)
