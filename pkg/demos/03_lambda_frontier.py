"""
How the optimal rule moves with the supply-stability weight
===========================================================

The per-path loss is affine in lambda, so one sweep of the grid gives the
optimum for every lambda by re-weighting the stored components.
"""

from algostable import GridSpec, MarketParams, lambda_frontier

market = MarketParams(mu=0.0, sigma=0.05, y0=100e6, n=100)
lambdas = [0, 0.5, 1, 2, 5, 10]
points = lambda_frontier(market, GridSpec(), lambdas, n_paths=200, master_seed=0)

print("lambda   A*    B*    loss")
for pt in points:
    print(f"{pt.lam:6g} {pt.A_star:5.2f} {pt.B_star:5.1f} {pt.result.mean_total:8.4f}")

# Penalizing supply changes harder pushes the optimum toward gentler
# adjustment (larger B).
