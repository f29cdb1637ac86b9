"""
One market-cap path under the baseline rule
===========================================

Market cap follows GBM with sigma = 0.05, zero drift and a 100M starting cap
over 100 steps. The rule leaves supply alone while the price is within
[0.95, 1.05] and otherwise moves supply by (price deviation) / 5.
"""

from algostable import LossWeights, MarketParams, PathSeed, PolicyParams, generate_cap_path, path_loss, run_path

market = MarketParams(mu=0.0, sigma=0.05, y0=100e6, n=100)
policy = PolicyParams(A=0.05, B=5.0, p_star=1.0)

caps = generate_cap_path(market, PathSeed(master_seed=7, path_index=0))
path = run_path(caps, policy)

# Price absorbs every shock first; supply reacts one step later once the
# price has left the band.
print(" t        cap(M)    supply(M)   price      dP       dS")
for t in range(0, 21):
    dP = path.dP[t - 1] if t else 0.0
    dS = path.dS[t - 1] if t else 0.0
    print(f"{t:2d} {path.cap[t] / 1e6:12.3f} {path.supply[t] / 1e6:12.3f} {path.price[t]:8.4f} {dP:8.4f} {dS:8.4f}")

# Price deviations dominate supply changes at these parameters: a smaller B
# would buy a lot of price stability for little extra supply volatility.
loss = path_loss(path, LossWeights(1.0))
print(f"\nsum dP^2 = {loss.price_component:.4f}   sum dS^2 = {loss.supply_component:.4f}   loss = {loss.total:.4f}")

with open("single_path.csv", "w") as fh:
    path.to_csv(fh)
