"""
Replaying a rebase history
==========================

The bundled history is synthetic: a year of daily rebases simulated with
A = 0.05 and B = 30, switching to B = 10 on 2019-10-30. Real data in the same
``timestamp,price,supply`` CSV layout can be dropped in instead.
"""

from algostable import LossWeights, PolicyParams, counterfactual_replay
from algostable.histdata import fixture_path, fixture_schedule, historical_report, load_history

records = load_history(fixture_path())
hist = historical_report(records)
print(f"{len(records)} records, historical loss: {hist.historical}")

# Replaying with the generating schedule reproduces the history exactly.
same = counterfactual_replay(records, fixture_schedule())
print(f"replay with true schedule: {same.counterfactual.total:.6f} vs {same.historical.total:.6f}")

# Keep the recorded market cap, change the rule.
for B in (20, 10, 5, 2, 1):
    rep = counterfactual_replay(records, PolicyParams(0.05, B), LossWeights(1.0))
    cf = rep.counterfactual
    print(f"B={B:>2}: sum dP^2 {cf.price_component:7.4f}  sum dS^2 {cf.supply_component:7.4f}  loss {cf.total:7.4f}")
