"""Couple a market-cap path with the rebase rule and score the result."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .model import LossBreakdown, LossWeights, PolicyParams, SimPath, combine_loss
from .rebase import DegenerateSupply, band, rebase_step

PolicyLike = PolicyParams | Sequence[PolicyParams]


def _per_step(policy: PolicyLike, n: int) -> list[PolicyParams]:
    """Policy in force at steps t = 0..n (step t's rebase uses entry t)."""
    if isinstance(policy, PolicyParams):
        return [policy] * (n + 1)
    policies = list(policy)
    if len(policies) != n + 1:
        raise ValueError(f"policy schedule needs {n + 1} entries, got {len(policies)}")
    return policies


def run_path(cap_path, policy: PolicyLike, initial_supply: float | None = None) -> SimPath:
    """Evolve supply and price along ``cap_path``.

    Supply at step t reacts to the price at t-1. By default the path starts at
    parity, ``S_0 = Y_0 / P*``; ``initial_supply`` overrides that (used when
    replaying recorded histories). ``policy`` may be a list with one entry per
    step t = 0..n to model parameter changes mid-path.
    """
    cap = np.asarray(cap_path, dtype=float)
    if cap.ndim != 1 or len(cap) < 1:
        raise ValueError("cap_path must be a non-empty 1-d sequence")
    if not np.all(cap > 0):
        raise ValueError("market cap must be positive at every step")
    n = len(cap) - 1
    policies = _per_step(policy, n)

    supply = np.empty(n + 1)
    price = np.empty(n + 1)
    supply[0] = cap[0] / policies[0].p_star if initial_supply is None else float(initial_supply)
    if supply[0] <= 0:
        raise ValueError("initial supply must be positive")
    price[0] = cap[0] / supply[0]
    for t in range(1, n + 1):
        try:
            supply[t] = rebase_step(price[t - 1], supply[t - 1], policies[t])
        except DegenerateSupply as exc:
            raise DegenerateSupply(exc.deviation, exc.B, step=t) from None
        price[t] = cap[t] / supply[t]

    p_star = np.array([p.p_star for p in policies])
    dP = (price[1:] - p_star[1:]) / p_star[1:]
    dS = (supply[1:] - supply[:-1]) / supply[:-1]
    return SimPath(cap=cap, supply=supply, price=price, dP=dP, dS=dS, p_star=p_star)


def path_loss(path: SimPath, w: LossWeights) -> LossBreakdown:
    """Sum of squared price deviations and weighted squared supply changes, t = 1..n."""
    price_component = float(np.sum(path.dP**2))
    supply_component = float(np.sum(path.dS**2))
    return LossBreakdown(
        price_component, supply_component, combine_loss(price_component, supply_component, w.lam)
    )


def run_paths(caps: np.ndarray, p: PolicyParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`run_path` over many cap paths, returning loss components.

    ``caps`` has shape ``(N, n+1)``. Returns ``(price_component, supply_component,
    failed)``, each of length N. Paths that hit a degenerate rebase are flagged
    in ``failed`` and carry NaN components.
    """
    caps = np.atleast_2d(np.asarray(caps, dtype=float))
    N, n1 = caps.shape
    supply = caps[:, 0] / p.p_star
    price = caps[:, 0] / supply
    dP = np.empty((N, n1 - 1))
    dS = np.empty((N, n1 - 1))
    failed = np.zeros(N, dtype=bool)
    lo, hi = band(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        for t in range(1, n1):
            d = (price - p.p_star) / p.p_star
            factor = 1.0 + d / p.B
            active = (price < lo) | (price > hi)
            failed |= active & (factor <= 0)
            new_supply = np.where(active, supply * factor, supply)
            dS[:, t - 1] = (new_supply - supply) / supply
            supply = new_supply
            price = caps[:, t] / supply
            dP[:, t - 1] = (price - p.p_star) / p.p_star
    price_component = np.sum(dP**2, axis=1)
    supply_component = np.sum(dS**2, axis=1)
    price_component[failed] = np.nan
    supply_component[failed] = np.nan
    return price_component, supply_component, failed
