"""Monte Carlo estimates of the expected loss, with common random numbers.

Path indices are cut into fixed blocks of :data:`BLOCK_SIZE`. A block is the
unit of work handed to a worker, and per-path results are reassembled in
path-index order before any reduction, so the answer never depends on how many
workers ran.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .gbm import generate_cap_paths
from .model import LossWeights, MarketParams, PolicyParams, combine_loss
from .simulate import run_paths

BLOCK_SIZE = 256
DEFAULT_N_PATHS = 200


class AllPathsFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class EstimateResult:
    """Averages of the loss components over successful paths.

    The sample variances and covariance of the per-path components are kept so
    the estimate can be re-weighted to any other lambda without simulating
    again (the per-path loss is affine in lambda).
    """

    mean_total: float
    mean_price_component: float
    mean_supply_component: float
    std_error: float
    n_paths: int
    n_failed: int
    lam: float
    var_price: float = 0.0
    var_supply: float = 0.0
    cov_price_supply: float = 0.0

    @property
    def n_ok(self) -> int:
        return self.n_paths - self.n_failed

    def reweight(self, lam: float) -> "EstimateResult":
        lam = LossWeights(lam).lam
        if self.n_ok == 0:
            return replace(self, lam=lam)
        return replace(
            self,
            lam=lam,
            mean_total=combine_loss(self.mean_price_component, self.mean_supply_component, lam),
            std_error=_std_error(
                self.var_price, self.var_supply, self.cov_price_supply, lam, self.n_ok
            ),
        )

    def to_dict(self) -> dict:
        return {
            "mean_total": self.mean_total,
            "mean_price_component": self.mean_price_component,
            "mean_supply_component": self.mean_supply_component,
            "std_error": self.std_error,
            "n_paths": self.n_paths,
            "n_failed": self.n_failed,
            "lambda": self.lam,
        }


def _std_error(var_p, var_s, cov, lam, n_ok) -> float:
    var_total = var_p + 2.0 * lam * cov + lam * lam * var_s
    return math.sqrt(max(var_total, 0.0) / n_ok)


def summarize(price: np.ndarray, supply: np.ndarray, failed: np.ndarray, lam: float) -> EstimateResult:
    """Reduce per-path components (in path-index order) to an estimate."""
    n_paths = len(price)
    ok = ~failed
    n_ok = int(ok.sum())
    if n_ok == 0:
        nan = float("nan")
        return EstimateResult(nan, nan, nan, nan, n_paths, n_paths, lam, nan, nan, nan)
    p = price[ok]
    s = supply[ok]
    mean_p = float(np.mean(p))
    mean_s = float(np.mean(s))
    if n_ok > 1:
        var_p = float(np.sum((p - mean_p) ** 2) / (n_ok - 1))
        var_s = float(np.sum((s - mean_s) ** 2) / (n_ok - 1))
        cov = float(np.sum((p - mean_p) * (s - mean_s)) / (n_ok - 1))
    else:
        var_p = var_s = cov = 0.0
    return EstimateResult(
        mean_total=combine_loss(mean_p, mean_s, lam),
        mean_price_component=mean_p,
        mean_supply_component=mean_s,
        std_error=_std_error(var_p, var_s, cov, lam, n_ok),
        n_paths=n_paths,
        n_failed=n_paths - n_ok,
        lam=lam,
        var_price=var_p,
        var_supply=var_s,
        cov_price_supply=cov,
    )


def _blocks(n_paths: int) -> list[tuple[int, int]]:
    return [(s, min(BLOCK_SIZE, n_paths - s)) for s in range(0, n_paths, BLOCK_SIZE)]


def _run_block(args):
    m, policies, master_seed, start, count = args
    caps = generate_cap_paths(m, master_seed, start, count)
    return [run_paths(caps, p) for p in policies]


def path_components(
    m: MarketParams,
    policies: Sequence[PolicyParams],
    n_paths: int,
    master_seed: int,
    workers: int = 1,
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per-path ``(price, supply, failed)`` arrays for each policy on shared paths."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    policies = list(policies)
    tasks = [(m, policies, master_seed, s, c) for s, c in _blocks(n_paths)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(_run_block, tasks))
    else:
        per_block = [_run_block(t) for t in tasks]
    out = []
    for k in range(len(policies)):
        out.append(tuple(np.concatenate([blk[k][j] for blk in per_block]) for j in range(3)))
    return out


def estimate_loss_crn(
    m: MarketParams,
    configs: Sequence[tuple[PolicyParams, LossWeights]],
    n_paths: int = DEFAULT_N_PATHS,
    master_seed: int = 0,
    workers: int = 1,
    raise_on_failure: bool = True,
) -> list[EstimateResult]:
    """Evaluate every configuration on the same set of market-cap paths.

    Configurations sharing a policy are simulated once. With
    ``raise_on_failure`` a configuration whose paths all degenerate raises
    :class:`AllPathsFailed`; otherwise its result carries NaN means.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("configs must be non-empty")
    unique = list(dict.fromkeys(p for p, _ in configs))
    comps = dict(zip(unique, path_components(m, unique, n_paths, master_seed, workers)))
    results = []
    for p, w in configs:
        res = summarize(*comps[p], w.lam)
        if raise_on_failure and res.n_ok == 0:
            raise AllPathsFailed(f"all {n_paths} paths degenerated under {p}")
        results.append(res)
    return results


def estimate_loss(
    m: MarketParams,
    p: PolicyParams,
    w: LossWeights,
    n_paths: int = DEFAULT_N_PATHS,
    master_seed: int = 0,
    workers: int = 1,
) -> EstimateResult:
    """Mean loss of policy ``p`` over paths ``0 .. n_paths-1`` of ``master_seed``."""
    return estimate_loss_crn(m, [(p, w)], n_paths, master_seed, workers)[0]
