"""Grid search over (A, B), lambda frontiers and robustness checks."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .model import LossWeights, MarketParams, PolicyParams, fmt
from .montecarlo import DEFAULT_N_PATHS, EstimateResult, estimate_loss_crn

DEFAULT_A_VALUES = tuple(round(0.01 * i, 2) for i in range(11))
DEFAULT_B_VALUES = tuple(1.0 + 0.5 * i for i in range(19))
DEFAULT_LAMBDAS = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0)

# drift up, drift down, high volatility
ROBUSTNESS_VARIANTS = (
    {"mu": 0.01},
    {"mu": -0.01},
    {"sigma": 0.5},
)


class EmptySurface(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    a_values: tuple[float, ...] = DEFAULT_A_VALUES
    b_values: tuple[float, ...] = DEFAULT_B_VALUES
    p_star: float = 1.0

    def __post_init__(self):
        a = tuple(float(v) for v in self.a_values)
        b = tuple(float(v) for v in self.b_values)
        if not a or not b:
            raise ValueError("grid axes must be non-empty")
        if list(a) != sorted(set(a)) or list(b) != sorted(set(b)):
            raise ValueError("grid axes must be strictly increasing")
        object.__setattr__(self, "a_values", a)
        object.__setattr__(self, "b_values", b)
        for p in self.policies():  # raises InvalidParam on a bad value
            pass

    def policies(self) -> list[PolicyParams]:
        """Grid points in A-major order."""
        return [PolicyParams(a, b, self.p_star) for a in self.a_values for b in self.b_values]

    def __len__(self) -> int:
        return len(self.a_values) * len(self.b_values)


@dataclass(frozen=True)
class LossSurface:
    """Estimates for every grid cell plus what is needed to regenerate them."""

    grid: GridSpec
    cells: dict[tuple[float, float], EstimateResult]
    market: MarketParams
    lam: float
    n_paths: int
    master_seed: int

    def reweight(self, lam: float) -> "LossSurface":
        """Same surface at another lambda, from the stored components."""
        cells = {k: r.reweight(lam) for k, r in self.cells.items()}
        return LossSurface(self.grid, cells, self.market, float(lam), self.n_paths, self.master_seed)

    def column(self, B: float) -> list[EstimateResult]:
        """Cells along the A axis at fixed ``B``."""
        return [self.cells[(a, float(B))] for a in self.grid.a_values]

    def provenance(self) -> dict:
        return {
            "market": self.market.to_dict(),
            "lambda": self.lam,
            "n_paths": self.n_paths,
            "seed": self.master_seed,
            "p_star": self.grid.p_star,
            "a_values": list(self.grid.a_values),
            "b_values": list(self.grid.b_values),
        }

    def to_csv(self, fh) -> None:
        fh.write("A,B,mean_total,mean_price,mean_supply,std_error,n_failed\n")
        for (a, b), r in self.cells.items():
            fh.write(
                ",".join(
                    [
                        fmt(a),
                        fmt(b),
                        fmt(r.mean_total),
                        fmt(r.mean_price_component),
                        fmt(r.mean_supply_component),
                        fmt(r.std_error),
                        str(r.n_failed),
                    ]
                )
                + "\n"
            )


def sweep_grid(
    m: MarketParams,
    grid: GridSpec,
    w: LossWeights,
    n_paths: int = DEFAULT_N_PATHS,
    master_seed: int = 0,
    workers: int = 1,
) -> LossSurface:
    """Estimate the loss at every (A, B) on one common set of cap paths.

    Cells where every path degenerates are kept with NaN means and
    ``n_failed == n_paths``.
    """
    policies = grid.policies()
    results = estimate_loss_crn(
        m, [(p, w) for p in policies], n_paths, master_seed, workers, raise_on_failure=False
    )
    cells = {(p.A, p.B): r for p, r in zip(policies, results)}
    return LossSurface(grid, cells, m, w.lam, n_paths, master_seed)


def optimal_policy(surface: LossSurface) -> tuple[float, float, EstimateResult]:
    """Cell with the smallest mean loss; ties go to smaller A, then smaller B."""
    ok = [(k, r) for k, r in surface.cells.items() if r.n_ok > 0]
    if not ok:
        raise EmptySurface("no grid cell has a successful path")
    (a, b), best = min(ok, key=lambda kv: (kv[1].mean_total, kv[0][0], kv[0][1]))
    return a, b, best


@dataclass(frozen=True)
class FrontierPoint:
    lam: float
    A_star: float
    B_star: float
    result: EstimateResult


def lambda_frontier(
    m: MarketParams,
    grid: GridSpec,
    lambdas: Iterable[float] = DEFAULT_LAMBDAS,
    n_paths: int = DEFAULT_N_PATHS,
    master_seed: int = 0,
    workers: int = 1,
    surface: LossSurface | None = None,
) -> list[FrontierPoint]:
    """Optimal (A, B) for each lambda.

    The grid is simulated once and re-weighted per lambda. A precomputed
    ``surface`` for the same market, grid and seed may be passed in.
    """
    lambdas = [LossWeights(lam).lam for lam in lambdas]
    if not lambdas:
        raise ValueError("lambdas must be non-empty")
    if surface is None:
        surface = sweep_grid(m, grid, LossWeights(lambdas[0]), n_paths, master_seed, workers)
    points = []
    for lam in lambdas:
        a, b, r = optimal_policy(surface.reweight(lam))
        points.append(FrontierPoint(lam, a, b, r))
    return points


def frontier_csv(points: Sequence[FrontierPoint], fh) -> None:
    fh.write("lambda,A_star,B_star,mean_total\n")
    for pt in points:
        fh.write(f"{fmt(pt.lam)},{fmt(pt.A_star)},{fmt(pt.B_star)},{fmt(pt.result.mean_total)}\n")


def monotonicity_in_a(surface: LossSurface, B: float) -> float:
    """Spearman rank correlation between A and mean loss along the column at ``B``."""
    col = surface.column(B)
    totals = [r.mean_total for r in col]
    if len(totals) < 2 or np.ptp(totals) == 0:
        return float("nan")
    return float(spearmanr(surface.grid.a_values, totals).statistic)


@dataclass(frozen=True)
class SweepConfig:
    """Baseline for a robustness battery."""

    market: MarketParams = field(default_factory=MarketParams)
    grid: GridSpec = field(default_factory=GridSpec)
    lambdas: tuple[float, ...] = DEFAULT_LAMBDAS
    b_fixed: float = 5.0
    n_paths: int = DEFAULT_N_PATHS
    master_seed: int = 0


@dataclass(frozen=True)
class VariantResult:
    overrides: dict
    market: MarketParams
    spearman_a: float
    frontier: list[FrontierPoint]
    surface: LossSurface


def _ensure_b(grid: GridSpec, B: float) -> GridSpec:
    if float(B) in grid.b_values:
        return grid
    return GridSpec(grid.a_values, tuple(sorted(grid.b_values + (float(B),))), grid.p_star)


def robustness_battery(
    base: SweepConfig,
    variants: Sequence[dict] = ROBUSTNESS_VARIANTS,
    workers: int = 1,
) -> list[VariantResult]:
    """Rerun the A-monotonicity check and the lambda frontier under each market variant.

    Each variant is a dict of :class:`MarketParams` overrides applied to
    ``base.market``. The frontier is read off the configured grid; the
    monotonicity statistic uses the column at ``base.b_fixed`` (added to the
    simulated grid if absent).
    """
    variants = list(variants)
    if not variants:
        raise ValueError("variants must be non-empty")
    sim_grid = _ensure_b(base.grid, base.b_fixed)
    out = []
    for ov in variants:
        m = base.market.replace(**ov)
        full = sweep_grid(m, sim_grid, LossWeights(1.0), base.n_paths, base.master_seed, workers)
        surface = _restrict(full, base.grid)
        frontier = lambda_frontier(m, base.grid, base.lambdas, surface=surface)
        out.append(VariantResult(dict(ov), m, monotonicity_in_a(full, base.b_fixed), frontier, surface))
    return out


def _restrict(surface: LossSurface, grid: GridSpec) -> LossSurface:
    if grid == surface.grid:
        return surface
    cells = {(p.A, p.B): surface.cells[(p.A, p.B)] for p in grid.policies()}
    return LossSurface(grid, cells, surface.market, surface.lam, surface.n_paths, surface.master_seed)
