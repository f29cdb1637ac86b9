"""Simulation and grid optimization of rebasing stablecoin supply rules."""

__version__ = "0.1.0"

from .model import (
    InvalidParam,
    LossBreakdown,
    LossWeights,
    MarketParams,
    PolicyParams,
    SimPath,
    validate_policy,
)
from .gbm import PathSeed, derive_stream, generate_cap_path, generate_cap_paths
from .rebase import DegenerateSupply, in_band, rebase_step
from .simulate import path_loss, run_path, run_paths
from .montecarlo import AllPathsFailed, EstimateResult, estimate_loss, estimate_loss_crn
from .sweep import (
    EmptySurface,
    GridSpec,
    LossSurface,
    lambda_frontier,
    optimal_policy,
    robustness_battery,
    sweep_grid,
)
from .histdata import (
    RebaseRecord,
    ReplayReport,
    counterfactual_replay,
    load_history,
    realized_series,
)
