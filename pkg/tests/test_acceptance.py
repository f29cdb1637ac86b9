"""Exit criteria. Each test records one PASS/FAIL line, shown in the terminal summary."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from algostable.cli import main
from algostable.gbm import generate_cap_paths
from algostable.histdata import counterfactual_replay, fixture_path, fixture_schedule, load_fixture
from algostable.model import LossWeights, MarketParams, PolicyParams
from algostable.montecarlo import estimate_loss
from algostable.simulate import path_loss, run_path
from algostable.sweep import (
    DEFAULT_A_VALUES,
    GridSpec,
    lambda_frontier,
    monotonicity_in_a,
    sweep_grid,
)

SEED = 0
N_PATHS = 200
BASE_MARKET = MarketParams(mu=0.0, sigma=0.05, y0=100e6, n=100)


def record(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel_err(got, want):
    return abs(got - want) / abs(want)


def test_c1_hand_trace():
    path = run_path([100, 110, 110], PolicyParams(0.05, 5, 1))
    loss = path_loss(path, LossWeights(1))
    checks = [
        (path.supply[1], 100.0),
        (path.supply[2], 102.0),
        (path.dP[0], 0.10),
        (path.dP[1], 110 / 102 - 1),
        (path.dS[1], 0.02),
        (loss.total, 0.01 + (8 / 102) ** 2 + 0.0004),
    ]
    worst = max(rel_err(g, w) for g, w in checks)
    ok = worst <= 1e-9 and path.supply[0] == 100 and path.dS[0] == 0 and abs(loss.total - 0.0165515) <= 5e-8
    record("C1 hand-trace oracle", ok, f"total={loss.total:.10f}, worst rel err {worst:.1e} (tol 1e-9)")


def test_c2_zero_loss_flat_market():
    m = MarketParams(mu=0.0, sigma=0.0, y0=100e6, n=100)
    totals = []
    for A in (0.0, 0.05, 0.1):
        for B in (0.5, 1.0, 5.0, 30.0):
            for lam in (0.0, 1.0, 10.0):
                r = estimate_loss(m, PolicyParams(A, B), LossWeights(lam), 10, SEED)
                totals.append(r.mean_total)
    record("C2 zero-loss degeneracy", all(t == 0.0 for t in totals), f"{len(totals)} configs, max loss {max(totals)}")


def test_c3_gbm_moments():
    t0 = time.perf_counter()
    sigma, n, N = 0.05, 100, 10_000
    y = generate_cap_paths(MarketParams(mu=0.0, sigma=sigma, y0=100e6, n=n), SEED, 0, N)
    lr = np.log(y[:, -1] / y[:, 0])
    se = sigma * math.sqrt(n) / math.sqrt(N)
    mean_ok = abs(lr.mean() - (-n * sigma**2 / 2)) <= 4 * se
    var_ok = abs(lr.var(ddof=1) / (n * sigma**2) - 1) <= 0.10
    dt = time.perf_counter() - t0
    record(
        "C3 GBM moments",
        mean_ok and var_ok and dt < 10,
        f"mean {lr.mean():.5f} vs -0.125 (+-{4 * se:.4f}), var {lr.var(ddof=1):.5f} vs 0.25 (10%), {dt:.1f}s",
    )


def _monotonicity(m: MarketParams) -> float:
    s = sweep_grid(m, GridSpec(DEFAULT_A_VALUES, (5.0,)), LossWeights(1.0), N_PATHS, SEED)
    return monotonicity_in_a(s, 5.0)


def _frontier(m: MarketParams):
    lo, hi = lambda_frontier(m, GridSpec(), [0.5, 10.0], N_PATHS, SEED)
    return lo.B_star, hi.B_star


def test_c4_wider_band_greater_loss():
    t0 = time.perf_counter()
    rho = _monotonicity(BASE_MARKET)
    dt = time.perf_counter() - t0
    record("C4 loss increases with A", rho > 0.8 and dt < 30, f"Spearman {rho:.3f} (> 0.8), {dt:.1f}s")


def test_c5_optimal_b_rises_with_lambda():
    t0 = time.perf_counter()
    b_lo, b_hi = _frontier(BASE_MARKET)
    dt = time.perf_counter() - t0
    record("C5 B* rises with lambda", b_hi >= b_lo and dt < 120, f"B*(0.5)={b_lo}, B*(10)={b_hi}, {dt:.1f}s")


@pytest.mark.parametrize(
    "label, overrides",
    [("mu=+0.01", {"mu": 0.01}), ("mu=-0.01", {"mu": -0.01}), ("sigma=0.5", {"sigma": 0.5})],
)
def test_c6_robustness(label, overrides):
    t0 = time.perf_counter()
    m = BASE_MARKET.replace(**overrides)
    rho = _monotonicity(m)
    b_lo, b_hi = _frontier(m)
    dt = time.perf_counter() - t0
    record(
        f"C6 robustness {label}",
        rho > 0.8 and b_hi >= b_lo and dt < 120,
        f"Spearman {rho:.3f} (> 0.8), B*(0.5)={b_lo}, B*(10)={b_hi}, {dt:.1f}s",
    )


def _snapshot(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_c7_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    common = ["--seed", "7", "--quiet"]
    sweep_args = ["--n-paths", "600", "--a-values", "0,0.05,0.1", "--b-values", "1,5,10", "--lambdas", "0.5,10"]
    runs = {
        "simulate": (["simulate", "--seed", "7"], False),
        "sweep": (["sweep", *common, *sweep_args], True),
        "frontier": (["frontier", *common, *sweep_args], True),
        "robustness": (["robustness", *common, "--n-paths", "300", "--a-values", "0,0.1", "--b-values", "1,5"], True),
        "replay": (["replay", str(fixture_path()), "--b", "10"], False),
    }
    bad = []
    for name, (args, parallel) in runs.items():
        variants = [["--workers", "1"], ["--workers", "1"], ["--workers", "4"]] if parallel else [[], []]
        snaps = []
        for i, extra in enumerate(variants):
            out = tmp_path / f"{name}{i}"
            assert main([*args, *extra, "--out", str(out)]) == 0
            snaps.append(_snapshot(out))
        if any(s != snaps[0] for s in snaps[1:]):
            bad.append(name)
    dt = time.perf_counter() - t0
    record("C7 CLI determinism", not bad and dt < 60, f"{len(runs)} commands, mismatches {bad or 'none'}, {dt:.1f}s")


def test_c8_replay_fixed_point():
    recs = load_fixture()
    rep = counterfactual_replay(recs, fixture_schedule())
    cf = rep.counterfactual_path

    def worst(a, b):
        scale = np.maximum(np.abs(b), 1e-12)
        return float(np.max(np.abs(a - b) / scale))

    err = max(worst(cf.dP, rep.dP_hist), worst(cf.dS[rep.dS_hist != 0], rep.dS_hist[rep.dS_hist != 0]))
    zero_ok = np.all(cf.dS[rep.dS_hist == 0] == 0)
    regime = rep.historical.price_component > rep.historical.supply_component
    record(
        "C8 replay fixed point",
        err <= 1e-9 and zero_ok and regime,
        f"max rel err {err:.1e} (tol 1e-9), price {rep.historical.price_component:.4f} > "
        f"supply {rep.historical.supply_component:.4f}",
    )


def test_c9_lambda_affinity():
    t0 = time.perf_counter()
    grid = GridSpec()
    surface = sweep_grid(BASE_MARKET, grid, LossWeights(1.0), N_PATHS, SEED)
    worst = 0.0
    for lam in (0.0, 1.0, 10.0):
        reweighted = surface.reweight(lam)
        for p in grid.policies():
            fresh = estimate_loss(BASE_MARKET, p, LossWeights(lam), N_PATHS, SEED)
            got = reweighted.cells[(p.A, p.B)].mean_total
            worst = max(worst, rel_err(got, fresh.mean_total))
    dt = time.perf_counter() - t0
    record("C9 lambda-affinity", worst <= 1e-12 and dt < 60, f"{3 * len(grid)} checks, worst rel err {worst:.1e}, {dt:.1f}s")
