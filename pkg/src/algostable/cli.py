"""Command-line front end: ``algostable {simulate,sweep,frontier,robustness,replay}``.

Settings come from an optional flat JSON config (``--config``); any flag given
on the command line overrides the file. Outputs go to ``--out`` as CSV/JSON,
together with a ``provenance.json`` recording every parameter and the seed.
Exit codes: 0 ok, 2 usage/config/input error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

from . import __version__
from .gbm import MASK64, PathSeed, generate_cap_path
from .histdata import (
    PolicySchedule,
    counterfactual_replay,
    historical_report,
    load_history,
)
from .model import InvalidParam, LossWeights, MarketParams, PolicyParams
from .montecarlo import AllPathsFailed
from .rebase import DegenerateSupply
from .simulate import path_loss, run_path
from .sweep import (
    DEFAULT_LAMBDAS,
    ROBUSTNESS_VARIANTS,
    EmptySurface,
    GridSpec,
    SweepConfig,
    frontier_csv,
    lambda_frontier,
    robustness_battery,
    sweep_grid,
)


class ConfigError(Exception):
    pass


EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

DEFAULTS = {
    "mu": 0.0,
    "sigma": 0.05,
    "y0": 100e6,
    "n": 100,
    "A": 0.05,
    "B": 5.0,
    "p_star": 1.0,
    "lambda": 1.0,
    "n_paths": 200,
    "path_index": 0,
    "b_fixed": 5.0,
    "out": ".",
}

# config key -> (flag, parser)
def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


KEYS = {
    "mu": ("--mu", float),
    "sigma": ("--sigma", float),
    "y0": ("--y0", float),
    "n": ("--n", int),
    "A": ("--a", float),
    "B": ("--b", float),
    "p_star": ("--p-star", float),
    "lambda": ("--lambda", float),
    "seed": ("--seed", int),
    "n_paths": ("--n-paths", int),
    "path_index": ("--path-index", int),
    "a_values": ("--a-values", _floats),
    "b_values": ("--b-values", _floats),
    "lambdas": ("--lambdas", _floats),
    "b_fixed": ("--b-fixed", float),
    "schedule": ("--schedule", str),
    "out": ("--out", str),
}

COMMAND_KEYS = {
    "simulate": ["mu", "sigma", "y0", "n", "A", "B", "p_star", "lambda", "seed", "path_index", "out"],
    "sweep": ["mu", "sigma", "y0", "n", "p_star", "lambda", "seed", "n_paths", "a_values", "b_values",
              "lambdas", "b_fixed", "out"],
    "replay": ["A", "B", "p_star", "lambda", "schedule", "out"],
}
COMMAND_KEYS["frontier"] = COMMAND_KEYS["sweep"]
COMMAND_KEYS["robustness"] = COMMAND_KEYS["sweep"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="algostable", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"algostable {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "simulate one market-cap path under a policy and score it",
        "sweep": "loss surface over the (A, B) grid",
        "frontier": "optimal (A, B) for each lambda",
        "robustness": "monotonicity and frontier under drift/volatility variants",
        "replay": "historical loss and counterfactual replay of a rebase history",
    }
    for name, keys in COMMAND_KEYS.items():
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", type=Path, help="flat JSON file of settings")
        for key in keys:
            flag, conv = KEYS[key]
            p.add_argument(flag, dest=key, type=conv, default=None)
        if name != "replay":
            p.add_argument("--strict", action="store_true", help="require an explicit --seed")
        if name in ("sweep", "frontier", "robustness"):
            p.add_argument("--workers", type=int, default=1)
            p.add_argument("--quiet", action="store_true")
        if name == "sweep":
            p.add_argument("--robustness", action="store_true", help="also run the robustness variants")
        if name == "replay":
            p.add_argument("history", type=Path)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing precedence)."""
    allowed = COMMAND_KEYS[args.command]
    cfg = {k: v for k, v in DEFAULTS.items() if k in allowed}
    if args.command == "replay":
        # a counterfactual runs only when B is given explicitly
        del cfg["B"]
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(loaded) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown config key(s) for {args.command}: {', '.join(unknown)}")
        cfg.update(loaded)
    for key in allowed:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _seed(cfg: dict, strict: bool) -> int:
    seed = cfg.get("seed")
    if seed is None:
        if strict:
            raise ConfigError("--seed is required in --strict mode")
        seed = secrets.randbits(64)
        print(f"seed: {seed}", file=sys.stderr)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MASK64:
        raise ConfigError(f"invalid seed={seed!r}: must be an integer in [0, 2**64)")
    return seed


def _positive_int(cfg: dict, key: str) -> int:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidParam(key, value, "must be a positive integer")
    return value


def _market(cfg: dict) -> MarketParams:
    return MarketParams(mu=cfg["mu"], sigma=cfg["sigma"], y0=cfg["y0"], n=cfg["n"])


def _dump_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write(path: Path, writer) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer(fh)


def _provenance(command: str, cfg: dict, **extra) -> dict:
    settings = {k: v for k, v in cfg.items() if k != "out"}
    return {"tool": "algostable", "version": __version__, "command": command, "settings": settings, **extra}


def cmd_simulate(cfg: dict, out: Path) -> None:
    m = _market(cfg)
    p = PolicyParams(cfg["A"], cfg["B"], cfg["p_star"])
    w = LossWeights(cfg["lambda"])
    seed = PathSeed(cfg["seed"], cfg["path_index"])
    path = run_path(generate_cap_path(m, seed), p)
    loss = path_loss(path, w)
    _write(out / "path.csv", path.to_csv)
    _dump_json(out / "loss.json", {"loss": loss.to_dict(), "provenance": _provenance("simulate", cfg)})
    _dump_json(out / "provenance.json", _provenance("simulate", cfg, files=["path.csv", "loss.json"]))


def _grid(cfg: dict) -> GridSpec:
    kw = {"p_star": cfg["p_star"]}
    if cfg.get("a_values") is not None:
        kw["a_values"] = tuple(cfg["a_values"])
    if cfg.get("b_values") is not None:
        kw["b_values"] = tuple(cfg["b_values"])
    try:
        return GridSpec(**kw)
    except InvalidParam:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from None


def _variant_label(ov: dict) -> str:
    return "_".join(f"{k}{v:+g}" if k == "mu" else f"{k}{v:g}" for k, v in ov.items())


def _progress(quiet: bool, msg: str) -> None:
    if not quiet:
        print(msg, file=sys.stderr)


def cmd_sweep(command: str, cfg: dict, out: Path, workers: int, quiet: bool, robustness: bool, frontier: bool) -> None:
    m = _market(cfg)
    grid = _grid(cfg)
    n_paths = _positive_int(cfg, "n_paths")
    lambdas = cfg.get("lambdas")
    if frontier and lambdas is None:
        lambdas = list(DEFAULT_LAMBDAS)
    cfg = {**cfg, "lambdas": lambdas}
    files = []
    _progress(quiet, f"sweep: {len(grid)} cells x {n_paths} paths, n={m.n}")
    surface = sweep_grid(m, grid, LossWeights(cfg["lambda"]), n_paths, cfg["seed"], workers)
    _write(out / "surface.csv", surface.to_csv)
    files.append("surface.csv")
    if lambdas is not None:
        points = lambda_frontier(m, grid, lambdas, surface=surface)
        _write(out / "frontier.csv", lambda fh: frontier_csv(points, fh))
        files.append("frontier.csv")
    if robustness:
        files += _robustness(cfg, m, grid, n_paths, out, workers, quiet)
    _dump_json(out / "provenance.json", _provenance(command, cfg, files=files))


def _robustness(cfg, m, grid, n_paths, out, workers, quiet) -> list[str]:
    base = SweepConfig(
        market=m,
        grid=grid,
        lambdas=tuple(cfg["lambdas"] if cfg.get("lambdas") is not None else DEFAULT_LAMBDAS),
        b_fixed=float(cfg["b_fixed"]),
        n_paths=n_paths,
        master_seed=cfg["seed"],
    )
    files = []
    summary = []
    for ov in ROBUSTNESS_VARIANTS:
        label = _variant_label(ov)
        _progress(quiet, f"robustness: variant {label}")
        (res,) = robustness_battery(base, [ov], workers)
        _write(out / f"surface_{label}.csv", res.surface.to_csv)
        _write(out / f"frontier_{label}.csv", lambda fh: frontier_csv(res.frontier, fh))
        files += [f"surface_{label}.csv", f"frontier_{label}.csv"]
        summary.append(
            {
                "variant": label,
                "overrides": ov,
                "market": res.market.to_dict(),
                "spearman_A_vs_loss": res.spearman_a,
                "b_fixed": base.b_fixed,
                "frontier": [
                    {"lambda": pt.lam, "A_star": pt.A_star, "B_star": pt.B_star,
                     "mean_total": pt.result.mean_total}
                    for pt in res.frontier
                ],
            }
        )
    _dump_json(out / "robustness.json", {"variants": summary, "provenance": _provenance("robustness", cfg)})
    files.append("robustness.json")
    return files


def _replay_policy(cfg: dict):
    if cfg.get("schedule") is not None:
        raw = cfg["schedule"]
        if isinstance(raw, str):
            text = raw
            if not raw.lstrip().startswith("["):
                try:
                    text = Path(raw).read_text(encoding="utf-8")
                except OSError as exc:
                    raise ConfigError(f"cannot read schedule {raw}: {exc}") from None
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad schedule JSON: {exc}") from None
        try:
            return PolicySchedule.from_list(raw)
        except InvalidParam:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad schedule: {exc}") from None
    if cfg.get("B") is None:
        return None
    return PolicyParams(cfg["A"], cfg["B"], cfg["p_star"])


def cmd_replay(cfg: dict, history: Path, out: Path) -> None:
    w = LossWeights(cfg["lambda"])
    policy = _replay_policy(cfg)
    records = load_history(history)
    if policy is None:
        report = historical_report(records, w, cfg["p_star"])
    else:
        report = counterfactual_replay(records, policy, w)
    data = report.to_json()
    data["provenance"] = _provenance("replay", cfg, history=history.name)
    _dump_json(out / "replay.json", data)
    _write(out / "replay_series.csv", report.series_csv)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command != "replay":
            cfg["seed"] = _seed(cfg, args.strict)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            cmd_simulate(cfg, out)
        elif args.command == "replay":
            cmd_replay(cfg, args.history, out)
        else:
            if args.workers < 1:
                raise InvalidParam("workers", args.workers, "must be >= 1")
            cmd_sweep(
                args.command,
                cfg,
                out,
                args.workers,
                args.quiet,
                robustness=args.command == "robustness" or getattr(args, "robustness", False),
                frontier=args.command in ("frontier", "robustness"),
            )
    except (DegenerateSupply, AllPathsFailed, EmptySurface) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, InvalidParam, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
