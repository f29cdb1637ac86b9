"""Historical rebase records: ingestion, realized series and counterfactual replay.

Input files are UTF-8 CSV with the header ``timestamp,price,supply``. Each row
is treated as one policy step, whatever the wall-clock spacing between rows.
"""

from __future__ import annotations

import csv
import io
import json
import os
from bisect import bisect_right
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources

import numpy as np

from .gbm import PathSeed, generate_cap_path
from .model import LossBreakdown, LossWeights, MarketParams, PolicyParams, SimPath, combine_loss, fmt
from .simulate import run_path

HEADER = ["timestamp", "price", "supply"]


class ParseError(ValueError):
    def __init__(self, line: int, msg: str):
        self.line = line
        super().__init__(f"line {line}: {msg}")


class OrderError(ValueError):
    def __init__(self, line: int, msg: str):
        self.line = line
        super().__init__(f"line {line}: {msg}")


class NonPositiveValue(ValueError):
    def __init__(self, line: int, msg: str):
        self.line = line
        super().__init__(f"line {line}: {msg}")


class TooFewRecords(ValueError):
    pass


@dataclass(frozen=True)
class RebaseRecord:
    timestamp: datetime
    price: float
    supply: float


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 to an aware UTC datetime; naive values are taken as UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def load_history(source) -> list[RebaseRecord]:
    """Read and validate rebase records.

    ``source`` is a path, an open text file, or an iterable of lines. Raises
    :class:`ParseError`, :class:`OrderError` or :class:`NonPositiveValue`, each
    carrying the 1-based line number of the offending row.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return load_history(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "empty input, expected header timestamp,price,supply") from None
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]
    if [h.strip() for h in header] != HEADER:
        raise ParseError(1, f"header must be exactly {','.join(HEADER)}, got {','.join(header)}")

    records: list[RebaseRecord] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(line, f"expected 3 fields, got {len(row)}")
        try:
            ts = parse_timestamp(row[0])
        except ValueError:
            raise ParseError(line, f"bad timestamp {row[0]!r}") from None
        try:
            price = float(row[1])
            supply = float(row[2])
        except ValueError:
            raise ParseError(line, f"bad number in {row[1]!r},{row[2]!r}") from None
        if not (np.isfinite(price) and np.isfinite(supply)):
            raise ParseError(line, "price and supply must be finite")
        if price <= 0:
            raise NonPositiveValue(line, f"price must be > 0, got {row[1]}")
        if supply <= 0:
            raise NonPositiveValue(line, f"supply must be > 0, got {row[2]}")
        if records and ts <= records[-1].timestamp:
            raise OrderError(line, f"timestamp {row[0]} does not follow the previous row")
        records.append(RebaseRecord(ts, price, supply))
    return records


def write_history(records: Iterable[RebaseRecord], fh) -> None:
    fh.write(",".join(HEADER) + "\n")
    for r in records:
        fh.write(f"{format_timestamp(r.timestamp)},{fmt(r.price)},{fmt(r.supply)}\n")


@dataclass(frozen=True, eq=False)
class RealizedSeries:
    """Per-record series. ``dS[0]`` is NaN: there is no prior supply."""

    dP: np.ndarray
    dS: np.ndarray
    cap: np.ndarray


def realized_series(records: Sequence[RebaseRecord], p_star=1.0) -> RealizedSeries:
    """Price deviation, supply change and implied market cap of a history.

    ``p_star`` is a scalar target or one target per record.
    """
    if len(records) < 2:
        raise TooFewRecords(f"need at least 2 records, got {len(records)}")
    price = np.array([r.price for r in records], dtype=float)
    supply = np.array([r.supply for r in records], dtype=float)
    target = np.broadcast_to(np.asarray(p_star, dtype=float), price.shape)
    dP = (price - target) / target
    dS = np.empty_like(supply)
    dS[0] = np.nan
    dS[1:] = (supply[1:] - supply[:-1]) / supply[:-1]
    return RealizedSeries(dP, dS, price * supply)


class PolicySchedule:
    """Piecewise-constant policy: each entry applies from its timestamp onward."""

    def __init__(self, entries: Sequence[tuple[datetime, PolicyParams]]):
        entries = sorted(entries, key=lambda e: e[0])
        if not entries:
            raise ValueError("schedule must have at least one entry")
        self.starts = [e[0] for e in entries]
        if len(set(self.starts)) != len(self.starts):
            raise ValueError("schedule has duplicate effective-from timestamps")
        self.policies = [e[1] for e in entries]

    @classmethod
    def constant(cls, p: PolicyParams) -> "PolicySchedule":
        return cls([(datetime.min.replace(tzinfo=timezone.utc), p)])

    def at(self, ts: datetime) -> PolicyParams:
        i = bisect_right(self.starts, ts) - 1
        if i < 0:
            raise ValueError(f"no policy in force at {format_timestamp(ts)}")
        return self.policies[i]

    def for_records(self, records: Sequence[RebaseRecord]) -> list[PolicyParams]:
        return [self.at(r.timestamp) for r in records]

    def to_list(self) -> list[dict]:
        out = []
        for ts, p in zip(self.starts, self.policies):
            start = None if ts.year == 1 else format_timestamp(ts)
            out.append({"effective_from": start, **p.to_dict()})
        return out

    @classmethod
    def from_list(cls, items: Sequence[dict]) -> "PolicySchedule":
        entries = []
        for item in items:
            start = item.get("effective_from")
            ts = datetime.min.replace(tzinfo=timezone.utc) if start is None else parse_timestamp(start)
            entries.append((ts, PolicyParams(item["A"], item["B"], item.get("p_star", 1.0))))
        return cls(entries)


def _as_schedule(p) -> PolicySchedule:
    return p if isinstance(p, PolicySchedule) else PolicySchedule.constant(p)


def _loss(dP: np.ndarray, dS: np.ndarray, lam: float) -> LossBreakdown:
    pc = float(np.sum(dP**2))
    sc = float(np.sum(dS**2))
    return LossBreakdown(pc, sc, combine_loss(pc, sc, lam))


@dataclass(frozen=True, eq=False)
class ReplayReport:
    """Historical versus counterfactual series over steps t = 1..n."""

    timestamps: list[datetime]
    dP_hist: np.ndarray
    dS_hist: np.ndarray
    historical: LossBreakdown
    lam: float
    p_star: float
    policy: PolicySchedule | None = None
    counterfactual_path: SimPath | None = None
    counterfactual: LossBreakdown | None = None

    def to_json(self) -> dict:
        cf = self.counterfactual_path
        return {
            "n_records": len(self.timestamps),
            "first_timestamp": format_timestamp(self.timestamps[0]),
            "last_timestamp": format_timestamp(self.timestamps[-1]),
            "lambda": self.lam,
            "p_star": self.p_star,
            "dP_hist": self.dP_hist.tolist(),
            "dS_hist": self.dS_hist.tolist(),
            "historical_loss": self.historical.to_dict(),
            "counterfactual_policy": None if self.policy is None else self.policy.to_list(),
            "dP_cf": None if cf is None else cf.dP.tolist(),
            "dS_cf": None if cf is None else cf.dS.tolist(),
            "counterfactual_loss": None if self.counterfactual is None else self.counterfactual.to_dict(),
        }

    def series_csv(self, fh) -> None:
        fh.write("t,dP_hist,dS_hist,dP_cf,dS_cf\n")
        cf = self.counterfactual_path
        for t in range(1, len(self.timestamps)):
            cols = [str(t), fmt(self.dP_hist[t - 1]), fmt(self.dS_hist[t - 1])]
            cols += ["", ""] if cf is None else [fmt(cf.dP[t - 1]), fmt(cf.dS[t - 1])]
            fh.write(",".join(cols) + "\n")


def historical_report(
    records: Sequence[RebaseRecord], w: LossWeights = LossWeights(), p_star: float = 1.0
) -> ReplayReport:
    """Realized series and loss only, no counterfactual."""
    series = realized_series(records, p_star)
    return ReplayReport(
        timestamps=[r.timestamp for r in records],
        dP_hist=series.dP[1:],
        dS_hist=series.dS[1:],
        historical=_loss(series.dP[1:], series.dS[1:], w.lam),
        lam=w.lam,
        p_star=float(p_star),
    )


def counterfactual_replay(
    records: Sequence[RebaseRecord],
    p_alt: PolicyParams | PolicySchedule,
    w: LossWeights = LossWeights(),
) -> ReplayReport:
    """Replay the recorded market cap under another policy and compare losses.

    The market cap ``price * supply`` is taken as exogenous. The replay starts
    from the recorded initial supply, and the rebase producing row t's supply
    uses the policy in force at row t's timestamp. Both losses use the target
    price of the replayed policy.
    """
    if len(records) < 2:
        raise TooFewRecords(f"need at least 2 records, got {len(records)}")
    schedule = _as_schedule(p_alt)
    policies = schedule.for_records(records)
    targets = np.array([p.p_star for p in policies])
    series = realized_series(records, targets)
    path = run_path(series.cap, policies, initial_supply=records[0].supply)
    return ReplayReport(
        timestamps=[r.timestamp for r in records],
        dP_hist=series.dP[1:],
        dS_hist=series.dS[1:],
        historical=_loss(series.dP[1:], series.dS[1:], w.lam),
        lam=w.lam,
        p_star=float(targets[0]),
        policy=schedule,
        counterfactual_path=path,
        counterfactual=_loss(path.dP, path.dS, w.lam),
    )


# Synthetic stand-in for the public rebase history: A = 0.05 throughout, B = 30
# until 2019-10-30 and B = 10 afterwards, daily steps from the 2019-06-14 launch.
FIXTURE_START = datetime(2019, 6, 14, tzinfo=timezone.utc)
FIXTURE_SWITCH = datetime(2019, 10, 30, tzinfo=timezone.utc)
FIXTURE_MARKET = MarketParams(mu=0.0, sigma=0.05, y0=1e8, n=364)
FIXTURE_SEED = 20190614
FIXTURE_SCHEDULE = PolicySchedule(
    [(FIXTURE_START, PolicyParams(0.05, 30.0)), (FIXTURE_SWITCH, PolicyParams(0.05, 10.0))]
)


def make_synthetic_history(
    market: MarketParams = FIXTURE_MARKET,
    schedule: PolicySchedule = FIXTURE_SCHEDULE,
    seed: int = FIXTURE_SEED,
    start: datetime = FIXTURE_START,
    step_seconds: int = 86400,
) -> tuple[list[RebaseRecord], SimPath]:
    """Simulate a history of ``market.n + 1`` records under ``schedule``."""
    from datetime import timedelta

    times = [start + timedelta(seconds=step_seconds * t) for t in range(market.n + 1)]
    policies = [schedule.at(ts) for ts in times]
    cap = generate_cap_path(market, PathSeed(seed, 0))
    path = run_path(cap, policies)
    records = [RebaseRecord(ts, float(p), float(s)) for ts, p, s in zip(times, path.price, path.supply)]
    return records, path


FIXTURE_NAME = "ampl_synthetic"


def fixture_files() -> dict[str, str]:
    """Text of the bundled fixture: history CSV, precomputed series CSV, metadata JSON."""
    records, path = make_synthetic_history()
    hist = io.StringIO()
    write_history(records, hist)
    series = io.StringIO()
    series.write("t,dP,dS\n")
    for t in range(1, path.n + 1):
        series.write(f"{t},{fmt(path.dP[t - 1])},{fmt(path.dS[t - 1])}\n")
    meta = {
        "market": FIXTURE_MARKET.to_dict(),
        "seed": FIXTURE_SEED,
        "path_index": 0,
        "schedule": FIXTURE_SCHEDULE.to_list(),
        "step_seconds": 86400,
    }
    return {
        f"{FIXTURE_NAME}.csv": hist.getvalue(),
        f"{FIXTURE_NAME}_series.csv": series.getvalue(),
        f"{FIXTURE_NAME}.json": json.dumps(meta, indent=2) + "\n",
    }


def fixture_path(name: str = f"{FIXTURE_NAME}.csv"):
    return resources.files("algostable") / "data" / name


def load_fixture() -> list[RebaseRecord]:
    with fixture_path().open(encoding="utf-8", newline="") as fh:
        return load_history(fh)


def load_fixture_series() -> tuple[np.ndarray, np.ndarray]:
    """Precomputed ``(dP, dS)`` for t = 1..n of the bundled fixture."""
    with fixture_path(f"{FIXTURE_NAME}_series.csv").open(encoding="utf-8") as fh:
        data = np.loadtxt(fh, delimiter=",", skiprows=1)
    return data[:, 1], data[:, 2]


def fixture_schedule() -> PolicySchedule:
    with fixture_path(f"{FIXTURE_NAME}.json").open(encoding="utf-8") as fh:
        return PolicySchedule.from_list(json.load(fh)["schedule"])
