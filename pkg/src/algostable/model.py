"""Domain types shared by the simulator, the optimizer and the replay tools."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidParam(ValueError):
    """A parameter violates its invariant. ``field`` names the offender."""

    def __init__(self, field: str, value, reason: str):
        self.field = field
        self.value = value
        super().__init__(f"invalid {field}={value!r}: {reason}")


def _finite(field: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidParam(field, value, "not a number") from None
    if not math.isfinite(value):
        raise InvalidParam(field, value, "must be finite")
    return value


@dataclass(frozen=True)
class PolicyParams:
    """Inactive band half-width ``A``, adjustment divisor ``B`` and target price.

    ``A`` is a relative deviation: no rebase happens while
    ``|P - p_star| / p_star <= A``. Outside the band supply moves by
    ``deviation / B`` per step.
    """

    A: float
    B: float
    p_star: float = 1.0

    def __post_init__(self):
        A = _finite("A", self.A)
        B = _finite("B", self.B)
        p_star = _finite("p_star", self.p_star)
        if A < 0:
            raise InvalidParam("A", self.A, "band half-width must be >= 0")
        if B <= 0:
            raise InvalidParam("B", self.B, "adjustment divisor must be > 0")
        if p_star <= 0:
            raise InvalidParam("p_star", self.p_star, "target price must be > 0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "p_star", p_star)

    def to_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "p_star": self.p_star}


def validate_policy(p: PolicyParams) -> PolicyParams:
    """Re-check ``p`` and hand it back unchanged; raises :class:`InvalidParam`."""
    PolicyParams(p.A, p.B, p.p_star)
    return p


@dataclass(frozen=True)
class MarketParams:
    """Geometric Brownian motion for the exogenous market cap.

    ``mu`` and ``sigma`` are per-step log drift and volatility, ``y0`` the
    starting cap and ``n`` the number of steps. The step length is fixed at 1.
    """

    mu: float = 0.0
    sigma: float = 0.05
    y0: float = 100e6
    n: int = 100
    dt: float = 1.0

    def __post_init__(self):
        mu = _finite("mu", self.mu)
        sigma = _finite("sigma", self.sigma)
        y0 = _finite("y0", self.y0)
        if sigma < 0:
            raise InvalidParam("sigma", self.sigma, "volatility must be >= 0")
        if y0 <= 0:
            raise InvalidParam("y0", self.y0, "initial market cap must be > 0")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidParam("n", self.n, "horizon must be a positive integer")
        if self.dt != 1:
            raise InvalidParam("dt", self.dt, "step length is fixed at 1")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "dt", 1.0)

    def replace(self, **changes) -> "MarketParams":
        fields = self.to_dict()
        fields.update(changes)
        return MarketParams(**fields)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma, "y0": self.y0, "n": self.n, "dt": self.dt}


@dataclass(frozen=True)
class LossWeights:
    """Weight on squared supply changes relative to squared price deviations."""

    lam: float = 1.0

    def __post_init__(self):
        lam = _finite("lambda", self.lam)
        if lam < 0:
            raise InvalidParam("lambda", self.lam, "weight must be >= 0")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class LossBreakdown:
    price_component: float
    supply_component: float
    total: float

    def to_dict(self) -> dict:
        return {
            "price_component": self.price_component,
            "supply_component": self.supply_component,
            "total": self.total,
        }


def combine_loss(price_component: float, supply_component: float, lam: float) -> float:
    return price_component + lam * supply_component


@dataclass(frozen=True, eq=False)
class SimPath:
    """One realized trajectory.

    ``cap``, ``supply`` and ``price`` cover t = 0..n; ``dP`` and ``dS`` cover
    t = 1..n. ``p_star`` holds the target in force at each step t = 0..n.
    """

    cap: np.ndarray
    supply: np.ndarray
    price: np.ndarray
    dP: np.ndarray
    dS: np.ndarray
    p_star: np.ndarray

    def __post_init__(self):
        for name in ("cap", "supply", "price", "dP", "dS", "p_star"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n1 = len(self.cap)
        if len(self.supply) != n1 or len(self.price) != n1 or len(self.p_star) != n1:
            raise ValueError("cap, supply, price and p_star must share length n+1")
        if len(self.dP) != n1 - 1 or len(self.dS) != n1 - 1:
            raise ValueError("dP and dS must have length n")

    @property
    def n(self) -> int:
        return len(self.cap) - 1

    def to_csv(self, fh) -> None:
        """Write columns ``t,Y,S,P,dP,dS``; ``dS`` is blank at t = 0."""
        fh.write("t,Y,S,P,dP,dS\n")
        dP0 = (self.price[0] - self.p_star[0]) / self.p_star[0]
        for t in range(self.n + 1):
            dP = dP0 if t == 0 else self.dP[t - 1]
            dS = "" if t == 0 else fmt(self.dS[t - 1])
            fh.write(
                f"{t},{fmt(self.cap[t])},{fmt(self.supply[t])},{fmt(self.price[t])},{fmt(dP)},{dS}\n"
            )


def fmt(x: float) -> str:
    """Shortest round-tripping decimal (never scientific) notation."""
    return np.format_float_positional(float(x), unique=True, trim="-")
