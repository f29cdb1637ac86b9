"""Single supply-adjustment step of the inactive-band rule."""

from __future__ import annotations

from .model import PolicyParams


class DegenerateSupply(ArithmeticError):
    """The rule would take supply to zero or below (needs deviation <= -B)."""

    def __init__(self, deviation: float, B: float, step: int | None = None):
        self.deviation = deviation
        self.B = B
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(
            f"supply annihilated{where}: deviation {deviation!r} with B={B!r} gives factor {1 + deviation / B!r}"
        )


def deviation(price: float, p: PolicyParams) -> float:
    return (price - p.p_star) / p.p_star


def band(p: PolicyParams) -> tuple[float, float]:
    """Inactive range ``[P*(1 - A), P*(1 + A)]``."""
    return p.p_star * (1.0 - p.A), p.p_star * (1.0 + p.A)


def in_band(price: float, p: PolicyParams) -> bool:
    """True when ``price`` sits inside the inactive range, boundaries included.

    Compared against the band edges rather than ``|d| <= A`` so that a price
    quoted exactly at an edge (1.05 for A = 0.05) counts as inside.
    """
    lo, hi = band(p)
    return lo <= price <= hi


def rebase_step(prev_price: float, prev_supply: float, p: PolicyParams) -> float:
    """Supply for the next step given last step's price and supply.

    Inside the band supply is left alone. Outside it, supply is scaled by
    ``1 + d/B`` where ``d`` is the relative price deviation, so an expensive
    token is expanded and a cheap one contracted.
    """
    if prev_price <= 0 or prev_supply <= 0:
        raise ValueError("price and supply must be positive")
    if in_band(prev_price, p):
        return prev_supply
    d = deviation(prev_price, p)
    factor = 1.0 + d / p.B
    if factor <= 0:
        raise DegenerateSupply(d, p.B)
    return prev_supply * factor
