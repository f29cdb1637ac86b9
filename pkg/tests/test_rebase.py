import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from algostable.model import PolicyParams
from algostable.rebase import DegenerateSupply, in_band, rebase_step

BASE = PolicyParams(A=0.05, B=5, p_star=1)


def test_inside_band_unchanged():
    assert rebase_step(1.00, 100, BASE) == 100


def test_expansion_above_band():
    assert rebase_step(1.10, 100, BASE) == pytest.approx(102, rel=1e-12)


def test_contraction_below_band():
    # hand trace: d = -0.10, dS = -0.10/5 = -0.02
    assert rebase_step(0.90, 100, BASE) == pytest.approx(98, rel=1e-12)


@pytest.mark.parametrize(
    "price, A, expected",
    [(1.05, 0.05, True), (0.95, 0.05, True), (1.0500001, 0.05, False), (1.0, 0.0, True), (1.0001, 0.0, False)],
)
def test_in_band(price, A, expected):
    assert in_band(price, PolicyParams(A, 5, 1)) is expected


def test_band_is_relative_to_target():
    p = PolicyParams(0.05, 5, p_star=2.0)
    assert in_band(2.1, p)
    assert not in_band(2.11, p)
    assert rebase_step(2.2, 100, p) == pytest.approx(102, rel=1e-12)


def test_degenerate_supply():
    p = PolicyParams(0.0, 0.5, 1)
    with pytest.raises(DegenerateSupply):
        rebase_step(0.4, 100, p)  # d = -0.6, 1 + d/B = -0.2


prices = st.floats(0.01, 10, allow_nan=False)
supplies = st.floats(1e-3, 1e9)
policies = st.builds(PolicyParams, st.floats(0, 0.2), st.floats(1, 20), st.floats(0.1, 10))


@given(prices, supplies, policies, st.floats(1e-3, 1e3))
def test_proportional(price, supply, p, k):
    assert rebase_step(price, k * supply, p) == pytest.approx(k * rebase_step(price, supply, p), rel=1e-12)


@given(prices, supplies, policies)
def test_damping_moves_price_toward_target(price, supply, p):
    assume(not in_band(price, p))
    cap = price * supply
    new_price = cap / rebase_step(price, supply, p)
    before = abs(price - p.p_star)
    after = abs(new_price - p.p_star)
    assert after <= before * (1 + 1e-12)
    # no overshoot past the target for B >= 1
    assert (new_price - p.p_star) * (price - p.p_star) >= -1e-12 * p.p_star**2
    if p.B > 1.0001:
        assert after < before


@given(st.floats(-1, 1), supplies, policies)
def test_idempotent_in_band(frac, supply, p):
    price = p.p_star * (1 + frac * p.A)
    assume(in_band(price, p))
    s = supply
    for _ in range(5):
        s = rebase_step(price, s, p)
    assert s == supply
