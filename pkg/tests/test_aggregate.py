"""Aggregate markets: the sorted-interval arbitrage must equal the naive
per-segment sum, and liquidity bookkeeping must stay consistent."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import dexroute as dx
from dexroute import generate, oracle
from dexroute.errors import ConfigurationError, RejectedTradeError


def _ladder(s, seed=0):
    return generate.make_ladder(s, seed=seed)


def _max_err(a, b):
    return max(
        float(np.abs(a.trade.tendered - b.trade.tendered).max()),
        float(np.abs(a.trade.received - b.trade.received).max()),
        abs(a.objective_value - b.objective_value),
    )


class TestEquivalence:
    @pytest.mark.parametrize("s", [1, 2, 10, 100])
    @pytest.mark.parametrize("p", [0.01, 0.09, 0.5, 1.0, 3.3, 9.9, 50.0])
    def test_matches_naive_per_segment_sum(self, s, p):
        market = _ladder(s, seed=s)
        nu = np.array([p, 1.0])
        fast = dx.find_arb_aggregate(market, nu)
        ref = oracle.naive_aggregate_arb(market, nu)
        scale = max(1.0, abs(ref.objective_value))
        assert _max_err(fast, ref) <= 1e-9 * scale

    def test_single_segment_equals_bare_segment(self):
        seg = dx.BoundedProductSegment(np.array([10.0, 10.0]), 90.0, 90.0, 1.0, dx.TokenMap((0, 1)))
        agg = dx.AggregateMarket([seg], 1.0, dx.TokenMap((0, 1)))
        nu = np.array([2.0, 1.0])
        a = agg.find_arb(nu)
        b = seg.find_arb(nu)
        assert np.allclose(a.trade.tendered, b.trade.tendered)
        assert a.objective_value == pytest.approx(b.objective_value)

    @given(st.integers(0, 10_000), st.floats(0.005, 200.0))
    @settings(max_examples=100, deadline=None)
    def test_random_ladders_and_prices(self, seed, p):
        market = _ladder(7, seed=seed)
        nu = np.array([p, 1.0])
        fast = dx.find_arb_aggregate(market, nu)
        ref = oracle.naive_aggregate_arb(market, nu)
        scale = max(1.0, abs(ref.objective_value))
        assert _max_err(fast, ref) <= 1e-9 * scale


class TestStructure:
    def test_overlapping_intervals_rejected(self):
        tm = dx.TokenMap((0, 1))
        seg = lambda: dx.BoundedProductSegment(np.array([10.0, 10.0]), 90.0, 90.0, 1.0, tm)
        with pytest.raises(ConfigurationError):
            dx.AggregateMarket([seg(), seg()], 1.0, tm)

    def test_mismatched_fee_rejected(self):
        tm = dx.TokenMap((0, 1))
        seg = dx.BoundedProductSegment(np.array([10.0, 10.0]), 90.0, 90.0, 0.997, tm)
        with pytest.raises(ConfigurationError):
            dx.AggregateMarket([seg], 1.0, tm)

    def test_spread_is_tightest_across_segments(self):
        market = _ladder(5, seed=1)
        bid, ask = market.spread()
        bids, asks = zip(*(s.spread() for s in market.segments))
        assert bid == max(bids) and ask == min(asks)


class TestSwapAndLiquidity:
    def test_swap_moves_reserves(self):
        market = _ladder(4, seed=2)
        r1_before = sum(s.reserves[0] for s in market.segments)
        market.apply_trade(dx.Trade(np.array([0.0, 10.0]), np.zeros(2)))
        r1_after = sum(s.reserves[0] for s in market.segments)
        assert r1_after < r1_before

    def test_swap_beats_any_single_segment_fill(self):
        # the best-execution split must never do worse than dumping the whole
        # input into one segment
        total_in = 25.0
        single_best = max(
            s.forward_exchange(total_in, 1) for s in _ladder(4, seed=2).segments
        )
        market = _ladder(4, seed=2)
        r2_before = sum(s.reserves[1] for s in market.segments)
        market.apply_trade(dx.Trade(np.array([total_in, 0.0]), np.zeros(2)))
        split_out = r2_before - sum(s.reserves[1] for s in market.segments)
        assert split_out >= single_best * (1.0 - 1e-9)

    def test_swap_output_accounting(self):
        market = _ladder(4, seed=3)
        # ask for exactly what a best-split fill of 10 units produces
        probe = _ladder(4, seed=3)
        probe.apply_trade(dx.Trade(np.array([10.0, 0.0]), np.zeros(2)))
        got = sum(s.reserves[1] for s in _ladder(4, seed=3).segments) - sum(
            s.reserves[1] for s in probe.segments
        )
        market.apply_trade(dx.Trade(np.array([10.0, 0.0]), np.array([0.0, got * 0.999])))

    def test_overfull_output_request_rejected(self):
        market = _ladder(3, seed=4)
        cap = sum(s.reserves[1] for s in market.segments)
        with pytest.raises(RejectedTradeError):
            market.apply_trade(dx.Trade(np.array([1.0, 0.0]), np.array([0.0, cap * 2])))

    def test_two_sided_tender_rejected(self):
        market = _ladder(3, seed=5)
        with pytest.raises(RejectedTradeError):
            market.apply_trade(dx.Trade(np.array([1.0, 1.0]), np.zeros(2)))

    def test_add_liquidity_targets_segment_by_interval(self):
        market = _ladder(3, seed=6)
        seg = market.segments[1]
        interval = seg.active_interval()
        before = seg.reserves.copy()
        dx.update_liquidity(market, np.array([1.0, 2.0]), interval)
        assert np.allclose(seg.reserves, before + [1.0, 2.0])

    def test_add_liquidity_unknown_interval_rejected(self):
        market = _ladder(3, seed=7)
        with pytest.raises(ConfigurationError):
            dx.update_liquidity(market, np.array([1.0, 1.0]), (123.0, 456.0))

    def test_liquidity_update_without_range_rejected(self):
        market = _ladder(3, seed=8)
        with pytest.raises(ConfigurationError):
            dx.update_liquidity(market, np.array([1.0, 1.0]))


class TestSerialization:
    def test_roundtrip(self):
        from dexroute.markets import market_from_dict

        market = _ladder(4, seed=9)
        back = market_from_dict(market.to_dict())
        nu = np.array([2.7, 1.0])
        a, b = market.find_arb(nu), back.find_arb(nu)
        assert np.allclose(a.trade.tendered, b.trade.tendered)
        assert a.objective_value == pytest.approx(b.objective_value)
