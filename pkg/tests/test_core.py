"""Index maps, trades, and snapshot serialization."""

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

import dexroute as dx
from dexroute.errors import ConfigurationError, DimensionError


class TestScatterGather:
    def test_scatter_places_local_entries(self):
        tm = dx.TokenMap((3, 1))
        out = dx.scatter(tm, np.array([5.0, -2.0]), 5)
        assert np.array_equal(out, [0.0, -2.0, 0.0, 5.0, 0.0])

    def test_gather_selects_local_entries(self):
        tm = dx.TokenMap((3, 1))
        assert np.array_equal(dx.gather(tm, np.arange(5.0)), [3.0, 1.0])

    def test_scatter_rejects_wrong_length(self):
        with pytest.raises(DimensionError):
            dx.scatter(dx.TokenMap((0, 1)), np.zeros(3), 4)

    def test_scatter_rejects_out_of_range_index(self):
        with pytest.raises(DimensionError):
            dx.scatter(dx.TokenMap((0, 7)), np.zeros(2), 4)

    @given(
        st.lists(st.integers(0, 9), min_size=2, max_size=2, unique=True),
        st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2),
    )
    def test_gather_of_scatter_roundtrips(self, idx, vals):
        tm = dx.TokenMap(tuple(idx))
        local = np.array(vals)
        assert np.array_equal(dx.gather(tm, dx.scatter(tm, local, 10)), local)


class TestTrade:
    def test_signed_is_received_minus_tendered(self):
        t = dx.Trade(np.array([3.0, 0.0]), np.array([0.0, 5.0]))
        assert np.array_equal(t.signed, [-3.0, 5.0])

    def test_rejects_negative_amounts(self):
        with pytest.raises(ValueError):
            dx.Trade(np.array([-1.0, 0.0]), np.zeros(2))

    def test_zero_trade(self):
        assert dx.Trade.zero().is_zero()


class TestNetTrade:
    def test_sums_scattered_signed_trades(self):
        uni = dx.AssetUniverse(("A", "B", "C"))
        m1 = dx.GeomMeanMarket(np.array([10.0, 10.0]), (0.5, 0.5), 1.0, dx.TokenMap((0, 1)))
        m2 = dx.GeomMeanMarket(np.array([10.0, 10.0]), (0.5, 0.5), 1.0, dx.TokenMap((1, 2)))
        snap = dx.MarketSnapshot(uni, [m1, m2])
        trades = [
            dx.Trade(np.array([2.0, 0.0]), np.array([0.0, 1.0])),
            dx.Trade(np.array([1.0, 0.0]), np.array([0.0, 4.0])),
        ]
        psi = dx.net_trade(snap, trades).psi
        assert np.array_equal(psi, [-2.0, 0.0, 4.0])

    def test_wrong_trade_count_rejected(self):
        uni = dx.AssetUniverse(("A", "B"))
        m = dx.GeomMeanMarket(np.array([1.0, 1.0]), (0.5, 0.5), 1.0, dx.TokenMap((0, 1)))
        snap = dx.MarketSnapshot(uni, [m])
        with pytest.raises(DimensionError):
            dx.net_trade(snap, [])


class TestValidation:
    def test_duplicate_symbols_rejected(self):
        with pytest.raises(ConfigurationError):
            dx.AssetUniverse(("A", "A"))

    def test_duplicate_token_map_indices_rejected(self):
        with pytest.raises(ConfigurationError):
            dx.TokenMap((2, 2))

    def test_market_index_must_fit_universe(self):
        uni = dx.AssetUniverse(("A", "B"))
        m = dx.GeomMeanMarket(np.array([1.0, 1.0]), (0.5, 0.5), 1.0, dx.TokenMap((0, 5)))
        with pytest.raises(ConfigurationError):
            dx.MarketSnapshot(uni, [m])


def _sample_snapshot():
    uni = dx.AssetUniverse(("A", "B", "C"))
    markets = [
        dx.GeomMeanMarket(np.array([100.0, 200.0]), (0.8, 0.2), 0.997, dx.TokenMap((0, 1))),
        dx.BoundedProductSegment(np.array([10.0, 10.0]), 90.0, 90.0, 1.0, dx.TokenMap((1, 2))),
        dx.AggregateMarket(
            [
                dx.BoundedProductSegment(np.array([5.0, 0.0]), 10.0, 20.0, 0.997, dx.TokenMap((0, 2))),
                dx.BoundedProductSegment(np.array([0.0, 7.0]), 5.0, 40.0, 0.997, dx.TokenMap((0, 2))),
            ],
            0.997,
            dx.TokenMap((0, 2)),
        ),
        dx.Curve2Market(np.array([50.0, 60.0]), 3.0, 0.999, dx.TokenMap((1, 2))),
    ]
    return dx.MarketSnapshot(uni, markets, generator="test", prices=np.array([1.0, 2.0, 3.0]))


class TestSnapshotJSON:
    def test_roundtrip_preserves_all_fields(self):
        snap = _sample_snapshot()
        doc = json.loads(dx.dumps_snapshot(snap))
        back = dx.snapshot_from_dict(doc)
        assert back.universe.symbols == snap.universe.symbols
        assert back.generator == snap.generator
        assert np.array_equal(back.prices, snap.prices)
        assert [type(m).__name__ for m in back.markets] == [
            type(m).__name__ for m in snap.markets
        ]
        for a, b in zip(snap.markets, back.markets):
            assert a.token_map == b.token_map

    def test_serialization_is_idempotent(self):
        snap = _sample_snapshot()
        s1 = dx.dumps_snapshot(snap)
        s2 = dx.dumps_snapshot(dx.snapshot_from_dict(json.loads(s1)))
        assert s1 == s2

    def test_save_and_load(self, tmp_path):
        snap = _sample_snapshot()
        path = tmp_path / "snap.json"
        dx.save_snapshot(snap, path)
        back = dx.load_snapshot(path)
        assert dx.dumps_snapshot(back) == dx.dumps_snapshot(snap)

    def test_missing_field_raises(self):
        with pytest.raises(ConfigurationError):
            dx.snapshot_from_dict({"markets": []})
