"""Self-checks for the reference implementations: the oracles must be right
for reasons independent of the production code paths they validate."""

import numpy as np
import pytest

import dexroute as dx
from dexroute import generate, oracle


def _gmean(r1=100.0, r2=100.0, w=0.5, fee=1.0):
    return dx.GeomMeanMarket(np.array([r1, r2]), (w, 1.0 - w), fee, dx.TokenMap((0, 1)))


class TestReferenceForward:
    def test_balanced_product_exact_value(self):
        # independent algebra: 100*100 = (100+100)*(100-out) -> out = 50
        out = oracle.reference_forward(_gmean(), 100.0)
        assert float(out) == pytest.approx(50.0, rel=1e-12)

    def test_vectorized_matches_scalar(self):
        m = _gmean(150.0, 90.0, 0.8, 0.997)
        deltas = np.array([0.0, 1.0, 10.0, 100.0])
        batch = oracle.reference_forward(m, deltas)
        for d, o in zip(deltas, batch):
            assert float(oracle.reference_forward(m, d)) == pytest.approx(float(o), abs=1e-9)

    def test_direction_two_uses_other_reserve(self):
        m = _gmean(100.0, 400.0)
        out = oracle.reference_forward(m, 400.0, direction=2)
        assert float(out) == pytest.approx(50.0, rel=1e-10)

    def test_bounded_segment_saturates_at_reserve(self):
        m = dx.BoundedProductSegment(np.array([10.0, 10.0]), 90.0, 90.0, 1.0, dx.TokenMap((0, 1)))
        out = oracle.reference_forward(m, 1e6)
        assert float(out) == pytest.approx(10.0, rel=1e-9)


class TestGridArb:
    def test_brackets_the_closed_form_on_known_example(self):
        res = oracle.grid_arb(_gmean(), np.array([1.0, 2.0]), grid_step=1e-3)
        assert res.objective_value == pytest.approx(17.157287525380995, rel=1e-6)
        assert res.trade.tendered[0] == pytest.approx(41.4214, abs=1e-2)

    def test_no_profit_inside_spread(self):
        m = _gmean(fee=0.99)
        res = oracle.grid_arb(m, np.array([1.0, 1.0]), grid_step=1e-3)
        assert res.objective_value <= 1e-9


class TestBatchedReference:
    def test_matches_grid_arb(self):
        rng = np.random.default_rng(6)
        m = 20
        r1 = rng.uniform(10.0, 1e3, m)
        r2 = rng.uniform(10.0, 1e3, m)
        w1 = rng.choice([0.5, 0.8], m)
        fee = rng.choice([1.0, 0.997], m)
        nu1 = rng.uniform(0.1, 5.0, m)
        nu2 = rng.uniform(0.1, 5.0, m)
        vals = oracle.gmean_reference_objective(r1, r2, w1, 1.0 - w1, fee, nu1, nu2)
        for i in range(m):
            mk = _gmean(r1[i], r2[i], w1[i], fee[i])
            ref = oracle.grid_arb(mk, np.array([nu1[i], nu2[i]]), grid_step=1e-3)
            assert vals[i] == pytest.approx(ref.objective_value, rel=1e-4, abs=1e-5)


class TestNaiveAggregate:
    def test_sums_segment_results(self):
        market = generate.make_ladder(3, seed=0)
        nu = np.array([5.0, 1.0])
        res = oracle.naive_aggregate_arb(market, nu)
        parts = [s.find_arb(nu) for s in market.segments]
        assert res.objective_value == pytest.approx(sum(p.objective_value for p in parts))


class TestPrimalOracle:
    def test_single_pool_arbitrage_is_zero(self):
        # no feasible nonnegative surplus exists through one two-asset pool
        uni = dx.AssetUniverse(("A", "B"))
        snap = dx.MarketSnapshot(uni, [_gmean()])
        obj = dx.TotalArbitrage(np.array([1.0, 2.0]))
        ref = oracle.primal_projected_gradient(snap, obj)
        assert ref.utility == pytest.approx(0.0, abs=1e-6)
        assert np.all(ref.psi >= -1e-8)

    def test_two_pool_discrepancy_found(self):
        uni = dx.AssetUniverse(("A", "B"))
        markets = [_gmean(100.0, 100.0), _gmean(100.0, 400.0)]
        markets[1] = dx.GeomMeanMarket(
            np.array([100.0, 400.0]), (0.5, 0.5), 1.0, dx.TokenMap((0, 1))
        )
        snap = dx.MarketSnapshot(uni, markets)
        obj = dx.TotalArbitrage(np.array([1.0, 1.0]))
        ref = oracle.primal_projected_gradient(snap, obj)
        # round-trip arbitrage between prices 1 and 4 nets > 10 units
        assert ref.utility > 10.0
        assert np.all(ref.psi >= -1e-8)

    def test_rejects_large_instances(self):
        from dexroute.errors import ConfigurationError

        snap = generate.generate_snapshot(64, 0)
        with pytest.raises(ConfigurationError):
            oracle.primal_projected_gradient(snap, dx.TotalArbitrage(snap.prices))
