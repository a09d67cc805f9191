"""Random instance construction for benchmarks and tests.

Streams are split per market index so instances are reproducible from the
seed alone: market i draws from PCG64 seeded with SeedSequence(seed,
spawn_key=(0, i)); the price vector draws from spawn_key=(1, 0).  Draw order
within a market: token pair, reserves, market-kind coin flip.
"""

from __future__ import annotations

import math

import numpy as np

from .core import AssetUniverse, MarketSnapshot, TokenMap
from .markets import AggregateMarket, BoundedProductSegment, GeomMeanMarket

GENERATOR_TAG = "numpy-pcg64/seedseq(entropy=seed; market i: spawn_key=(0,i); prices: spawn_key=(1,0))"


def _rng(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def generate_snapshot(m: int, seed: int, fee: float = 0.997) -> MarketSnapshot:
    """m random two-asset markets over ceil(2*sqrt(m)) tokens.

    Reserves ~ U(1000, 2000); each market is a constant-product pool with
    probability 1/2, otherwise a weighted geometric mean with weights
    (0.8, 0.2).  Also attaches external prices p_j ~ U(0, 1) for the
    arbitrage objective.
    """
    if m < 1:
        raise ValueError("need at least one market")
    n = max(2, math.ceil(2.0 * math.sqrt(m)))
    symbols = tuple(f"TOK{j}" for j in range(n))
    markets = []
    for i in range(m):
        rng = _rng(seed, (0, i))
        j1 = int(rng.integers(n))
        j2 = int((j1 + 1 + rng.integers(n - 1)) % n)
        reserves = rng.uniform(1000.0, 2000.0, size=2)
        weights = (0.5, 0.5) if rng.random() < 0.5 else (0.8, 0.2)
        markets.append(GeomMeanMarket(reserves, weights, fee, TokenMap((j1, j2))))
    prices = np.maximum(_rng(seed, (1, 0)).uniform(0.0, 1.0, size=n), 1e-9)
    return MarketSnapshot(
        AssetUniverse(symbols), markets, generator=GENERATOR_TAG, prices=prices
    )


def make_ladder(s: int, seed: int = 0, token_map: TokenMap | None = None) -> AggregateMarket:
    """Synthetic aggregate market of s bounded segments with disjoint
    (tied-at-the-endpoints) active intervals, tick-range style."""
    rng = np.random.default_rng(seed)
    token_map = token_map or TokenMap((0, 1))
    grid = np.geomspace(0.1, 10.0, s + 1)
    segments = []
    for i in range(s):
        pa, pb = grid[i], grid[i + 1]
        liq = rng.uniform(100.0, 1000.0)
        q = rng.uniform(pa, pb)
        alpha = liq / math.sqrt(pb)
        beta = liq * math.sqrt(pa)
        r1 = liq / math.sqrt(q) - alpha
        r2 = liq * math.sqrt(q) - beta
        segments.append(
            BoundedProductSegment(
                np.array([max(r1, 0.0), max(r2, 0.0)]), alpha, beta, 1.0, token_map
            )
        )
    return AggregateMarket(segments, 1.0, token_map)
