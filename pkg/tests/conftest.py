"""Shared fixtures: the default grid, cached aggregates, default parameters."""

from __future__ import annotations

from functools import lru_cache

import pytest

from gridtransit import ModelParams, aggregate_demand, build_grid, generate_demand

SIDE = 10.0
CELL = 0.5


@lru_cache(maxsize=None)
def _od(pattern: str, total: float):
    return generate_demand(build_grid(SIDE, CELL), pattern, total)


@lru_cache(maxsize=None)
def _agg(pattern: str, total: float):
    od = _od(pattern, total)
    return aggregate_demand(od.grid, od)


@pytest.fixture(scope="session")
def grid():
    return build_grid(SIDE, CELL)


@pytest.fixture(scope="session")
def params():
    return ModelParams(mu=20.0)


@pytest.fixture(scope="session")
def od_of():
    """Callable (pattern, total) -> cached ODMatrix on the default grid."""
    return _od


@pytest.fixture(scope="session")
def agg_of():
    """Callable (pattern, total) -> cached DemandAggregates on the default grid."""
    return _agg
