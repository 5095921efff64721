"""Exhaustive oracles and their agreement with the production search."""

import random

import pytest

from rechain.model import NetworkShape, make_demand, make_scheme
from rechain.oracle import (
    OracleLimitExceeded,
    oracle_min_chain_length,
    oracle_min_rearrangements,
)
from rechain.search import SearchConfig, schedule_connection
from rechain.state import SchedulerState

from util import random_tiny_instance


def swap_instance():
    shape = NetworkShape(m=3, n=2, capacity=[[2, 2, 2], [2, 2, 2]])
    X = make_scheme(2, 3)
    X[0][1][2] = X[0][2][1] = 2
    X[1][0][1] = X[1][1][0] = 1
    X[1][0][2] = X[1][2][0] = 1
    D = make_demand(3)
    D[0][1] = D[1][0] = 1
    D[0][2] = D[2][0] = 1
    D[1][2] = D[2][1] = 2
    return shape, D, X


class TestMinChainLength:
    def test_empty_network_is_length_zero(self):
        shape = NetworkShape(m=3, n=2, capacity=[[1, 1, 1], [1, 1, 1]])
        assert oracle_min_chain_length(shape, make_demand(3), make_scheme(2, 3), 0, 1) == 0

    def test_swap_instance_is_length_one(self):
        shape, D, X = swap_instance()
        assert oracle_min_chain_length(shape, D, X, 0, 1) == 1

    def test_dead_endpoint_is_infeasible(self):
        shape = NetworkShape(m=3, n=1, capacity=[[1, 1, 1]])
        X = make_scheme(1, 3)
        X[0][1][2] = X[0][2][1] = 1
        D = make_demand(3)
        D[1][2] = D[2][1] = 1  # nothing redundant, L1's only link is full
        assert oracle_min_chain_length(shape, D, X, 0, 1) is None

    def test_instance_caps_enforced(self):
        big = NetworkShape(m=6, n=2, capacity=[[1] * 6, [1] * 6])
        with pytest.raises(OracleLimitExceeded):
            oracle_min_chain_length(big, make_demand(6), make_scheme(2, 6), 0, 1)

    def test_agrees_with_search_on_random_suite(self):
        rng = random.Random(61)
        lengths = {}
        for trial in range(250):
            shape, D, X = random_tiny_instance(rng)
            st = SchedulerState(shape, demand=D, scheme=X, seed=trial)
            j0, k0 = rng.sample(range(shape.m), 2)
            st.set_demand(j0, k0, D[j0][k0] + 1)
            expected = oracle_min_chain_length(shape, st.demand, X, j0, k0)
            result = schedule_connection(st, j0, k0, SearchConfig(max_comp=None))
            got = result.chain.length if result.chain else None
            assert got == expected, (trial, got, expected)
            lengths[got] = lengths.get(got, 0) + 1
        assert any(l is not None and l >= 1 for l in lengths)


class TestMinRearrangements:
    def test_unchanged_demand_costs_nothing(self):
        shape, D, X = swap_instance()
        assert oracle_min_rearrangements(shape, X, D) == 0

    def test_direct_extra_connection_costs_two(self):
        shape = NetworkShape(m=3, n=2, capacity=[[2, 2, 2], [2, 2, 2]])
        X = make_scheme(2, 3)
        X[0][0][1] = X[0][1][0] = 1
        D = make_demand(3)
        D[0][1] = D[1][0] = 2
        assert oracle_min_rearrangements(shape, X, D) == 2

    def test_swap_costs_six(self):
        shape, D, X = swap_instance()
        newD = [row[:] for row in D]
        newD[0][1] = newD[1][0] = 2
        assert oracle_min_rearrangements(shape, X, newD) == 6

    def test_infeasible_demand_gives_none(self):
        shape = NetworkShape(m=2, n=1, capacity=[[1, 1]])
        D = make_demand(2)
        D[0][1] = D[1][0] = 2
        assert oracle_min_rearrangements(shape, make_scheme(1, 2), D) is None

    def test_redundant_connections_are_free_to_keep(self):
        shape = NetworkShape(m=3, n=1, capacity=[[2, 2, 2]])
        X = make_scheme(1, 3)
        X[0][0][1] = X[0][1][0] = 1
        assert oracle_min_rearrangements(shape, X, make_demand(3)) == 0
