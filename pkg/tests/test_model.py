"""Core matrix operations against brute-force recomputation."""

import random

import pytest

from rechain.model import (
    AtomicModification,
    DimensionMismatch,
    NetworkShape,
    ProportionalWeights,
    apply_modification,
    capacities_from_weights,
    copy_scheme,
    demand_from_json,
    demand_to_json,
    edge_counts,
    make_demand,
    make_scheme,
    network_load,
    num_connections,
    num_rearrangements,
    satisfies_demand,
    scheme_from_json,
    scheme_to_json,
    shape_from_json,
    shape_to_json,
    validate_scheme,
)


def naive_edge_counts(X):
    m = len(X[0])
    E = [[0] * m for _ in range(m)]
    for i in range(len(X)):
        for j in range(m):
            for k in range(m):
                E[j][k] += X[i][j][k]
    return E


def naive_num_connections(D):
    total = 0
    for row in D:
        for v in row:
            total += v
    return total


def naive_num_rearrangements(X, Y):
    total = 0
    for i in range(len(X)):
        for j in range(len(X[0])):
            for k in range(len(X[0])):
                total += abs(X[i][j][k] - Y[i][j][k])
    return total


def random_scheme(rng, n, m, cap):
    X = make_scheme(n, m)
    for i in range(n):
        used = [0] * m
        for _ in range(3 * m):
            j, k = rng.sample(range(m), 2)
            if used[j] < cap and used[k] < cap:
                X[i][j][k] += 1
                X[i][k][j] += 1
                used[j] += 1
                used[k] += 1
    return X


class TestValidateScheme:
    def test_all_zero_scheme_is_valid(self):
        shape = NetworkShape(m=4, n=2, capacity=[[3] * 4, [1] * 4])
        assert validate_scheme(shape, make_scheme(2, 4)) == []

    def test_capacity_violation_reported_per_link(self):
        shape = NetworkShape(m=2, n=1, capacity=[[2, 2]])
        X = make_scheme(1, 2)
        X[0][0][1] = X[0][1][0] = 3
        bad = validate_scheme(shape, X)
        assert sorted((v.i, v.j) for v in bad) == [(0, 0), (0, 1)]
        assert all(v.kind == "capacity" for v in bad)

    def test_exactly_full_link_is_valid(self):
        shape = NetworkShape(m=2, n=1, capacity=[[2, 2]])
        X = make_scheme(1, 2)
        X[0][0][1] = X[0][1][0] = 2
        assert validate_scheme(shape, X) == []

    def test_symmetry_and_diagonal_violations(self):
        shape = NetworkShape(m=3, n=1, capacity=[[5, 5, 5]])
        X = make_scheme(1, 3)
        X[0][0][1] = 1
        X[0][2][2] = 1
        kinds = {v.kind for v in validate_scheme(shape, X)}
        assert "symmetry" in kinds and "diagonal" in kinds

    def test_dimension_mismatch_raises(self):
        shape = NetworkShape(m=3, n=2, capacity=[[1] * 3, [1] * 3])
        with pytest.raises(DimensionMismatch):
            validate_scheme(shape, make_scheme(1, 3))


class TestSatisfiesDemand:
    def test_zero_on_zero(self):
        assert satisfies_demand(make_scheme(1, 2), make_demand(2))

    def test_unmet_demand(self):
        D = make_demand(2)
        D[0][1] = D[1][0] = 1
        assert not satisfies_demand(make_scheme(1, 2), D)

    def test_over_provision_allowed(self):
        X = make_scheme(2, 2)
        X[0][0][1] = X[0][1][0] = 1
        X[1][0][1] = X[1][1][0] = 1
        D = make_demand(2)
        D[0][1] = D[1][0] = 1
        assert satisfies_demand(X, D)


class TestCounting:
    def test_edge_counts_simple(self):
        X = make_scheme(2, 2)
        X[0][0][1] = X[0][1][0] = 1
        X[1][0][1] = X[1][1][0] = 2
        E = edge_counts(X)
        assert E[0][1] == E[1][0] == 3

    def test_counts_match_naive_on_random_schemes(self):
        rng = random.Random(0)
        for _ in range(1000):
            n, m = rng.randint(1, 4), rng.randint(2, 8)
            X = random_scheme(rng, n, m, cap=3)
            Y = random_scheme(rng, n, m, cap=3)
            assert edge_counts(X) == naive_edge_counts(X)
            assert num_rearrangements(X, Y) == naive_num_rearrangements(X, Y)
            D = edge_counts(X)
            assert num_connections(D) == naive_num_connections(D)

    def test_single_modification_costs_two(self):
        rng = random.Random(1)
        for _ in range(50):
            X = random_scheme(rng, 2, 5, cap=2)
            Y = copy_scheme(X)
            j, k = rng.sample(range(5), 2)
            apply_modification(Y, AtomicModification("add", rng.randrange(2), j, k))
            assert num_rearrangements(X, Y) == 2

    def test_num_connections_counts_both_triangle_halves(self):
        D = make_demand(2)
        D[0][1] = D[1][0] = 3
        assert num_connections(D) == 6

    def test_rearrangements_from_empty_equal_num_connections(self):
        rng = random.Random(2)
        X = random_scheme(rng, 2, 5, cap=2)
        empty = make_scheme(2, 5)
        assert num_rearrangements(empty, X) == num_connections(edge_counts(X))

    def test_rearrangements_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            num_rearrangements(make_scheme(1, 3), make_scheme(2, 3))


class TestNetworkLoad:
    def test_zero_demand(self):
        assert network_load([[2, 2]], make_demand(2)) == 0.0

    def test_half_load(self):
        D = make_demand(2)
        D[0][1] = D[1][0] = 1
        assert network_load([[2, 2]], D) == 0.5

    def test_full_load(self):
        D = make_demand(2)
        D[0][1] = D[1][0] = 2
        assert network_load([[2, 2]], D) == 1.0

    def test_zero_capacity_rejected(self):
        with pytest.raises(ValueError):
            network_load([[0, 0]], make_demand(2))

    def test_valid_satisfying_scheme_keeps_load_at_most_one(self):
        rng = random.Random(3)
        for _ in range(100):
            n, m, cap = rng.randint(1, 3), rng.randint(2, 6), rng.randint(1, 3)
            shape = NetworkShape(m=m, n=n, capacity=[[cap] * m for _ in range(n)])
            X = random_scheme(rng, n, m, cap)
            assert validate_scheme(shape, X) == []
            D = edge_counts(X)
            assert satisfies_demand(X, D)
            assert network_load(shape.capacity, D) <= 1.0


class TestProportionalCapacities:
    def test_unit_weights(self):
        assert capacities_from_weights([1], [1, 1]) == [[2, 2]]

    def test_mixed_weights(self):
        assert capacities_from_weights([1, 2], [1, 3]) == [[2, 6], [4, 12]]

    def test_all_entries_even(self):
        rng = random.Random(4)
        for _ in range(20):
            wT = [rng.randint(1, 5) for _ in range(rng.randint(1, 4))]
            wL = [rng.randint(1, 5) for _ in range(rng.randint(2, 6))]
            C = capacities_from_weights(wT, wL)
            assert all(c % 2 == 0 for row in C for c in row)

    def test_weights_shape_roundtrip(self):
        w = ProportionalWeights(wT=[2, 1], wL=[1, 1, 3])
        shape = w.shape()
        assert shape.capacity == capacities_from_weights([2, 1], [1, 1, 3])
        assert w.depth_ceiling() == 4


class TestJsonForms:
    def test_roundtrips(self):
        rng = random.Random(5)
        shape = NetworkShape(m=3, n=2, capacity=[[1, 2, 3], [4, 5, 6]])
        assert shape_from_json(shape_to_json(shape)) == shape
        D = make_demand(3)
        D[0][2] = D[2][0] = 4
        assert demand_from_json(demand_to_json(D)) == D
        X = random_scheme(rng, 2, 3, cap=2)
        assert scheme_from_json(scheme_to_json(X)) == X

    def test_bad_dimensions_rejected(self):
        with pytest.raises(DimensionMismatch):
            demand_from_json({"m": 3, "demand": [[0, 0], [0, 0]]})


class TestShapeValidation:
    def test_minimum_sizes(self):
        with pytest.raises(ValueError):
            NetworkShape(m=1, n=1, capacity=[[1]])

    def test_size_cap(self):
        with pytest.raises(ValueError):
            NetworkShape(m=2000, n=1, capacity=[[0] * 2000])

    def test_negative_capacity(self):
        with pytest.raises(ValueError):
            NetworkShape(m=2, n=1, capacity=[[-1, 1]])
