"""Shared helpers: independent chain replay validation and instance generators."""

import random

from rechain.model import NetworkShape, ProportionalWeights, copy_scheme, make_demand
from rechain.state import SchedulerState


def replay_chain(shape, demand, scheme, chain, target):
    """Replay a chain on raw matrices, checking every step stays legal.

    Returns the final scheme.  Asserts: removals hit established connections,
    harvest removals hit redundant pairs, no add lands on a full link, the
    target pair nets exactly +1 and every other pair ends at or above demand,
    dropping only where it was redundant.
    """
    X = copy_scheme(scheme)
    n, m = shape.n, shape.m
    harvests = {(h.i, h.j, h.k) for h in chain.extra_removals}

    def pair_count(j, k):
        return sum(X[i][j][k] for i in range(n))

    for mod in chain.ordered_mods():
        i, j, k = mod.i, mod.j, mod.k
        if mod.kind == "remove":
            assert X[i][j][k] > 0, f"removing missing connection {mod}"
            if (i, j, k) in harvests or (i, k, j) in harvests:
                assert pair_count(j, k) > demand[j][k], f"harvest of non-redundant {mod}"
            X[i][j][k] -= 1
            X[i][k][j] -= 1
        else:
            assert sum(X[i][j]) < shape.capacity[i][j], f"add on full link {mod}"
            assert sum(X[i][k]) < shape.capacity[i][k], f"add on full link {mod}"
            X[i][j][k] += 1
            X[i][k][j] += 1

    tj, tk = target
    for j in range(m):
        for k in range(m):
            before = sum(scheme[i][j][k] for i in range(n))
            after = pair_count(j, k)
            if {j, k} == {tj, tk}:
                assert after == before + 1, "target pair must net exactly +1"
            elif after != before:
                assert after < before, "non-target pairs may only shrink"
                assert before > demand[j][k], "only redundant pairs may shrink"
                assert after >= demand[j][k], "pairs may not drop below demand"
    return X


def check_alternation(chain):
    """Consecutive chain pairs must share exactly one low switch."""
    for a, b in zip(chain.levels, chain.levels[1:]):
        shared = set(a.pair) & set(b.pair)
        assert len(shared) == 1, f"levels {a.pair} -> {b.pair} break alternation"


def full_load_weights(rng, max_n=4, max_m=8, max_w=2):
    """Random proportional weights whose shape can actually reach 100% load.

    Reaching full load needs every switch's slack coverable by the others:
    max_j cap_j <= sum of the other caps.
    """
    while True:
        wT = [rng.randint(1, max_w) for _ in range(rng.randint(1, max_n))]
        wL = [rng.randint(1, max_w) for _ in range(rng.randint(2, max_m))]
        w = ProportionalWeights(wT, wL)
        caps = [w.shape().low_switch_capacity(j) for j in range(len(wL))]
        if max(caps) <= sum(caps) - max(caps):
            return w


def saturated_proportional_state(rng, weights, seed=0):
    """A proportional network filled to exactly 100% load, demand = counts.

    Pairs are drawn uniformly at random, rejecting draws that would strand
    leftover slack on a single switch (max slack must stay coverable).
    """
    from rechain.search import SearchConfig, schedule_connection

    shape = weights.shape()
    st = SchedulerState(shape, seed=seed)
    cfg = SearchConfig(max_comp=None, max_depth=weights.depth_ceiling())
    slack = [shape.low_switch_capacity(j) for j in range(shape.m)]
    while sum(slack) > 0:
        cand = [
            (j, k)
            for j in range(shape.m)
            for k in range(j + 1, shape.m)
            if slack[j] > 0 and slack[k] > 0
        ]
        keep = []
        for j, k in cand:
            slack[j] -= 1
            slack[k] -= 1
            top = max(slack)
            if top <= sum(slack) - top:
                keep.append((j, k))
            slack[j] += 1
            slack[k] += 1
        assert keep, "realizable fill draw must exist"
        j, k = keep[rng.randrange(len(keep))]
        slack[j] -= 1
        slack[k] -= 1
        st.set_demand(j, k, st.demand[j][k] + 1)
        result = schedule_connection(st, j, k, cfg)
        assert result.chain is not None, "saturation fill must never fail"
    return st


def random_tiny_instance(rng, m=4, n=2, max_cap=2, fill=(0.6, 0.95), exact_bias=0.85):
    """A mostly-full tiny instance with demand close to the established counts."""
    C = [[rng.choice([1] * (max_cap - 1) + [max_cap]) for _ in range(m)] for _ in range(n)]
    shape = NetworkShape(m=m, n=n, capacity=C)
    st = SchedulerState(shape, seed=rng.randrange(10**6))
    pairs = [(j, k) for j in range(m) for k in range(j + 1, m)]
    target_fill = rng.uniform(*fill)
    total = shape.total_capacity()
    stall = 0
    while sum(sum(r) for r in st.count_lt) < target_fill * total and stall < 200:
        i = rng.randrange(n)
        j, k = pairs[rng.randrange(len(pairs))]
        if st.count_lt[j][i] < C[i][j] and st.count_lt[k][i] < C[i][k]:
            st.add_connection(i, j, k)
        else:
            stall += 1
    D = make_demand(m)
    for j in range(m):
        for k in range(j + 1, m):
            e = st.count_ll[j][k]
            D[j][k] = D[k][j] = e if rng.random() < exact_bias else max(e - 1, 0)
    return shape, D, st.scheme
